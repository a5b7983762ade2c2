"""Continuous-time branching construction of the walk.

Particles live on the unit circle.  Each gives birth at unit rate, children
carrying the parent phase rotated by an independent law draw.  With m
particles alive the next birth comes after Exp(m) (superposition of unit-rate
clocks), the parent is uniform among the alive, so the particle count is a
Yule process and the phase sum read at birth times is the reinforced walk.
The genealogy itself is never materialized: the jump chain carries the same
distribution in O(n).

Draw layout per birth within the (seed, BRANCHING, path_index) stream:
slot 3j is the clock, 3j+1 the parent choice, 3j+2 the rotation angle, so a
run is a pure function of (law, seed, path_index) and extending its horizon
never perturbs the prefix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from spiral_erw import rng
from spiral_erw._kernels import chain_angles
from spiral_erw.angle import AngleLaw, classify_regime
from spiral_erw.walk import chain_cumtrig

#: Smallest particle horizon at which limit estimation is meaningful.
MIN_LIMIT_HORIZON = 1 << 10


@dataclass(frozen=True)
class BranchingRun:
    """A realized jump chain: birth times and phases ordered by birth."""

    birth_times: np.ndarray
    phases: np.ndarray
    law_used: AngleLaw
    seed: int
    path_index: int = 0

    @property
    def n(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class LimitEstimates:
    """Estimates of the martingale limit and the Yule population limit."""

    w_hat: complex
    e_hat: float
    horizon_t: float
    horizon_n: int


@dataclass(frozen=True)
class Residual:
    value: complex
    t: float


def _angles_and_gaps(law: AngleLaw, u: np.ndarray, n: int):
    ang = np.empty(n)
    kind, theta0, atoms, cum, lo, width = law.kernel_params()
    chain_angles(u, n, 3, 1, 2, kind, theta0, atoms, cum, lo, width, ang)
    gaps = rng.exponential_from_uniform(u[0 :: 3][: n - 1]) / np.arange(1, n)
    return ang, gaps


def simulate_branching(law: AngleLaw, n_max: int, seed: int, path_index: int = 0) -> BranchingRun:
    """Run the jump chain until n_max particles are born."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max == 1:
        return BranchingRun(
            birth_times=np.zeros(1),
            phases=np.ones(1, dtype=np.complex128),
            law_used=law,
            seed=seed,
            path_index=path_index,
        )
    gen = rng.stream(seed, rng.BRANCHING, path_index)
    u = gen.random(3 * (n_max - 1))
    ang, gaps = _angles_and_gaps(law, u, n_max)
    return BranchingRun(
        birth_times=np.concatenate([[0.0], np.cumsum(gaps)]),
        phases=np.exp(1j * ang),
        law_used=law,
        seed=seed,
        path_index=path_index,
    )


def simulate_to_time(
    law: AngleLaw, t_max: float, seed: int, path_index: int = 0, n0: int = 64
) -> BranchingRun:
    """Run the jump chain until the first birth after t_max, growing the
    horizon geometrically.  The uniform block is extended in place, so the
    result is a prefix-exact extension of any shorter run of the same
    (seed, path_index)."""
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    gen = rng.stream(seed, rng.BRANCHING, path_index)
    n_alloc = max(2, n0)
    u = gen.random(3 * (n_alloc - 1))
    while True:
        gaps = rng.exponential_from_uniform(u[0::3]) / np.arange(1, n_alloc)
        tau = np.concatenate([[0.0], np.cumsum(gaps)])
        if tau[-1] > t_max:
            break
        u = np.concatenate([u, gen.random(3 * n_alloc)])
        n_alloc *= 2
    # keep everything born by t_max plus the first later birth
    n_keep = int(np.searchsorted(tau, t_max, side="right")) + 1
    ang = np.empty(n_keep)
    kind, theta0, atoms, cum, lo, width = law.kernel_params()
    chain_angles(u, n_keep, 3, 1, 2, kind, theta0, atoms, cum, lo, width, ang)
    return BranchingRun(
        birth_times=tau[:n_keep],
        phases=np.exp(1j * ang),
        law_used=law,
        seed=seed,
        path_index=path_index,
    )


def population_at(run: BranchingRun, t: float) -> int:
    """N_t, the number of particles born at or before t."""
    _check_horizon(run, t)
    return int(np.searchsorted(run.birth_times, t, side="right"))


def _check_horizon(run: BranchingRun, t: float) -> None:
    if t < 0:
        raise ValueError("t must be >= 0")
    if t > run.birth_times[-1]:
        raise ValueError(
            f"t = {t} is beyond the run horizon {run.birth_times[-1]}; "
            "the population at t is not fully known"
        )


def additive_functional(run: BranchingRun, k: int, t: float) -> complex:
    """Z_k(t): sum of k-th powers of the phases alive at time t."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_horizon(run, t)
    m = np.searchsorted(run.birth_times, t, side="right")
    if k == 1:
        return complex(np.sum(run.phases[:m]))
    return complex(np.sum(run.phases[:m] ** k))


def embedded_walk(run: BranchingRun, n: int) -> complex:
    """Z_1(tau_n), the phase sum at the n-th birth; as a process in n this
    has exactly the law of the reinforced walk's position S_n."""
    if not 1 <= n <= run.n:
        raise ValueError(f"n must be in 1..{run.n}")
    return complex(np.sum(run.phases[:n]))


def estimate_limits(run: BranchingRun, phi1: complex | None = None) -> LimitEstimates:
    """(w_hat, e_hat) read at the run's final birth time.

    w_hat = e^{-phi1 tau_n} Z_1(tau_n) estimates the martingale limit and is
    exactly mean-1 at every horizon; e_hat = n e^{-tau_n} estimates the
    Exp(1) population limit.  Only meaningful in the superdiffusive regime,
    where the martingale converges in L^2.
    """
    regime = classify_regime(run.law_used)
    if regime.regime != "superdiffusive":
        raise ValueError(
            f"limit estimation needs the superdiffusive regime, got {regime.regime}"
        )
    if run.n < MIN_LIMIT_HORIZON:
        raise ValueError(f"run horizon {run.n} < {MIN_LIMIT_HORIZON}")
    if phi1 is None:
        phi1 = run.law_used.phi1
    tau_n = float(run.birth_times[-1])
    z1 = complex(np.sum(run.phases))
    return LimitEstimates(
        w_hat=cmath.exp(-phi1 * tau_n) * z1,
        e_hat=run.n * math.exp(-tau_n),
        horizon_t=tau_n,
        horizon_n=run.n,
    )


def residual(run: BranchingRun, t: float, w: complex, phi1: complex) -> Residual:
    """R_t = e^{-t/2} (Z_1(t) - e^{phi1 t} w)."""
    z1 = additive_functional(run, 1, t)
    return Residual(value=cmath.exp(-t / 2.0) * (z1 - cmath.exp(phi1 * t) * w), t=t)


# ---------------------------------------------------------------------------
# batch helpers for Monte Carlo campaigns
# ---------------------------------------------------------------------------


def branching_endpoints(law: AngleLaw, n: int, seed: int, path_indices) -> np.ndarray:
    """Z_1(tau_n) over many independent runs, without building run objects."""
    path_indices = np.asarray(path_indices, dtype=np.int64)
    out = np.empty(len(path_indices), dtype=np.complex128)
    for row, idx in enumerate(path_indices):
        gen = rng.stream(seed, rng.BRANCHING, int(idx))
        u = gen.random(3 * (n - 1)) if n > 1 else np.empty(0)
        cs, sn = chain_cumtrig(law, u, n, 3, 1, 2)[1]
        out[row] = complex(cs[-1], sn[-1])
    return out


def residual_statistics(
    law: AngleLaw,
    t: float,
    duration: float,
    seed: int,
    path_indices,
    n0: int | None = None,
) -> dict:
    """Per-run residuals of the phase-sum martingale at time t against the
    limit estimated at time t + duration of the same run.

    Estimating W over a fixed extra duration d deflates the residual's
    second moment by exactly f = 1 - e^{-(2 Re(phi1) - 1) d} (martingale
    orthogonality of increments); the factor is returned so callers can
    quote bias-corrected estimates.  Returns arrays 'r' (residual values),
    'n_t' (population at t) and the scalar 'deflation'.
    """
    phi1 = law.phi1
    if phi1.real <= 0.5:
        raise ValueError("residual statistics need the superdiffusive regime")
    if duration <= 0:
        raise ValueError("duration must be > 0")
    t_end = t + duration
    if n0 is None:
        n0 = max(64, int(math.exp(t_end)))
    path_indices = np.asarray(path_indices, dtype=np.int64)
    m = len(path_indices)
    r = np.empty(m, dtype=np.complex128)
    n_t = np.empty(m, dtype=np.int64)
    growth_t = cmath.exp(phi1 * t)
    shrink_end = cmath.exp(-phi1 * t_end)
    damp = math.exp(-t / 2.0)
    inv_rate0 = 1.0 / np.arange(1.0, n0)
    for row, idx in enumerate(path_indices):
        gen = rng.stream(seed, rng.BRANCHING, int(idx))
        n_alloc = n0
        u = gen.random(3 * (n_alloc - 1))
        tau = np.concatenate(
            [[0.0], np.cumsum(rng.exponential_from_uniform(u[0::3]) * inv_rate0)]
        )
        while tau[-1] <= t_end:
            # extend by one doubling, touching only the new block
            block = gen.random(3 * n_alloc)
            u = np.concatenate([u, block])
            gaps = rng.exponential_from_uniform(block[0::3]) / np.arange(
                n_alloc, 2 * n_alloc
            )
            tau = np.concatenate([tau, tau[-1] + np.cumsum(gaps)])
            n_alloc *= 2
        n_end = int(np.searchsorted(tau, t_end, side="right"))
        cs, sn = chain_cumtrig(law, u, n_end, 3, 1, 2)[1]
        k = int(np.searchsorted(tau, t, side="right"))
        z1_t = complex(cs[k - 1], sn[k - 1])
        w_hat = shrink_end * complex(cs[n_end - 1], sn[n_end - 1])
        r[row] = damp * (z1_t - growth_t * w_hat)
        n_t[row] = k
    deflation = 1.0 - math.exp(-(2.0 * phi1.real - 1.0) * duration)
    return {"r": r, "n_t": n_t, "deflation": deflation}
