"""Discrete-time simulation of the planar reinforced walk.

A path is reproducible from (law, n, seed, path_index): the walk owns the
(seed, WALK, path_index) stream, and an optional Yule clock sequence used to
embed the walk in continuous time owns the (seed, YULE, path_index) stream.
Per step the draw order is fixed: parent index first, then rotation angle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spiral_erw import rng
from spiral_erw._kernels import chain_angles, chain_depths, lattice_directions
from spiral_erw.angle import AngleLaw

_UNIT_STEPS = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=np.int64)


@dataclass(frozen=True)
class ErwPath:
    """A realized walk: unit-modulus steps and their prefix sums."""

    steps: np.ndarray
    positions: np.ndarray
    law_used: AngleLaw
    seed: int
    path_index: int

    @property
    def n(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class LatticePath:
    """A realized quarter-turn walk on the integer lattice."""

    positions: np.ndarray  # shape (n, 2), int64
    params: tuple[float, float, float, float]
    seed: int
    path_index: int

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class QuadraticVariationTrace:
    bracket_complex: np.ndarray
    bracket_modulus: np.ndarray


def _step_angles(law: AngleLaw, n: int, seed: int, path_index: int) -> np.ndarray:
    gen = rng.stream(seed, rng.WALK, path_index)
    u = gen.random(2 * (n - 1)) if n > 1 else np.empty(0)
    ang = np.empty(n)
    kind, theta0, atoms, cum, lo, width = law.kernel_params()
    chain_angles(u, n, 2, 0, 1, kind, theta0, atoms, cum, lo, width, ang)
    return ang


def simulate_path(law: AngleLaw, n: int, seed: int, path_index: int = 0) -> ErwPath:
    """Simulate n steps: step 1 is +1, and step m repeats a uniformly chosen
    earlier step rotated by an independent law draw."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ang = _step_angles(law, n, seed, path_index)
    steps = np.exp(1j * ang)
    steps[0] = 1.0  # exact, not exp(i*0.0)
    return ErwPath(
        steps=steps,
        positions=np.cumsum(steps),
        law_used=law,
        seed=seed,
        path_index=path_index,
    )


def step_powers(path: ErwPath, k: int) -> np.ndarray:
    """S_m^(k) = sum of k-th powers of the first m steps, m = 1..n."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return path.positions
    return np.cumsum(path.steps**k)


def lattice_simulate(
    params: tuple[float, float, float, float], n: int, seed: int, path_index: int = 0
) -> LatticePath:
    """Integer-lattice walk with (forward, left, backward, right)
    probabilities.  Shares the draw layout of the quarter-turn complex walk,
    so equal (seed, path_index) couples the two path by path."""
    p, q, r, s = params
    if min(p, q, r, s) < 0 or abs(p + q + r + s - 1.0) > 1e-12:
        raise ValueError("lattice parameters must be nonnegative and sum to 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rng.stream(seed, rng.WALK, path_index)
    u = gen.random(2 * (n - 1)) if n > 1 else np.empty(0)
    cum = np.cumsum(np.array([p, q, r, s]))
    cum[-1] = 1.0
    dirs = np.empty(n, dtype=np.int64)
    lattice_directions(u, n, cum, dirs)
    positions = np.cumsum(_UNIT_STEPS[dirs], axis=0)
    return LatticePath(positions=positions, params=(p, q, r, s), seed=seed, path_index=path_index)


def quadratic_variations(
    path: ErwPath, phi1: complex, phi2: complex | None = None
) -> QuadraticVariationTrace:
    """Predictable quadratic variations of the normalized martingale
    M_m = S_m / a_m along the realized path.

    bracket_modulus[m-1] = sum_{k<m} (1 - |phi1 S_k / k|^2) / |a_{k+1}|^2,
    bracket_complex[m-1] = sum_{k<m} (phi2 S_k^(2)/k - (phi1 S_k/k)^2) / a_{k+1}^2.
    """
    from spiral_erw.oracle import normalizer_a

    n = path.n
    if n < 2:
        raise ValueError("need a path with n >= 2")
    if phi2 is None:
        phi2 = path.law_used.phi2
    a = normalizer_a(phi1, n, check=False)
    k = np.arange(1, n, dtype=np.float64)
    s_over_k = path.positions[:-1] / k
    s2 = step_powers(path, 2)[:-1]
    mod_terms = (1.0 - np.abs(phi1 * s_over_k) ** 2) / np.abs(a[1:]) ** 2
    cpx_terms = (phi2 * s2 / k - (phi1 * s_over_k) ** 2) / a[1:] ** 2
    bracket_modulus = np.concatenate([[0.0], np.cumsum(mod_terms)])
    bracket_complex = np.concatenate([[0.0 + 0.0j], np.cumsum(cpx_terms)])
    return QuadraticVariationTrace(bracket_complex=bracket_complex, bracket_modulus=bracket_modulus)


# ---------------------------------------------------------------------------
# batch simulation for Monte Carlo campaigns
# ---------------------------------------------------------------------------


def chain_cumtrig(
    law: AngleLaw,
    u: np.ndarray,
    n: int,
    stride: int,
    off_i: int,
    off_t: int,
    ks: tuple[int, ...] = (1,),
) -> dict:
    """Prefix sums of cos(k * angle) and sin(k * angle) along a chain, for
    each power k in ks; returns {k: (cos_cumsum, sin_cumsum)}.

    Constant laws take a fast path: the angle is theta times the generation
    depth, so an int32 depth chain plus a small trig table replaces the
    per-step transcendentals.
    """
    out = {}
    if law.kind == "constant":
        depths = np.empty(n, dtype=np.int32)
        chain_depths(u, n, stride, off_i, depths)
        base = np.arange(int(depths.max()) + 1, dtype=np.float64)
        for k in ks:
            grid = k * law.theta * base
            out[k] = (np.cumsum(np.cos(grid)[depths]), np.cumsum(np.sin(grid)[depths]))
        return out
    ang = np.empty(n)
    kind, theta0, atoms, cum, lo, width = law.kernel_params()
    chain_angles(u, n, stride, off_i, off_t, kind, theta0, atoms, cum, lo, width, ang)
    for k in ks:
        ka = ang if k == 1 else k * ang
        out[k] = (np.cumsum(np.cos(ka)), np.cumsum(np.sin(ka)))
    return out


def yule_times(n: int, seed: int, path_index: int = 0) -> np.ndarray:
    """Birth times tau_1 = 0 < tau_2 < ... < tau_n of a unit-rate pure-birth
    process: tau_{m+1} - tau_m ~ Exp(m), independent of the walk stream."""
    gen = rng.stream(seed, rng.YULE, path_index)
    if n == 1:
        return np.zeros(1)
    e = rng.exponential_from_uniform(gen.random(n - 1)) / np.arange(1, n)
    return np.concatenate([[0.0], np.cumsum(e)])


def simulate_endpoints(
    law: AngleLaw,
    n: int,
    seed: int,
    path_indices,
    snapshot_ns: tuple[int, ...] | None = None,
    with_power2: bool = False,
    with_yule: bool = False,
) -> dict:
    """Endpoint statistics for many independent paths.

    Returns a dict with 'S' mapping each snapshot horizon to a complex array
    over paths, and optionally 'S2' (endpoint squared-step sums) and 'tau'
    (Yule birth times at the snapshot horizons).  Each path is a pure
    function of (seed, path_index), so batches with disjoint index ranges
    can be merged freely.
    """
    path_indices = np.asarray(path_indices, dtype=np.int64)
    snaps = tuple(sorted(set(snapshot_ns or (n,))))
    if snaps[-1] > n:
        raise ValueError("snapshot beyond horizon")
    m = len(path_indices)
    out: dict = {"S": {ns: np.empty(m, dtype=np.complex128) for ns in snaps}}
    if with_power2:
        out["S2"] = np.empty(m, dtype=np.complex128)
    if with_yule:
        out["tau"] = {ns: np.empty(m) for ns in snaps}
    ks = (1, 2) if with_power2 else (1,)
    for row, idx in enumerate(path_indices):
        gen = rng.stream(seed, rng.WALK, int(idx))
        u = gen.random(2 * (n - 1)) if n > 1 else np.empty(0)
        trig = chain_cumtrig(law, u, n, 2, 0, 1, ks)
        cs, sn = trig[1]
        for ns in snaps:
            out["S"][ns][row] = complex(cs[ns - 1], sn[ns - 1])
        if with_power2:
            cs2, sn2 = trig[2]
            out["S2"][row] = complex(cs2[-1], sn2[-1])
        if with_yule:
            tau = yule_times(n, seed, int(idx))
            for ns in snaps:
                out["tau"][ns][row] = tau[ns - 1]
    return out
