"""Exact, simulation-free computation of every closed-form quantity of the
walk: product normalizers and their Gamma-ratio form, second-moment
recursions, brute-force enumeration of tiny walks, moments of the
superdiffusive limit variable, and the continuous-time branching moments.

Conventions.  a_n(phi) = prod_{j=1}^{n-1} (1 + phi/j) is the normalizer that
turns the step-power sum into a martingale; it equals
Gamma(n + phi) / (Gamma(n) Gamma(1 + phi)) and behaves like
n^phi / Gamma(1 + phi) for large n.  u_n denotes the *unnormalized* second
moment E|S_n|^2, q_n the complex second moment E(S_n^2), and
v_n = sum_{k<n} 1/|a_{k+1}|^2.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit
from scipy.special import loggamma

from spiral_erw.angle import AngleLaw, classify_regime

#: Matches the regime/critical-branch tolerance used by the angle module.
CRITICAL_TOL = 1e-12

#: Required relative agreement between the running product and the
#: Gamma-ratio evaluation of the normalizer.
GAMMA_CHECK_RTOL = 1e-8


# ---------------------------------------------------------------------------
# normalizers
# ---------------------------------------------------------------------------


def _reject_bad_phi(phi: complex) -> None:
    # the product hits an exact zero factor at j = -phi
    if abs(phi.imag) < 1e-15 and phi.real <= -1.0 + 1e-15:
        if abs(phi.real - round(phi.real)) < 1e-15:
            raise ValueError(f"normalizer undefined at phi = {phi!r}")


def gamma_ratio(phi: complex, n) -> np.ndarray:
    """Gamma(n+phi) / (Gamma(n) Gamma(1+phi)), vectorized over n >= 1."""
    n = np.asarray(n, dtype=np.float64)
    z = complex(phi)
    return np.exp(loggamma(n + z) - loggamma(n) - loggamma(1.0 + z))


def limit_constant(phi: complex) -> complex:
    """C(phi) = 1/Gamma(1+phi), the constant in a_n ~ C(phi) n^phi."""
    return np.exp(-loggamma(complex(phi) + 1.0))


def normalizer_a(phi: complex, n: int, check: bool = True) -> np.ndarray:
    """a_1..a_n as a running product, cross-checked against the Gamma ratio.

    With check=True the last entry must agree with the Gamma-ratio form to
    GAMMA_CHECK_RTOL relative error; disagreement raises, since it means the
    product lost accuracy.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = complex(phi)
    if check:
        # The running product stays meaningful at phi = -1, -2, ... (it hits a
        # zero factor and is zero from there on); only the Gamma-ratio
        # cross-check diverges there, so reject solely on the checked path.
        _reject_bad_phi(phi)
    a = np.empty(n, dtype=np.complex128)
    a[0] = 1.0
    if n > 1:
        j = np.arange(1, n, dtype=np.float64)
        np.cumprod(1.0 + phi / j, out=a[1:])
    if check and n > 1:
        ref = gamma_ratio(phi, n)
        if abs(a[-1] - ref) > GAMMA_CHECK_RTOL * abs(ref):
            raise ArithmeticError(
                f"normalizer product disagrees with Gamma ratio at n={n}: "
                f"{a[-1]!r} vs {ref!r}"
            )
    return a


def v_sequence(a: np.ndarray) -> np.ndarray:
    """v_m = sum_{k=1}^{m-1} 1/|a_{k+1}|^2 for m = 1..n; v_1 = 0."""
    v = np.zeros(len(a))
    if len(a) > 1:
        v[1:] = np.cumsum(1.0 / np.abs(a[1:]) ** 2)
    return v


# ---------------------------------------------------------------------------
# second-moment recursions
# ---------------------------------------------------------------------------


@njit(cache=True)
def _abs_square_loop(x, n):
    u = np.empty(n)
    u[0] = 1.0
    for m in range(1, n):
        u[m] = u[m - 1] * (1.0 + x / m) + 1.0
    return u


def abs_square_recursion(phi: complex, n: int) -> np.ndarray:
    """E|S_m|^2 for m = 1..n of the walk driven by Fourier coefficient phi,
    from u_{m+1} = u_m (1 + 2 Re(phi)/m) + 1 with u_1 = 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _abs_square_loop(2.0 * complex(phi).real, n)


@njit(cache=True)
def _square_loop(phi1, phi2, a2, n):
    q = np.empty(n, dtype=np.complex128)
    q[0] = 1.0
    for m in range(1, n):
        q[m] = q[m - 1] * (1.0 + 2.0 * phi1 / m) + (phi2 / m) * a2[m - 1]
    return q


def square_recursion(phi1: complex, phi2: complex, n: int) -> np.ndarray:
    """E(S_m^2) for m = 1..n.  The conditional step expectation contributes
    2 phi1 E(S_m^2)/m plus phi2 E(S_m^(2))/m, and E(S_m^(2)) = a_m(phi2) by
    the martingale property of the squared-step sum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a2 = normalizer_a(phi2, n, check=False)
    return _square_loop(complex(phi1), complex(phi2), a2, n)


@dataclass(frozen=True)
class MomentTable:
    """Exact moment sequences for one law at horizon n (1-based index m)."""

    phi: complex
    a_seq: np.ndarray  # a_m(phi1)
    u_seq: np.ndarray  # E|S_m|^2
    q_seq: np.ndarray  # E(S_m^2)
    v_seq: np.ndarray  # sum_{k<m} 1/|a_{k+1}|^2


def build_moment_table(law: AngleLaw, n: int) -> MomentTable:
    phi1 = law.phi1
    a = normalizer_a(phi1, n, check=n <= 10**6)
    return MomentTable(
        phi=phi1,
        a_seq=a,
        u_seq=abs_square_recursion(phi1, n),
        q_seq=square_recursion(phi1, law.phi2, n),
        v_seq=v_sequence(a),
    )


def endpoint_component_moments(law: AngleLaw, n: int):
    """Exact mean, per-component variances and cross-covariance of S_n.

    Var(Re S) = (E|S|^2 + Re E(S^2))/2 - (Re ES)^2 and its imaginary-part
    and cross analogues; used by the verifiers to quote finite-n targets.
    """
    phi1, phi2 = law.phi1, law.phi2
    mean = complex(normalizer_a(phi1, n, check=False)[-1])
    u = float(abs_square_recursion(phi1, n)[-1])
    q = complex(square_recursion(phi1, phi2, n)[-1])
    var_re = (u + q.real) / 2.0 - mean.real**2
    var_im = (u - q.real) / 2.0 - mean.imag**2
    cov = q.imag / 2.0 - mean.real * mean.imag
    return mean, var_re, var_im, cov


# ---------------------------------------------------------------------------
# brute-force enumeration
# ---------------------------------------------------------------------------

MAX_ENUMERATION_N = 8
MAX_OUTCOMES = 2_000_000


def _rational_probs(law: AngleLaw) -> list[Fraction]:
    out = []
    for p in law.probs:
        fr = Fraction(p).limit_denominator(10**9)
        if abs(float(fr) - p) > 1e-12:
            raise ValueError(f"atom probability {p!r} is not rational")
        out.append(fr)
    return out


def enumerate_outcomes(law: AngleLaw, n: int):
    """All step tuples of the walk at horizon n with exact probabilities.

    Yields (steps, prob) with steps a tuple of n unit-modulus complex numbers
    and prob an exact Fraction; probabilities sum to 1 exactly.
    """
    if law.kind == "constant":
        law = AngleLaw.discrete([(law.theta, 1.0)])
    if law.kind != "discrete":
        raise ValueError("exact enumeration needs a discrete or constant law")
    if n < 1 or n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration horizon must be in 1..{MAX_ENUMERATION_N}")
    probs = _rational_probs(law)
    rot = [cmath.exp(1j * a) for a in law.atoms]
    count = math.factorial(n - 1) * len(rot) ** (n - 1)
    if count > MAX_OUTCOMES:
        raise ValueError(f"{count} outcomes exceed the enumeration budget")

    def rec(steps, prob):
        m = len(steps)
        if m == n:
            yield tuple(steps), prob
            return
        base = Fraction(1, m)
        for par in range(m):
            for r, pr in zip(rot, probs):
                if pr == 0:
                    continue
                steps.append(steps[par] * r)
                yield from rec(steps, prob * base * pr)
                steps.pop()

    yield from rec([1.0 + 0.0j], Fraction(1))


@dataclass(frozen=True)
class ExactDistribution:
    """Exact distribution of an endpoint statistic of a tiny walk."""

    support: tuple[tuple[complex, Fraction], ...]
    n: int

    def prob_of(self, value: complex, tol: float = 1e-9) -> Fraction:
        total = Fraction(0)
        for v, p in self.support:
            if abs(v - value) <= tol:
                total += p
        return total

    def mean(self) -> complex:
        return sum(v * float(p) for v, p in self.support)

    def abs_second_moment(self) -> float:
        return math.fsum(abs(v) ** 2 * float(p) for v, p in self.support)

    def second_moment(self) -> complex:
        return sum(v * v * float(p) for v, p in self.support)


def enumerate_exact(law: AngleLaw, n: int, power: int = 1) -> ExactDistribution:
    """Exact distribution of S_n (power=1) or of the step-power sum S_n^(k).

    The walk's future only depends on the multiset of current step values
    (the parent is chosen uniformly, so identically-valued steps are
    interchangeable), which lets the enumeration aggregate states level by
    level instead of walking every genealogy.  Support points within 1e-12
    are merged; their probabilities stay exact rationals.
    """
    if law.kind == "constant":
        law = AngleLaw.discrete([(law.theta, 1.0)])
    if law.kind != "discrete":
        raise ValueError("exact enumeration needs a discrete or constant law")
    if n < 1 or n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration horizon must be in 1..{MAX_ENUMERATION_N}")
    probs = _rational_probs(law)
    rot = [cmath.exp(1j * a) for a in law.atoms]

    def step_key(z: complex) -> tuple[float, float]:
        return (round(z.real, 12), round(z.imag, 12))

    root = step_key(1.0 + 0.0j)
    values: dict[tuple[float, float], complex] = {root: 1.0 + 0.0j}
    states: dict[tuple, Fraction] = {(root,): Fraction(1)}
    for m in range(1, n):
        base = Fraction(1, m)
        nxt: dict[tuple, Fraction] = {}
        for state, prob in states.items():
            for key, mult in Counter(state).items():
                parent = values[key]
                weight = prob * base * mult
                for r, pr in zip(rot, probs):
                    if pr == 0:
                        continue
                    child = parent * r
                    child_key = step_key(child)
                    values.setdefault(child_key, child)
                    new_state = tuple(sorted(state + (child_key,)))
                    nxt[new_state] = nxt.get(new_state, Fraction(0)) + weight * pr
        states = nxt

    grouped: dict[tuple[float, float], tuple[complex, Fraction]] = {}
    for state, prob in states.items():
        val = sum(values[k] ** power for k in state)
        key = (round(val.real, 12), round(val.imag, 12))
        if key in grouped:
            v0, p0 = grouped[key]
            grouped[key] = (v0, p0 + prob)
        else:
            grouped[key] = (val, prob)
    support = tuple(sorted(grouped.values(), key=lambda vp: (vp[0].real, vp[0].imag)))
    assert sum(p for _, p in support) == 1
    return ExactDistribution(support=support, n=n)


# ---------------------------------------------------------------------------
# limit variable of the superdiffusive regime
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WMoments:
    """First two moments of the superdiffusive limit variable, plus the
    covariance matrix of its real and imaginary parts."""

    mean: complex
    second: complex
    abs_second: float
    cov: np.ndarray  # [[sigma2, rho], [rho, tau2]]


def w_moments(law: AngleLaw) -> WMoments:
    regime = classify_regime(law)
    if regime.regime != "superdiffusive":
        raise ValueError("limit-variable moments require the superdiffusive regime")
    phi1, phi2 = law.phi1, law.phi2
    denom = 2.0 * phi1 - phi2
    if abs(denom) <= CRITICAL_TOL:
        raise ValueError("2*phi1 == phi2: second moment of the limit is undefined here")
    x = phi1.real
    second = 2.0 * phi1 / denom
    abs_second = 2.0 * x / (2.0 * x - 1.0)
    ratio2 = phi2 / denom
    sigma2 = 0.5 * (1.0 / (2.0 * x - 1.0) + ratio2.real)
    tau2 = 0.5 * (1.0 / (2.0 * x - 1.0) - ratio2.real)
    rho = (phi1 / denom).imag
    cov = np.array([[sigma2, rho], [rho, tau2]])
    return WMoments(mean=1.0 + 0.0j, second=second, abs_second=abs_second, cov=cov)


# ---------------------------------------------------------------------------
# continuous-time branching moments
# ---------------------------------------------------------------------------


def continuous_moments(law: AngleLaw, k: int, t: float):
    """(E Z_k(t), E|Z_k(t)|^2, E Z_k(t)^2) for the unit-rate branching
    process with rotated offspring.

    E Z_k(t) = exp(t phi_k); the second moments solve first-order linear
    ODEs whose resonant cases (Re phi_k = 1/2, resp. 2 phi_k = phi_2k) get
    the degenerate closed forms.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    phik = law.fourier(k)
    phi2k = law.fourier(2 * k)
    first = cmath.exp(t * phik)
    x = phik.real
    if abs(x - 0.5) <= CRITICAL_TOL:
        abs_second = (t + 1.0) * math.exp(t)
    else:
        abs_second = (2.0 * x * math.exp(2.0 * x * t) - math.exp(t)) / (2.0 * x - 1.0)
    denom = 2.0 * phik - phi2k
    if abs(denom) <= CRITICAL_TOL:
        second = (1.0 + 2.0 * phik * t) * cmath.exp(2.0 * phik * t)
    else:
        second = (2.0 * phik * cmath.exp(2.0 * phik * t) - phi2k * cmath.exp(phi2k * t)) / denom
    return first, abs_second, second


# ---------------------------------------------------------------------------
# finite-horizon targets for the Poissonized estimators
# ---------------------------------------------------------------------------


def _ratio_product(z: complex, n: int, N: int) -> complex:
    """prod_{m=n}^{N-1} m/(m+z) via the Gamma-ratio form."""
    if N < n:
        raise ValueError("need N >= n")
    z = complex(z)
    val = np.exp(loggamma(float(N)) - loggamma(float(n)) + loggamma(n + z) - loggamma(N + z))
    return complex(val)


def poissonized_what_moments(phi1: complex, N: int):
    """Exact (mean, E|.|^2) of the limit estimator S_N exp(-phi1 tau_N) of a
    Yule-timed walk.  The exponential clocks integrate the normalizer away:
    E exp(-phi1 tau_N) = 1/a_N, so the mean is exactly 1."""
    u_N = float(abs_square_recursion(phi1, N)[-1])
    shrink = _ratio_product(2.0 * complex(phi1).real, 1, N).real
    return 1.0 + 0.0j, u_N * shrink


def poissonized_residual_components(phi1: complex, phi2: complex, n: int, N: int):
    """Exact per-component variances and covariance of the two-horizon
    residual (S_n - e^{phi1 tau_n} w_hat)/sqrt(n), w_hat taken at particle
    horizon N of the same Yule-timed path.

    The clock factor between horizons is independent of the walk, so the
    second moments reduce to the u and q recursions at n and N times
    products of m/(m+z) over m in [n, N).
    """
    phi1 = complex(phi1)
    x = phi1.real
    u_n = float(abs_square_recursion(phi1, n)[-1])
    u_N = float(abs_square_recursion(phi1, N)[-1])
    q = square_recursion(phi1, complex(phi2), N)
    q_n, q_N = complex(q[n - 1]), complex(q[-1])
    abs_sq = (_ratio_product(2.0 * x, n, N).real * u_N - u_n) / n
    sq = (_ratio_product(2.0 * phi1, n, N) * q_N - q_n) / n
    var_re = (abs_sq + sq.real) / 2.0
    var_im = (abs_sq - sq.real) / 2.0
    cov = sq.imag / 2.0
    return var_re, var_im, cov
