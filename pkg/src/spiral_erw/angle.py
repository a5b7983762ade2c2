"""Angle distributions on [0, 2pi), their Fourier coefficients, and the
regime classification they induce on the walk.

Three law variants are supported (constant angle, finite discrete mixture,
uniform on an interval) so that every Fourier coefficient has a closed form
and no quadrature error enters the exact oracles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: Tolerance on Re(phi_1) - 1/2 below which a law is treated as critical.
REGIME_TOL = 1e-12

#: A law is degenerate (effectively one-dimensional) when Re(phi_2) >= 1 - this.
NONDEGENERATE_TOL = 1e-12


class DegenerateLawError(ValueError):
    """Raised when an operation requires Re(phi_2) < 1 but the law is
    supported on {0, pi}."""


def reduce_angle(theta: float) -> float:
    """Reduce an angle to [0, 2pi)."""
    out = math.fmod(theta, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    return 0.0 if out == TWO_PI else out


@dataclass(frozen=True)
class AngleLaw:
    """A rotation-angle distribution on [0, 2pi).

    Use the ``constant``, ``discrete`` or ``uniform`` constructors; the raw
    dataclass fields are an implementation detail.  Atom order of discrete
    laws is preserved as given, which the lattice/complex coupling tests
    rely on.
    """

    kind: str
    theta: float | None = None
    atoms: tuple[float, ...] | None = None
    probs: tuple[float, ...] | None = None
    lo: float | None = None
    hi: float | None = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, theta: float) -> "AngleLaw":
        return cls(kind="constant", theta=reduce_angle(theta))

    @classmethod
    def discrete(cls, atoms) -> "AngleLaw":
        """Finite mixture from an iterable of (angle, probability) pairs or
        a {angle: probability} mapping."""
        if hasattr(atoms, "items"):
            pairs = list(atoms.items())
        else:
            pairs = [(a, p) for a, p in atoms]
        if not pairs:
            raise ValueError("discrete law needs at least one atom")
        angles = tuple(reduce_angle(float(a)) for a, _ in pairs)
        probs = tuple(float(p) for _, p in pairs)
        if any(p < 0.0 for p in probs):
            raise ValueError("atom probabilities must be nonnegative")
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1")
        return cls(kind="discrete", atoms=angles, probs=probs)

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = TWO_PI) -> "AngleLaw":
        width = hi - lo
        if not 0.0 < width <= TWO_PI:
            raise ValueError("uniform law needs lo < hi <= lo + 2*pi")
        lo = reduce_angle(lo)
        return cls(kind="uniform", lo=lo, hi=lo + width)

    @classmethod
    def quarter_turn(cls, p: float, q: float, r: float, s: float) -> "AngleLaw":
        """Discrete law on {0, pi/2, pi, 3pi/2}, the planar lattice walk
        parametrization (forward, left, backward, right)."""
        return cls.discrete([(0.0, p), (math.pi / 2, q), (math.pi, r), (3 * math.pi / 2, s)])

    # -- Fourier coefficients -------------------------------------------

    def fourier(self, k: int) -> complex:
        """E(exp(i k theta)) in closed form, k >= 1."""
        if k < 1:
            raise ValueError("Fourier coefficient index k must be >= 1")
        if self.kind == "constant":
            return cmath.exp(1j * k * self.theta)
        if self.kind == "discrete":
            return sum(p * cmath.exp(1j * k * a) for a, p in zip(self.atoms, self.probs))
        # uniform: integral of e^{ik t}/(hi-lo) over [lo, hi]
        lo, hi = self.lo, self.hi
        return (cmath.exp(1j * k * hi) - cmath.exp(1j * k * lo)) / (1j * k * (hi - lo))

    @property
    def phi1(self) -> complex:
        return self.fourier(1)

    @property
    def phi2(self) -> complex:
        return self.fourier(2)

    @property
    def is_nondegenerate(self) -> bool:
        return self.phi2.real < 1.0 - NONDEGENERATE_TOL

    # -- sampling -------------------------------------------------------

    def ppf(self, u: float) -> float:
        """Map a uniform [0,1) variate to an angle sample; this fixes the
        single-draw convention shared by the scalar and kernel samplers."""
        if self.kind == "constant":
            return self.theta
        if self.kind == "discrete":
            acc = 0.0
            for a, p in zip(self.atoms, self.probs):
                acc += p
                if u < acc:
                    return a
            return self.atoms[-1]
        return reduce_angle(self.lo + u * (self.hi - self.lo))

    def sample(self, rng: np.random.Generator) -> float:
        return self.ppf(rng.random())

    def kernel_params(self):
        """(kind_code, theta0, atoms, cumprobs, lo, width) for numba kernels."""
        if self.kind == "constant":
            return 0, self.theta, _EMPTY, _EMPTY, 0.0, 0.0
        if self.kind == "discrete":
            atoms = np.asarray(self.atoms, dtype=np.float64)
            cum = np.cumsum(np.asarray(self.probs, dtype=np.float64))
            cum[-1] = 1.0
            return 1, 0.0, atoms, cum, 0.0, 0.0
        return 2, 0.0, _EMPTY, _EMPTY, self.lo, self.hi - self.lo

    # -- misc -----------------------------------------------------------

    def reflected(self) -> "AngleLaw":
        """The law of 2pi - theta (conjugates every Fourier coefficient)."""
        if self.kind == "constant":
            return AngleLaw.constant(-self.theta)
        if self.kind == "discrete":
            return AngleLaw.discrete([(-a, p) for a, p in zip(self.atoms, self.probs)])
        return AngleLaw.uniform(-self.hi, -self.lo)

    def to_config(self) -> dict:
        if self.kind == "constant":
            return {"type": "constant", "theta": self.theta}
        if self.kind == "discrete":
            return {"type": "discrete", "atoms": [[a, p] for a, p in zip(self.atoms, self.probs)]}
        return {"type": "uniform", "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_config(cls, spec: dict) -> "AngleLaw":
        """Build a law from its tagged-record configuration form."""
        kind = spec.get("type")
        if kind == "constant":
            return cls.constant(float(spec["theta"]))
        if kind == "discrete":
            return cls.discrete([(float(a), float(p)) for a, p in spec["atoms"]])
        if kind == "uniform":
            return cls.uniform(float(spec.get("lo", 0.0)), float(spec.get("hi", TWO_PI)))
        if kind == "lattice":
            return cls.quarter_turn(
                float(spec["p"]), float(spec["q"]), float(spec["r"]), float(spec["s"])
            )
        raise ValueError(f"unknown angle law type: {kind!r}")


_EMPTY = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class FourierCoefficient:
    k: int
    value: complex


def fourier_coefficient(law: AngleLaw, k: int) -> FourierCoefficient:
    """Closed-form E(exp(i k theta)) with its modulus bound checked."""
    value = law.fourier(k)
    assert abs(value) <= 1.0 + 1e-14
    return FourierCoefficient(k=k, value=value)


@dataclass(frozen=True)
class NondegeneracyCheck:
    ok: bool
    re_phi2: float

    def __bool__(self) -> bool:
        return self.ok


def validate_nondegenerate(law: AngleLaw) -> NondegeneracyCheck:
    """True iff Re(phi_2) < 1, i.e. the law is not supported on {0, pi}."""
    re2 = law.phi2.real
    return NondegeneracyCheck(ok=re2 < 1.0 - NONDEGENERATE_TOL, re_phi2=re2)


def sample_angle(law: AngleLaw, rng: np.random.Generator) -> float:
    """Draw one angle, consuming exactly one uniform from the stream."""
    return law.sample(rng)


DIFFUSIVE = "diffusive"
CRITICAL = "critical"
SUPERDIFFUSIVE = "superdiffusive"


@dataclass(frozen=True)
class RegimeClassification:
    """Scaling regime of the walk, decided by Re(phi_1) against 1/2.

    ``sigma_squared`` is the limit variance of the rescaled endpoint; it is
    None in the critical regime, where the (n log n)^{1/2} scaling fixes the
    limit variance to 1.
    """

    regime: str
    phi1: complex
    sigma_squared: float | None


def classify_regime(law: AngleLaw, tol: float = REGIME_TOL) -> RegimeClassification:
    check = validate_nondegenerate(law)
    if not check:
        raise DegenerateLawError(
            f"law is supported on {{0, pi}} (Re(phi_2) = {check.re_phi2!r} >= 1)"
        )
    phi1 = law.phi1
    x = phi1.real
    if x < 0.5 - tol:
        return RegimeClassification(DIFFUSIVE, phi1, 1.0 / (1.0 - 2.0 * x))
    if x > 0.5 + tol:
        return RegimeClassification(SUPERDIFFUSIVE, phi1, 1.0 / (2.0 * x - 1.0))
    return RegimeClassification(CRITICAL, phi1, None)
