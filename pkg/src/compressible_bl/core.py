"""Parameter records and scalar building blocks.

Every quantity may be given in nondimensional form. A common convention is
``i0 = 0.5`` so that the energy bound ``2 * i0`` equals one and velocities
are measured in units of the limiting speed.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

#: Exponent of the nonlinear factor, ``19/25 - 1`` with the sign flipped.
ALPHA = Fraction(6, 25)
#: Exponent of the power-law viscosity.
OMEGA = Fraction(19, 25)
#: Polytropic exponent of the adiabatic atmosphere.
DEFAULT_B = 1.405


class ParameterError(ValueError):
    """A FlowParams invariant does not hold."""


class NonPositiveParameter(ParameterError):
    pass


class SpeedExceedsEnergyBound(ParameterError):
    pass


class ExponentMismatch(ParameterError):
    pass


class FactorDomainError(ValueError):
    """Velocity at or beyond the energy bound, where the factor diverges."""


@dataclass(frozen=True)
class FlowParams:
    """Physical constants of one boundary-layer problem.

    Attributes:
        U: free-stream speed at the upper boundary.
        i0: total energy ``c_p * T0``.
        c: wall gradient of the velocity in transformed coordinates.
        delta: layer thickness in transformed coordinates.
        b: polytropic exponent.
        p0: wall pressure.
        T0: surface temperature.
        alpha: exponent of the nonlinear factor, always ``6/25``.
        omega: viscosity exponent, always ``19/25``.

    Construction validates every invariant, so an existing instance is
    always admissible.
    """

    U: float
    i0: float
    c: float
    delta: float
    b: float = DEFAULT_B
    p0: float = 1.0
    T0: float = 1.0
    alpha: Fraction = field(default=ALPHA, repr=False)
    omega: Fraction = field(default=OMEGA, repr=False)

    def __post_init__(self) -> None:
        _check(self)

    @property
    def energy_bound(self) -> float:
        """``2 * i0``; velocities must satisfy ``u**2 < energy_bound``."""
        return 2.0 * self.i0

    @property
    def saturation_speed(self) -> float:
        """``sqrt(2 * i0)``, the speed at which the factor diverges."""
        return math.sqrt(2.0 * self.i0)

    def replace(self, **changes) -> FlowParams:
        return dataclasses.replace(self, **changes)


def _check(p: FlowParams) -> None:
    for name in ("i0", "c", "delta", "p0", "T0"):
        value = getattr(p, name)
        if not (math.isfinite(value) and value > 0):
            if name == "c":
                raise NonPositiveParameter(
                    f"c={value!r}: the no-back-flow wall gradient must be strictly positive"
                )
            raise NonPositiveParameter(f"{name}={value!r} must be finite and strictly positive")
    if not (math.isfinite(p.U) and p.U >= 0):
        raise NonPositiveParameter(f"U={p.U!r} must be finite and nonnegative")
    if not (math.isfinite(p.b) and p.b > 1):
        raise NonPositiveParameter(f"b={p.b!r} must exceed 1")
    if p.U * p.U >= 2.0 * p.i0:
        raise SpeedExceedsEnergyBound(
            f"U**2={p.U * p.U!r} is not below 2*i0={2.0 * p.i0!r}"
        )
    if p.alpha != ALPHA or p.omega != OMEGA:
        raise ExponentMismatch(
            f"exponents are fixed at alpha={ALPHA}, omega={OMEGA}; got {p.alpha}, {p.omega}"
        )


def validate_params(p: FlowParams) -> FlowParams:
    """Return ``p`` unchanged if all invariants hold, else raise the first violation."""
    _check(p)
    return p


def _energy_fraction(u, p: FlowParams):
    x = np.square(np.asarray(u, dtype=float)) / (2.0 * p.i0)
    if np.any(x >= 1.0) or np.any(np.isnan(x)):
        raise FactorDomainError(
            f"u**2 / (2*i0) reaches {np.max(x)!r}; the factor diverges at 1"
        )
    return x


def _maybe_scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def nonlinear_factor(u, p: FlowParams):
    """``(1 - u**2 / (2 i0)) ** (-6/25)``, evaluated as ``exp(-alpha * log(1 - x))``.

    Accepts scalars or arrays. Raises :class:`FactorDomainError` when
    ``u**2 >= 2 i0``.
    """
    x = _energy_fraction(u, p)
    return _maybe_scalar(np.exp(-float(p.alpha) * np.log1p(-x)))


def nonlinear_factor_du(u, p: FlowParams):
    """Derivative of :func:`nonlinear_factor` with respect to ``u``."""
    x = _energy_fraction(u, p)
    a = float(p.alpha)
    du = a * np.asarray(u, dtype=float) / p.i0 * np.exp(-(a + 1.0) * np.log1p(-x))
    return _maybe_scalar(du)


def viscosity_ratio(t_ratio):
    """Power-law viscosity ``mu / mu_h = (T / T_h) ** (19/25)``."""
    t = np.asarray(t_ratio, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError(f"temperature ratio must be strictly positive, got {t_ratio!r}")
    return _maybe_scalar(np.power(t, float(OMEGA)))


PROFILE_KINDS = (
    "exact",
    "quartic",
    "theorem1-literal",
    "theorem1-recomputed",
    "series-truncated",
)


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Velocity samples over the normalized height ``z = s / delta``.

    ``z`` starts at 0 and increases strictly. It normally ends at 1; shorter
    tables arise when an integrator is asked for a partial grid.
    """

    z: np.ndarray
    u: np.ndarray
    kind: str
    params: FlowParams

    def __post_init__(self) -> None:
        z = np.array(self.z, dtype=float)
        u = np.array(self.u, dtype=float)
        z.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "u", u)
        if z.ndim != 1 or z.shape != u.shape or z.size == 0:
            raise ValueError("z and u must be equal-length, nonempty 1-d sequences")
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if z[0] != 0.0:
            raise ValueError(f"profile must start at z=0, got {z[0]!r}")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z must be strictly increasing")
        if z[-1] > 1.0 + 1e-12:
            raise ValueError(f"profile extends past z=1 (z_last={z[-1]!r})")
        if u[0] != 0.0:
            raise ValueError(f"no-slip violated: u(0)={u[0]!r}")

    @property
    def s(self) -> np.ndarray:
        return self.z * self.params.delta

    @property
    def complete(self) -> bool:
        return self.z[-1] == 1.0

    def __len__(self) -> int:
        return self.z.size


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    """Physical domain ``0 < x < L``, ``0 < y < h(x)``.

    ``h`` is any callable accepting scalars or arrays. ``H`` and the shape
    checks are computed on ``n_check`` uniform samples. A thin domain is
    required (``L / H >= min_aspect``); a height function with more than one
    interior maximum only triggers a warning.
    """

    L: float
    h: object
    min_aspect: float = 10.0
    n_check: int = 401
    H: float = field(init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"L={self.L!r} must be strictly positive")
        xs = np.linspace(0.0, self.L, self.n_check)
        hs = np.asarray(self.h(xs), dtype=float) * np.ones_like(xs)
        if np.any(~(hs > 0)):
            raise DomainError("h(x) must be strictly positive on [0, L]")
        if not math.isclose(hs[0], hs[-1], rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(f"h(0)={hs[0]!r} and h(L)={hs[-1]!r} must agree")
        H = float(hs.max())
        object.__setattr__(self, "H", H)
        if self.L / H < self.min_aspect:
            raise DomainError(
                f"domain is not thin: L/H={self.L / H:.6g} is below {self.min_aspect}"
            )
        d = np.diff(hs)
        peaks = np.count_nonzero((d[:-1] > 0) & (d[1:] < 0))
        if peaks > 1:
            warnings.warn(
                f"h has {peaks} interior maxima; a single critical point is expected",
                stacklevel=2,
            )

    @classmethod
    def constant(cls, L: float, height: float, **kw) -> DomainSpec:
        return cls(L, lambda x: np.full_like(np.asarray(x, dtype=float), height), **kw)

    @classmethod
    def from_samples(cls, xs, hs, **kw) -> DomainSpec:
        """Piecewise-linear height through ``(xs, hs)``; ``xs`` must span ``[0, L]``."""
        xs = np.asarray(xs, dtype=float)
        hs = np.asarray(hs, dtype=float)
        if xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
            raise DomainError("height samples must start at x=0 and increase strictly")
        return cls(float(xs[-1]), lambda x: np.interp(x, xs, hs), **kw)

    def height(self, x) -> float:
        return float(np.asarray(self.h(x), dtype=float))
