"""Reference solution of ``du/ds = c * f(u)`` and the second-order residual check.

The first-order equation is separable: ``F(u) = c * s`` with
``F(u) = int_0^u (1 - v**2 / (2 i0)) ** (6/25) dv``. The reference profile
inverts ``F`` by bracketed root finding. :func:`solve_ode` integrates the same
equation with an embedded Runge-Kutta pair and serves as an independent
cross-check. :func:`verify_reduction` measures how well a sampled profile
satisfies ``f u'' = f' u'`` with centered differences.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize

from .core import (
    FactorDomainError,
    FlowParams,
    ProfileTable,
    nonlinear_factor,
    nonlinear_factor_du,
)

QUAD_TOL = 1e-12
ODE_RTOL = 1e-10
# bracket stops short of the singular endpoint
BRACKET_MARGIN = 1e-12


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class BeyondSaturation(ValueError):
    """``c * s`` exceeds the supremum of ``F``; the profile would hit the energy bound."""


class StepSizeUnderflow(RuntimeError):
    def __init__(self, message: str, last_s: float):
        super().__init__(f"{message}; last valid s={last_s!r}")
        self.last_s = last_s


class StencilError(ValueError):
    pass


def _quad(func, a, b, tol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(func, a, b, epsabs=tol, epsrel=tol, limit=200, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {exc}", math.inf) from None
    if err > 10 * max(tol, tol * abs(value)):
        raise QuadratureError("quadrature tolerance not met", err)
    return value


@dataclass(frozen=True)
class Antiderivative:
    """``F(u) = int_0^u (1 - v**2 / (2 i0)) ** (6/25) dv`` for one parameter set.

    Near the saturation speed ``a = sqrt(2 i0)`` the integrand behaves like
    ``(a - v) ** (6/25)``; values beyond ``a / 2`` are therefore computed as
    ``sup - int_u^a`` with an algebraic-weight rule that absorbs the endpoint.
    """

    params: FlowParams
    tol: float = QUAD_TOL

    @property
    def _alpha(self) -> float:
        return float(self.params.alpha)

    def _integrand(self, v: float) -> float:
        return math.exp(self._alpha * math.log1p(-v * v / (2.0 * self.params.i0)))

    def _tail(self, u: float) -> float:
        """``int_u^a (a - v)**alpha * a**-alpha * (1 + v/a)**alpha dv``."""
        a = self.params.saturation_speed
        if u >= a:
            return 0.0
        al = self._alpha
        smooth = lambda v: (a ** -al) * (1.0 + v / a) ** al  # noqa: E731
        return _quad(smooth, u, a, self.tol, weight="alg", wvar=(0.0, al))

    @cached_property
    def supremum(self) -> float:
        """``F(sqrt(2 i0))``, the largest attainable value of ``c * s``."""
        return self._tail(0.0)

    def __call__(self, u: float) -> float:
        a = self.params.saturation_speed
        if not (0.0 <= u < a):
            raise FactorDomainError(f"u={u!r} outside [0, {a!r})")
        if u == 0.0:
            return 0.0
        if u <= 0.5 * a:
            return _quad(self._integrand, 0.0, u, self.tol)
        return self.supremum - self._tail(u)


def antiderivative_F(u: float, p: FlowParams, tol: float = QUAD_TOL) -> float:
    return Antiderivative(p, tol)(u)


def edge_thickness(u_edge: float, p: FlowParams) -> float:
    """Thickness ``delta`` at which the exact profile reaches ``u_edge`` at ``z = 1``."""
    return Antiderivative(p)(u_edge) / p.c


def invert_profile(s, p: FlowParams, tol: float = QUAD_TOL, F: Antiderivative | None = None):
    """Velocity ``u(s)`` solving ``F(u) = c * s``.

    Accepts a scalar or an array of heights. Passing a prebuilt
    :class:`Antiderivative` reuses its cached supremum.

    Raises:
        BeyondSaturation: if ``c * s`` is not below the supremum of ``F``.
    """
    F = F or Antiderivative(p, tol)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("heights must be nonnegative")
    targets = p.c * s_arr
    sup = F.supremum
    if np.any(targets >= sup):
        raise BeyondSaturation(
            f"c*s={float(np.max(targets))!r} is not below the saturation value {sup!r}"
        )
    hi = p.saturation_speed * (1.0 - BRACKET_MARGIN)
    f_hi = F(hi)
    out = np.empty_like(targets)
    for idx, target in np.ndenumerate(targets):
        if target == 0.0:
            out[idx] = 0.0
            continue
        if target > f_hi:
            raise BeyondSaturation(f"c*s={target!r} lies within the bracket margin of saturation")
        # F(u) < u on (0, a), so the root lies above the target itself;
        # for tiny targets F(target) rounds to target and that is the root
        if F(target) >= target:
            out[idx] = target
            continue
        out[idx] = optimize.brentq(
            lambda u: F(u) - target, target, hi, xtol=tol * 1e-2, rtol=4 * np.finfo(float).eps
        )
    return float(out) if out.ndim == 0 else out


def exact_profile(z, p: FlowParams, tol: float = QUAD_TOL) -> ProfileTable:
    z = np.asarray(z, dtype=float)
    return ProfileTable(z, invert_profile(z * p.delta, p, tol), "exact", p)


def solve_ode(s_grid, p: FlowParams, rtol: float = ODE_RTOL) -> ProfileTable:
    """Integrate ``du/ds = c * f(u)``, ``u(0) = 0`` with the DOP853 embedded pair.

    Samples are returned at the points of ``s_grid`` (which must start at 0)
    as a profile over ``z = s / delta``.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0 or s_grid[0] != 0.0:
        raise ValueError("s_grid must be a nonempty 1-d sequence starting at 0")
    if s_grid.size == 1:
        return ProfileTable([0.0], [0.0], "exact", p)
    a = p.saturation_speed
    last_ok = [0.0]

    def rhs(s, y):
        u = y[0]
        if abs(u) >= a:
            raise FactorDomainError("integrator stepped past saturation")
        last_ok[0] = max(last_ok[0], s)
        return [p.c * nonlinear_factor(u, p)]

    try:
        sol = integrate.solve_ivp(
            rhs,
            (0.0, s_grid[-1]),
            [0.0],
            method="DOP853",
            t_eval=s_grid,
            rtol=rtol,
            atol=rtol * 1e-3 * a,
            first_step=min(s_grid[1], 1e-3 / p.c),
        )
    except FactorDomainError:
        raise StepSizeUnderflow("integration reached the energy bound", last_ok[0]) from None
    if sol.status != 0:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise StepSizeUnderflow(f"integration failed: {sol.message}", last)
    u = sol.y[0].copy()
    u[0] = 0.0
    return ProfileTable(s_grid / p.delta, u, "exact", p)


@dataclass(frozen=True)
class ResidualReport:
    sup: float
    residual: np.ndarray
    ds: float
    n_interior: int
    low_confidence: bool


def verify_reduction(
    profile: ProfileTable, p: FlowParams, allow_short: bool = False
) -> ResidualReport:
    """Sup-norm of ``f u'' - (df/ds) u'`` on the interior samples of ``profile``.

    Derivatives in ``s`` come from second-order centered differences; ``f``
    and ``df/du`` are evaluated exactly and chained with ``u'``. The grid
    must be uniform. At least five interior samples are required unless
    ``allow_short`` is set, in which case three suffice and the report is
    flagged as low confidence.
    """
    s = profile.s
    u = profile.u
    n_interior = s.size - 2
    minimum = 3 if allow_short else 5
    if n_interior < minimum:
        raise StencilError(f"need at least {minimum} interior samples, got {max(n_interior, 0)}")
    steps = np.diff(s)
    ds = float(steps.mean())
    if not np.allclose(steps, ds, rtol=1e-9, atol=0.0):
        raise StencilError("centered stencil requires uniformly spaced samples")
    du = (u[2:] - u[:-2]) / (2.0 * ds)
    d2u = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (ds * ds)
    ui = u[1:-1]
    f = nonlinear_factor(ui, p)
    df_ds = nonlinear_factor_du(ui, p) * du
    residual = f * d2u - df_ds * du
    return ResidualReport(
        sup=float(np.max(np.abs(residual))),
        residual=residual,
        ds=ds,
        n_interior=n_interior,
        low_confidence=n_interior < 5,
    )


def wall_slope(profile: ProfileTable) -> float:
    """``du/dz`` at ``z = 0`` from a fourth-order one-sided stencil.

    Assumes the first five samples are uniformly spaced.
    """
    z, u = profile.z, profile.u
    if z.size < 5:
        raise StencilError("wall slope needs at least five samples")
    h = z[1] - z[0]
    return float((-25 * u[0] + 48 * u[1] - 36 * u[2] + 16 * u[3] - 3 * u[4]) / (12 * h))
