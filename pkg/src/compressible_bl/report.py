"""Comparison of every profile form against the exact solution on one grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import FactorDomainError, FlowParams, ProfileTable
from .exact_solver import exact_profile, verify_reduction, wall_slope
from .pohlhausen import approximant_profile, quartic_coeffs, quartic_profile
from .series import binomial_coeffs, eval_series

KIND_ORDER = (
    "exact",
    "quartic",
    "theorem1-literal",
    "theorem1-recomputed",
    "series-truncated",
)

# stencil below this many interior points is flagged in reports
CONFIDENT_INTERIOR = 5

METRIC_COLUMNS = (
    "kind",
    "rank",
    "sup_err",
    "rms_err",
    "residual_sup",
    "wall_slope",
    "low_confidence",
    "note",
)


def series_profile(z, p: FlowParams, order: int) -> ProfileTable:
    """Solve ``du/dz = delta c S_N(u)`` with the order-``N`` truncated factor."""
    z = np.asarray(z, dtype=float)
    coeffs = binomial_coeffs(order)
    scale = p.delta * p.c
    sol = integrate.solve_ivp(
        lambda _z, y: [scale * eval_series(coeffs, y[0], p)],
        (0.0, float(z[-1])),
        [0.0],
        method="DOP853",
        t_eval=z,
        rtol=1e-11,
        atol=1e-14,
    )
    if sol.status != 0:
        raise FactorDomainError(f"series profile integration failed: {sol.message}")
    u = sol.y[0].copy()
    u[0] = 0.0
    return ProfileTable(z, u, "series-truncated", p)


@dataclass(frozen=True)
class KindMetrics:
    kind: str
    rank: int
    sup_err: float
    rms_err: float
    residual_sup: float | None
    wall_slope: float
    low_confidence: bool
    note: str = ""

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_COLUMNS}


@dataclass(frozen=True)
class Comparison:
    params: FlowParams
    series_order: int
    profiles: dict
    metrics: tuple

    @property
    def ranking(self) -> list[str]:
        return [m.kind for m in sorted(self.metrics, key=lambda m: m.rank)]

    def metric(self, kind: str) -> KindMetrics:
        return next(m for m in self.metrics if m.kind == kind)


def build_profiles(p: FlowParams, grid: int, series_order: int) -> dict[str, ProfileTable]:
    z = np.linspace(0.0, 1.0, grid)
    return {
        "exact": exact_profile(z, p),
        "quartic": quartic_profile(z, p),
        "theorem1-literal": approximant_profile(z, p, "paper-literal"),
        "theorem1-recomputed": approximant_profile(z, p, "recomputed"),
        "series-truncated": series_profile(z, p, series_order),
    }


def compare(p: FlowParams, grid: int = 201, series_order: int = 2) -> Comparison:
    """Distances to the exact profile, residual of the second-order form and wall slope.

    Ranks ascend with the sup-norm distance; ties keep the fixed kind order.
    A residual is omitted (with a note) when an approximant leaves the
    admissible speed range.
    """
    if grid < 5:
        raise ValueError("grid must have at least 5 points")
    profiles = build_profiles(p, grid, series_order)
    exact = profiles["exact"].u
    raw = []
    for kind in KIND_ORDER:
        prof = profiles[kind]
        err = np.abs(prof.u - exact)
        note = ""
        try:
            res = verify_reduction(prof, p, allow_short=True)
            residual, low = res.sup, res.n_interior < CONFIDENT_INTERIOR
        except FactorDomainError:
            residual, low, note = None, grid - 2 < CONFIDENT_INTERIOR, "exceeds energy bound"
        raw.append((kind, float(err.max()), float(np.sqrt(np.mean(err**2))), residual,
                    wall_slope(prof), low, note))
    order = sorted(range(len(raw)), key=lambda i: (raw[i][1], i))
    ranks = {idx: r + 1 for r, idx in enumerate(order)}
    metrics = tuple(KindMetrics(*row[:1], ranks[i], *row[1:]) for i, row in enumerate(raw))
    return Comparison(p, series_order, profiles, metrics)


def quartic_summary(p: FlowParams) -> dict:
    return quartic_coeffs(p.U, 0.0).to_dict()
