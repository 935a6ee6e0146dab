"""Dorodnitzyn coordinate transform ``(x, yhat) -> (ell, s)``.

``ell`` is a linear rescaling of ``x``; ``s`` is the density integrated up a
column. The density is an input, either an analytic callable or a
rectilinear table with bilinear interpolation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .core import DomainSpec, FlowParams

S_RTOL = 1e-10

EXPONENT_CHOICES = ("grouped", "literal")


class DensityError(ValueError):
    """Density is not strictly positive where it is needed."""


class MalformedDensityFile(ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def c1_exponent(b: float, choice: str = "grouped") -> float:
    """Exponent ``e`` in ``c1 = p0 * T0**e``.

    ``grouped`` reads the printed exponent as ``2b / (b - 1)``; ``literal``
    reads it left to right as ``(2b / b) - 1 = 1``.
    """
    if choice == "grouped":
        return 2.0 * b / (b - 1.0)
    if choice == "literal":
        return 2.0 * b / b - 1.0
    raise ValueError(f"exponent choice must be one of {EXPONENT_CHOICES}, got {choice!r}")


def ell_coordinate(x, p: FlowParams, exponent_choice: str = "grouped"):
    """``ell = c1 (1 - U**2 / (2 i0)) x`` with ``c1 = p0 T0**e``."""
    c1 = p.p0 * p.T0 ** c1_exponent(p.b, exponent_choice)
    scale = c1 * (1.0 - p.U * p.U / (2.0 * p.i0))
    out = scale * np.asarray(x, dtype=float)
    return float(out) if out.ndim == 0 else out


class DensityField:
    """Density ``rho(x, y)`` over ``[0, L] x [0, y_max]``."""

    def __init__(
        self,
        func: Callable,
        bounds: tuple[float, float],
        y_nodes: np.ndarray | None = None,
        validate: bool = True,
    ):
        self._func = func
        self.L, self.y_max = map(float, bounds)
        self.y_nodes = y_nodes
        self.validate = validate

    @classmethod
    def analytic(cls, func: Callable, L: float, y_max: float, validate: bool = True) -> DensityField:
        return cls(func, (L, y_max), validate=validate)

    @classmethod
    def from_grid(cls, x, y, rho) -> DensityField:
        """Bilinear interpolation of ``rho[i, j]`` at ``(x[i], y[j])``.

        Raises:
            DensityError: if any node value is not strictly positive.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if rho.shape != (x.size, y.size):
            raise ValueError(f"rho has shape {rho.shape}, expected {(x.size, y.size)}")
        if x.size < 2 or y.size < 2 or np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("grid axes need at least two strictly increasing nodes")
        bad = np.argwhere(~(rho > 0))
        if bad.size:
            i, j = bad[0]
            raise DensityError(
                f"nonpositive density {float(rho[i, j])!r} at x={float(x[i])!r}, y={float(y[j])!r}"
            )
        if x[0] != 0.0 or y[0] != 0.0:
            raise ValueError("grid must start at x=0 and y=0")

        def bilinear(xq, yq):
            xq = np.clip(np.asarray(xq, dtype=float), x[0], x[-1])
            yq = np.clip(np.asarray(yq, dtype=float), y[0], y[-1])
            i = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
            j = np.clip(np.searchsorted(y, yq, side="right") - 1, 0, y.size - 2)
            tx = (xq - x[i]) / (x[i + 1] - x[i])
            ty = (yq - y[j]) / (y[j + 1] - y[j])
            return (
                (1 - tx) * (1 - ty) * rho[i, j]
                + tx * (1 - ty) * rho[i + 1, j]
                + (1 - tx) * ty * rho[i, j + 1]
                + tx * ty * rho[i + 1, j + 1]
            )

        field_ = cls(bilinear, (x[-1], y[-1]), y_nodes=y)
        field_.x_nodes, field_.rho_nodes = x, rho
        return field_

    @classmethod
    def from_csv(cls, path: str | Path) -> DensityField:
        x, y, rho = read_density_csv(path)
        return cls.from_grid(x, y, rho)

    def __call__(self, x, y):
        return self._func(x, y)

    def column_integral(self, x: float, a: float, b: float) -> float:
        """``int_a^b rho(x, y) dy`` with positivity checked at every evaluation."""
        if b <= a:
            return 0.0

        def integrand(y):
            r = float(self._func(x, y))
            if self.validate and not r > 0:
                raise DensityError(f"nonpositive density {r!r} at x={float(x)!r}, y={float(y)!r}")
            return r

        points = None
        if self.y_nodes is not None:
            inner = self.y_nodes[(self.y_nodes > a) & (self.y_nodes < b)]
            points = inner if inner.size else None
        value, _ = integrate.quad(
            integrand, a, b, epsabs=1e-14, epsrel=S_RTOL, limit=200, points=points
        )
        return value


def read_density_csv(path: str | Path):
    """Read an ``x, y, rho`` table with header into rectilinear axes and a 2-d array.

    Lines starting with ``#`` are skipped. Every ``(x, y)`` node of the
    product grid must appear exactly once.
    """
    rows: dict[tuple[float, float], tuple[float, int]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, rec in enumerate(reader, start=1):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [h.strip().lower() for h in rec]
                if header[:3] != ["x", "y", "rho"] or len(header) != 3:
                    raise MalformedDensityFile(f"expected header x,y,rho, got {rec}", lineno)
                continue
            if len(rec) != 3:
                raise MalformedDensityFile(f"expected 3 fields, got {len(rec)}", lineno)
            try:
                xv, yv, rv = (float(v) for v in rec)
            except ValueError:
                raise MalformedDensityFile(f"non-numeric field in {rec}", lineno) from None
            if not all(math.isfinite(v) for v in (xv, yv, rv)):
                raise MalformedDensityFile(f"non-finite field in {rec}", lineno)
            if (xv, yv) in rows:
                raise MalformedDensityFile(f"duplicate node ({xv}, {yv})", lineno)
            rows[(xv, yv)] = (rv, lineno)
    if header is None or not rows:
        raise MalformedDensityFile("no data rows")
    xs = np.array(sorted({k[0] for k in rows}))
    ys = np.array(sorted({k[1] for k in rows}))
    if len(rows) != xs.size * ys.size:
        raise MalformedDensityFile(
            f"grid is not rectilinear: {len(rows)} rows for {xs.size} x {ys.size} nodes"
        )
    rho = np.empty((xs.size, ys.size))
    for (xv, yv), (rv, lineno) in rows.items():
        if not rv > 0:
            raise DensityError(f"line {lineno}: nonpositive density {rv!r} at x={xv!r}, y={yv!r}")
        rho[np.searchsorted(xs, xv), np.searchsorted(ys, yv)] = rv
    return xs, ys, rho


def s_coordinate(x: float, yhat: float, rho: DensityField, dom: DomainSpec | None = None) -> float:
    """``s(x, yhat) = int_0^yhat rho(x, y) dy``.

    ``yhat`` must lie in ``[0, h(x)]`` when a domain is supplied, else in the
    vertical extent of the density field.
    """
    top = dom.height(x) if dom is not None else rho.y_max
    if not (0.0 <= yhat <= top * (1 + 1e-12)):
        raise ValueError(f"yhat={yhat!r} outside [0, {top!r}] at x={x!r}")
    return rho.column_integral(x, 0.0, yhat)


def delta_of_x(x: float, rho: DensityField, dom: DomainSpec) -> float:
    if not (0.0 <= x <= dom.L):
        raise ValueError(f"x={x!r} outside [0, {dom.L!r}]")
    return s_coordinate(x, dom.height(x), rho, dom)


@dataclass(frozen=True, eq=False)
class TransformedMesh:
    """Columns of physical nodes with their transformed coordinates.

    ``yhat`` and ``s`` have shape ``(nx, ny)``; ``x``, ``ell`` and ``delta``
    have shape ``(nx,)``.
    """

    x: np.ndarray
    yhat: np.ndarray
    ell: np.ndarray
    s: np.ndarray
    delta: np.ndarray = field(default=None)

    def rows(self):
        nx, ny = self.yhat.shape
        for i in range(nx):
            for j in range(ny):
                yield self.x[i], self.yhat[i, j], self.ell[i], self.s[i, j]


def build_mesh(
    rho: DensityField,
    dom: DomainSpec,
    p: FlowParams,
    nx: int = 11,
    ny: int = 11,
    x_nodes=None,
    exponent_choice: str = "grouped",
) -> TransformedMesh:
    """Transform a uniform ``ny``-point column at each of ``nx`` stations.

    ``s`` is accumulated panel by panel up each column, so ``s(x, 0) = 0``
    exactly and the top value is ``delta(x)``.
    """
    if ny < 2:
        raise ValueError("need at least two nodes per column")
    xs = np.linspace(0.0, dom.L, nx) if x_nodes is None else np.asarray(x_nodes, dtype=float)
    yhat = np.empty((xs.size, ny))
    s = np.empty_like(yhat)
    for i, xi in enumerate(xs):
        col = np.linspace(0.0, dom.height(xi), ny)
        yhat[i] = col
        s[i, 0] = 0.0
        for j in range(1, ny):
            s[i, j] = s[i, j - 1] + rho.column_integral(xi, col[j - 1], col[j])
    ell = np.asarray(ell_coordinate(xs, p, exponent_choice), dtype=float)
    return TransformedMesh(xs, yhat, ell, s, s[:, -1].copy())


@dataclass(frozen=True)
class DiffeoReport:
    passed: bool
    margin: float
    ell_margin: float
    failures: tuple

    def summary(self) -> str:
        state = "pass" if self.passed else "fail"
        text = f"check_diffeomorphism={state} margin={self.margin!r} ell_margin={self.ell_margin!r}"
        if self.failures:
            text += " failures=" + ";".join(self.failures)
        return text


def check_diffeomorphism(mesh: TransformedMesh) -> DiffeoReport:
    """Strict monotonicity of ``s`` up every column and of ``ell`` along ``x``.

    The margin is the smallest increment of ``s`` between neighbouring nodes
    of any column.
    """
    ds = np.diff(mesh.s, axis=1)
    failures = []
    for i, col in enumerate(ds):
        if np.any(col <= 0):
            j = int(np.argmax(col <= 0))
            failures.append(f"column {i} (x={float(mesh.x[i])!r}) at node {j + 1}")
    if np.any(mesh.s[:, 0] != 0):
        failures.append("s(x, 0) != 0")
    dell = np.diff(mesh.ell)
    ell_margin = float(dell.min()) if dell.size else math.inf
    if ell_margin <= 0:
        failures.append("ell not strictly increasing in x")
    return DiffeoReport(
        passed=not failures,
        margin=float(ds.min()),
        ell_margin=ell_margin,
        failures=tuple(failures),
    )
