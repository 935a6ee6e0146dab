"""Truncated power series of the nonlinear factor in ``x = u**2 / (2 i0)``.

Three coefficient sources are provided:

* ``binomial-oracle``: generalized binomial coefficients of ``(1 - x)**(-6/25)``.
* ``explog-composition``: ``exp(theta)`` with ``theta = (6/25) * sum x**k / k``,
  composed by truncated series arithmetic.
* ``paper-literal``: the second-order coefficients as originally printed,
  whose ``x**2`` term is ``0.24`` instead of ``93/625``. Kept for discrepancy
  reports only.

Orders up to 16 are computed over exact rationals; higher orders (to 32) in
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import ALPHA, FlowParams, _energy_fraction, _maybe_scalar

MAX_ORDER = 32
EXACT_ORDER = 16
SOURCES = ("binomial-oracle", "explog-composition", "paper-literal")


@dataclass(frozen=True)
class SeriesCoeffs:
    coeffs: tuple
    source: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.source not in SOURCES:
            raise ValueError(f"unknown coefficient source {self.source!r}")
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("c0 must equal 1")
        if len(self.coeffs) > 1 and abs(float(self.coeffs[1]) - float(ALPHA)) > 1e-15:
            raise ValueError(f"c1 must equal {ALPHA}")
        for k, ck in enumerate(self.coeffs):
            if not (np.isfinite(float(ck)) and ck >= 0):
                raise ValueError(f"c{k}={ck!r} must be finite and nonnegative")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])


def _check_order(order: int) -> None:
    if not (isinstance(order, (int, np.integer)) and 0 <= order <= MAX_ORDER):
        raise ValueError(f"series order must be an integer in [0, {MAX_ORDER}], got {order!r}")


def binomial_coeffs(order: int) -> SeriesCoeffs:
    """``c_k = prod_{j<k} (6/25 + j) / (j + 1)``."""
    _check_order(order)
    one = Fraction(1) if order <= EXACT_ORDER else 1.0
    a = ALPHA if order <= EXACT_ORDER else float(ALPHA)
    coeffs = [one]
    for j in range(order):
        coeffs.append(coeffs[-1] * (a + j) / (j + 1))
    return SeriesCoeffs(coeffs, "binomial-oracle")


def _mul_trunc(a: Sequence, b: Sequence, order: int) -> list:
    out = [a[0] * 0] * (order + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(min(len(b), order + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def explog_coeffs(order: int) -> SeriesCoeffs:
    """Coefficients of ``exp(-(6/25) * log(1 - x))`` by series composition.

    The logarithm is expanded as ``-sum x**k / k`` and the exponential by
    its Maclaurin sum ``sum theta**m / m!``; since ``theta`` has no constant
    term, powers above ``order`` do not contribute.
    """
    _check_order(order)
    exact = order <= EXACT_ORDER
    a = ALPHA if exact else float(ALPHA)
    zero = Fraction(0) if exact else 0.0
    theta = [zero] + [a / k for k in range(1, order + 1)]
    result = [zero] * (order + 1)
    result[0] += 1
    power = [zero] * (order + 1)
    power[0] += 1
    factorial = 1
    for m in range(1, order + 1):
        power = _mul_trunc(power, theta, order)
        factorial *= m
        for k in range(order + 1):
            result[k] += power[k] / factorial
    return SeriesCoeffs(result, "explog-composition")


def paper_literal_coeffs() -> SeriesCoeffs:
    # x**2 term as printed: (6/25)/2 + (1/2)(6/25)
    c2 = ALPHA / 2 + Fraction(1, 2) * ALPHA
    return SeriesCoeffs((Fraction(1), ALPHA, c2), "paper-literal")


def eval_series(coeffs: SeriesCoeffs, u, p: FlowParams):
    """Horner evaluation of ``sum c_k x**k`` at ``x = u**2 / (2 i0)``."""
    x = _energy_fraction(u, p)
    acc = np.zeros_like(x)
    for ck in reversed(coeffs.as_floats()):
        acc = acc * x + ck
    return _maybe_scalar(acc)
