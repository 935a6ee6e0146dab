"""Quartic Pohlhausen profiles and the one-step Picard approximant.

The quartic ``u(z) = A z + B z**2 + C z**3 + D z**4`` satisfies ``u(0) = 0``,
``u(1) = U``, ``u'(1) = 0`` and ``u''(1) = 0`` for every shape parameter
``lambda``. Feeding the ``lambda = 0`` member through one Picard step of
``du/dz = delta * c * f(u)`` gives a small-velocity approximant. Two forms
are available: the one with a ``z**4`` correction as originally published,
and the one obtained by carrying out the integral, whose correction starts at
``z**3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from .core import ALPHA, FlowParams, ProfileTable
from .series import binomial_coeffs, eval_series

SONIC_TOL = 1e-12


class SonicDenominator(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class QuarticProfile:
    A: float
    B: float
    C: float
    D: float
    U: float
    lam: float

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.A, self.B, self.C, self.D)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return z * (self.A + z * (self.B + z * (self.C + z * self.D)))

    def derivative(self, z, order: int = 1):
        """Analytic derivative of the given order (1 or 2)."""
        z = np.asarray(z, dtype=float)
        if order == 1:
            return self.A + z * (2 * self.B + z * (3 * self.C + z * 4 * self.D))
        if order == 2:
            return 2 * self.B + z * (6 * self.C + z * 12 * self.D)
        raise ValueError("order must be 1 or 2")

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D, "U": self.U, "lambda": self.lam}


def quartic_coeffs(U: float, lam: float = 0.0) -> QuarticProfile:
    """Pohlhausen quartic for free-stream speed ``U`` and shape parameter ``lam``.

    Physically meaningful shapes lie in ``-12 <= lam <= 12``; any real value
    is accepted.
    """
    return QuarticProfile(
        A=U * (2.0 + lam / 6.0),
        B=-U * lam / 2.0,
        C=U * (lam / 2.0 - 2.0),
        D=U * (1.0 - lam / 6.0),
        U=U,
        lam=lam,
    )


def lambda_of(
    U_of_ell: Callable[[float], float],
    delta: float,
    ell: float,
    dU_dell: float | None = None,
) -> float:
    """``lambda = -delta / (1 - U**2) * dU/dell``.

    The denominator is used exactly as published, i.e. ``1 - U**2`` rather
    than a form normalized by the energy bound. When ``dU_dell`` is not given
    it is estimated by a central difference with step ``1e-6 * max(1, |ell|)``.
    """
    U = U_of_ell(ell)
    denom = 1.0 - U * U
    if abs(denom) < SONIC_TOL:
        raise SonicDenominator(f"1 - U**2 = {denom!r} at ell={ell!r}")
    if dU_dell is None:
        h = 1e-6 * max(1.0, abs(ell))
        dU_dell = (U_of_ell(ell + h) - U_of_ell(ell - h)) / (2.0 * h)
    if dU_dell == 0:
        return 0.0
    return -delta / denom * dU_dell


@dataclass(frozen=True)
class ApproximantProfile:
    """Closed-form approximant ``u(z)`` from one Picard step on the ``lambda = 0`` quartic."""

    delta: float
    c: float
    i0: float
    U: float
    form: str

    def __post_init__(self) -> None:
        if self.form not in ("paper-literal", "recomputed"):
            raise ValueError(f"unknown approximant form {self.form!r}")

    @classmethod
    def from_params(cls, p: FlowParams, form: str) -> ApproximantProfile:
        return cls(p.delta, p.c, p.i0, p.U, form)

    def correction(self, z):
        """``u(z) / (delta c) - z``."""
        z = np.asarray(z, dtype=float)
        scale = float(ALPHA) / (2.0 * self.i0) * self.U**2
        if self.form == "paper-literal":
            return scale * (4.0 / 3.0) * z**4
        return scale * np.polynomial.polynomial.polyval(z, _SQUARE_INTEGRAL_FLOAT)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.delta * self.c * (z + self.correction(z))


def square_integral_coeffs(lam: Fraction | int = 0) -> list[Fraction]:
    """Exact coefficients of ``P(z) = int_0^z q(t)**2 dt`` for the unit-speed quartic ``q``.

    Entry ``k`` multiplies ``z**k``; the list has length 10.
    """
    lam = Fraction(lam)
    q = [Fraction(0), 2 + lam / 6, -lam / 2, lam / 2 - 2, 1 - lam / 6]
    sq = [Fraction(0)] * 9
    for i, qi in enumerate(q):
        for j, qj in enumerate(q):
            sq[i + j] += qi * qj
    return [Fraction(0)] + [sq[k] / (k + 1) for k in range(9)]


_SQUARE_INTEGRAL_FLOAT = np.array([float(c) for c in square_integral_coeffs(0)])


def theorem1_literal(z, p: FlowParams):
    """``delta c [z + (6/25) (1/(2 i0)) (4 U**2 / 3) z**4]`` as originally printed."""
    out = ApproximantProfile.from_params(p, "paper-literal")(z)
    return float(out) if np.ndim(out) == 0 else out


def theorem1_recomputed(z, p: FlowParams):
    """``delta c [z + (6/25) (1/(2 i0)) U**2 P(z)]`` with ``P`` the exact degree-9 integral.

    ``P(z) = 4 z**3 / 3 - 8 z**5 / 5 + 2 z**6 / 3 + 4 z**7 / 7 - z**8 / 2 + z**9 / 9``.
    """
    out = ApproximantProfile.from_params(p, "recomputed")(z)
    return float(out) if np.ndim(out) == 0 else out


def picard_step(
    input_profile: Callable[[float], float],
    p: FlowParams,
    series_order: int,
    z,
    tol: float = 1e-12,
):
    """One Picard iterate ``delta c int_0^z S_N(u(t)) dt`` at the points ``z``.

    ``S_N`` is the order-``N`` binomial series of the nonlinear factor. The
    integral is accumulated panel by panel between consecutive sorted
    evaluation points.
    """
    coeffs = binomial_coeffs(series_order)
    z = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z).ravel()
    if np.any((flat < 0) | (flat > 1)):
        raise ValueError("picard_step is defined on z in [0, 1]")
    order = np.argsort(flat, kind="stable")
    integrand = lambda t: eval_series(coeffs, float(input_profile(t)), p)  # noqa: E731
    out = np.empty_like(flat)
    acc = 0.0
    prev = 0.0
    for i in order:
        zi = flat[i]
        if zi > prev:
            acc += integrate.quad(integrand, prev, zi, epsabs=tol, epsrel=tol, limit=200)[0]
            prev = zi
        out[i] = acc
    out *= p.delta * p.c
    return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)


def quartic_profile(z, p: FlowParams, lam: float = 0.0) -> ProfileTable:
    return ProfileTable(z, quartic_coeffs(p.U, lam)(z), "quartic", p)


def approximant_profile(z, p: FlowParams, form: str) -> ProfileTable:
    kind = "theorem1-literal" if form == "paper-literal" else "theorem1-recomputed"
    u = ApproximantProfile.from_params(p, form)(z)
    return ProfileTable(z, u, kind, p)
