from fractions import Fraction

import numpy as np
import pytest

from compressible_bl.core import FactorDomainError, FlowParams, nonlinear_factor
from compressible_bl.series import (
    SeriesCoeffs,
    binomial_coeffs,
    eval_series,
    explog_coeffs,
    paper_literal_coeffs,
)

P = FlowParams(U=0.0, i0=0.5, c=1.0, delta=1.0)


def _u(x):
    return np.sqrt(x)


def test_low_orders():
    assert binomial_coeffs(0).coeffs == (1,)
    assert binomial_coeffs(1).coeffs == (1, Fraction(6, 25))
    assert binomial_coeffs(2).coeffs == (1, Fraction(6, 25), Fraction(93, 625))
    assert explog_coeffs(0).coeffs == (1,)
    assert explog_coeffs(1).as_floats().tolist() == [1.0, 0.24]


def test_second_coefficient_by_hand():
    # exp(theta) to x**2: theta = a x + a x**2 / 2, theta**2 / 2 = a**2 x**2 / 2
    a = Fraction(6, 25)
    assert explog_coeffs(2).coeffs[2] == a / 2 + a * a / 2 == Fraction(93, 625)


def test_paper_literal():
    lit = paper_literal_coeffs()
    assert lit.order == 2 and lit.source == "paper-literal"
    assert lit.coeffs == (1, Fraction(6, 25), Fraction(6, 25))
    assert float(lit.coeffs[2] - binomial_coeffs(2).coeffs[2]) == pytest.approx(0.0912)


@pytest.mark.parametrize("n", range(17))
def test_explog_matches_binomial_exactly(n):
    assert explog_coeffs(n).coeffs == binomial_coeffs(n).coeffs


@pytest.mark.parametrize("n", [17, 24, 32])
def test_float_orders_agree(n):
    np.testing.assert_allclose(explog_coeffs(n).as_floats(), binomial_coeffs(n).as_floats(), rtol=1e-14)


@pytest.mark.parametrize("n", [-1, 33, 2.0])
def test_order_range(n):
    with pytest.raises(ValueError):
        binomial_coeffs(n)
    with pytest.raises(ValueError):
        explog_coeffs(n)


def test_coeff_invariants_enforced():
    with pytest.raises(ValueError):
        SeriesCoeffs((2, Fraction(6, 25)), "binomial-oracle")
    with pytest.raises(ValueError):
        SeriesCoeffs((1, Fraction(1, 4)), "binomial-oracle")
    with pytest.raises(ValueError):
        SeriesCoeffs((1, Fraction(6, 25), -1), "binomial-oracle")


def test_eval_at_zero_is_one():
    for c in (binomial_coeffs(0), binomial_coeffs(5), paper_literal_coeffs()):
        assert eval_series(c, 0.0, P) == 1.0


def test_eval_small_x_high_order():
    x = 0.01
    err = abs(nonlinear_factor(_u(x), P) - eval_series(binomial_coeffs(8), _u(x), P))
    assert err <= 2 * x**9


def test_eval_domain():
    with pytest.raises(FactorDomainError):
        eval_series(binomial_coeffs(2), 1.0, P)


def _trunc_err(n, x):
    return abs(nonlinear_factor(_u(x), P) - eval_series(binomial_coeffs(n), _u(x), P))


def test_error_shrinks_eightfold_for_second_order():
    # ratio is 8 * (1 + O(x)); measured 8.35 at x = 0.1 and 10.9 at x = 0.5
    assert 7.5 < _trunc_err(2, 0.1) / _trunc_err(2, 0.05) < 9.0
    assert 8.0 < _trunc_err(2, 0.5) / _trunc_err(2, 0.25) < 12.0


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 6])
def test_truncation_order(n):
    scaled = [_trunc_err(n, x) / x ** (n + 1) for x in (0.2, 0.1, 0.05)]
    c_next = float(binomial_coeffs(n + 1).coeffs[-1])
    # tends to the first omitted coefficient from above
    assert all(s >= c_next for s in scaled)
    assert scaled[0] > scaled[1] > scaled[2]
    assert scaled[-1] / c_next < 1.0 + 2.5 * 0.05 * (n + 2)
