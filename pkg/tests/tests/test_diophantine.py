import math

import numpy as np
import pytest

from horolab.diophantine import (
    GOLDEN_RATIO,
    best_linear_form,
    continued_fraction,
    convergent_oracle,
    convergents,
    diophantine_exponent,
    liouville_bound,
    liouville_constant,
    liouville_sweep,
    named_algebraic_point,
    named_point,
    parabolic_height,
    sl2_exponent_bound,
    t_grid,
)
from horolab.exceptions import BadIndexError, BadParamsError, RationalInputError
from horolab.numberfield import NumberField

SQRT2 = NumberField((1, 0, -2), 1.414).element([0, 1])
PHI = NumberField((1, -1, -1), 1.618).element([0, 1])


def test_t_grid():
    assert t_grid(100.0, 2.0) == [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0]


class TestNamedPoints:
    def test_identity(self):
        np.testing.assert_array_equal(named_point("identity", 3).entries, np.eye(3))

    def test_parabolic(self):
        assert named_point("parabolic").entries[0, 1] == pytest.approx(math.sqrt(2))

    def test_golden(self):
        assert named_point("golden").entries[1, 0] == pytest.approx(GOLDEN_RATIO)

    def test_cusp(self):
        np.testing.assert_allclose(
            named_point("cusp", 3, 0.5).entries, np.diag([0.5, 2.0, 1.0])
        )

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            named_point("sphere")

    def test_algebraic_forms_match(self):
        for family in ("parabolic", "golden"):
            np.testing.assert_allclose(
                named_algebraic_point(family, 3).matrix(), named_point(family, 3).entries
            )
        assert named_algebraic_point("liouville") is None


def test_liouville_constant():
    assert float(liouville_constant()) == pytest.approx(0.110001, abs=1e-15)
    assert float(liouville_constant(4, 3)) == pytest.approx(1e-24)
    assert float(liouville_constant(1, 2)) == pytest.approx(0.11)


class TestParabolicHeight:
    def test_standard_lattice(self):
        assert parabolic_height(np.eye(3), 1) == pytest.approx(1.0)

    @pytest.mark.parametrize("i", [0, 3])
    def test_bad_index(self, i):
        with pytest.raises(BadIndexError):
            parabolic_height(np.eye(3), i)


class TestDiophantineExponent:
    def test_identity_is_rational(self):
        # a_{-log T} Z^2 contains (T^{-1/2}, 0), so the height is the full rate.
        trace = diophantine_exponent(named_point("identity"), 1, 1e4)
        assert trace.fitted_exponent == pytest.approx(1.0, abs=1e-9)
        assert trace.min_heights == pytest.approx(trace.rates)

    def test_parabolic_point_has_exponent_one(self):
        trace = diophantine_exponent(named_point("parabolic"), 1, 1e6)
        assert trace.fitted_exponent == pytest.approx(1.0, abs=1e-9)
        assert trace.ratios == pytest.approx([1.0] * len(trace.t_grid))

    def test_golden_point_is_badly_approximable(self):
        trace = diophantine_exponent(named_point("golden"), 1, 1e6)
        assert trace.fitted_exponent <= 0.05
        assert trace.window == (1024.0, 1e6)

    def test_liouville_point_sits_between_rational_and_golden(self):
        # 100x - 11 = 1e-4 gives height 1/sqrt(2e-2) against rate 1e3 at T = 1e6.
        trace = diophantine_exponent(named_point("liouville"), 1, 1e6)
        identity = diophantine_exponent(named_point("identity"), 1, 1e6)
        golden = diophantine_exponent(named_point("golden"), 1, 1e6)
        assert max(abs(a - b) for a, b in zip(trace.min_heights, identity.min_heights)) > 1.0
        assert trace.min_heights[-1] == pytest.approx(1.0 / math.sqrt(2e-2), rel=1e-6)
        assert 0.2 <= trace.fitted_exponent <= 0.4
        assert trace.fitted_exponent > golden.fitted_exponent + 0.1

    def test_rates(self):
        trace = diophantine_exponent(named_point("identity"), 1, 100.0, grid_factor=10.0)
        assert trace.t_grid == (10.0, 100.0)
        assert trace.rates == pytest.approx([10.0 ** 0.5, 10.0])

    def test_sl3_second_index(self):
        trace = diophantine_exponent(named_point("golden", 3), 2, 1e4)
        assert 0.0 <= trace.fitted_exponent <= 0.1

    @pytest.mark.parametrize(
        "kwargs,error",
        [
            ({"tmax": 5.0}, BadParamsError),
            ({"tmax": 100.0, "grid_factor": 1.0}, BadParamsError),
            ({"tmax": 100.0, "i": 2}, BadIndexError),
        ],
    )
    def test_bad_params(self, kwargs, error):
        kwargs.setdefault("i", 1)
        with pytest.raises(error):
            diophantine_exponent(named_point("golden"), **kwargs)


class TestContinuedFractions:
    def test_golden_ratio(self):
        assert continued_fraction(GOLDEN_RATIO, 20) == [1] * 20

    def test_rational_stops(self):
        assert continued_fraction(3.25, 10) == [3, 4]

    def test_convergents(self):
        expected = [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8)]
        assert convergents(GOLDEN_RATIO, 6) == expected

    def test_oracle_matches_the_trace(self):
        scales = [(T, h) for T, h in convergent_oracle(GOLDEN_RATIO, 1e6) if T >= 10.0]
        assert len(scales) > 5
        for T, height in scales:
            trace = diophantine_exponent(named_point("golden"), 1, T, grid_factor=T)
            assert trace.min_heights[-1] == pytest.approx(height, rel=1e-6)

    def test_oracle_stops_at_tmax(self):
        assert all(T <= 1e3 for T, _ in convergent_oracle(GOLDEN_RATIO, 1e3))


class TestLiouville:
    @pytest.mark.parametrize(
        "alpha,constant",
        [(SQRT2, 1 / (1 + 2 * math.sqrt(2))), (PHI, 1 / (1 + math.sqrt(5)))],
    )
    def test_quadratic_constants(self, alpha, constant):
        bound = liouville_bound(alpha, 4)
        assert bound.constant == pytest.approx(constant)
        assert bound.exponent == 1
        assert bound.value == pytest.approx(constant / 4)

    @pytest.mark.parametrize("alpha", [SQRT2, PHI])
    def test_sweep_has_no_violations(self, alpha):
        sweep = liouville_sweep(alpha, 500)
        assert sweep.violations == 0
        assert sweep.worst_margin >= 1.0

    def test_best_linear_form(self):
        assert best_linear_form(SQRT2, 5) == pytest.approx(5 * math.sqrt(2) - 7)

    def test_rational_input(self):
        with pytest.raises(RationalInputError):
            liouville_bound(NumberField((1, 0, -2), 1.414).element([3]), 1)

    def test_heights_start_at_one(self):
        with pytest.raises(BadParamsError):
            liouville_bound(SQRT2, 0)


class TestExponentBound:
    def test_quadratic(self):
        bound = sl2_exponent_bound(2)
        assert bound.delta == 0.5
        assert bound.displayed == 0.75
        assert bound.arithmetic == 0.0

    def test_cubic(self):
        bound = sl2_exponent_bound(3)
        assert bound.displayed == pytest.approx(5.0 / 6.0)
        assert bound.arithmetic == pytest.approx(1.0 / 3.0)

    def test_degree_one(self):
        with pytest.raises(BadParamsError):
            sl2_exponent_bound(1)
