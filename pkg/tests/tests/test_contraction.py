import math
from fractions import Fraction

import pytest

from horolab.contraction import (
    adaptive_empirical_ratio,
    delta_max,
    empirical_ratio,
    expansion_envelope,
    find_threshold,
    improved_decay_exponent,
    probe_vectors,
    theoretical_bound,
    verify_em_condition,
)
from horolab.exceptions import NoNegativeWeightError, ZeroVectorError
from horolab.linalg import CartanFlow, horospherical_chart
from horolab.quadrature import QuadratureScheme
from horolab.representation import basis_vector, weight_decomposition

SL2_FLOW = CartanFlow((Fraction(1, 2), Fraction(-1, 2)))
SL2_CHART = horospherical_chart(SL2_FLOW)
SL2_REP = weight_decomposition(1, SL2_FLOW)


def test_delta_max_sl2():
    assert delta_max(SL2_REP, 1.0) == pytest.approx(1.0)
    assert delta_max(SL2_REP, 0.5) == pytest.approx(0.5)


def test_theoretical_bound_sl2():
    bound = theoretical_bound(SL2_REP, 0.5, 1.0, R=4.0)
    assert bound.tau_exponent == pytest.approx(-1.0 / 3.0)
    assert bound.decay_exponent == pytest.approx(-1.0 / 12.0)
    assert bound.tau == pytest.approx(4.0 ** (-1.0 / 3.0))
    assert bound.bound == pytest.approx(4.0 ** (-1.0 / 12.0))


def test_improved_exponent_uses_reciprocal_order():
    assert improved_decay_exponent(SL2_REP, 0.4, 2) == pytest.approx(
        theoretical_bound(SL2_REP, 0.4, 0.5).decay_exponent
    )


def test_trivial_rep_has_no_negative_weight():
    with pytest.raises(NoNegativeWeightError):
        delta_max(weight_decomposition(2, SL2_FLOW), 1.0)


class TestEmpiricalRatio:
    def test_highest_weight_vector_is_exact(self):
        # rho(h) e_0 = e_0, so the ratio is R^{-delta/2}.
        v = basis_vector(SL2_REP, 0)
        ratio = empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 4.0, 0.5, v)
        assert ratio == pytest.approx(4.0 ** -0.25)

    def test_accepts_plain_coefficients(self):
        assert empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 4.0, 0.5, [2.0, 0.0]) == (
            pytest.approx(4.0 ** -0.25)
        )

    def test_zero_vector(self):
        with pytest.raises(ZeroVectorError):
            empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 4.0, 0.5, [0.0, 0.0])

    @pytest.mark.parametrize("c", [7.5, -0.01, 1e3])
    def test_scale_invariant(self, c):
        scheme = QuadratureScheme.gauss_legendre(1, 16, 4)
        v = [0.3, -1.2]
        ratio = empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 16.0, 0.5, v, scheme)
        scaled = [c * x for x in v]
        assert empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 16.0, 0.5, scaled, scheme) == (
            pytest.approx(ratio, rel=1e-10)
        )

    @pytest.mark.parametrize("v", [(0.0, 1.0), (-0.5, 1.0), (1.0, 1.0)])
    def test_gauss_agrees_with_adaptive(self, v):
        scheme = QuadratureScheme.gauss_legendre(1, 64, 16)
        gauss = empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 16.0, 0.5, v, scheme)
        adaptive = adaptive_empirical_ratio(SL2_REP, SL2_CHART, SL2_FLOW, 16.0, 0.5, v)
        assert abs(gauss - adaptive) <= 1e-6 * adaptive

    def test_adaptive_needs_one_dimensional_chart(self):
        flow = CartanFlow((Fraction(1, 2), Fraction(0), Fraction(-1, 2)))
        rep = weight_decomposition(1, flow)
        chart = horospherical_chart(flow)
        with pytest.raises(ValueError):
            adaptive_empirical_ratio(rep, chart, flow, 4.0, 0.5, [0, 0, 1])


class TestFindThreshold:
    def test_smallest_contracting_tail(self):
        assert find_threshold([2, 4, 8, 16], [1.2, 0.95, 1.01, 0.9]) == 16

    def test_unsorted_input(self):
        assert find_threshold([8, 2, 4], [0.8, 1.2, 0.9]) == 4

    def test_no_threshold(self):
        assert find_threshold([2, 4], [0.9, 1.1]) is None


def test_probe_vectors_include_the_weight_basis():
    vectors = probe_vectors(SL2_REP, 10, seed=0)
    assert vectors.shape == (12, 2)
    assert vectors[-2:].tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_expansion_envelope_sl2():
    scheme = QuadratureScheme.gauss_legendre(1, 16)
    # rho(a_{log 4} h) = [[2, 2t], [0, 1/2]] has norm at least 2.
    assert expansion_envelope(SL2_FLOW, SL2_CHART, 4.0, scheme) >= 2.0


class TestVerifyEMCondition:
    R_VALUES = [2, 4, 8, 16, 32, 64, 128, 256]

    def test_sl2_contracts_for_large_R(self):
        report = verify_em_condition(SL2_FLOW, self.R_VALUES, 0.5, samples=100)
        assert report.contracts
        assert 16.0 <= report.threshold <= 128.0
        assert report.global_c[0] > 1.0
        assert report.global_c[-1] < 1.0
        assert report.warnings == []
        assert report.delta_max == {"wedge1": pytest.approx(1.0)}
        assert len(report.reports) == len(self.R_VALUES)

    def test_constant_decays_like_the_theory(self):
        report = verify_em_condition(SL2_FLOW, [1024, 4096], 0.5, samples=50)
        low, high = report.global_c
        # C(R) ~ R^{-1/4} for delta = 1/2 once the orbit has spread out.
        assert math.log(high / low) / math.log(4.0) == pytest.approx(-0.25, abs=0.05)

    def test_delta_at_delta_max_warns(self):
        report = verify_em_condition(SL2_FLOW, [4, 8], 1.0, samples=20)
        assert report.warnings == ["delta=1.0 is not below delta_max=1.0 for wedge1"]

    def test_sl3_reports_each_wedge(self):
        flow = CartanFlow((Fraction(1, 2), Fraction(0), Fraction(-1, 2)))
        report = verify_em_condition(
            flow, [4, 16], 0.2, samples=32, scheme=QuadratureScheme.gauss_legendre(3, 8)
        )
        assert {r.rep for r in report.reports} == {"wedge1", "wedge2"}
        assert set(report.orbit_floor) == {"wedge1", "wedge2"}
        assert len(report.global_c) == 2
