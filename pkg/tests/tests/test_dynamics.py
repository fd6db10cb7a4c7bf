import math
from fractions import Fraction

import numpy as np
import pytest
from django.test import override_settings

from horolab.dynamics import (
    bad_set_measure,
    default_flow,
    equidist_error,
    fit_decay_window,
    folner_compose,
    horocycle_scheme,
    horospherical_average,
    mass_condition,
    mean_ergodic_bound,
    split_average,
    translated_average,
    verify_drift,
)
from horolab.exceptions import BadParamsError, BudgetExceededError, NoDecayWindowError
from horolab.lattice import Lattice, drift_parameters
from horolab.linalg import cartan_matrix, horospherical_chart
from horolab.observables import (
    ConstantObservable,
    GridObservable,
    HeightObservable,
    SiegelObservable,
)
from horolab.quadrature import QuadratureScheme


def test_default_flow():
    assert default_flow(2).weights == (Fraction(1, 2), Fraction(-1, 2))
    assert default_flow(4).weights == (Fraction(1, 2), 0, 0, Fraction(-1, 2))


def test_horocycle_scheme_density():
    scheme = horocycle_scheme(32.0, 16, order=64)
    assert scheme.panels == 8
    assert scheme.size == 512


class TestAverages:
    def test_constants_average_to_themselves(self):
        f = ConstantObservable(3.0)
        x = Lattice.standard(2)
        assert translated_average(f, x, 8.0) == pytest.approx(3.0)
        assert horospherical_average(f, x, 8.0) == pytest.approx(3.0)

    def test_translated_average_of_the_height(self):
        # a_{log R} h Z^2 contains (R^{1/2}, 0) and (R^{1/2} t, R^{-1/2}); for R = 4 and
        # t in [0, 1] the second vector is never shorter than 1/2.
        f = HeightObservable(delta=1.0, cap=100.0)
        value = translated_average(f, Lattice.standard(2), 4.0)
        assert 1.0 <= value <= 2.0

    def test_horocycle_averages_are_periodic(self):
        # h Z^2 only depends on t mod 1, so integer boxes see whole periods.
        f = SiegelObservable(2)
        x = Lattice.standard(2)
        first = horospherical_average(f, x, 2.0, horocycle_scheme(2.0, 64))
        second = horospherical_average(f, x, 5.0, horocycle_scheme(5.0, 64))
        assert first == pytest.approx(second, rel=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    def test_horospherical_average_renormalizes(self, n):
        # B_R f(x) = A_R f(a_{-log R} x)
        upper = np.eye(n) + np.triu(np.full((n, n), 0.3), 1)
        lower = np.eye(n) + np.tril(np.full((n, n), -0.2), -1)
        x = Lattice(upper @ lower)
        f = HeightObservable(delta=1.0, cap=50.0)
        R = 6.0
        flow = default_flow(n)
        scheme = QuadratureScheme.gauss_legendre(horospherical_chart(flow).dim, 4)
        pulled_back = Lattice(cartan_matrix(flow, -math.log(R)) @ x.basis)
        assert horospherical_average(f, x, R, scheme) == pytest.approx(
            translated_average(f, pulled_back, R, scheme), rel=1e-9
        )

    def test_split_average_of_a_constant(self):
        f = ConstantObservable(1.5)
        scheme = QuadratureScheme.gauss_legendre(1, 8)
        assert split_average(f, Lattice.standard(2), 4.0, 0.5, scheme) == pytest.approx(1.5)

    @pytest.mark.parametrize("tau", [0.0, 1.0])
    def test_split_exponent_range(self, tau):
        with pytest.raises(BadParamsError):
            split_average(ConstantObservable(), Lattice.standard(2), 4.0, tau)


class TestFolnerCompose:
    def test_radius_is_geometric(self):
        composition = folner_compose(1, 2, 3)
        assert composition.radius == Fraction(7, 4)
        assert composition.closed_form == composition.radius
        assert composition.contained is True

    @pytest.mark.parametrize("t", [2, 3, 4, 10])
    def test_long_compositions_stay_inside(self, t):
        composition = folner_compose(Fraction(1, 3), t, 50)
        assert composition.radius == composition.closed_form
        assert composition.radius < Fraction(2, 3)

    def test_small_factor_is_not_checked(self):
        assert folner_compose(1, Fraction(3, 2), 4).contained is None

    @pytest.mark.parametrize("t,m", [(1, 3), (2, 0)])
    def test_bad_params(self, t, m):
        with pytest.raises(BadParamsError):
            folner_compose(1, t, m)


class TestBadSetMeasure:
    def test_markov_bound_holds(self):
        result = bad_set_measure(Lattice.standard(2), 8.0, 0.5, 0.6, 1, cdelta=0.9)
        assert result.holds
        assert 0.0 <= result.empirical <= 1.0
        assert result.contraction_bound == pytest.approx(0.9 / 0.6)
        assert result.nodes == 1024

    def test_threshold_must_be_positive(self):
        with pytest.raises(BadParamsError):
            bad_set_measure(Lattice.standard(2), 8.0, 0.5, 0.0, 1)

    def test_cusp_lattice(self):
        # a_{log 16} h diag(0.05, 20) Z^2 always holds (0.2, 0) and nothing shorter.
        y = Lattice(np.diag([0.05, 20.0]))
        scheme = QuadratureScheme.gauss_legendre(1, 100, 100)
        result = bad_set_measure(y, 16.0, 0.5, 1.0, 1, cdelta=0.8, scheme=scheme)
        assert result.nodes == 10 ** 4
        assert result.empirical == 0.0
        assert result.markov_bound == pytest.approx(0.2 ** 0.5)
        assert result.contraction_bound == pytest.approx(0.8 * 20.0 ** -0.5)
        assert result.holds


class TestFitDecayWindow:
    R_VALUES = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]

    def test_clean_power_law(self):
        errors = [R ** -0.5 for R in self.R_VALUES]
        start, stop, gamma, residual = fit_decay_window(self.R_VALUES, errors)
        assert (start, stop) == (0, 6)
        assert gamma == pytest.approx(0.5)
        assert residual == pytest.approx(0.0, abs=1e-12)

    def test_plateau_is_cut_off(self):
        errors = [R ** -1.0 for R in self.R_VALUES[:4]] + [1.0 / 16.0] * 2
        start, stop, gamma, _ = fit_decay_window(self.R_VALUES, errors)
        assert (start, stop) == (0, 4)
        assert gamma == pytest.approx(1.0)

    def test_flat_errors_have_no_window(self):
        assert fit_decay_window(self.R_VALUES, [0.3] * 6) is None


class TestEquidistError:
    def test_exact_observable(self):
        report = equidist_error(ConstantObservable(2.0), Lattice.standard(2), [2, 4, 8])
        assert report.gamma is None
        assert [row.error for row in report.rows] == pytest.approx([0.0, 0.0, 0.0])

    def test_closed_horocycle_has_no_decay_window(self):
        with pytest.raises(NoDecayWindowError) as e_info:
            equidist_error(SiegelObservable(2), Lattice.standard(2), [2, 4, 8, 16, 32])
        assert len(e_info.value.table) == 5
        assert not any(row.in_window for row in e_info.value.table)

    def test_needs_a_mean(self):
        f = GridObservable([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(BadParamsError):
            equidist_error(f, Lattice.standard(2), [2, 4, 8])

    def test_split_errors_for_constants(self):
        report = equidist_error(
            ConstantObservable(), Lattice.standard(2), [2, 4], nodes_per_unit=4, tau=0.5
        )
        assert [row.split_error for row in report.rows] == pytest.approx([0.0, 0.0])


def test_mean_ergodic_bound():
    assert mean_ergodic_bound(0.1, 4.0, 0.5) == pytest.approx(25.0)


def test_mass_condition():
    result = mass_condition(Lattice.standard(2), 4.0, gamma=0.1, s=0.5, radius=0.1)
    assert result.lhs == pytest.approx(0.1 ** 3)
    assert result.rhs == pytest.approx(4.0 ** -0.8)
    assert result.holds is (result.lhs > result.rhs)


class TestVerifyDrift:
    PARAMS = drift_parameters(2, cdelta=0.9, delta0=0.9, omega=10.0)

    def test_drift_holds_from_the_standard_lattice(self):
        certificate = verify_drift(
            Lattice.standard(2), 8.0, self.PARAMS, steps=3, paths=256, seed=1
        )
        assert certificate.complete
        assert [step.m for step in certificate.per_step] == [1, 2, 3]
        assert certificate.u0 == pytest.approx(2.0 + self.PARAMS.epsilon)
        assert certificate.bound_holds
        assert certificate.tight
        assert certificate.passes
        assert certificate.mass_in_k == 1.0

    def test_paths_depend_only_on_seed(self):
        x = Lattice.standard(2)
        first = verify_drift(x, 8.0, self.PARAMS, steps=3, paths=64, seed=2)
        second = verify_drift(x, 8.0, self.PARAMS, steps=3, paths=64, seed=2)
        assert [s.measured for s in first.per_step] == [s.measured for s in second.per_step]

    def test_cusp_point_contracts(self):
        x = Lattice(np.diag([0.05, 20.0]))
        certificate = verify_drift(x, 8.0, self.PARAMS, steps=2, paths=256)
        assert certificate.bound_holds
        assert certificate.per_step[0].measured < certificate.u0

    @override_settings(HOROLAB={"DRIFT_BUDGET": 2})
    def test_budget_keeps_partial_certificate(self):
        with pytest.raises(BudgetExceededError) as e_info:
            verify_drift(Lattice.standard(2), 8.0, self.PARAMS, steps=5, paths=32)
        certificate = e_info.value.certificate
        assert not certificate.complete
        assert [step.m for step in certificate.per_step] == [1, 2]
