import math

import numpy as np
import pytest

from horolab import seeding
from horolab.exceptions import ZeroSupError
from horolab.sublevel import (
    BoxPolynomial,
    SublevelQuery,
    chebyshev_T,
    empirical_sublevel,
    ladder_fractions,
    random_polynomial,
    remez_sup_bound,
    sublevel_bound,
    sublevel_fractions,
    sup_norm_estimate,
)


def _identity(points):
    return points[:, 0]


@pytest.mark.parametrize("d", [0, 1, 2, 5])
def test_chebyshev_on_cosines(d):
    theta = np.linspace(0.0, math.pi, 7)
    np.testing.assert_allclose(chebyshev_T(d, np.cos(theta)), np.cos(d * theta), atol=1e-12)


def test_chebyshev_scalar():
    assert chebyshev_T(3, 0.5) == pytest.approx(-1.0)
    assert chebyshev_T(2, 3.0) == pytest.approx(17.0)


class TestSublevelBound:
    def test_value(self):
        query = SublevelQuery(dim=1, degree=2, epsilon=0.01, sup_norm=1.0)
        assert sublevel_bound(query) == pytest.approx(0.4)

    def test_capped_at_one(self):
        query = SublevelQuery(dim=2, degree=1, epsilon=0.5, sup_norm=1.0)
        assert sublevel_bound(query) == 1.0

    def test_zero_sup(self):
        with pytest.raises(ZeroSupError):
            sublevel_bound(SublevelQuery(dim=1, degree=1, epsilon=0.1, sup_norm=0.0))


def test_remez_sup_bound_linear():
    # |x - 1/2| < eps on a fraction 2 eps of the interval; sup is 1/2.
    epsilon = 0.05
    assert remez_sup_bound(epsilon, 2 * epsilon, 1, 1) == pytest.approx(
        epsilon * (2.0 - 2 * epsilon) / (2 * epsilon)
    )


@pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5])
def test_remez_sup_bound_fraction_range(fraction):
    with pytest.raises(ValueError):
        remez_sup_bound(0.1, fraction, 1, 2)


def test_empirical_sublevel_on_midpoints():
    assert empirical_sublevel(_identity, 0.25, 100) == pytest.approx(0.25)


def test_empirical_sublevel_needs_two_points():
    with pytest.raises(ValueError):
        empirical_sublevel(_identity, 0.25, 1)


def test_fractions_agree_with_single_thresholds():
    def f(points):
        return points[:, 0] * points[:, 1] - 0.2

    epsilons = [0.01, 0.05, 0.2]
    fractions = sublevel_fractions(f, epsilons, 40, dim=2)
    for epsilon, fraction in zip(epsilons, fractions):
        assert fraction == pytest.approx(empirical_sublevel(f, epsilon, 40, dim=2))


def test_vector_valued_functions_use_the_norm():
    def f(points):
        return np.stack([points[:, 0], points[:, 0]], axis=-1)

    assert empirical_sublevel(f, math.sqrt(2) * 0.5, 10) == pytest.approx(0.5)


def test_sup_norm_estimate_is_polished():
    estimate = sup_norm_estimate(lambda p: p[:, 0] * (1.0 - p[:, 0]), 1, resolution=64)
    assert estimate.value == pytest.approx(0.25, abs=1e-6)
    assert estimate.argmax[0] == pytest.approx(0.5, abs=1e-3)
    assert estimate.resolution == 64


class TestRandomPolynomial:
    def test_monomials_up_to_degree(self):
        poly = random_polynomial(seeding.generator(1, "remez", 0), 2, 3)
        assert poly.exponents.shape == (10, 2)
        assert poly.exponents.sum(axis=1).max() == 3
        assert poly.dim == 2

    def test_same_stream_same_polynomial(self):
        first = random_polynomial(seeding.generator(5, "remez", 2), 1, 4)
        second = random_polynomial(seeding.generator(5, "remez", 2), 1, 4)
        np.testing.assert_array_equal(first.coefficients, second.coefficients)

    def test_evaluation(self):
        poly = random_polynomial(seeding.generator(1, "remez", 0), 1, 2)
        x = np.array([[0.3]])
        expected = sum(c * 0.3 ** e[0] for c, e in zip(poly.coefficients, poly.exponents))
        assert poly(x)[0] == pytest.approx(expected)

    @pytest.mark.parametrize("dim,degree", [(1, 1), (1, 4), (2, 2), (2, 3)])
    def test_sublevel_bound_holds(self, dim, degree):
        resolution = 256 if dim == 1 else 64
        for index in range(5):
            poly = random_polynomial(seeding.generator(9, "remez", index), dim, degree)
            sup = sup_norm_estimate(poly, dim, resolution=32).value
            for epsilon in (1e-2, 1e-1):
                query = SublevelQuery(dim=dim, degree=degree, epsilon=epsilon, sup_norm=sup)
                measured = empirical_sublevel(poly, epsilon, resolution, dim)
                assert measured <= sublevel_bound(query)


class TestLadderFractions:
    def test_thresholds_are_relative_to_the_sup(self):
        sup, epsilons, fractions = ladder_fractions(
            lambda p: p[:, 0] * (1.0 - p[:, 0]), [0.1, 0.5], 1000
        )
        assert sup.value == pytest.approx(0.25, abs=1e-6)
        np.testing.assert_allclose(epsilons, [0.025, 0.125], rtol=1e-5)
        # t(1 - t) < r/4 off a centred interval of length sqrt(1 - r).
        expected = [1.0 - math.sqrt(0.9), 1.0 - math.sqrt(0.5)]
        np.testing.assert_allclose(fractions, expected, atol=2e-3)

    @pytest.mark.parametrize("dim,degree", [(1, 3), (2, 2)])
    def test_scaling_keeps_the_fractions(self, dim, degree):
        poly = random_polynomial(seeding.generator(3, "remez", dim), dim, degree)
        scaled = BoxPolynomial(
            exponents=poly.exponents, coefficients=10.0 * poly.coefficients, degree=degree
        )
        resolution = 500 if dim == 1 else 60
        ladder = [1e-3, 1e-2, 0.1, 0.5]
        sup, _, fractions = ladder_fractions(poly, ladder, resolution, dim)
        scaled_sup, _, scaled_fractions = ladder_fractions(scaled, ladder, resolution, dim)
        assert scaled_sup.value == pytest.approx(10.0 * sup.value, rel=1e-5)
        np.testing.assert_allclose(scaled_fractions, fractions, atol=2.0 / resolution ** dim)

    def test_zero_function(self):
        with pytest.raises(ZeroSupError):
            ladder_fractions(lambda p: np.zeros(len(p)), [0.1], 10)
