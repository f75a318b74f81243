"""Tests for the monomial-term model builder.

The main equivalence check rebuilds the two-gene network from term lists
and compares every callback (and a full trajectory) against the
closed-form implementation.
"""

import numpy as np
import pytest

import homdelay as hd
from homdelay.genetic import STRUCTURE

M = hd.Monomial


def genetic_terms(k1=9.0, k2=18.0, l1=0.25, l2=0.5):
    f_terms = [
        [M(-k1, (2, 0), (0, 0)), M(l1, (0, 0), (0, 1))],
        [M(-k2, (0, 1.5), (0, 0)), M(l2, (0, 1), (1, 0))],
    ]
    V_terms = [M(1.0, (4, 0), (0, 0)), M(1.0, (0, 2), (0, 0))]
    return f_terms, V_terms


@pytest.fixture(scope="module")
def monomial_genetic():
    f_terms, V_terms = genetic_terms()
    return hd.build_monomial_model(
        STRUCTURE, 10.0, f_terms, V_terms, domain=hd.NONNEGATIVE_ORTHANT
    )


@pytest.fixture(scope="module")
def closed_form_genetic():
    params = hd.GeneticNetworkParams(
        kappa1=9.0, kappa2=18.0, lambda1=0.25, lambda2=0.5, h=10.0
    )
    model, _ = hd.build_example(params)
    return model


class TestMonomialTerm:
    def test_coerces_exponents_to_floats(self):
        t = M(2, (1, 0), (0, 3))
        assert t.x_powers == (1.0, 0.0)
        assert t.y_powers == (0.0, 3.0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(hd.ConfigError):
            M(1.0, (1, 0), (0,))

    def test_negative_exponent_rejected(self):
        with pytest.raises(hd.ConfigError):
            M(1.0, (-1, 0), (0, 0))


class TestEquivalenceWithClosedForm:
    def test_callbacks_agree_on_random_batch(
        self, monomial_genetic, closed_form_genetic
    ):
        rng = np.random.default_rng(21)
        x = rng.random((40, 2))
        y = rng.random((40, 2))
        a, b = monomial_genetic, closed_form_genetic
        np.testing.assert_allclose(a.f(x, y), b.f(x, y), rtol=1e-12)
        np.testing.assert_allclose(a.df_dx(x, y), b.df_dx(x, y), rtol=1e-12)
        np.testing.assert_allclose(a.V(x), b.V(x), rtol=1e-12)
        np.testing.assert_allclose(a.dV(x), b.dV(x), rtol=1e-12)
        np.testing.assert_allclose(a.d2V(x), b.d2V(x), rtol=1e-12)

    def test_trajectories_agree(self, monomial_genetic, closed_form_genetic):
        phi = hd.HistoryFunction.constant([5e-11, 5e-11], h=10.0)
        ta = hd.integrate(monomial_genetic, phi, T=100.0, steps_per_delay=32)
        tb = hd.integrate(closed_form_genetic, phi, T=100.0, steps_per_delay=32)
        np.testing.assert_allclose(ta.states, tb.states, rtol=1e-12, atol=1e-30)

    def test_model_is_homogeneous(self, monomial_genetic):
        report = hd.check_homogeneity(monomial_genetic, samples=200, tol=1e-10, seed=6)
        assert report.passed


@pytest.fixture(scope="module")
def cross_model():
    """Two coupled cubics, homogeneous of degree 2 for unit weights."""
    s = hd.HomogeneousStructure(n=2, r=(1.0, 1.0), p=2.0, mu=2.0, gamma=2.0)
    f_terms = [
        [M(-1.0, (3, 0), (0, 0)), M(-1.0, (1, 2), (0, 0)),
         M(0.5, (0, 0), (1, 2))],
        [M(-1.0, (0, 3), (0, 0)), M(0.25, (2, 0), (0, 1))],
    ]
    V_terms = [M(1.0, (2, 0), (0, 0)), M(1.0, (0, 2), (0, 0))]
    return hd.build_monomial_model(s, 1.0, f_terms, V_terms)


class TestFullSpaceModel:
    def test_signs_on_negative_states(self, cross_model):
        x = np.array([-2.0, 1.0])
        y = np.array([1.0, -1.0])
        fx = cross_model.f(x, y)
        assert fx[0] == pytest.approx(-(-8.0) - (-2.0) + 0.5, rel=1e-14)
        assert fx[1] == pytest.approx(-1.0 + 0.25 * 4.0 * (-1.0), rel=1e-14)

    def test_jacobian_matches_finite_differences(self, cross_model):
        rng = np.random.default_rng(22)
        eps = 1e-6
        for _ in range(5):
            x = rng.standard_normal(2)
            y = rng.standard_normal(2)
            jac = cross_model.df_dx(x, y)
            for j in range(2):
                step = np.zeros(2)
                step[j] = eps
                col = (cross_model.f(x + step, y) - cross_model.f(x - step, y)) / (2 * eps)
                np.testing.assert_allclose(jac[:, j], col, rtol=1e-5, atol=1e-8)

    def test_lyapunov_derivatives(self, cross_model):
        x = np.array([1.5, -2.0])
        assert cross_model.V(x) == pytest.approx(1.5**2 + 4.0, rel=1e-14)
        np.testing.assert_allclose(cross_model.dV(x), [3.0, -4.0], rtol=1e-14)
        np.testing.assert_allclose(
            cross_model.d2V(x), [[2.0, 0.0], [0.0, 2.0]], rtol=1e-14
        )

    def test_model_is_homogeneous(self, cross_model):
        report = hd.check_homogeneity(cross_model, samples=200, tol=1e-10, seed=7)
        assert report.passed


class TestValidation:
    def test_wrong_field_degree_rejected(self):
        f_terms = [
            [M(-1.0, (3, 0), (0, 0))],  # weighted degree 3, expected 2
            [M(-1.0, (0, 1.5), (0, 0))],
        ]
        V_terms = [M(1.0, (4, 0), (0, 0))]
        with pytest.raises(hd.ConfigError, match=r"f\[0\]"):
            hd.build_monomial_model(
                STRUCTURE, 1.0, f_terms, V_terms, domain=hd.NONNEGATIVE_ORTHANT
            )

    def test_wrong_shape_degree_rejected(self):
        f_terms, _ = genetic_terms()
        with pytest.raises(hd.ConfigError, match="V"):
            hd.build_monomial_model(
                STRUCTURE, 1.0, f_terms, [M(1.0, (3, 0), (0, 0))],
                domain=hd.NONNEGATIVE_ORTHANT,
            )

    def test_shape_function_may_not_use_delayed_state(self):
        f_terms, _ = genetic_terms()
        with pytest.raises(hd.ConfigError, match="delayed"):
            hd.build_monomial_model(
                STRUCTURE, 1.0, f_terms, [M(1.0, (2, 0), (0, 1))],
                domain=hd.NONNEGATIVE_ORTHANT,
            )

    def test_fractional_exponents_need_orthant(self):
        f_terms, V_terms = genetic_terms()
        with pytest.raises(hd.ConfigError, match="fractional"):
            hd.build_monomial_model(STRUCTURE, 1.0, f_terms, V_terms)

    def test_component_count_must_match(self):
        f_terms, V_terms = genetic_terms()
        with pytest.raises(hd.ConfigError, match="components"):
            hd.build_monomial_model(
                STRUCTURE, 1.0, f_terms[:1], V_terms,
                domain=hd.NONNEGATIVE_ORTHANT,
            )

    def test_term_variable_count_must_match(self):
        s = hd.HomogeneousStructure(n=1, r=(1.0,), p=2.0, mu=2.0, gamma=2.0)
        with pytest.raises(hd.ConfigError, match="variables"):
            hd.build_monomial_model(
                s, 1.0, [[M(-1.0, (3, 0), (0, 0))]], [M(1.0, (2,), (0,))]
            )

    def test_unknown_domain_rejected(self):
        f_terms, V_terms = genetic_terms()
        with pytest.raises(hd.ConfigError, match="domain"):
            hd.build_monomial_model(
                STRUCTURE, 1.0, f_terms, V_terms, domain="half-plane"
            )
