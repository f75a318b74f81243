"""Tests for the two-gene network example and its closed-form constants."""

import numpy as np
import pytest

import homdelay as hd
from homdelay.genetic import STRUCTURE


REFERENCE = dict(kappa1=9.0, kappa2=18.0, lambda1=0.25, lambda2=0.5, h=10.0)


@pytest.fixture(scope="module")
def reference():
    return hd.build_example(hd.GeneticNetworkParams(**REFERENCE))


class TestStructure:
    def test_weights_and_degrees(self):
        np.testing.assert_array_equal(STRUCTURE.weights, [1.0, 2.0])
        assert STRUCTURE.p == 5.0
        assert STRUCTURE.mu == 1.0
        assert STRUCTURE.gamma == 4.0
        assert STRUCTURE.gamma >= 2.0 * STRUCTURE.weights.max()


class TestParams:
    def test_each_field_must_be_positive(self):
        for name in ("kappa1", "kappa2", "lambda1", "lambda2", "h"):
            bad = dict(REFERENCE)
            bad[name] = 0.0
            with pytest.raises(ValueError, match=name):
                hd.GeneticNetworkParams(**bad)

    def test_frozen(self):
        params = hd.GeneticNetworkParams(**REFERENCE)
        with pytest.raises(Exception):
            params.kappa1 = 1.0


class TestClosedFormConstants:
    def test_reference_values_exact(self, reference):
        # Closed forms at (9, 18, 0.25, 0.5): every entry is a plain
        # arithmetic combination, so equality holds to 1e-12 or better.
        _, bc = reference
        np.testing.assert_allclose(bc.m, [9.0, 18.5], rtol=1e-12)
        np.testing.assert_allclose(
            bc.eta, [[18.0, 0.0], [0.0, 27.0]], rtol=1e-12
        )
        np.testing.assert_allclose(bc.beta, [4.0, 2.0], rtol=1e-12)
        np.testing.assert_allclose(bc.psi, [[12.0, 0.0], [0.0, 2.0]], rtol=1e-12)
        assert bc.alpha0 == 1.0
        assert abs(bc.alpha1 - 2.0**0.2) <= 1e-12
        assert abs(bc.w - 34.0) <= 1e-12

    def test_provenance_is_analytic(self, reference):
        _, bc = reference
        assert set(bc.provenance) == {
            "m", "eta", "beta", "psi", "alpha0", "alpha1", "w"
        }
        assert all(p.kind == "analytic" for p in bc.provenance.values())

    def test_margin_formula_on_other_parameters(self):
        params = hd.GeneticNetworkParams(
            kappa1=2.0, kappa2=3.0, lambda1=0.1, lambda2=0.2, h=1.0
        )
        _, bc = hd.build_example(params)
        # w = 2*min(2*k1, k2) - 4*max(2*l1, l2) = 2*3 - 4*0.2
        assert bc.w == pytest.approx(5.2, rel=1e-12)
        np.testing.assert_allclose(bc.m, [2.0, 3.2], rtol=1e-12)
        np.testing.assert_allclose(bc.eta, [[4.0, 0.0], [0.0, 4.5]], rtol=1e-12)

    def test_unstable_parameters_raise(self):
        params = hd.GeneticNetworkParams(
            kappa1=1.0, kappa2=1.0, lambda1=1.0, lambda2=1.0, h=1.0
        )
        with pytest.raises(hd.CertificationError, match="margin"):
            hd.build_example(params)


class TestFieldCallbacks:
    def test_field_formula(self, reference):
        model, _ = reference
        x = np.array([0.3, 0.7])
        y = np.array([0.2, 0.4])
        fx = model.f(x, y)
        assert fx[0] == pytest.approx(-9.0 * 0.09 + 0.25 * 0.4, rel=1e-14)
        assert fx[1] == pytest.approx(
            -18.0 * 0.7**1.5 + 0.5 * 0.7 * 0.2, rel=1e-14
        )

    def test_jacobian_matches_finite_differences(self, reference):
        model, _ = reference
        rng = np.random.default_rng(11)
        eps = 1e-6
        for _ in range(5):
            x = 0.2 + rng.random(2)
            y = 0.2 + rng.random(2)
            jac = model.df_dx(x, y)
            for j in range(2):
                step = np.zeros(2)
                step[j] = eps
                col = (model.f(x + step, y) - model.f(x - step, y)) / (2 * eps)
                np.testing.assert_allclose(jac[:, j], col, rtol=1e-6, atol=1e-9)

    def test_lyapunov_derivatives_match_finite_differences(self, reference):
        model, _ = reference
        rng = np.random.default_rng(12)
        eps = 1e-6
        for _ in range(5):
            x = 0.2 + rng.random(2)
            grad = model.dV(x)
            hess = model.d2V(x)
            for j in range(2):
                step = np.zeros(2)
                step[j] = eps
                d = (model.V(x + step) - model.V(x - step)) / (2 * eps)
                assert grad[j] == pytest.approx(d, rel=1e-7, abs=1e-9)
                hcol = (model.dV(x + step) - model.dV(x - step)) / (2 * eps)
                np.testing.assert_allclose(
                    hess[:, j], hcol, rtol=1e-6, atol=1e-9
                )

    def test_batched_shapes(self, reference):
        model, _ = reference
        x = np.abs(np.random.default_rng(13).random((5, 2)))
        y = np.abs(np.random.default_rng(14).random((5, 2)))
        assert model.f(x, y).shape == (5, 2)
        assert model.df_dx(x, y).shape == (5, 2, 2)
        assert model.V(x).shape == (5,)
        assert model.dV(x).shape == (5, 2)
        assert model.d2V(x).shape == (5, 2, 2)

    def test_half_power_guarded_at_zero(self, reference):
        model, _ = reference
        fx = model.f(np.array([0.1, 0.0]), np.array([0.2, 0.3]))
        assert np.all(np.isfinite(fx))
        assert fx[1] == 0.0
        jac = model.df_dx(np.array([0.1, 0.0]), np.array([0.2, 0.3]))
        assert np.all(np.isfinite(jac))

    def test_model_is_homogeneous(self, reference):
        model, _ = reference
        report = hd.check_homogeneity(model, samples=200, tol=1e-10, seed=5)
        assert report.passed


class TestScenario:
    def test_reference_scenario(self):
        scen = hd.figure1_scenario()
        assert scen.params == hd.GeneticNetworkParams(**REFERENCE)
        assert scen.horizon == 1000.0
        assert scen.history.h == 10.0
        np.testing.assert_array_equal(scen.history(0.0), [5e-11, 5e-11])
        np.testing.assert_array_equal(scen.history(-10.0), [5e-11, 5e-11])
