import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import homdelay as hd
from homdelay.errors import CertificationError
from homdelay.homogeneity import (
    estimate_growth_bounds,
    estimate_jacobian_bounds,
    estimate_lyapunov_bounds,
    exponent_partition,
    finite_difference_gradient,
)

GENETIC = hd.HomogeneousStructure(n=2, r=(1.0, 2.0), p=5.0, mu=1.0, gamma=4.0)


class TestStructureValidation:
    def test_weights_property(self):
        assert np.array_equal(GENETIC.weights, [1.0, 2.0])

    @pytest.mark.parametrize("kwargs", [
        dict(n=2, r=(1.0, -2.0), p=5.0, mu=1.0, gamma=4.0),
        dict(n=2, r=(1.0, 2.0), p=0.5, mu=1.0, gamma=4.0),
        dict(n=2, r=(1.0, 2.0), p=5.0, mu=0.0, gamma=4.0),
        dict(n=2, r=(1.0, 2.0), p=5.0, mu=1.0, gamma=3.0),  # gamma < 2*max r
        dict(n=3, r=(1.0, 2.0), p=5.0, mu=1.0, gamma=4.0),  # wrong length
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            hd.HomogeneousStructure(**kwargs)


class TestNormAndDilation:
    def test_reference_value(self):
        # (|1|^(5/1) + |1|^(5/2))^(1/5) = 2^(1/5)
        assert hd.hom_norm(np.array([1.0, 1.0]), GENETIC) == pytest.approx(
            2.0 ** 0.2, rel=1e-15)

    def test_dilation_scales_componentwise(self):
        out = hd.dilate(np.array([1.0, 1.0]), 2.0, GENETIC)
        assert np.allclose(out, [2.0, 4.0], rtol=1e-15)

    def test_dilation_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            hd.dilate(np.array([1.0, 1.0]), 0.0, GENETIC)

    # component magnitudes are kept out of (0, 1e-20) so no intermediate
    # power drops into the subnormal range, where the identity only holds
    # to the absolute precision loss of the hardware
    _component = st.one_of(
        st.just(0.0),
        st.floats(1e-20, 10.0, allow_nan=False),
        st.floats(-10.0, -1e-20, allow_nan=False),
    )

    @given(x1=_component, x2=_component,
           log_eps=st.floats(-3.0, 3.0, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_norm_is_degree_one_under_dilation(self, x1, x2, log_eps):
        x = np.array([x1, x2])
        eps = 10.0 ** log_eps
        lhs = hd.hom_norm(hd.dilate(x, eps, GENETIC), GENETIC)
        rhs = eps * hd.hom_norm(x, GENETIC)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    def test_norm_batched(self):
        pts = np.array([[1.0, 1.0], [2.0, 4.0]])
        norms = hd.hom_norm(pts, GENETIC)
        assert norms.shape == (2,)
        assert norms[1] == pytest.approx(2.0 * norms[0], rel=1e-14)


class TestExponentPartition:
    def test_genetic_structure_has_no_negative_exponents(self):
        r1, r2 = exponent_partition(GENETIC)
        assert sorted(r1) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert r2 == []

    def test_spread_weights_split(self):
        s = hd.HomogeneousStructure(n=2, r=(1.0, 3.0), p=6.0, mu=1.0, gamma=6.0)
        r1, r2 = exponent_partition(s)
        assert (0, 1) in r2  # mu + r1 - r2 = -1
        assert (1, 0) in r1


class TestHomogeneityCheck:
    def test_genetic_network_passes(self, figure1):
        _, model, _ = figure1
        report = hd.check_homogeneity(model, samples=300, tol=1e-10, seed=7)
        assert report.passed
        assert report.samples == 300

    def test_wrong_degree_fails(self, figure1):
        _, model, _ = figure1
        bad = dataclasses.replace(
            model, structure=hd.HomogeneousStructure(n=2, r=(1.0, 2.0), p=5.0,
                                                     mu=2.0, gamma=4.0))
        report = hd.check_homogeneity(bad, samples=100, tol=1e-10, seed=7)
        assert not report.passed
        assert report.worst_field_residual > 1e-3


@pytest.fixture(scope="module")
def sampled(figure1):
    _, model, bc = figure1
    grid = hd.SamplingSpec(samples=20_000, seed=0)
    return hd.sampled_bound_constants(model, grid, safety=1.0), bc


class TestSampledBounds:
    """Light version of the acceptance oracle: the corner enrichment must
    hit axis maximizers exactly, and safety=1 estimates may never cross
    the analytic values on the conservative side."""

    def test_growth_bounds_band(self, sampled):
        est, bc = sampled
        assert est.m[0] == pytest.approx(9.0, rel=1e-12)  # axis maximizer
        assert 0.95 * bc.m[1] <= est.m[1] <= bc.m[1]

    def test_jacobian_bounds_hit_axis_maxima(self, sampled):
        est, bc = sampled
        assert est.eta[0, 0] == pytest.approx(18.0, rel=1e-12)
        assert est.eta[1, 1] == pytest.approx(27.0, rel=1e-12)
        assert est.eta[0, 1] == 0.0 and est.eta[1, 0] == 0.0

    def test_shape_function_bounds(self, sampled):
        est, bc = sampled
        assert np.all(est.beta <= bc.beta * (1 + 1e-12))
        assert np.all(est.beta >= 0.95 * bc.beta)
        assert est.alpha0 >= 1.0  # min-type: sampled over-estimates
        assert est.alpha1 <= bc.alpha1 * (1 + 1e-12)
        assert bc.w <= est.w <= 1.05 * bc.w

    def test_overrides_take_precedence(self, figure1):
        _, model, _ = figure1
        grid = hd.SamplingSpec(samples=256, seed=0)
        est = hd.sampled_bound_constants(model, grid, safety=1.0,
                                         overrides={"w": 34.0, "m": (9.0, 18.5)})
        assert est.w == 34.0
        assert np.array_equal(est.m, [9.0, 18.5])
        assert est.provenance["w"].kind == "analytic"
        assert est.provenance["alpha1"].kind == "sampled"

    def test_prefix_monotone_under_refinement(self, figure1):
        _, model, _ = figure1
        small = estimate_growth_bounds(model, hd.SamplingSpec(samples=1000, seed=3),
                                       safety=1.0)
        large = estimate_growth_bounds(model, hd.SamplingSpec(samples=4000, seed=3),
                                       safety=1.0)
        assert np.all(large >= small)

    def test_safety_scales_conservative_side(self, figure1):
        _, model, _ = figure1
        grid = hd.SamplingSpec(samples=1000, seed=0)
        base = estimate_growth_bounds(model, grid, safety=1.0)
        inflated = estimate_growth_bounds(model, grid, safety=1.2)
        assert np.allclose(inflated, 1.2 * base, rtol=1e-14)
        *_, w_base = estimate_lyapunov_bounds(model, grid, safety=1.0)
        *_, w_small = estimate_lyapunov_bounds(model, grid, safety=1.2)
        assert w_small == pytest.approx(w_base / 1.2, rel=1e-14)

    def test_degenerate_component_warns(self):
        s = hd.HomogeneousStructure(n=2, r=(1.0, 1.0), p=2.0, mu=1.0, gamma=2.0)
        f_terms = [[hd.Monomial(-1.0, (2, 0), (0, 0))], []]  # f2 identically zero
        v_terms = [hd.Monomial(1.0, (2, 0), (0, 0)), hd.Monomial(1.0, (0, 2), (0, 0))]
        model = hd.build_monomial_model(s, 1.0, f_terms, v_terms,
                                        domain=hd.NONNEGATIVE_ORTHANT)
        with pytest.warns(UserWarning, match="vanishes"):
            estimate_growth_bounds(model, hd.SamplingSpec(samples=128, seed=0))


class TestBoundConstantsValidation:
    def _kwargs(self, **over):
        base = dict(m=(1.0, 1.0), eta=((1.0, 0.0), (0.0, 1.0)), beta=(1.0, 1.0),
                    psi=((1.0, 0.0), (0.0, 1.0)), alpha0=1.0, alpha1=2.0, w=1.0)
        base.update(over)
        return base

    def test_accepts_valid(self):
        hd.BoundConstants(**self._kwargs())

    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            hd.BoundConstants(**self._kwargs(m=(-1.0, 1.0)))

    def test_rejects_inverted_shape_bounds(self):
        with pytest.raises(ValueError):
            hd.BoundConstants(**self._kwargs(alpha0=3.0))

    def test_rejects_nonpositive_decay_margin(self):
        with pytest.raises(CertificationError, match="delay-free stability margin"):
            hd.BoundConstants(**self._kwargs(w=0.0))


class TestFiniteDifferenceGradient:
    def test_matches_analytic_gradient(self, figure1):
        _, model, _ = figure1
        x = np.array([0.7, 1.3])
        fd = finite_difference_gradient(model.V, x)
        assert np.allclose(fd, model.dV(x), rtol=1e-6)
