import numpy as np
import pytest

from homdelay.errors import NumericalFailureError
from homdelay.numerics import (
    bisect_increasing,
    golden_section_max,
    guarded_power,
    simpson_weights,
)


class TestSimpsonWeights:
    def test_exact_for_cubics(self):
        panels = 10
        w = simpson_weights(panels, 1.0)
        x = np.linspace(0.0, 1.0, panels + 1)
        assert w @ x**3 == pytest.approx(0.25, abs=1e-15)
        assert w @ np.ones_like(x) == pytest.approx(1.0, abs=1e-15)

    def test_converges_at_fourth_order(self):
        def err(panels):
            w = simpson_weights(panels, 1.0)
            x = np.linspace(0.0, 1.0, panels + 1)
            return abs(w @ np.exp(x) - (np.e - 1.0))

        assert err(8) / err(16) > 14.0

    @pytest.mark.parametrize("panels", [0, 1, 3, 7])
    def test_rejects_bad_panel_counts(self, panels):
        with pytest.raises(ValueError):
            simpson_weights(panels, 0.1)


class TestBisection:
    def test_finds_monotone_root_to_float_resolution(self):
        root = bisect_increasing(lambda x: x * x - 2.0, 0.0, 2.0)
        assert root == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_requires_bracketing(self):
        with pytest.raises(NumericalFailureError):
            bisect_increasing(lambda x: x + 1.0, 0.0, 2.0)

    def test_endpoint_root(self):
        assert bisect_increasing(lambda x: x, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)


class TestGoldenSection:
    def test_locates_interior_maximum(self):
        x, fx = golden_section_max(lambda t: -((t - 0.3) ** 2), 0.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-15)

    def test_monotone_function_converges_to_endpoint(self):
        x, _ = golden_section_max(lambda t: t, 0.0, 1.0)
        assert x == pytest.approx(1.0, abs=1e-9)


class TestGuardedPower:
    def test_negative_base_clamps_to_zero(self):
        assert guarded_power(-4.0, 1.5) == 0.0

    def test_positive_base(self):
        assert guarded_power(4.0, 0.5) == pytest.approx(2.0, abs=1e-15)

    def test_vectorized(self):
        out = guarded_power(np.array([-1.0, 0.0, 9.0]), 0.5)
        assert np.array_equal(out, [0.0, 0.0, 3.0])
