import math

import numpy as np
import pytest

from levyhjmm.function_space import (
    WeightedCurve,
    l1_bound_check,
    norm_h1gamma,
    norm_l2gamma,
    read_curve_csv,
    shift,
    sup_bound_check,
    write_curve_csv,
)


def exp_curve(dx=1e-3, x_max=40.0, gamma=1.0):
    return WeightedCurve.from_function(lambda x: np.exp(-x), dx, x_max, gamma)


def random_spline_curve(rng, dx=1.0 / 256, x_max=8.0, gamma=1.0):
    """Nonnegative smooth curve through random knots (clipped cubic spline)."""
    from scipy.interpolate import CubicSpline

    knots = np.linspace(0.0, x_max, 9)
    vals = rng.uniform(0.0, 2.0, size=knots.size)
    vals[-1] = 0.0
    cs = CubicSpline(knots, vals)
    xs = np.arange(int(round(x_max / dx)) + 1) * dx
    return WeightedCurve(dx=dx, values=np.clip(cs(xs), 0.0, None), gamma=gamma)


class TestL2Norm:
    def test_exponential_curve(self):
        # int e^{-2x} e^{x} dx = 1
        assert norm_l2gamma(exp_curve()) == pytest.approx(1.0, abs=1e-5)

    def test_zero_curve(self):
        c = WeightedCurve(dx=0.1, values=np.zeros(11), gamma=1.0)
        assert norm_l2gamma(c) == 0.0

    def test_shifted_exponential(self):
        # e^{-(t+x)} with t = ln 2 scales the norm by e^{-t} = 1/2
        t = math.log(2.0)
        c = WeightedCurve.from_function(lambda x: np.exp(-(t + x)), 1e-3, 40.0, 1.0)
        assert norm_l2gamma(c) == pytest.approx(0.5, abs=1e-5)

    def test_homogeneity_exact(self):
        rng = np.random.default_rng(0)
        c = random_spline_curve(rng)
        assert norm_l2gamma(c.scaled(3.0)) == pytest.approx(3.0 * norm_l2gamma(c), rel=1e-15)


class TestH1Norm:
    def test_exponential_curve(self):
        assert norm_h1gamma(exp_curve()) == pytest.approx(math.sqrt(2.0), abs=1e-4)

    def test_zero_curve(self):
        c = WeightedCurve(dx=0.1, values=np.zeros(11), gamma=1.0)
        assert norm_h1gamma(c) == 0.0

    def test_x_exp_curve_against_quadrature_oracle(self):
        # oracle (scipy.integrate.quad, run separately):
        #   int x^2 e^{-2x} e^x dx = 2, int (1-x)^2 e^{-2x} e^x dx = 1
        # frozen value sqrt(3)
        c = WeightedCurve.from_function(lambda x: x * np.exp(-x), 1e-3, 40.0, 1.0)
        assert norm_h1gamma(c) == pytest.approx(1.7320508075688772, abs=1e-4)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            norm_h1gamma(WeightedCurve(dx=0.1, values=np.array([1.0, 2.0]), gamma=1.0))

    def test_discretization_second_order(self):
        errs = []
        for dx in (2.0**-6, 2.0**-7):
            c = WeightedCurve.from_function(lambda x: np.exp(-x), dx, 30.0, 1.0)
            errs.append(abs(norm_l2gamma(c) - 1.0))
        assert errs[1] / errs[0] == pytest.approx(0.25, abs=0.1)


class TestShift:
    def test_identity(self):
        c = exp_curve(dx=0.25, x_max=4.0)
        assert shift(c, 0.0) is c

    def test_pointwise_definition(self):
        c = exp_curve(dx=0.25, x_max=4.0)
        s = shift(c, 1.0)
        n_keep = c.values.size - 4
        np.testing.assert_allclose(s.values[:n_keep], np.exp(-(1.0 + c.x[:n_keep])), rtol=1e-14)
        # flat right padding
        assert np.all(s.values[n_keep:] == c.values[-1])

    def test_norm_contraction_bound(self):
        # change of variables: ||S_t h||^2 = e^{-gamma t} int_t^inf h^2 e^{gamma u} du
        c = exp_curve(dx=1e-3, x_max=40.0)
        s = shift(c, 1.0)
        bound = math.exp(-0.5) * norm_l2gamma(c)
        got = norm_l2gamma(s)
        assert got <= bound + 1e-6
        # for h = e^{-x}, gamma = 1 the actual decay is e^{-t}
        assert got == pytest.approx(math.exp(-1.0), abs=1e-4)

    def test_semigroup_law(self):
        c = exp_curve(dx=0.125, x_max=8.0)
        a = shift(shift(c, 0.5), 1.0)
        b = shift(c, 1.5)
        # identical up to the (identical) flat padding
        np.testing.assert_array_equal(a.values, b.values)

    def test_non_aligned_rejected(self):
        with pytest.raises(ValueError):
            shift(exp_curve(dx=0.25, x_max=4.0), 0.3)


class TestEmbeddingBounds:
    def test_sup_bound_exponential(self):
        res = sup_bound_check(exp_curve())
        assert res.value == pytest.approx(1.0)
        assert res.bound == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-3)
        assert res.holds

    def test_sup_bound_zero(self):
        c = WeightedCurve(dx=0.1, values=np.zeros(11), gamma=1.0)
        res = sup_bound_check(c)
        assert res.value == 0.0 and res.holds

    def test_l1_bound_equality_case(self):
        # e^{-x} with gamma = 1 makes Cauchy-Schwarz an equality: both sides 1
        res = l1_bound_check(exp_curve())
        assert res.value == pytest.approx(1.0, abs=1e-5)
        assert res.bound == pytest.approx(1.0, abs=1e-5)
        assert res.holds

    def test_random_spline_curves(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            c = random_spline_curve(rng)
            assert sup_bound_check(c).holds
            assert l1_bound_check(c).holds


class TestCurveCsv:
    def test_round_trip(self, tmp_path):
        c = exp_curve(dx=0.25, x_max=4.0)
        target = tmp_path / "curve.csv"
        write_curve_csv(target, c)
        back = read_curve_csv(target, gamma=1.0)
        assert back.dx == c.dx
        np.testing.assert_array_equal(back.values, c.values)

    def test_header(self, tmp_path):
        target = tmp_path / "curve.csv"
        write_curve_csv(target, exp_curve(dx=0.5, x_max=2.0))
        assert target.read_text().splitlines()[0] == "x,value"


class TestValidation:
    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            WeightedCurve(dx=0.1, values=np.array([0.0, np.nan, 1.0]), gamma=1.0)

    def test_bad_gamma(self):
        with pytest.raises(ValueError):
            WeightedCurve(dx=0.1, values=np.zeros(5), gamma=0.0)
