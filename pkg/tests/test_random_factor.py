import math

import numpy as np
import pytest
from scipy.integrate import quad

from levyhjmm.function_space import WeightedCurve
from levyhjmm.grids import SolveGrid
from levyhjmm.levy_model import LevyMeasureSpec, LevyModel
from levyhjmm.path_sim import LevyPathRecord, SimConfig, simulate
from levyhjmm.random_factor import (
    ConstantVol,
    ExpAffineVol,
    TabulatedVol,
    compute_I1,
    compute_I2,
    compute_a,
)

GRID = SolveGrid(t_star=1.0, dt=1.0 / 16, x_max=1.0)


def r0_exp(grid=GRID, gamma=1.0):
    return WeightedCurve(dx=grid.dt, values=np.exp(-grid.x_wide), gamma=gamma)


def manual_path(jump_times, jump_sizes, grid=GRID, model=None):
    model = model or LevyModel()
    t = grid.t
    vals = np.zeros(grid.n_t + 1)
    for s, y in zip(jump_times, jump_sizes):
        vals += np.where(t >= s, y, 0.0)
    return LevyPathRecord(
        t_star=grid.t_star,
        dt=grid.dt,
        grid_values=vals,
        jump_times=np.asarray(jump_times, dtype=float),
        jump_sizes=np.asarray(jump_sizes, dtype=float),
        brownian_increments=np.zeros(grid.n_t),
        m_n=0.0,
        model=model,
        n_threshold=1000,
        seed=0,
    )


def triangle_err(grid, field, expect):
    worst = 0.0
    for i in range(grid.n_t + 1):
        w = grid.row_width(i)
        ref = expect(grid.t[i], grid.x_wide[: w + 1])
        worst = max(worst, float(np.max(np.abs(field[i, : w + 1] - ref))))
    return worst


class TestVolatilitySpecs:
    def test_constant_bounds(self):
        v = ConstantVol(0.5)
        assert v.lambda_low == v.lambda_bar == 0.5

    def test_exp_affine_bounds(self):
        v = ExpAffineVol(c0=1.0, c1=1.0, beta=2.0)
        assert v.lambda_low == 1.0 and v.lambda_bar == 2.0
        np.testing.assert_allclose(v.lam(np.array([0.0])), [2.0])
        np.testing.assert_allclose(v.lam_prime(np.array([0.0])), [-2.0])

    def test_positivity_enforced(self):
        with pytest.raises(ValueError):
            ConstantVol(0.0)
        with pytest.raises(ValueError):
            ExpAffineVol(c0=0.5, c1=-0.5, beta=1.0)
        with pytest.raises(ValueError):
            TabulatedVol(dx=0.1, values=np.array([1.0, -0.5, 1.0]))


class TestI1:
    def test_constant_vol_pure_drift(self):
        path = simulate(LevyModel(a=1.0), SimConfig(t_star=1.0, dt=GRID.dt, seed=0))
        I1 = compute_I1(path, ConstantVol(2.0), GRID)
        assert triangle_err(GRID, I1, lambda t, xs: 2.0 * t * np.ones_like(xs)) < 1e-14

    def test_varying_vol_against_fine_quadrature(self):
        # pure drift L(s)=s: I1(t,x) = int_0^t lambda(t-s+x) ds, independent oracle
        dt = 1.0 / 512
        grid = SolveGrid(t_star=0.5, dt=dt, x_max=0.5)
        vol = ExpAffineVol(c0=1.0, c1=1.0, beta=1.0)
        path = simulate(LevyModel(a=1.0), SimConfig(t_star=0.5, dt=dt, seed=0))
        I1 = compute_I1(path, vol, grid)
        for (ti, xj) in [(8, 3), (32, 0), (64, 20)]:
            t, x = grid.t[ti], grid.x_wide[xj]
            ref = quad(lambda s: 1.0 + math.exp(-(t - s + x)), 0.0, t, epsabs=1e-12)[0]
            assert I1[ti, xj] == pytest.approx(ref, abs=1e-6)

    def test_single_jump_constant_vol(self):
        path = manual_path([0.5], [1.0])
        I1 = compute_I1(path, ConstantVol(2.0), GRID)
        assert triangle_err(GRID, I1, lambda t, xs: np.where(t >= 0.5, 2.0, 0.0) * np.ones_like(xs)) == 0.0


class TestI2:
    def test_no_jumps(self):
        path = simulate(LevyModel(a=1.0), SimConfig(t_star=1.0, dt=GRID.dt, seed=0))
        I2, ok = compute_I2(path, ConstantVol(1.0), GRID)
        assert ok
        assert triangle_err(GRID, I2, lambda t, xs: np.ones_like(xs)) == 0.0

    def test_single_jump_factor(self):
        path = manual_path([0.5], [1.0])
        I2, _ = compute_I2(path, ConstantVol(1.0), GRID)
        expect = lambda t, xs: np.where(t >= 0.5, 2.0 * math.exp(-1.0), 1.0) * np.ones_like(xs)
        assert triangle_err(GRID, I2, expect) < 1e-15

    def test_two_jumps_multiplicative(self):
        both = compute_I2(manual_path([0.3, 0.6], [1.0, 0.5]), ConstantVol(1.0), GRID)[0]
        first = compute_I2(manual_path([0.3], [1.0]), ConstantVol(1.0), GRID)[0]
        second = compute_I2(manual_path([0.6], [0.5]), ConstantVol(1.0), GRID)[0]
        np.testing.assert_allclose(both, first * second, rtol=1e-14)

    def test_positivity_flag_lowered(self):
        path = manual_path([0.5], [-1.5])  # 1 + lambda*y = -0.5 < 0
        I2, ok = compute_I2(path, ConstantVol(1.0), GRID, expect_positive=True)
        assert not ok
        assert np.isfinite(I2[GRID.n_t, 0])


class TestRandomFactor:
    def test_zero_noise_reduces_to_shifted_curve(self):
        path = simulate(LevyModel(), SimConfig(t_star=1.0, dt=GRID.dt, seed=1))
        f = compute_a(path, ConstantVol(0.5), r0_exp(), 0.0, GRID)
        r0v = r0_exp().values
        worst = max(
            float(np.max(np.abs(f.a[i, : GRID.row_width(i) + 1] - r0v[i : i + GRID.row_width(i) + 1])))
            for i in range(GRID.n_t + 1)
        )
        assert worst == 0.0

    def test_pure_drift_closed_form(self):
        path = simulate(LevyModel(a=1.0), SimConfig(t_star=1.0, dt=GRID.dt, seed=1))
        f = compute_a(path, ConstantVol(0.5), r0_exp(), 0.0, GRID)
        expect = lambda t, xs: np.exp(-(t + xs)) * math.exp(0.5 * t)
        assert triangle_err(GRID, f.a, expect) < 1e-13

    def test_exponential_martingale(self):
        # Wiener q=1, constant lambda: b is a unit-mean exponential martingale
        vals = []
        for seed in range(10_000):
            path = simulate(LevyModel(q=1.0), SimConfig(t_star=0.5, dt=1.0 / 8, seed=seed))
            grid = SolveGrid(t_star=0.5, dt=1.0 / 8, x_max=0.5)
            f = compute_a(path, ConstantVol(1.0), r0_exp(grid), 1.0, grid)
            vals.append(f.b[grid.n_t, 0])
        mean, se = np.mean(vals), np.std(vals) / math.sqrt(len(vals))
        assert abs(mean - 1.0) < 3 * se

    def test_initial_slice_is_r0(self):
        path = simulate(LevyModel(q=1.0, a=0.2), SimConfig(t_star=1.0, dt=GRID.dt, seed=3))
        f = compute_a(path, ConstantVol(1.0), r0_exp(), 1.0, GRID)
        np.testing.assert_array_equal(f.a[0, :], r0_exp().values[: GRID.n_w + 1])

    def test_positivity_under_support_bound(self):
        model = LevyModel(nu=LevyMeasureSpec(atoms=((-0.25, 2.0), (1.0, 1.0))))
        path = simulate(model, SimConfig(t_star=1.0, dt=GRID.dt, seed=8))
        f = compute_a(path, ConstantVol(2.0), r0_exp(), 0.0, GRID, expect_positive=True)
        # supp nu >= -1/lambda_bar = -0.5, so every jump factor stays positive
        assert f.positivity_ok
        assert np.nanmin(np.where(GRID.valid_mask(), f.a, np.nan)) >= 0.0

    def test_constant_shortcut_equals_general_path(self):
        model = LevyModel(a=0.5, q=1.0, nu=LevyMeasureSpec(atoms=((0.5, 1.0),)))
        path = simulate(model, SimConfig(t_star=1.0, dt=GRID.dt, seed=4))
        f_const = compute_a(path, ConstantVol(0.7), r0_exp(), 1.0, GRID)
        tab = TabulatedVol(dx=GRID.dt, values=np.full(GRID.n_w + 1, 0.7))
        f_tab = compute_a(path, tab, r0_exp(), 1.0, GRID)
        assert np.nanmax(np.abs(f_const.a - f_tab.a)) <= 1e-12

    def test_bounded_fields_reported(self):
        model = LevyModel(a=0.1, q=0.5, nu=LevyMeasureSpec(atoms=((0.5, 2.0),)))
        path = simulate(model, SimConfig(t_star=1.0, dt=GRID.dt, seed=12))
        vol = ExpAffineVol(c0=0.8, c1=0.4, beta=1.5)
        f = compute_a(path, vol, r0_exp(), 0.5, GRID)
        mask = GRID.valid_mask()
        assert np.isfinite(np.nanmax(np.abs(np.where(mask, f.I1, np.nan))))
        assert np.isfinite(np.nanmax(np.abs(np.where(mask, f.I2, np.nan))))
        assert math.isfinite(f.b_bar)

    def test_r0_too_short_rejected(self):
        short = WeightedCurve(dx=GRID.dt, values=np.ones(GRID.n_w), gamma=1.0)
        path = simulate(LevyModel(), SimConfig(t_star=1.0, dt=GRID.dt, seed=1))
        with pytest.raises(ValueError):
            compute_a(path, ConstantVol(1.0), short, 0.0, GRID)
