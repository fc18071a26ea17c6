"""Norms, compensated derivative closed forms, pairing vs Riemann-Stieltjes."""

import math

import numpy as np
import pytest

from fbmsde.fbm import FbmSpec, sample_fbm
from fbmsde.fraccalc import (
    OrderValidityWarning,
    default_ibp_order,
    frac_deriv_left,
    frac_deriv_right,
    holder_report,
    holder_seminorm,
    riemann_stieltjes,
    sup_norm,
    young_integral,
)
from fbmsde.paths import GridError, SamplePath


def _path(fn, n, horizon=1.0, hint=1.0):
    return SamplePath.from_function(fn, horizon, n, holder_hint=hint)


class TestNorms:
    def test_sup_norm_constant_and_linear(self):
        assert sup_norm(_path(lambda t: -3.0 + 0 * t, 64), 0.0, 1.0) == 3.0
        assert sup_norm(_path(lambda t: t, 64), 0.0, 1.0) == 1.0

    def test_sup_norm_sine(self):
        p = _path(lambda t: np.sin(2 * np.pi * t), 1024)
        assert sup_norm(p, 0.0, 1.0) == pytest.approx(1.0, abs=1e-4)

    def test_sup_norm_empty_interval(self):
        p = _path(lambda t: t, 10)
        with pytest.raises(GridError):
            sup_norm(p, 0.31, 0.39)

    def test_seminorm_constant_zero(self):
        assert holder_seminorm(_path(lambda t: 4.2 + 0 * t, 64), 0.0, 1.0, 0.5) == 0.0

    def test_seminorm_linear(self):
        # |u - v| / |u - v|^0.5 is maximized at the full interval
        assert holder_seminorm(_path(lambda t: t, 128), 0.0, 1.0, 0.5) == pytest.approx(1.0)

    def test_seminorm_grid_monotone(self):
        fn = lambda t: np.sin(5 * t) + 0.3 * np.cos(17 * t)
        coarse = holder_seminorm(_path(fn, 128), 0.0, 1.0, 0.6)
        fine = holder_seminorm(_path(fn, 1024), 0.0, 1.0, 0.6)
        assert fine >= coarse

    def test_seminorm_fbm_stable_under_refinement(self):
        fine = sample_fbm(FbmSpec(hurst=0.75, n_steps=1024, seed=13))
        coarse = SamplePath(fine.times[::4], fine.values[::4], holder_hint=0.75)
        s_fine = holder_seminorm(fine, 0.0, 1.0, 0.7)
        s_coarse = holder_seminorm(coarse, 0.0, 1.0, 0.7)
        assert s_coarse <= s_fine < 2.0 * s_coarse

    def test_seminorm_dyadic_regime_above_scan_limit(self):
        # above 4096 points only power-of-two index distances are scanned;
        # a linear path attains its seminorm at the (dyadic) full span
        p = _path(lambda t: t, 8192)
        assert holder_seminorm(p, 0.0, 1.0, 0.5) == pytest.approx(1.0)
        rough = sample_fbm(FbmSpec(hurst=0.75, n_steps=8192, seed=99))
        val = holder_seminorm(rough, 0.0, 1.0, 0.65)
        assert np.isfinite(val) and val > 0.0

    def test_report(self):
        rep = holder_report(_path(lambda t: t, 64), 0.0, 1.0, 0.5)
        assert rep.sup_norm == 1.0 and rep.seminorm == pytest.approx(1.0)


class TestLeftDerivative:
    @pytest.mark.parametrize("order", [0.25, 0.4, 0.55, 0.7])
    def test_constant_closed_form(self, order):
        c = 2.5
        p = _path(lambda t: c + 0 * t, 512)
        rng = np.random.default_rng(4)
        for _ in range(20):
            i, j = sorted(rng.integers(0, 513, size=2))
            if j - i < 1:
                continue
            s, u = i / 512, j / 512
            got = frac_deriv_left(p, s, u, order)
            want = c * (u - s) ** (-order) / math.gamma(1.0 - order)
            assert got == pytest.approx(want, rel=1e-10)

    @pytest.mark.parametrize("order", [0.3, 0.45, 0.6])
    def test_monomial_closed_form(self, order):
        p = _path(lambda t: t, 2048)
        for u in (0.25, 0.5, 0.75, 1.0):
            got = frac_deriv_left(p, 0.0, u, order)
            want = u ** (1.0 - order) / math.gamma(2.0 - order)
            assert got == pytest.approx(want, abs=1e-6)

    def test_linearity(self):
        n = 512
        p1 = _path(lambda t: t**2, n)
        p2 = _path(np.cos, n)
        combo = SamplePath(p1.times, 3.0 * p1.values - 2.0 * p2.values)
        got = frac_deriv_left(combo, 0.0, 0.75, 0.4)
        want = 3.0 * frac_deriv_left(p1, 0.0, 0.75, 0.4) - 2.0 * frac_deriv_left(p2, 0.0, 0.75, 0.4)
        assert got == pytest.approx(want, rel=1e-12)

    def test_domain_errors(self):
        p = _path(lambda t: t, 32)
        with pytest.raises(ValueError):
            frac_deriv_left(p, 0.5, 0.25, 0.4)
        with pytest.raises(ValueError):
            frac_deriv_left(p, 0.0, 0.5, 1.5)


class TestRightDerivative:
    @pytest.mark.parametrize("order", [0.3, 0.45, 0.6])
    def test_constant_vanishes(self, order):
        p = _path(lambda t: 7.0 + 0 * t, 256)
        for u in (0.0, 0.25, 0.625):
            assert frac_deriv_right(p, u, 1.0, order) == 0.0

    @pytest.mark.parametrize("order", [0.3, 0.45, 0.6])
    def test_linear_closed_form(self, order):
        p = _path(lambda t: t, 2048)
        for u in (0.0, 0.25, 0.5, 0.9):
            got = frac_deriv_right(p, u, 1.0, order)
            want = (1.0 - u) ** order / math.gamma(1.0 + order)
            assert got == pytest.approx(want, abs=1e-6)

    def test_decay_bound_on_fbm_path(self):
        # |D phi| <= C * seminorm * (t-u)^{order+beta-1} with the explicit C
        hurst, beta, order = 0.75, 0.65, 0.45
        phi = sample_fbm(FbmSpec(hurst=hurst, n_steps=1024, seed=3))
        norm = holder_seminorm(phi, 0.0, 1.0, beta)
        c = (1.0 + (1.0 - order) / (order + beta - 1.0)) / math.gamma(order)
        for u in np.linspace(0.0, 0.99, 34):
            got = abs(frac_deriv_right(phi, float(u), 1.0, order))
            assert got <= c * norm * (1.0 - u) ** (order + beta - 1.0) * (1.0 + 1e-9)


class TestYoungIntegral:
    def test_constant_integrand(self):
        n = 1024
        const = _path(lambda t: 3.0 + 0 * t, n)
        phi = _path(np.sin, n)
        got = young_integral(const, phi, 0.0, 1.0, 0.45)
        assert got == pytest.approx(3.0 * math.sin(1.0), abs=2e-5)

    def test_smooth_pair_vs_refined_oracle(self):
        # left-point sums carry an O(dt) bias, so the oracle runs on a much
        # finer rendering of the same smooth functions
        n, n_oracle = 2048, 1 << 20
        y = _path(lambda t: t**2, n)
        phi = _path(np.sin, n)
        y_f = _path(lambda t: t**2, n_oracle)
        phi_f = _path(np.sin, n_oracle)
        oracle = riemann_stieltjes(y_f, phi_f, 0.0, 1.0)
        got = young_integral(y, phi, 0.0, 1.0, 0.4)
        assert abs(got - oracle) <= 1e-5 * abs(oracle)

    def test_chain_rule_smooth(self):
        n = 2048
        phi = _path(np.sin, n)
        got = young_integral(phi, phi, 0.0, 1.0, 0.45)
        want = math.sin(1.0) ** 2 / 2.0
        assert abs(got - want) <= 1e-5 * abs(want)

    @pytest.mark.parametrize("order", [0.3, 0.45, 0.6])
    def test_random_smooth_pairs_match_oracle(self, order):
        rng = np.random.default_rng(2024)
        n, n_oracle = 1024, 1 << 17
        for _ in range(7):
            a1, a2, b1, b2 = rng.uniform(-1, 1, size=4)
            w1, w2 = rng.uniform(1, 5, size=2)
            y_fn = lambda t: a1 * np.sin(w1 * t) + a2 * t**2
            p_fn = lambda t: b1 * np.cos(w2 * t) + b2 * t
            got = young_integral(_path(y_fn, n), _path(p_fn, n), 0.0, 1.0, order)
            oracle = riemann_stieltjes(_path(y_fn, n_oracle), _path(p_fn, n_oracle), 0.0, 1.0)
            assert abs(got - oracle) <= 1e-4 * (1.0 + abs(oracle))

    def test_validity_warning(self):
        n = 256
        y = _path(lambda t: t, n, hint=1.0)
        phi = sample_fbm(FbmSpec(hurst=0.75, n_steps=n, seed=2))
        with pytest.warns(OrderValidityWarning):
            young_integral(y, phi, 0.0, 1.0, 0.2)  # 0.2 <= 1 - 0.75

    def test_grid_mismatch_rejected(self):
        y = _path(lambda t: t, 128)
        phi = _path(np.sin, 256)
        with pytest.raises(GridError):
            young_integral(y, phi, 0.0, 1.0, 0.45)


class TestRiemannStieltjes:
    def test_step_integrand_exact(self):
        n = 100
        times = np.linspace(0, 1, n + 1)
        y_vals = np.where(times < 0.5, 2.0, -1.0)
        y = SamplePath(times, y_vals)
        phi = _path(np.cos, n)
        got = riemann_stieltjes(y, phi, 0.0, 1.0)
        want = 2.0 * (math.cos(0.5) - 1.0) + (-1.0) * (math.cos(1.0) - math.cos(0.5))
        assert got == pytest.approx(want, abs=1e-12)

    def test_unit_integrand_telescopes(self):
        n = 64
        one = _path(lambda t: 1.0 + 0 * t, n)
        phi = _path(np.sin, n)
        assert riemann_stieltjes(one, phi, 0.0, 1.0) == pytest.approx(math.sin(1.0), abs=1e-14)

    def test_first_order_refinement(self):
        truth = math.sin(1.0) ** 2 / 2.0  # int sin d(sin)
        diffs = []
        for n in (512, 1024, 2048):
            got = riemann_stieltjes(_path(np.sin, n), _path(np.sin, n), 0.0, 1.0)
            diffs.append(abs(got - truth))
        assert diffs[0] / diffs[1] >= 2.0 * 0.9
        assert diffs[1] / diffs[2] >= 2.0 * 0.9


def test_default_ibp_order_window():
    assert default_ibp_order(0.75, 0.65) == pytest.approx(0.45)
    with pytest.raises(ValueError):
        default_ibp_order(0.55, 0.4)
