import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cuspkit.errors import DomainError, EmptyListError
from cuspkit.testfn import (EigenvalueList, abel_support_check, alpha_constant, ball_mass,
                            build_hchoice, scale_family, sinc_power_cdf, synthetic_weyl_list,
                            tree_walk_counts, weyl_count)
from cuspkit.testfn import sinc_power_integral

ALPHA = 1 / (4 * math.pi)


@pytest.fixture(scope="module")
def hc():
    return build_hchoice(0.2)


@pytest.fixture(scope="module")
def synthetic():
    return synthetic_weyl_list(100_000, 60.0, seed=1)


class TestSincPower:
    @pytest.mark.parametrize("m, ref", [(2, math.pi), (4, 2 * math.pi / 3), (6, 11 * math.pi / 20)])
    def test_full_integral(self, m, ref):
        assert sinc_power_integral(m) == pytest.approx(ref, rel=1e-14)

    @pytest.mark.parametrize("m", [4, 6, 8])
    def test_cdf_against_mpmath(self, m):
        for x in (0.3, 5.0, 7.9, 8.1, 20.0, 300.0):
            ref = mp.quad(lambda t: (mp.sin(t) / t) ** m, mp.linspace(0, x, int(x) + 2))
            assert abs(sinc_power_cdf(x, m) - float(ref)) <= 1e-13

    def test_odd(self):
        x = np.array([-30.0, -2.0, 2.0, 30.0])
        v = sinc_power_cdf(x, 6)
        assert v[0] == -v[3] and v[1] == -v[2]

    def test_order_validated(self):
        with pytest.raises(DomainError):
            sinc_power_cdf(1.0, 5)


class TestHChoice:
    def test_report_passes(self, hc):
        assert hc.passed
        assert {"p1_even", "p2_real_nonneg", "p3_le_one", "p4_ge_1_minus_eps",
                "p5_plancherel", "p6_decay"} <= set(hc.report)
        for rec in hc.report.values():
            assert "grid" in rec or "limit" in rec

    def test_band_limit(self, hc):
        assert hc.band_limit == pytest.approx(2 * hc.order * hc.beta)
        assert hc.h.band_limit == hc.band_limit
        assert hc.h.decay_order >= 4

    def test_properties_off_grid(self, hc):
        rng = np.random.default_rng(0)
        s = rng.uniform(0, 100, 3000)
        v = hc.h(s)
        assert np.array_equal(v, hc.h(-s))
        assert v.real.min() >= 0 and v.real.max() <= 1
        assert hc.h(0.0).real >= 0.8
        big = s[s >= 1]
        assert np.max((1 + big) ** 3 * np.abs(hc.h(big))) < 0.2

    def test_modulus_square_on_axis(self, hc):
        s = np.linspace(0, 20, 41)
        assert np.allclose(hc.h(s), np.abs(hc.psi(s)) ** 2, rtol=1e-13, atol=1e-16)

    def test_complementary_series_real(self, hc):
        v = hc.h(1j * np.linspace(0, 0.5, 11))
        assert np.all(v.real >= 0)
        assert np.max(np.abs(v.imag)) <= 1e-6 * np.max(np.abs(v))

    def test_domain(self):
        with pytest.raises(DomainError):
            build_hchoice(1.2)
        with pytest.raises(DomainError):
            build_hchoice(0.2, r=2)


class TestScaleFamily:
    def test_identity(self, hc):
        assert scale_family(hc, 1.0) is hc.h

    @given(st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_substitution(self, hc, t):
        assert scale_family(hc, t)(1 / t) == pytest.approx(hc.h(1.0), rel=1e-12)

    @pytest.mark.parametrize("t", [1.0, 0.5, 0.25])
    def test_support_scales(self, hc, t):
        h = scale_family(hc, t)
        assert h.band_limit == pytest.approx(t * hc.band_limit)
        beyond, centre = abel_support_check(h)
        assert beyond <= 1e-10 * centre

    def test_support_check_detects_truncation(self, hc):
        h = scale_family(hc, 0.5)
        beyond, centre = abel_support_check(h, u_probe=h.band_limit * np.linspace(0.5, 0.9, 9))
        assert beyond > 1e-6 * centre

    def test_domain(self, hc):
        with pytest.raises(DomainError):
            scale_family(hc, 0.0)


class TestAlpha:
    def test_within_one_percent(self):
        rep = alpha_constant([400.0])
        assert abs(rep.alpha - ALPHA) <= 0.01 * ALPHA

    def test_fit_recovers_limit(self):
        rep = alpha_constant(np.geomspace(100, 1600, 9))
        assert abs(rep.fit_alpha - ALPHA) <= 1e-4 * ALPHA
        assert np.all(np.diff(rep.differences) < 0)

    def test_ball_mass_closed_form(self):
        # int_0^S s tanh(pi s) ds / (2 pi); the tanh correction is computed by quad
        for T in (4.0, 100.0):
            S = math.sqrt(T)
            corr = quad(lambda s: s * (1 - math.tanh(math.pi * s)), 0, S)[0]
            assert ball_mass(T) == pytest.approx((S * S / 2 - corr) / (2 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_independent_of_tree_factor(self, p):
        T = [100.0, 400.0]
        assert abs(alpha_constant(T, p=p).alpha - alpha_constant(T).alpha) <= 1e-10

    def test_monotone(self):
        T = np.linspace(0.5, 500, 60)
        assert np.all(np.diff([ball_mass(t) for t in T]) > 0)

    def test_grid_validated(self):
        with pytest.raises(DomainError):
            alpha_constant([400.0, 100.0])


class TestTreeWalks:
    def test_p2(self):
        assert tree_walk_counts(2, 8) == [1, 0, 3, 0, 15, 0, 87, 0, 543]

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_against_recursion(self, p):
        # walks returning to the root, counted by brute-force path enumeration on depth
        def brute(k):
            def go(depth, steps):
                if steps == 0:
                    return int(depth == 0)
                if depth > steps:
                    return 0
                up = go(depth - 1, steps - 1) if depth > 0 else 0
                down = (p + 1 if depth == 0 else p) * go(depth + 1, steps - 1)
                return up + down
            return go(0, k)
        assert tree_walk_counts(p, 8) == [brute(k) for k in range(9)]


class TestEigenvalueList:
    def test_sorted_and_validated(self):
        e = EigenvalueList([3.0, 0.25, 1.0])
        assert e.lambdas.tolist() == [0.25, 1.0, 3.0]
        with pytest.raises(DomainError):
            EigenvalueList([-1.0])
        with pytest.raises(DomainError):
            EigenvalueList([np.nan])

    def test_parameters(self):
        e = EigenvalueList.from_parameters([2.0, 0.0])
        assert e.lambdas.tolist() == [0.25, 4.25]
        assert e.parameters.tolist() == [0.0, 2.0]

    def test_csv_lambda(self, tmp_path):
        e = EigenvalueList([0.3, 7.0, 91.25])
        e.to_csv(tmp_path / "l.csv")
        back = EigenvalueList.from_csv(tmp_path / "l.csv")
        assert np.array_equal(back.lambdas, e.lambdas)

    def test_csv_s(self, tmp_path):
        (tmp_path / "s.csv").write_text("s\n3.0\n1.0\n")
        e = EigenvalueList.from_csv(tmp_path / "s.csv")
        assert e.lambdas.tolist() == [1.25, 9.25]

    def test_csv_bad_header(self, tmp_path):
        (tmp_path / "x.csv").write_text("mu\n1\n")
        with pytest.raises(DomainError):
            EigenvalueList.from_csv(tmp_path / "x.csv")


class TestWeyl:
    def test_empty(self):
        with pytest.raises(EmptyListError):
            weyl_count(EigenvalueList([]), 1.0, [1.0])

    def test_below_first_entry(self):
        e = EigenvalueList.from_parameters([5.0, 6.0])
        tab = weyl_count(e, 1.0, [1.0, 24.0, 25.0, 36.0])
        assert tab.counts.tolist() == [0, 0, 1, 2]

    def test_volume_validated(self):
        with pytest.raises(DomainError):
            weyl_count(EigenvalueList([1.0]), 0.0, [1.0])

    def test_synthetic_ratio(self, synthetic):
        e, vol = synthetic
        T = np.linspace(360.0, 3600.0, 10)
        tab = weyl_count(e, vol, T)
        assert np.all(np.abs(tab.ratio[-1:] - 1) <= 0.02)

    def test_smoothed_constant_shape(self, synthetic, hc):
        e, vol = synthetic
        tab = weyl_count(e, vol, [3600.0], hc, t_grid=(0.1, 0.05, 0.02))
        expected = hc.report["p5_plancherel"]["constant"] * np.sign(
            hc.report["p5_plancherel"]["limit"] - ALPHA)
        for rec in tab.smoothed:
            assert rec["tail"] <= rec["tail_bound"]
            assert abs(rec["constant"]) <= 1.0
            assert rec["constant"] == pytest.approx(expected, abs=0.01)

    def test_files(self, tmp_path, synthetic):
        e, vol = synthetic
        tab = weyl_count(e, vol, [100.0, 400.0])
        tab.to_files(tmp_path / "w.csv", tmp_path / "w.json")
        lines = (tmp_path / "w.csv").read_text().splitlines()
        assert lines[0] == "T,N,prediction,ratio" and len(lines) == 3
