import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspkit.errors import DomainError, TailCertificateError
from cuspkit.special_fn import HyperbolicPoint
from cuspkit.whittaker import (WhittakerFunction, WhittakerSeries, casselman_shalika_weights,
                               constant_term_unfold, series_eval, siegel_nonvanishing_scan,
                               whittaker_bound, whittaker_eval)

W2 = WhittakerFunction(2.0)


@pytest.fixture(scope="module")
def series():
    return WhittakerSeries(W2, 2, casselman_shalika_weights(2, math.pi / 3, 12))


def laplacian(w, z, h):
    """-y^2 (W_xx + W_yy) by central differences."""
    x, y = z.real, z.imag
    wxx = (w(x + h, y) - 2 * w(x, y) + w(x - h, y)) / h ** 2
    wyy = (w(x, y + h) - 2 * w(x, y) + w(x, y - h)) / h ** 2
    return -y * y * (wxx + wyy)


class TestWhittakerFunction:
    def test_against_mpmath(self):
        for s, y in [(2.0, 0.3), (2.0, 1.2), (0.5, 2.0), (7.0, 0.8)]:
            ref = float(mp.sqrt(y) * mp.besselk(1j * s, 2 * mp.pi * y).real)
            env = math.exp(-2 * math.pi * y)
            assert abs(WhittakerFunction(s).radial(y) - ref) <= 1e-10 * abs(ref) + 1e-14 * env

    @given(st.floats(-5, 5), st.floats(0.1, 4), st.integers(-3, 3))
    @settings(max_examples=50, deadline=None)
    def test_equivariance(self, x, y, n):
        a, b = W2(x + n, y), W2(x, y)
        assert abs(a - b) <= 1e-12 * abs(b) + 1e-300

    def test_phase(self):
        v = W2(0.25, 1.0)
        assert abs(v - 1j * W2.radial(1.0)) <= 1e-15

    def test_eigen_equation(self):
        # Richardson extrapolation removes the O(h^2) term of the stencil
        z = 0.3 + 1.2j
        coarse, fine = laplacian(W2, z, 1e-2), laplacian(W2, z, 5e-3)
        lap = (4 * fine - coarse) / 3
        target = (0.25 + 4.0) * W2(z.real, z.imag)
        assert abs(lap - target) <= 1e-5 * abs(target)

    def test_bound(self):
        y = np.linspace(2.0, 20.0, 200)
        for s in (0.0, 2.0, 9.0):
            assert np.all(np.abs(WhittakerFunction(s).radial(y)) <= whittaker_bound(y))

    def test_underflow_is_zero(self):
        assert W2.radial(200.0) == 0.0

    def test_eval_accepts_points(self):
        assert whittaker_eval(W2, HyperbolicPoint(0.1, 1.5)) == whittaker_eval(W2, 0.1 + 1.5j)

    def test_domain(self):
        with pytest.raises(DomainError):
            W2.radial(0.0)
        with pytest.raises(DomainError):
            WhittakerFunction(float("nan"))


class TestWeights:
    def test_first_is_one(self):
        assert casselman_shalika_weights(3, 1.1, 5)[0] == 1.0

    def test_quarter_turn_pattern(self):
        c = casselman_shalika_weights(2, math.pi / 2, 6)
        ref = [1, 0, -1 / 2, 0, 1 / 4, 0, -1 / 8]
        assert np.allclose(c, ref, atol=1e-15)

    @given(st.floats(1e-3, math.pi - 1e-3), st.sampled_from([2, 3, 5, 7]))
    @settings(max_examples=50, deadline=None)
    def test_growth(self, theta, p):
        c = casselman_shalika_weights(p, theta, 20)
        k = np.arange(21)
        assert np.all(np.abs(c) <= (k + 1) * p ** (-k / 2) * (1 + 1e-12))

    def test_degenerate(self):
        with pytest.raises(DomainError):
            casselman_shalika_weights(2, 0.0, 4)
        c0 = casselman_shalika_weights(2, 0.0, 4, allow_degenerate=True)
        cpi = casselman_shalika_weights(2, math.pi, 4, allow_degenerate=True)
        k = np.arange(5)
        assert np.allclose(c0, (k + 1) * 2.0 ** (-k / 2))
        assert np.allclose(cpi, (-1.0) ** k * (k + 1) * 2.0 ** (-k / 2))
        near = casselman_shalika_weights(2, 1e-6, 4)
        assert np.allclose(near, c0, rtol=1e-10)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            casselman_shalika_weights(2, 4.0, 3, allow_degenerate=True)


class TestSeries:
    def test_single_term(self):
        fs = WhittakerSeries(W2, 2, [1.0], growth=(0.0, 1.0))  # no weights beyond c_0
        for z in (0.1 + 0.9j, 0.7 + 1.5j):
            assert series_eval(fs, z).value == W2(z.real, z.imag)

    def test_term_decay(self, series):
        t = np.abs(series_eval(series, 0.2 + 1j).terms)
        for k in range(3, t.size - 1):
            if t[k] > 0:
                assert t[k + 1] / t[k] < 1e-2

    def test_deeper_truncation_within_certificate(self):
        base = casselman_shalika_weights(2, 1.0, 15)
        short = WhittakerSeries(W2, 2, base[:4], growth=(1.0, math.sqrt(2)))
        deep = WhittakerSeries(W2, 2, base[:9])
        for z in (0.3 + 0.05j, 0.1 + 0.08j):
            a = series_eval(short, z, tol=1.0)
            b = series_eval(deep, z, tol=1.0)
            assert abs(a.value - b.value) <= a.certificate + b.certificate
            assert a.certificate > 0

    def test_uncertifiable(self, series):
        with pytest.raises(TailCertificateError):
            series_eval(series, 1e-6j)

    def test_validation(self):
        with pytest.raises(DomainError):
            WhittakerSeries(W2, 2, [])
        with pytest.raises(DomainError):
            WhittakerSeries(W2, 1, [1.0])

    def test_x_independent_modulus(self):
        fs = WhittakerSeries(W2, 3, [1.0], growth=(0.0, 1.0))
        v = [abs(series_eval(fs, complex(x, 0.7)).value) for x in np.linspace(0, 1, 7)]
        assert max(v) - min(v) <= 1e-15 * max(v)


class TestUnfolding:
    @pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
    def test_recovers_w(self, series, y):
        got = constant_term_unfold(series, y, 1)
        assert abs(got - W2.radial(y)) <= 1e-8 * abs(W2.radial(y))

    @pytest.mark.parametrize("m", [3, 5, 6, 7, 12])
    def test_non_powers_vanish(self, series, m):
        assert abs(constant_term_unfold(series, 1.0, m)) <= 1e-10

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_isolates_terms(self, series, k):
        y = 0.4
        got = constant_term_unfold(series, y, 2 ** k)
        ref = series.weights[k] * W2.radial(2 ** k * y)
        assert abs(got - ref) <= 1e-12 * W2.radial(y)

    def test_node_count_checked(self, series):
        with pytest.raises(DomainError):
            constant_term_unfold(series, 1.0, 1, n_nodes=100)


class TestSiegelScan:
    def test_positive_with_certificates(self, series, tmp_path):
        rows = siegel_nonvanishing_scan(series, [0.5, 1.0, 2.0, 3.0], path=tmp_path / "scan.csv")
        assert all(r.positive and r.max_abs > r.certificate for r in rows)
        header = (tmp_path / "scan.csv").read_text().splitlines()[0]
        assert header == "T,max,argmax_x,argmax_y,certificate"

    def test_zero_weights(self):
        fs = WhittakerSeries(W2, 2, np.zeros(5))
        rows = siegel_nonvanishing_scan(fs, [1.0, 2.0])
        assert all(r.max_abs == 0.0 and not r.positive for r in rows)

    def test_envelope_decay(self, series):
        rows = siegel_nonvanishing_scan(series, [1.0, 2.0, 3.0, 4.0])
        rates = np.diff(np.log([r.max_abs for r in rows]))
        assert np.all(np.abs(rates + 2 * math.pi) <= 0.3)

    def test_domain(self, series):
        with pytest.raises(DomainError):
            siegel_nonvanishing_scan(series, [0.0])
