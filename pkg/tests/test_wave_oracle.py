import math

import numpy as np
import pytest

from cuspkit.errors import BoundaryContaminationError, StabilityError
from cuspkit.modular import smoothed_wave_kernel, window_kernel
from cuspkit.special_fn import spherical_grid
from cuspkit.spherical import RadialKernel, standard_kernel_suite
from cuspkit.wave_oracle import (RadialWaveState, energy, evolve, initial_state, snapshot_csv,
                                 support_extent, wave_propagate)


@pytest.fixture(scope="module")
def bump():
    return standard_kernel_suite()["smooth_R2"]


def _windowed_xi(s, r0=4.0, width=1.0):
    def f(r):
        r = np.asarray(r, dtype=float)
        xi = spherical_grid([s], r)[:, 0].real
        x = np.clip((r - r0) / width, 0.0, 1.0)
        taper = np.where(x < 1, np.exp(1 - 1 / np.maximum(1 - x * x, 1e-300)), 0.0)
        return xi * taper
    return f


def test_short_time_doubles_initial(bump):
    out = wave_propagate(bump, 1e-3, dr=1e-3, richardson=False)
    r = np.linspace(0, 2, 101)
    assert np.max(np.abs(out(r) - 2 * bump(r))) <= 1e-4 * 2 * bump.max_abs()


@pytest.mark.parametrize("t", [0.3, 1.0])
def test_finite_propagation_speed(bump, t):
    out = wave_propagate(bump, t, dr=2e-3)
    reach = support_extent(out.grid, out.values, 1e-4)
    assert reach <= bump.support_radius + t + 2 * out.meta["dr"]


def test_separated_solution():
    s, t = 3.0, 0.5
    f = _windowed_xi(s)
    k = RadialKernel.from_function(f, 5.0, n=2001)
    out = wave_propagate(k, t, dr=2e-3)
    # points whose backward light cone stays inside the untapered region
    r = np.linspace(0, 4.0 - t - 0.1, 200)
    ref = 2 * math.cos(t * s) * f(r)
    assert np.max(np.abs(out(r) - ref)) <= 1e-3 * np.max(np.abs(ref))


def test_energy_zero_state():
    g = np.linspace(0, 1, 11)
    assert energy(RadialWaveState(g, np.zeros(11), np.zeros(11))) == 0.0


def test_energy_drift_second_order(bump):
    drifts = []
    for dr in (2e-3, 1e-3):
        st = initial_state(bump, dr, 4.5)
        e0 = energy(st)
        drifts.append(abs(energy(evolve(st, 1.0, 0.4 * dr)) - e0) / abs(e0))
    assert drifts[1] <= 1e-3
    assert 3.0 <= drifts[0] / drifts[1] <= 5.0


def test_time_reversal(bump):
    out = wave_propagate(bump, 0.7, dr=2e-3)
    st = initial_state(bump, 1e-3, 4.0)
    back = evolve(evolve(st, 0.7, 4e-4), -0.7, 4e-4)
    assert np.max(np.abs(back.u - st.u)) <= 2 * out.meta["error_estimate"]


def test_error_estimate_tracks_refinement(bump):
    out = wave_propagate(bump, 0.5, dr=4e-3)
    fine = wave_propagate(bump, 0.5, dr=1e-3, richardson=False)
    r = np.linspace(0, 2.4, 300)
    assert np.max(np.abs(out(r) - fine(r))) <= out.meta["error_estimate"]


def test_stability_guard(bump):
    with pytest.raises(StabilityError):
        wave_propagate(bump, 0.5, dt=2e-3, dr=2e-3)


def test_boundary_guard(bump):
    with pytest.raises(BoundaryContaminationError):
        wave_propagate(bump, 1.0, dr=2e-3, r_max=2.5)


@pytest.mark.parametrize("p", [2, 3])
def test_matches_spectral_synthesis(p):
    t = math.log(p)
    fd = wave_propagate(window_kernel(), t, dr=2e-3)
    spec = smoothed_wave_kernel(t)
    assert spec.support_radius == pytest.approx(0.5 + t)
    r = np.linspace(0, spec.support_radius + 0.3, 600)
    assert np.max(np.abs(fd(r) - spec(r))) <= 2e-3


def test_snapshot_csv(tmp_path):
    path = snapshot_csv(tmp_path / "snap.csv", [0.0, 0.5], [1.0, 2.0])
    assert open(path).read().splitlines() == ["r,u", "0.0,1.0", "0.5,2.0"]
