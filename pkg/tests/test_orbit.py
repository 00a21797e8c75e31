"""Rescaled periodic orbits: period formula, markers, diagnostics.

The exact odd-antisymmetric zigzag with V = 0 is the workhorse oracle: the
rescaled orbit is the straight line u(t) = (2R/T) t e_1 with T = sqrt(2) R
at H = 1, so every diagnostic has a closed form.
"""

import json

import numpy as np
import pytest

from hyporb import (center_shift, compute_period, diagnose, energy_residual,
                    min_radius, new_loop, ode_residual, rescale,
                    terminal_speed, time_markers)
from hyporb.errors import (EnergyConditionError, MarkerUndefinedError,
                           ParameterError)
from hyporb.loopspace import MODE_ODD_ANTISYMMETRIC, PROFILE_ZIGZAG
from hyporb.orbit import (CLASS_BOUNDED, CLASS_HYPERBOLIC, CLASS_UNDETERMINED,
                          eval_u, eval_udot, orbit_rows)

from conftest import constant_potential, zero_potential

D = np.array([1.0, 0.0])


@pytest.fixture
def line_orbit():
    q = new_loop(2, 1.0, 4, 16, D, profile=PROFILE_ZIGZAG,
                 mode=MODE_ODD_ANTISYMMETRIC)
    T = compute_period(q, zero_potential(), 1.0)
    return rescale(q, T, 1024), T


def test_period_formula_on_zigzag(line_orbit):
    _, T = line_orbit
    assert T == pytest.approx(np.sqrt(2.0), rel=1e-14)


def test_rescaled_orbit_is_straight_line(line_orbit):
    orbit, T = line_orbit
    expected = (2.0 / T) * orbit.times[:, None] * D
    assert np.allclose(orbit.u, expected, atol=1e-12)
    assert np.allclose(orbit.udot[3:-3], (2.0 / T) * D, atol=1e-12)


def test_energy_and_ode_residuals_vanish(line_orbit):
    orbit, _ = line_orbit
    assert energy_residual(orbit, zero_potential(), 1.0) <= 1e-12
    assert ode_residual(orbit, zero_potential()) <= 1e-8


def test_time_markers_closed_form(line_orbit):
    orbit, T = line_orbit
    t_minus, t_plus = time_markers(orbit, 0.5)
    assert t_plus == pytest.approx(0.25 * T, abs=1e-6)
    assert t_minus == pytest.approx(-0.25 * T, abs=1e-6)
    with pytest.raises(MarkerUndefinedError):
        # Shift the clock so the sampled window misses the origin.
        far = rescale(orbit.source, T, 1024, t_shift=10.0 * T)
        time_markers(far, 1e-6)
    lo, hi = orbit.domain
    assert time_markers(orbit, 2.0) == (lo, hi)   # L >= R covers everything


def test_min_radius_and_centering(line_orbit):
    orbit, T = line_orbit
    t_star, m_obs = min_radius(orbit)
    assert abs(t_star) <= 1e-9 and m_obs <= 1e-9
    shifted = rescale(orbit.source, T, 1024, t_shift=0.3)
    t_star, _ = min_radius(shifted)
    assert t_star == pytest.approx(-0.3, abs=1e-6)
    centered = center_shift(shifted)
    t_star, _ = min_radius(centered)
    assert abs(t_star) <= 1e-9


def test_terminal_speed_energy_identity_and_classes(line_orbit):
    orbit, _ = line_orbit
    speed, cls = terminal_speed(orbit, zero_potential(), 1.0)
    assert speed == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert cls == CLASS_UNDETERMINED
    assert terminal_speed(orbit, zero_potential(), 1.0, radius_grew=True)[1] \
        == CLASS_HYPERBOLIC
    assert terminal_speed(orbit, zero_potential(), 1.0, radius_grew=False)[1] \
        == CLASS_BOUNDED


def test_eval_u_consistency(line_orbit):
    orbit, _ = line_orbit
    assert np.allclose(eval_u(orbit, orbit.times), orbit.u, atol=1e-12)
    assert np.allclose(eval_udot(orbit, orbit.times[5:9]),
                       orbit.udot[5:9], atol=1e-12)


def test_diagnose_record_is_json_ready(line_orbit):
    orbit, _ = line_orbit
    diag = diagnose(orbit, zero_potential(), 1.0, L=0.5, radius_grew=True)
    doc = json.loads(json.dumps(diag.to_dict()))
    assert doc["classification"] == CLASS_HYPERBOLIC
    assert doc["t_plus"] == pytest.approx(-doc["t_minus"], abs=1e-9)
    bare = diagnose(orbit, zero_potential(), 1.0)
    assert bare.marker_note == "no marker radius supplied"
    assert bare.t_plus is None


def test_orbit_rows_shape(line_orbit):
    orbit, _ = line_orbit
    rows = orbit_rows(orbit, zero_potential(), 1.0)
    assert rows.shape == (orbit.m, 1 + orbit.dim + 2)


def test_period_error_paths():
    q = new_loop(2, 1.0, 4, 16, D, mode=MODE_ODD_ANTISYMMETRIC)
    with pytest.raises(EnergyConditionError):
        compute_period(q, constant_potential(5.0), 1.0)   # H - V < 0
    with pytest.raises(ParameterError):
        rescale(q, -1.0, 64)
    with pytest.raises(ParameterError):
        rescale(q, 1.0, 8)    # m < 4K
