"""Radius sweeps: plan validation, window comparison, gauge fixing."""

import json

import numpy as np
import pytest

from hyporb import (MinimizeOptions, SweepPlan, candidate_summary,
                    compact_window_diff, compute_period, geometric_radii,
                    minimize, new_loop, rescale, run_sweep)
from hyporb.continuation import (_align_anchor, _refine_factor,
                                 VERDICT_HYPERBOLIC, VERDICT_UNDETERMINED)
from hyporb.errors import SweepFailedError, WindowDomainError
from hyporb.loopspace import MODE_ODD_ANTISYMMETRIC, anchor_point
from hyporb.potentials import PROFILE_THM17, make_custom

from conftest import zero_potential

D = np.array([1.0, 0.0])


def test_plan_validation():
    with pytest.raises(SweepFailedError):
        SweepPlan(radii=(4.0,))
    with pytest.raises(SweepFailedError):
        SweepPlan(radii=(4.0, 2.0))
    with pytest.raises(SweepFailedError):
        SweepPlan(radii=(2.0, 4.0), L_marker=5.0)


def test_geometric_radii():
    assert geometric_radii(2.0, 2.0, 7) == (2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)


def test_refine_factor_powers_of_two():
    assert [_refine_factor(r) for r in (2.0, 4.0, 8.0, 16.0, 128.0)] \
        == [1, 1, 2, 4, 32]


def test_compact_window_diff_zero_on_identical_orbits():
    q = new_loop(2, 1.0, 4, 16, D, mode=MODE_ODD_ANTISYMMETRIC)
    T = compute_period(q, zero_potential(), 1.0)
    orbit = rescale(q, T, 64)
    assert compact_window_diff(orbit, orbit, 0.25 * T) == 0.0
    with pytest.raises(WindowDomainError):
        compact_window_diff(orbit, orbit, T)


def test_align_anchor_rotates_radial_minimizer_back(p17):
    q0 = new_loop(2, 2.0, 16, 64, np.array([np.cos(0.3), np.sin(0.3)]),
                  mode=MODE_ODD_ANTISYMMETRIC)
    rep = minimize(q0, p17, 1.0, 2.0, MinimizeOptions(restart_directions=1))
    assert rep.converged
    aligned = _align_anchor(rep.loop, D, p17, 1.0, rep.f_final.f)
    a = anchor_point(aligned)
    assert a[0] == pytest.approx(2.0, abs=1e-9)
    assert abs(a[1]) <= 1e-9


def test_align_anchor_rejected_for_non_radial_potential():
    # Anisotropic even potential: a rigid rotation changes f, so the gauge
    # fix must leave the loop untouched.
    aniso = make_custom(
        2,
        lambda x: -((x[..., 0] ** 2 + 4.0 * x[..., 1] ** 2 + 1.0) ** -0.5),
        lambda x: np.stack([x[..., 0], 4.0 * x[..., 1]], axis=-1)
        * (x[..., 0] ** 2 + 4.0 * x[..., 1] ** 2 + 1.0)[..., None] ** -1.5)
    q0 = new_loop(2, 2.0, 16, 64, np.array([np.cos(0.3), np.sin(0.3)]),
                  mode=MODE_ODD_ANTISYMMETRIC)
    rep = minimize(q0, aniso, 1.0, 2.0, MinimizeOptions(restart_directions=1))
    from hyporb.functional import eval_f
    same = _align_anchor(rep.loop, D, aniso, 1.0,
                         eval_f(rep.loop, aniso, 1.0).f)
    assert same is rep.loop


def test_small_sweep_assembles_evidence(p17):
    plan = SweepPlan(radii=(2.0, 3.0, 4.5), profile=PROFILE_THM17)
    cand = run_sweep(plan, p17, 1.0)
    assert len(cand.records) == 3
    assert sum(r.converged for r in cand.records) >= 2
    assert len(cand.compact_convergence) == 2
    assert cand.verdict in (VERDICT_HYPERBOLIC, VERDICT_UNDETERMINED)
    assert set(cand.checks) == {"min_radius_bounded", "escape_gap_increasing",
                                "terminal_speed_near_limit",
                                "compact_convergence_nonincreasing"}
    assert all(isinstance(v, bool) for v in cand.checks.values())


def test_summary_is_deterministic_json(p17):
    plan = SweepPlan(radii=(2.0, 3.0), profile=PROFILE_THM17)
    a = json.dumps(candidate_summary(run_sweep(plan, p17, 1.0), plan, 1.0),
                   sort_keys=True)
    b = json.dumps(candidate_summary(run_sweep(plan, p17, 1.0), plan, 1.0),
                   sort_keys=True)
    assert a == b
    doc = json.loads(a)
    assert doc["schema"] == 1 and len(doc["records"]) == 2
