"""Shared fixtures: potentials and session-cached flagship sweeps."""

import numpy as np
import pytest

from hyporb import (SweepPlan, ThreeBodyChargedParams, geometric_radii,
                    make_custom, make_three_body, run_sweep)
from hyporb.potentials import PROFILE_THM16, PROFILE_THM17


def zero_potential(dim=2):
    return make_custom(dim,
                       lambda x: np.zeros(x.shape[:-1]),
                       lambda x: np.zeros_like(x))


def constant_potential(c, dim=2):
    return make_custom(dim,
                       lambda x: np.full(x.shape[:-1], c),
                       lambda x: np.zeros_like(x))


@pytest.fixture(scope="session")
def p16():
    """Repulsive charged potential (V > 0 everywhere)."""
    return make_three_body(ThreeBodyChargedParams(alpha=1.0, beta=-1.0, rho=1.0))


@pytest.fixture(scope="session")
def p17():
    """Attractive charged potential (V < 0 everywhere)."""
    return make_three_body(ThreeBodyChargedParams(alpha=1.0, beta=1.0, rho=1.0))


@pytest.fixture(scope="session")
def sweep16(p16):
    plan = SweepPlan(radii=geometric_radii(), profile=PROFILE_THM16)
    return plan, run_sweep(plan, p16, 2.0), 2.0


@pytest.fixture(scope="session")
def sweep17(p17):
    plan = SweepPlan(radii=geometric_radii(), profile=PROFILE_THM17)
    return plan, run_sweep(plan, p17, 1.0), 1.0
