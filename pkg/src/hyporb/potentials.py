"""Potential fields and hypothesis checks.

A potential is a smooth scalar field V on R^N together with its gradient.
Both callables are vectorized: they accept arrays of shape (..., N) and
return shapes (...,) and (..., N) respectively.  The built-in family is the
charged restricted-three-body potential

    V(x) = -beta * (|x|^2 + rho^2)^(-alpha/2)

whose gradient field reproduces the third body's equation of motion once the
separation of the primaries is frozen to the constant rho.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError

THREE_BODY_CHARGED = "three_body_charged"
CUSTOM = "custom"

PROFILE_THM16 = "thm16"
PROFILE_THM17 = "thm17"


@dataclass(frozen=True)
class ThreeBodyChargedParams:
    """Parameters of the charged three-body family.

    alpha: force-law exponent, must lie in (0, 2).
    beta:  effective signed strength (mass plus charge coupling over mass).
           beta < 0 gives V > 0 everywhere; beta > 0 gives V < 0 everywhere.
    rho:   frozen separation distance of the primaries, must be positive.
    """

    alpha: float
    beta: float
    rho: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.rho <= 0.0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if self.beta == 0.0:
            raise ParameterError("beta must be nonzero")


@dataclass(frozen=True)
class Potential:
    """A scalar field with gradient, total on all of R^N."""

    dim: int
    value_fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    family_tag: str = CUSTOM
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError(f"dim must be a positive integer, got {self.dim}")

    def value(self, x):
        x = self._check(x)
        return self.value_fn(x)

    def grad(self, x):
        x = self._check(x)
        return self.grad_fn(x)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ParameterError(
                f"point has trailing dimension {x.shape[-1:]}, expected ({self.dim},)"
            )
        return x


def make_three_body(params: ThreeBodyChargedParams, dim: int = 2) -> Potential:
    """Build the charged three-body potential on R^dim."""
    alpha, beta, rho = params.alpha, params.beta, params.rho

    def value_fn(x):
        r2 = np.sum(x * x, axis=-1) + rho * rho
        return -beta * r2 ** (-alpha / 2.0)

    def grad_fn(x):
        r2 = np.sum(x * x, axis=-1) + rho * rho
        return alpha * beta * x * r2[..., None] ** (-(alpha + 2.0) / 2.0)

    return Potential(
        dim=dim,
        value_fn=value_fn,
        grad_fn=grad_fn,
        family_tag=THREE_BODY_CHARGED,
        params={"alpha": alpha, "beta": beta, "rho": rho},
    )


def make_custom(dim, value_fn, grad_fn, params=None) -> Potential:
    """Wrap user-supplied value/gradient callables (both are required)."""
    return Potential(dim=dim, value_fn=value_fn, grad_fn=grad_fn,
                     family_tag=CUSTOM, params=dict(params or {}))


def eval_V(p: Potential, x) -> float:
    """Evaluate V at a single point."""
    return float(p.value(x))


def eval_gradV(p: Potential, x) -> np.ndarray:
    """Evaluate grad V at a single point."""
    return np.asarray(p.grad(x), dtype=float)


@dataclass(frozen=True)
class SampleGrid:
    """Radial sampling plan for hypothesis checks.

    Points are drawn on spheres of logarithmically spaced radii up to r_max,
    along seeded random unit directions plus the coordinate axes.
    """

    r_max: float = 1.0e3
    n_radii: int = 24
    n_directions: int = 12
    seed: int = 0
    decay_tol: float = 1.0e-3

    def points(self, dim):
        rng = np.random.default_rng(self.seed)
        dirs = rng.standard_normal((self.n_directions, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = np.concatenate([np.eye(dim), dirs], axis=0)
        radii = np.geomspace(1.0e-2, self.r_max, self.n_radii)
        return radii[:, None, None] * dirs[None, :, :], radii


@dataclass(frozen=True)
class HypothesisVerdict:
    name: str
    passed: bool
    worst_violation: float
    witness: tuple


@dataclass(frozen=True)
class HypothesisReport:
    """Sampled verdicts for the decay/evenness/sign hypotheses.

    Sign conditions are checked non-strictly; the decay limits have no rate
    in their statement, so pass/fail at the largest sampled radius uses the
    grid's decay_tol, which is recorded here so the choice is visible.
    """

    profile: str
    verdicts: dict
    energy_ok: bool
    grid: SampleGrid

    @property
    def all_pass(self):
        return self.energy_ok and all(v.passed for v in self.verdicts.values())

    def to_dict(self):
        return {
            "profile": self.profile,
            "energy_ok": bool(self.energy_ok),
            "all_pass": bool(self.all_pass),
            "decay_tol": self.grid.decay_tol,
            "grid": {"r_max": self.grid.r_max, "n_radii": self.grid.n_radii,
                     "n_directions": self.grid.n_directions, "seed": self.grid.seed},
            "verdicts": {
                k: {"passed": bool(v.passed),
                    "worst_violation": float(v.worst_violation),
                    "witness": [float(c) for c in v.witness]}
                for k, v in self.verdicts.items()
            },
        }


def _worst(points, violations):
    flat = violations.reshape(-1)
    i = int(np.argmax(flat))
    return float(flat[i]), tuple(points.reshape(-1, points.shape[-1])[i])


def check_hypotheses(p: Potential, H: float, profile: str,
                     grid: SampleGrid = SampleGrid()) -> HypothesisReport:
    """Sample the hypotheses of the chosen regime profile.

    A failing hypothesis is reported with the witness point achieving the
    worst violation; it is never raised as an error.
    """
    if profile not in (PROFILE_THM16, PROFILE_THM17):
        raise ParameterError(f"unknown profile {profile!r}")
    pts, radii = grid.points(p.dim)
    vals = p.value(pts)
    vals_neg = p.value(-pts)
    grads = p.grad(pts)
    v0 = float(p.value(np.zeros(p.dim)))
    scale = max(abs(v0), 1.0)

    verdicts = {}

    even_viol = np.abs(vals - vals_neg) - 1.0e-10 * (1.0 + np.abs(vals))
    if profile == PROFILE_THM16:
        # V(0) >= V(-x) = V(x) > 0 everywhere
        sign_viol = np.maximum(np.maximum(-vals, vals - v0), even_viol)
        worst, witness = _worst(pts, sign_viol)
        verdicts["V1"] = HypothesisVerdict("V1", worst <= 0.0, max(worst, 0.0), witness)
        energy_ok = H > v0
    else:
        # V(-x) = V(x) < 0 everywhere
        sign_viol = np.maximum(vals, even_viol)
        worst, witness = _worst(pts, sign_viol)
        verdicts["V4"] = HypothesisVerdict("V4", worst <= 0.0, max(worst, 0.0), witness)
        energy_ok = H > 0.0

    # (x, grad V(x)) -> 0 at the largest sampled radius
    virial = np.sum(pts * grads, axis=-1)
    v2_viol = np.abs(virial[-1]) - grid.decay_tol * scale
    worst, witness = _worst(pts[-1], v2_viol)
    verdicts["V2"] = HypothesisVerdict("V2", worst <= 0.0, max(worst, 0.0), witness)

    # V(x) -> 0 at the largest sampled radius
    v3_viol = np.abs(vals[-1]) - grid.decay_tol * scale
    worst, witness = _worst(pts[-1], v3_viol)
    verdicts["V3"] = HypothesisVerdict("V3", worst <= 0.0, max(worst, 0.0), witness)

    return HypothesisReport(profile=profile, verdicts=verdicts,
                            energy_ok=energy_ok, grid=grid)
