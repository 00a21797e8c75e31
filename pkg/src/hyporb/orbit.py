"""Rescaling minimizers into periodic orbits and diagnosing them.

A critical loop q with positive Dirichlet energy rescales to a T-periodic
solution via T^2 = A / B, A = (1/2) int |dq/dt|^2, B = int (H - V(q)).
Orbits are sampled on a uniform grid over [-T/2, T/2]; all residuals exclude
a configurable margin of samples at each end, because the minimizer is not
required to solve the equation at the anchored endpoints (and the analytic
free-potential minimizer has a genuine corner there).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EnergyConditionError, MarkerUndefinedError, ParameterError
from .functional import eval_f
from .loopspace import (LoopPath, MODE_HALF_ANTISYMMETRIC, derivative_sample,
                        dirichlet_energy, sample)
from .potentials import Potential

CLASS_HYPERBOLIC = "hyperbolic"
CLASS_PARABOLIC = "parabolic"
CLASS_BOUNDED = "bounded"
CLASS_UNDETERMINED = "undetermined"

DEFAULT_SAMPLES = 1024
DEFAULT_MARGIN = 2
HYPERBOLIC_TOL = 1.0e-3


@dataclass(frozen=True)
class PeriodicOrbit:
    """A sampled T-periodic solution u on [-T/2, T/2].

    t_shift is the time-translation applied when the orbit is centered at
    its closest approach: u(t) here equals the unshifted solution at
    t + t_shift, so the recorded domain is [-T/2 - t_shift, T/2 + ... ] of
    the original clock, stored in `domain`.
    """

    T: float
    R: float
    times: np.ndarray          # (m,)
    u: np.ndarray              # (m, dim)
    udot: np.ndarray           # (m, dim)
    source: Optional[LoopPath] = None
    t_shift: float = 0.0

    @property
    def m(self):
        return self.times.shape[0]

    @property
    def dim(self):
        return self.u.shape[1]

    @property
    def domain(self):
        return (-0.5 * self.T - self.t_shift, 0.5 * self.T - self.t_shift)


def _loop_time(orbit: PeriodicOrbit, t):
    offset = 0.5 if orbit.source.mode == MODE_HALF_ANTISYMMETRIC else 0.0
    return (np.asarray(t, dtype=float) + orbit.t_shift) / orbit.T + offset


def eval_u(orbit: PeriodicOrbit, t):
    """Exact evaluation of u(t) from the underlying loop representation."""
    if orbit.source is None:
        raise ParameterError("orbit has no loop source; only samples available")
    return sample(orbit.source, _loop_time(orbit, t))


def eval_udot(orbit: PeriodicOrbit, t):
    if orbit.source is None:
        raise ParameterError("orbit has no loop source; only samples available")
    return derivative_sample(orbit.source, _loop_time(orbit, t)) / orbit.T


def compute_period(source, p: Potential, H: float) -> float:
    """Period of the rescaled solution, T = sqrt(A / B).

    Accepts a LoopPath or anything carrying one in a `loop` attribute.
    """
    q = getattr(source, "loop", source)
    A = 0.5 * dirichlet_energy(q)
    if A <= 0.0:
        raise ParameterError("loop has zero Dirichlet energy; no rescaling exists")
    B = eval_f(q, p, H).B
    if B <= 0.0:
        raise EnergyConditionError(
            f"int (H - V(q)) = {B} is not positive; energy level too low")
    return float(np.sqrt(A / B))


def rescale(q: LoopPath, T: float, m: int = DEFAULT_SAMPLES,
            t_shift: float = 0.0) -> PeriodicOrbit:
    """Sample the T-periodic solution induced by the loop."""
    if T <= 0.0:
        raise ParameterError(f"period must be positive, got {T}")
    if m < 4 * q.K:
        raise ParameterError(f"need m >= 4K orbit samples (m={m}, K={q.K})")
    times = np.linspace(-0.5 * T, 0.5 * T, m)
    offset = 0.5 if q.mode == MODE_HALF_ANTISYMMETRIC else 0.0
    s = (times + t_shift) / T + offset
    return PeriodicOrbit(T=T, R=q.R, times=times,
                         u=sample(q, s), udot=derivative_sample(q, s) / T,
                         source=q, t_shift=t_shift)


def _interior(orbit: PeriodicOrbit, margin: int):
    if margin < 0 or 2 * margin + 3 > orbit.m:
        raise ParameterError(f"margin {margin} leaves no interior samples")
    return slice(margin, orbit.m - margin)


def energy_residual(orbit: PeriodicOrbit, p: Potential, H: float,
                    margin: int = DEFAULT_MARGIN) -> float:
    """Max interior violation of the energy identity (1/2)|u'|^2 + V(u) = H."""
    sl = _interior(orbit, margin)
    kinetic = 0.5 * np.sum(orbit.udot[sl] ** 2, axis=-1)
    return float(np.max(np.abs(kinetic + p.value(orbit.u[sl]) - H)))


def ode_residual(orbit: PeriodicOrbit, p: Potential,
                 margin: int = DEFAULT_MARGIN) -> float:
    """Max interior norm of D2 u + grad V(u), D2 the centered second difference."""
    if orbit.m < 8:
        raise ParameterError("need at least 8 samples for the second difference")
    dt = orbit.times[1] - orbit.times[0]
    d2 = (orbit.u[2:] - 2.0 * orbit.u[1:-1] + orbit.u[:-2]) / dt ** 2
    res = d2 + p.grad(orbit.u[1:-1])
    lo = max(margin - 1, 0)
    hi = res.shape[0] - lo if lo else res.shape[0]
    return float(np.max(np.linalg.norm(res[lo:hi], axis=-1)))


def _radii(orbit):
    return np.linalg.norm(orbit.u, axis=-1)


def time_markers(orbit: PeriodicOrbit, L: float):
    """(t_minus, t_plus): first/last times with |u(t)| <= L, on the sample
    grid with linear interpolation of |u| between samples."""
    if L >= orbit.R:
        return float(orbit.times[0]), float(orbit.times[-1])
    r = _radii(orbit)
    inside = np.nonzero(r <= L)[0]
    if inside.size == 0:
        raise MarkerUndefinedError(
            f"|u(t)| > {L} for every sample; markers undefined")
    i0, i1 = int(inside[0]), int(inside[-1])
    t = orbit.times

    def _cross(ia, ib):
        # linear interpolation between an inside sample ia and outside ib
        ra, rb = r[ia], r[ib]
        w = (L - ra) / (rb - ra)
        return float(t[ia] + w * (t[ib] - t[ia]))

    t_minus = float(t[i0]) if i0 == 0 else _cross(i0, i0 - 1)
    t_plus = float(t[i1]) if i1 == orbit.m - 1 else _cross(i1, i1 + 1)
    return t_minus, t_plus


def min_radius(orbit: PeriodicOrbit):
    """(t_star, M_obs): earliest interpolated minimizer of |u(t)|.

    A parabola through the squared radius at the three samples around the
    grid minimum refines the time; the value is re-evaluated exactly from
    the loop representation when available.
    """
    r = _radii(orbit)
    i = int(np.argmin(r))
    t = orbit.times
    if 0 < i < orbit.m - 1:
        r2 = r ** 2
        denom = r2[i - 1] - 2.0 * r2[i] + r2[i + 1]
        if denom > 0.0:
            dt = t[1] - t[0]
            shift = 0.5 * dt * (r2[i - 1] - r2[i + 1]) / denom
            shift = float(np.clip(shift, -dt, dt))
        else:
            shift = 0.0
        t_star = float(t[i] + shift)
    else:
        t_star = float(t[i])
    if orbit.source is not None:
        m_obs = float(np.linalg.norm(eval_u(orbit, t_star)))
        if r[i] < m_obs:
            t_star, m_obs = float(t[i]), float(r[i])
    else:
        m_obs = float(r[i])
    return t_star, m_obs


def center_shift(orbit: PeriodicOrbit, m: Optional[int] = None) -> PeriodicOrbit:
    """Resample with the time origin moved to the closest-approach time."""
    if orbit.source is None:
        raise ParameterError("centering requires the loop source")
    t_star, _ = min_radius(orbit)
    return rescale(orbit.source, orbit.T, m or orbit.m,
                   t_shift=orbit.t_shift + t_star)


def terminal_speed(orbit: PeriodicOrbit, p: Potential, H: float,
                   radius_grew: Optional[bool] = None,
                   hyperbolic_tol: float = HYPERBOLIC_TOL):
    """(speed, classification) at the maximal-radius endpoint.

    The speed comes from the energy identity, sqrt(2 (H - V(u_end))), which
    avoids differentiating at the endpoint where the minimizer need not
    solve the equation.  Classification needs sweep context (did the maximal
    radius grow with R?); without it the verdict is undetermined.
    """
    r = _radii(orbit)
    end = 0 if r[0] >= r[-1] else orbit.m - 1
    v_end = float(p.value(orbit.u[end]))
    speed = float(np.sqrt(max(0.0, 2.0 * (H - v_end))))
    if radius_grew is None:
        cls = CLASS_UNDETERMINED
    elif not radius_grew:
        cls = CLASS_BOUNDED
    elif speed >= hyperbolic_tol:
        cls = CLASS_HYPERBOLIC
    else:
        cls = CLASS_PARABOLIC
    return speed, cls


@dataclass(frozen=True)
class OrbitDiagnostics:
    energy_residual_max: float
    ode_residual_max: float
    t_minus: Optional[float]
    t_plus: Optional[float]
    min_radius_value: float
    min_radius_time: float
    terminal_speed: float
    classification: str
    marker_note: str = ""

    def to_dict(self):
        return {
            "energy_residual_max": self.energy_residual_max,
            "ode_residual_max": self.ode_residual_max,
            "t_minus": self.t_minus,
            "t_plus": self.t_plus,
            "min_radius_value": self.min_radius_value,
            "min_radius_time": self.min_radius_time,
            "terminal_speed": self.terminal_speed,
            "classification": self.classification,
            "marker_note": self.marker_note,
        }


def diagnose(orbit: PeriodicOrbit, p: Potential, H: float,
             L: Optional[float] = None, margin: int = DEFAULT_MARGIN,
             radius_grew: Optional[bool] = None) -> OrbitDiagnostics:
    """Assemble every per-orbit diagnostic in one record."""
    t_star, m_obs = min_radius(orbit)
    t_minus = t_plus = None
    note = "" if L is not None else "no marker radius supplied"
    if L is not None:
        try:
            t_minus, t_plus = time_markers(orbit, L)
        except MarkerUndefinedError as exc:
            note = str(exc)
    speed, cls = terminal_speed(orbit, p, H, radius_grew=radius_grew)
    return OrbitDiagnostics(
        energy_residual_max=energy_residual(orbit, p, H, margin=margin),
        ode_residual_max=ode_residual(orbit, p, margin=margin),
        t_minus=t_minus, t_plus=t_plus,
        min_radius_value=m_obs, min_radius_time=t_star,
        terminal_speed=speed, classification=cls, marker_note=note)


def orbit_rows(orbit: PeriodicOrbit, p: Potential, H: float):
    """Per-sample rows (t, u_1..u_N, speed, energy_residual) for CSV export."""
    speeds = np.linalg.norm(orbit.udot, axis=-1)
    res = np.abs(0.5 * speeds ** 2 + p.value(orbit.u) - H)
    return np.column_stack([orbit.times, orbit.u, speeds, res])
