"""Constrained minimization of the action functional on the loop class.

Projected gradient descent in coefficient space: step along the (diagonally
preconditioned) tangent gradient, backtrack on f, then retract the endpoint
back onto |q(anchor)| = R.  Iterates stay exactly feasible, so the period
formula applies verbatim to the output.  The method is first-order only; a
multi-start over seeded random initial directions stands in for the missing
global-optimality guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .functional import FunctionalValue, eval_f, eval_grad_f
from .loopspace import (LoopPath, MODE_HALF_ANTISYMMETRIC, anchor_point,
                        dirichlet_energy, endpoint_retract, new_loop,
                        profile_anchor, profile_gram)
from .potentials import Potential

_STEP_MAX = 16.0


@dataclass(frozen=True)
class MinimizeOptions:
    max_iter: int = 5000
    grad_tol: float = 1.0e-8          # relative stationarity tolerance
    shrink: float = 0.5               # backtracking contraction factor
    sufficient_decrease: float = 1.0e-4
    min_step: float = 1.0e-14
    restart_directions: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.max_iter <= 0 or self.grad_tol <= 0 or self.min_step <= 0:
            raise ParameterError("max_iter, grad_tol and min_step must be positive")
        if not (0.0 < self.shrink < 1.0):
            raise ParameterError(f"shrink must lie in (0, 1), got {self.shrink}")
        if self.sufficient_decrease <= 0:
            raise ParameterError("sufficient_decrease must be positive")
        if self.restart_directions < 1:
            raise ParameterError("restart_directions must be at least 1")


@dataclass
class MinimizeReport:
    loop: LoopPath
    f_final: FunctionalValue
    grad_norm: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)   # rows (iter, f, A, B, grad_norm, step)
    notes: list = field(default_factory=list)
    restart_values: list = field(default_factory=list)


def _anchor_weights(q: LoopPath):
    """d(anchor point)/d(coefficient) per slot, as (cos, sin, profile) scalars."""
    wc = np.zeros(q.K)
    ws = np.zeros(q.K)
    if q.mode == MODE_HALF_ANTISYMMETRIC:
        wc[:] = 1.0
    else:
        ws[:] = (-1.0) ** np.arange(q.K)
    return wc, ws, profile_anchor(q.mode)


def _normal_direction(q: LoopPath):
    """Unit normal of the constraint surface {|q(anchor)| = R} in coefficient
    space: the anchor direction repeated across every anchored basis slot."""
    q0 = anchor_point(q)
    norm = np.linalg.norm(q0)
    if norm == 0.0:
        return None
    unit = q0 / norm
    wc, ws, wp = _anchor_weights(q)
    n_cos = wc[:, None] * unit
    n_sin = ws[:, None] * unit
    n_p = wp[:, None] * unit
    scale = 1.0 / np.sqrt(np.sum(wc ** 2) + np.sum(ws ** 2) + np.sum(wp ** 2))
    return n_cos * scale, n_sin * scale, n_p * scale


def _tangent_project(gc, gs, gp, q):
    normal = _normal_direction(q)
    if normal is None:
        return gc, gs, gp
    nc, ns, np_ = normal
    comp = float(np.sum(gc * nc) + np.sum(gs * ns) + np.sum(gp * np_))
    return gc - comp * nc, gs - comp * ns, gp - comp * np_


def _norm3(a, b, c):
    return float(np.sqrt(np.sum(a ** 2) + np.sum(b ** 2) + np.sum(c ** 2)))


def projected_grad_norm(q: LoopPath, p: Potential, H: float, R: float) -> float:
    """Norm of the functional gradient tangent to the endpoint constraint."""
    _, gc, gs, gw = eval_grad_f(q, p, H)
    return _norm3(*_tangent_project(gc, gs, gw, q))


def _with_coefs(q, flat):
    from dataclasses import replace
    k = q.K * q.dim
    return replace(q,
                   cos_coefs=flat[:k].reshape(q.K, q.dim),
                   sin_coefs=flat[k:2 * k].reshape(q.K, q.dim),
                   profile_coefs=flat[2 * k:].reshape(-1, q.dim))


def _flat(q):
    return np.concatenate([q.cos_coefs.ravel(), q.sin_coefs.ravel(),
                           q.profile_coefs.ravel()])


def _composed_grad(q, gc, gs, gp):
    """Gradient of y -> f(retract(y)) at a feasible point.

    At feasibility the retraction Jacobian reduces to subtracting the anchor
    direction's component of the anchored-slot gradient from every slot that
    feeds the anchor point.
    """
    q0 = anchor_point(q)
    norm = np.linalg.norm(q0)
    if norm == 0.0:
        return np.concatenate([gc.ravel(), gs.ravel(), gp.ravel()])
    unit = q0 / norm
    g_anchor = gc[0] if q.mode == MODE_HALF_ANTISYMMETRIC else gs[0]
    pull = unit * float(g_anchor @ unit)
    wc, ws, wp = _anchor_weights(q)
    gc = gc - np.outer(wc, pull)
    gs = gs - np.outer(ws, pull)
    gp = gp - np.outer(wp, pull)
    return np.concatenate([gc.ravel(), gs.ravel(), gp.ravel()])


def _descend(q0: LoopPath, p: Potential, H: float, R: float,
             opts: MinimizeOptions) -> MinimizeReport:
    """L-BFGS on the retraction-composed objective, Armijo backtracking.

    Iterates are re-retracted after every accepted step, so the simplified
    feasible-point gradient stays exact and the reported loop is feasible.
    """
    q = endpoint_retract(q0, R, fallback_direction=None)
    omega2 = q.frequencies ** 2
    trace = []
    notes = []
    step = 1.0
    fallback = anchor_point(q)
    fallback = fallback / np.linalg.norm(fallback)
    converged = False
    memory = []          # (s, y, 1/s.y) pairs, most recent last
    g_prev = None
    x_prev = None
    noise_eps = 16.0 * np.finfo(float).eps

    val, gc, gs, gw = eval_grad_f(q, p, H)

    it = 0
    for it in range(opts.max_iter):
        gnorm = _norm3(*_tangent_project(gc, gs, gw, q))
        trace.append((it, val.f, val.A, val.B, gnorm, step))
        if gnorm <= opts.grad_tol * (1.0 + abs(val.f)):
            converged = True
            break

        x = _flat(q)
        g = _composed_grad(q, gc, gs, gw)
        if g_prev is not None:
            s_vec = x - x_prev
            y_vec = g - g_prev
            sy = float(s_vec @ y_vec)
            if sy > 1.0e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
                memory.append((s_vec, y_vec, 1.0 / sy))
                if len(memory) > 8:
                    memory.pop(0)
        x_prev, g_prev = x, g

        # Two-loop recursion; the Dirichlet block of the Hessian provides the
        # initial diagonal scaling.
        b_pos = max(val.B, 0.0)
        pre = 1.0 / (1.0 + 0.5 * b_pos * omega2)
        pre_p = 1.0 / (1.0 + b_pos * np.diag(profile_gram(q.mode)))
        h0 = np.concatenate([np.tile(np.repeat(pre, q.dim), 2),
                             np.repeat(pre_p, q.dim)])
        d = -g
        alphas = []
        for s_vec, y_vec, rho in reversed(memory):
            a = rho * float(s_vec @ d)
            alphas.append(a)
            d = d - a * y_vec
        d = h0 * d
        for (s_vec, y_vec, rho), a in zip(memory, reversed(alphas)):
            b = rho * float(y_vec @ d)
            d = d + (a - b) * s_vec
        slope = float(g @ d)
        if slope >= 0.0:
            memory.clear()
            d = -h0 * g
            slope = float(g @ d)

        accepted = False
        for attempt in range(2):
            s = 1.0
            while s >= opts.min_step:
                q_trial = endpoint_retract(_with_coefs(q, x + s * d), R,
                                           fallback_direction=fallback)
                f_trial = eval_f(q_trial, p, H).f
                # The epsilon slack keeps the search alive once the true
                # decrease falls below the roundoff noise of f itself.
                noise = noise_eps * (1.0 + abs(val.f))
                if f_trial <= val.f + opts.sufficient_decrease * s * slope + noise:
                    accepted = True
                    break
                s *= opts.shrink
            if accepted or attempt == 1:
                break
            # Retry once from a cleared memory along the preconditioned
            # steepest descent direction.
            memory.clear()
            d = -h0 * g
            slope = float(g @ d)
        if not accepted:
            notes.append(f"line search stalled at iteration {it}")
            break
        q = q_trial
        step = s
        val, gc, gs, gw = eval_grad_f(q, p, H)
        a = anchor_point(q)
        an = np.linalg.norm(a)
        if an > 0:
            fallback = a / an
        else:
            notes.append(f"degenerate endpoint re-seeded at iteration {it}")
    else:
        it = opts.max_iter

    val, gc, gs, gw = eval_grad_f(q, p, H)
    gnorm = _norm3(*_tangent_project(gc, gs, gw, q))
    return MinimizeReport(loop=q, f_final=val, grad_norm=gnorm,
                          iterations=it, converged=converged,
                          trace=trace, notes=notes)


def minimize(q0: LoopPath, p: Potential, H: float, R: float,
             opts: MinimizeOptions = MinimizeOptions()) -> MinimizeReport:
    """Best local minimizer of f over q0 plus seeded random restarts.

    Non-convergence is reported (converged=False), never raised.
    """
    starts = [q0]
    rng = np.random.default_rng(opts.seed)
    for _ in range(opts.restart_directions - 1):
        d = rng.standard_normal(q0.dim)
        d /= np.linalg.norm(d)
        starts.append(new_loop(q0.dim, R, q0.K, q0.n, d, mode=q0.mode))

    best: Optional[MinimizeReport] = None
    values = []
    for start in starts:
        rep = _descend(start, p, H, R, opts)
        values.append((rep.f_final.f, rep.converged))
        if best is None:
            best = rep
        elif (rep.converged, -rep.f_final.f) > (best.converged, -best.f_final.f):
            best = rep
    best.restart_values = values
    if best.converged and dirichlet_energy(best.loop) <= 0.0:
        best.converged = False
        best.notes.append("degenerate minimizer: zero Dirichlet energy")
    return best
