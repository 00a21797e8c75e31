"""Discretized loops with the half-antisymmetry constraint built in.

A loop is stored as a truncated trigonometric series on odd harmonics only,
plus two closed-form kink profiles per component.  In the default
(half-antisymmetric) mode on [0, 1],

    q(t) = sum_j  a_j cos(2 pi (2j+1) t) + b_j sin(2 pi (2j+1) t)
           + w_0 z(t) + w_1 g(t),

where z is the unit triangle wave (z(0) = 1, z(1/2) = -1, piecewise linear)
and g is its C^1 cubic companion (third-derivative jumps at t = 0, 1/2).
q(t + 1/2) = -q(t) holds exactly by the representation and the remaining
constraint |q(0)| = R reduces to one algebraic condition on the coefficients.
The odd-antisymmetric mode works on [-1/2, 1/2] with sine-only coefficients
on the half frequencies pi (2j+1); its profiles are z(t) = 2t and
g(t) = t^3 - (3/4) t, the anchored endpoint is t = 1/2 and q(-t) = -q(t)
is exact.

The profiles are closed-form limits of odd-harmonic tails, so the function
class is unchanged; carrying them explicitly lets a loop represent the
velocity jump (and the third-derivative jump behind it) that constrained
minimizers develop where they touch the sphere |q| = R.  Reflection
symmetry at the touch point makes all even derivatives continuous, so with
both profiles the series remainder decays like 1/k^6 instead of 1/k^2.

Nonlinear quantities are evaluated pseudo-spectrally on n uniform nodes per
period with composite-Simpson weights: the profile kinks sit on even-index
nodes (hence n must be a multiple of 4), so each smooth piece is integrated
to O(n^-4) where the kinks would cost the plain trapezoid rule two orders.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import DegenerateEndpointError, ParameterError

MODE_HALF_ANTISYMMETRIC = "half_antisymmetric"
MODE_ODD_ANTISYMMETRIC = "odd_antisymmetric"

PROFILE_FIRST_HARMONIC = "first_harmonic"
PROFILE_ZIGZAG = "zigzag"

PROFILE_COUNT = 2   # closed-form kink profiles: (corner, cubic)

_DEGENERATE_TOL = 1.0e-13


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Simpson rule on n uniform nodes per period."""

    n: int = 256

    def __post_init__(self):
        if self.n < 8:
            raise ParameterError(f"quadrature needs n >= 8 nodes, got {self.n}")
        if self.n % 4 != 0:
            raise ParameterError(f"quadrature needs n divisible by 4, got {self.n}")


@dataclass(frozen=True)
class LoopPath:
    """A loop in the constraint class, plus its quadrature resolution.

    cos_coefs and sin_coefs have shape (K, dim); in odd-antisymmetric mode
    cos_coefs is identically zero.  profile_coefs has shape (2, dim); row 0
    multiplies the triangle (corner) profile, row 1 the cubic profile.
    """

    dim: int
    R: float
    cos_coefs: np.ndarray
    sin_coefs: np.ndarray
    n: int = 256
    mode: str = MODE_HALF_ANTISYMMETRIC
    profile_coefs: np.ndarray = None

    def __post_init__(self):
        if self.mode not in (MODE_HALF_ANTISYMMETRIC, MODE_ODD_ANTISYMMETRIC):
            raise ParameterError(f"unknown constraint mode {self.mode!r}")
        if self.R <= 0:
            raise ParameterError(f"R must be positive, got {self.R}")
        if self.cos_coefs.shape != self.sin_coefs.shape or self.cos_coefs.ndim != 2:
            raise ParameterError("coefficient arrays must both have shape (K, dim)")
        if self.cos_coefs.shape[1] != self.dim:
            raise ParameterError("coefficient arrays do not match dim")
        if self.profile_coefs is None:
            object.__setattr__(self, "profile_coefs",
                               np.zeros((PROFILE_COUNT, self.dim)))
        elif np.shape(self.profile_coefs) != (PROFILE_COUNT, self.dim):
            raise ParameterError(
                f"profile_coefs must have shape ({PROFILE_COUNT}, dim)")
        if self.n < 4 * self.K:
            raise ParameterError(
                f"need n >= 4K quadrature nodes (n={self.n}, K={self.K})")
        if self.n % 4 != 0:
            raise ParameterError(
                f"n must be a multiple of 4 so the profile kinks fall on "
                f"even-index quadrature nodes (n={self.n})")

    @property
    def K(self):
        return self.cos_coefs.shape[0]

    @property
    def frequencies(self):
        return _frequencies(self.mode, self.K)

    @property
    def anchor_time(self):
        return 0.0 if self.mode == MODE_HALF_ANTISYMMETRIC else 0.5

    @property
    def nodes(self):
        if self.mode == MODE_HALF_ANTISYMMETRIC:
            return np.arange(self.n) / self.n
        return -0.5 + np.arange(self.n) / self.n


def _frequencies(mode, K):
    base = 2.0 * np.pi if mode == MODE_HALF_ANTISYMMETRIC else np.pi
    return base * (2.0 * np.arange(K) + 1.0)


def profile_values(mode, t):
    """Values and derivatives of the closed-form kink profiles at times t.

    Returns (P, dP), each of shape t.shape + (2,), trailing axis ordered
    (corner, cubic).  The corner profile is the unit triangle wave carrying
    a velocity jump at the constraint touch points; the cubic profile is
    C^1 there with a third-derivative jump.  At the kinks themselves the
    corner derivative is reported as 0 (the symmetric value).
    """
    t = np.asarray(t, dtype=float)
    if mode == MODE_HALF_ANTISYMMETRIC:
        s = np.mod(t, 1.0)
        first = s <= 0.5
        z = np.where(first, 1.0 - 4.0 * s, 4.0 * s - 3.0)
        dz = np.where(first, -4.0, 4.0)
        dz = np.where((s == 0.0) | (s == 0.5), 0.0, dz)
        x = np.where(first, s - 0.25, s - 0.75)
        sign = np.where(first, 1.0, -1.0)
        g = sign * (x ** 3 - 0.1875 * x)
        dg = sign * (3.0 * x ** 2 - 0.1875)
    else:
        s = np.mod(t + 0.5, 2.0) - 0.5
        first = s <= 0.5
        z = np.where(first, 2.0 * s, 2.0 - 2.0 * s)
        dz = np.where(first, 2.0, -2.0)
        dz = np.where((s == -0.5) | (s == 0.5), 0.0, dz)
        x = np.where(first, s, 1.0 - s)
        g = x ** 3 - 0.75 * x
        dg = np.where(first, 1.0, -1.0) * (3.0 * x ** 2 - 0.75)
    return np.stack([z, g], axis=-1), np.stack([dz, dg], axis=-1)


def profile_gram(mode):
    """Gram matrix G[p, q] = int prof_p' prof_q' dt over one interval."""
    if mode == MODE_HALF_ANTISYMMETRIC:
        return np.array([[16.0, 0.5], [0.5, 3.0 / 160.0]])
    return np.array([[4.0, -1.0], [-1.0, 0.3]])


def profile_cross(mode, K):
    """Cross weights c[j, p] = 2 int b_j' prof_p' dt (b_j the anchored basis)."""
    omega2 = _frequencies(mode, K) ** 2
    if mode == MODE_HALF_ANTISYMMETRIC:
        return np.stack([np.full(K, 32.0), 48.0 / omega2], axis=1)
    signs = (-1.0) ** np.arange(K)
    return np.stack([8.0 * signs, -24.0 * signs / omega2], axis=1)


def profile_anchor(mode):
    """Profile values at the anchored endpoint, shape (2,)."""
    if mode == MODE_HALF_ANTISYMMETRIC:
        return np.array([1.0, 1.0 / 32.0])
    return np.array([1.0, -0.25])


@lru_cache(maxsize=8)
def node_weights(n):
    """Composite-Simpson quadrature weights on the node grid (sum 1).

    The smooth pieces of the integrand meet at the profile kinks, which sit
    on even-index nodes; Simpson per piece integrates to O(n^-4) where the
    trapezoid rule would lose two orders to the kinks.
    """
    w = np.full(n, 2.0 / (3.0 * n))
    w[1::2] = 4.0 / (3.0 * n)
    return w


@lru_cache(maxsize=32)
def _node_basis(mode, K, n):
    omega = _frequencies(mode, K)
    t = np.arange(n) / n if mode == MODE_HALF_ANTISYMMETRIC else -0.5 + np.arange(n) / n
    arg = t[:, None] * omega[None, :]
    P, _ = profile_values(mode, t)
    return np.cos(arg), np.sin(arg), P


def node_samples(q: LoopPath):
    """q evaluated at its quadrature nodes, shape (n, dim)."""
    C, S, P = _node_basis(q.mode, q.K, q.n)
    return C @ q.cos_coefs + S @ q.sin_coefs + P @ q.profile_coefs


def sample(q: LoopPath, t):
    """Exact evaluation of q(t); t may be scalar or array."""
    t = np.asarray(t, dtype=float)
    arg = t[..., None] * q.frequencies
    P, _ = profile_values(q.mode, t)
    return (np.cos(arg) @ q.cos_coefs + np.sin(arg) @ q.sin_coefs
            + P @ q.profile_coefs)


def derivative_sample(q: LoopPath, t):
    """Exact evaluation of dq/dt (corner derivative is 0 at its kinks)."""
    t = np.asarray(t, dtype=float)
    omega = q.frequencies
    arg = t[..., None] * omega
    _, dP = profile_values(q.mode, t)
    return ((-np.sin(arg) * omega) @ q.cos_coefs
            + (np.cos(arg) * omega) @ q.sin_coefs
            + dP @ q.profile_coefs)


def anchor_point(q: LoopPath):
    """q at the anchored endpoint, from coefficients (no trig roundup)."""
    pa = profile_anchor(q.mode) @ q.profile_coefs
    if q.mode == MODE_HALF_ANTISYMMETRIC:
        return q.cos_coefs.sum(axis=0) + pa
    signs = (-1.0) ** np.arange(q.K)
    return signs @ q.sin_coefs + pa


def dirichlet_energy(q: LoopPath) -> float:
    """Integral of |dq/dt|^2 over one fundamental interval, from coefficients."""
    omega2 = q.frequencies ** 2
    series = 0.5 * np.sum(omega2[:, None] * (q.cos_coefs ** 2 + q.sin_coefs ** 2))
    W = q.profile_coefs
    anchored = q.cos_coefs if q.mode == MODE_HALF_ANTISYMMETRIC else q.sin_coefs
    cross = np.sum(profile_cross(q.mode, q.K) * (anchored @ W.T))
    quad = np.sum(profile_gram(q.mode) * (W @ W.T))
    return float(series + cross + quad)


def loop_mean(q: LoopPath):
    """Quadrature mean of q over one interval (zero for odd harmonics)."""
    return node_weights(q.n) @ node_samples(q)


def endpoint_retract(q: LoopPath, R: float, fallback_direction=None) -> LoopPath:
    """Restore |q(anchor)| = R by a first-mode correction.

    The correction basis function equals 1 at the anchor and stays inside the
    symmetry class, so the result is feasible exactly.  A degenerate anchor
    (|q(anchor)| = 0) has no preferred direction; callers re-seed with the
    previous direction via fallback_direction.
    """
    if R <= 0:
        raise ParameterError(f"R must be positive, got {R}")
    q0 = anchor_point(q)
    norm = float(np.linalg.norm(q0))
    if norm < _DEGENERATE_TOL:
        if fallback_direction is None:
            raise DegenerateEndpointError(
                "loop endpoint is at the origin; supply a fallback direction")
        unit = np.asarray(fallback_direction, dtype=float)
        unit = unit / np.linalg.norm(unit)
    else:
        unit = q0 / norm
    delta = R * unit - q0
    if q.mode == MODE_HALF_ANTISYMMETRIC:
        cos = q.cos_coefs.copy()
        cos[0] += delta
        return replace(q, R=R, cos_coefs=cos)
    sin = q.sin_coefs.copy()
    sin[0] += delta
    return replace(q, R=R, sin_coefs=sin)


def new_loop(dim, R, K, n, direction, profile=PROFILE_FIRST_HARMONIC,
             mode=MODE_HALF_ANTISYMMETRIC) -> LoopPath:
    """Construct an initial feasible loop along a unit direction.

    first_harmonic: single-mode loop of amplitude R.
    zigzag: the exact piecewise-linear back-and-forth path (the triangle
    wave), carried entirely by the corner profile.
    """
    if dim < 1 or K < 1:
        raise ParameterError(f"need dim >= 1 and K >= 1 (dim={dim}, K={K})")
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (dim,):
        raise ParameterError(f"direction must have shape ({dim},)")
    dnorm = float(np.linalg.norm(direction))
    if abs(dnorm - 1.0) > 1.0e-8:
        raise ParameterError(f"direction must be a unit vector (|d|={dnorm})")

    cos = np.zeros((K, dim))
    sin = np.zeros((K, dim))
    prof = np.zeros((PROFILE_COUNT, dim))
    if profile == PROFILE_FIRST_HARMONIC:
        if mode == MODE_HALF_ANTISYMMETRIC:
            cos[0] = R * direction
        else:
            sin[0] = R * direction
    elif profile == PROFILE_ZIGZAG:
        prof[0] = R * direction
    else:
        raise ParameterError(f"unknown seed profile {profile!r}")

    q = LoopPath(dim=dim, R=R, cos_coefs=cos, sin_coefs=sin, n=n, mode=mode,
                 profile_coefs=prof)
    return endpoint_retract(q, R, fallback_direction=direction)


def to_record(q: LoopPath) -> dict:
    """Flat serialization record; coefficients in j-major [a_j..., b_j...] order."""
    coefs = np.concatenate([q.cos_coefs, q.sin_coefs], axis=1).reshape(-1)
    return {
        "dim": q.dim,
        "K": q.K,
        "n": q.n,
        "R": q.R,
        "constraint_mode": q.mode,
        "coefficients": [float(c) for c in coefs],
        "profiles": [float(c) for c in q.profile_coefs.reshape(-1)],
    }


def from_record(rec: dict) -> LoopPath:
    dim, K = int(rec["dim"]), int(rec["K"])
    coefs = np.asarray(rec["coefficients"], dtype=float).reshape(K, 2 * dim)
    prof = np.asarray(rec.get("profiles", np.zeros(PROFILE_COUNT * dim)),
                      dtype=float).reshape(PROFILE_COUNT, dim)
    return LoopPath(
        dim=dim,
        R=float(rec["R"]),
        cos_coefs=coefs[:, :dim].copy(),
        sin_coefs=coefs[:, dim:].copy(),
        n=int(rec["n"]),
        mode=rec["constraint_mode"],
        profile_coefs=prof,
    )
