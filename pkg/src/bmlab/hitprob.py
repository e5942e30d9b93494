"""Closed-form hitting probabilities and bounds for planar Brownian motion.

Each function returns a :class:`ProbValue` carrying the raw value and its
kind.  Upper bounds can exceed 1; they keep their raw value (dominance tests
need it) and set ``clamped`` so callers know ``capped()`` differs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

EXACT = "exact"
UPPER = "upper_bound"
LOWER = "lower_bound"


@dataclass(frozen=True)
class ProbValue:
    value: float
    kind: str
    clamped: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("probability values are nonnegative")
        if self.kind == EXACT and self.value > 1 + 1e-12:
            raise ValueError("exact probabilities cannot exceed 1")

    def capped(self) -> float:
        return min(self.value, 1.0)


def _bound(v: float) -> ProbValue:
    return ProbValue(v, UPPER, clamped=v > 1.0)


def escape_before_line_exact(delta: float, r: float) -> ProbValue:
    """Probability that Brownian motion at distance ``delta`` from a line
    travels distance ``r`` before hitting the line.

    Equals 2a/(pi/2 + a) with sin(a) = delta/r (Moebius map of the circle and
    line to a wedge of opening pi/2 + a).
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if not (0 <= delta <= r):
        raise ValueError("need 0 <= delta <= r")
    a = math.asin(delta / r)
    return ProbValue(2 * a / (math.pi / 2 + a), EXACT)


def escape_bound(delta: float, r: float) -> ProbValue:
    """Upper bound 2 delta / r for the same escape event."""
    if r <= 0:
        raise ValueError("r must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return _bound(2 * delta / r)


def segment_miss_bound(a: float, b: float) -> ProbValue:
    """Upper bound 2 sqrt(a/b) on Brownian motion from 0 hitting the unit
    circle before the segment [a, b], 0 < a < b <= 1."""
    if not (0 < a < b <= 1):
        raise ValueError("need 0 < a < b <= 1")
    return _bound(2 * math.sqrt(a / b))


def tangent_ball_hit_exact(z: complex, x: float) -> ProbValue:
    """Exact probability of hitting B(x, 1-x) before the unit circle from z.

    With 1 - z = r e^{i th} and eps = 1 - x the value is
    (2 cos(th)/r - 1) / (1/eps - 1); starting on or inside the ball gives 1.
    """
    z = complex(z)
    if not (0 < x < 1):
        raise ValueError("x must lie in (0, 1)")
    if abs(z) >= 1:
        raise ValueError("z must lie in the open unit disc")
    eps = 1.0 - x
    if abs(z - x) <= eps:
        return ProbValue(1.0, EXACT)
    w = 1.0 - z
    r, th = abs(w), cmath.phase(w)
    val = (2 * math.cos(th) / r - 1.0) / (1.0 / eps - 1.0)
    return ProbValue(min(max(val, 0.0), 1.0), EXACT)


def ball_hit_bound(z: complex, x: float, eps: float) -> ProbValue:
    """Upper bound 4 eps / |z - x| for hitting B(x, eps) before the unit
    circle; requires eps >= 1 - x (the ball reaches the boundary)."""
    z = complex(z)
    if not (0 < x < 1):
        raise ValueError("x must lie in (0, 1)")
    if abs(z) >= 1:
        raise ValueError("z must lie in the open unit disc")
    if eps < 1 - x:
        raise ValueError("need eps >= 1 - x")
    return _bound(4 * eps / abs(z - x))


def annulus_inner_hit(r1: float, r2: float, rho: float) -> ProbValue:
    """Probability that Brownian motion from radius ``rho`` hits the inner
    circle of the annulus (r1, r2) before the outer one:
    ln(r2/rho) / ln(r2/r1)."""
    if not (0 < r1 <= rho <= r2) or r1 == r2:
        raise ValueError("need 0 < r1 <= rho <= r2 with r1 < r2")
    return ProbValue(math.log(r2 / rho) / math.log(r2 / r1), EXACT)


def poisson_kernel(u: complex, v: complex) -> float:
    """Poisson kernel K(u, v) = (1 - |u|^2) / |u - v|^2 on the unit disc.

    Exit density of Brownian motion from u with respect to normalized arc
    measure on the circle.
    """
    u, v = complex(u), complex(v)
    if abs(u) >= 1:
        raise ValueError("u must lie in the open unit disc")
    if abs(abs(v) - 1.0) > 1e-9:
        raise ValueError("v must lie on the unit circle")
    return (1.0 - abs(u) ** 2) / abs(u - v) ** 2


def poisson_bin_masses(u: complex, bins: int, quad_points: int = 256) -> np.ndarray:
    """Per-bin integrals of K(u, .)/(2 pi) over ``bins`` equal arcs of the
    circle, by composite midpoint quadrature with ``quad_points`` nodes per
    bin."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    edges = np.linspace(-math.pi, math.pi, bins + 1)
    masses = np.empty(bins)
    for i in range(bins):
        th = edges[i] + (np.arange(quad_points) + 0.5) * (edges[i + 1] - edges[i]) / quad_points
        k = (1.0 - abs(u) ** 2) / np.abs(u - np.exp(1j * th)) ** 2
        masses[i] = k.mean() * (edges[i + 1] - edges[i]) / (2 * math.pi)
    return masses


# Registry for the CLI: name -> (callable, parameter names, domain note)
FORMULAS = {
    "escape_before_line_exact": (escape_before_line_exact, ("delta", "r"), "0 <= delta <= r"),
    "escape_bound": (escape_bound, ("delta", "r"), "delta >= 0, r > 0"),
    "segment_miss_bound": (segment_miss_bound, ("a", "b"), "0 < a < b <= 1"),
    "tangent_ball_hit_exact": (tangent_ball_hit_exact, ("z", "x"), "|z| < 1, 0 < x < 1"),
    "ball_hit_bound": (ball_hit_bound, ("z", "x", "eps"), "|z| < 1, eps >= 1 - x"),
    "annulus_inner_hit": (annulus_inner_hit, ("r1", "r2", "rho"), "0 < r1 <= rho <= r2"),
    "poisson_kernel": (poisson_kernel, ("u", "v"), "|u| < 1, |v| = 1"),
}
