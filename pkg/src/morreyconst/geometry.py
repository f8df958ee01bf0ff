"""Euclidean ball/sphere measure helpers.

The key quantity is :func:`cap_fraction`: the fraction of the sphere of
radius t about the origin that lies inside a ball of radius r whose
center sits at distance d from the origin.  With it, the integral of a
radial function over an arbitrary ball collapses to a one-dimensional
integral in the radius t.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import betainc, gammaln

__all__ = [
    "unit_ball_volume",
    "unit_sphere_area",
    "ball_volume",
    "cap_fraction",
    "cap_fraction_radii",
]


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1) in R^n (2 when n = 1)."""
    return n * unit_ball_volume(n)


def ball_volume(n: int, r: float) -> float:
    """Volume of a ball of radius r in R^n."""
    if not r > 0.0:
        raise ValueError(f"radius must be > 0, got {r}")
    return unit_ball_volume(n) * r**n


def _cos_theta(t, d, r):
    """Cosine of the cap's polar angle, clipped into [-1, 1].

    A point at radius t and polar angle phi from the ball-center
    direction is inside the ball iff cos(phi) >= cos(theta).
    """
    return np.clip((t * t + d * d - r * r) / (2.0 * t * d), -1.0, 1.0)


def cap_fraction(n: int, t: float, d: float, r: float) -> float:
    """Fraction of the sphere {|x| = t} inside the ball {|x - a| <= r}, |a| = d.

    Scalar convenience wrapper over :func:`cap_fraction_radii`.
    """
    return float(cap_fraction_radii(n, np.asarray([t], dtype=float), d, r)[0])

def cap_fraction_radii(n: int, t: np.ndarray, d: float, r: float) -> np.ndarray:
    """Vectorized :func:`cap_fraction` over an array of sphere radii t >= 0.

    The closed form uses the regularized incomplete beta function:
    the cap {phi <= theta} on S^(n-1) with cos(theta) >= 0 has fraction
    I(sin^2 theta; (n-1)/2, 1/2) / 2, and the complement rule covers
    cos(theta) < 0.  For n = 1 the sphere is the two-point set {-t, +t}
    and the fraction is exactly 0, 1/2 or 1.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    if d < 0.0 or r <= 0.0:
        raise ValueError(f"need center distance >= 0 and radius > 0, got d={d}, r={r}")
    t = np.asarray(t, dtype=float)
    if (t < 0.0).any():
        raise ValueError("sphere radii must be >= 0")

    out = np.zeros(t.shape, dtype=float)
    if d == 0.0:
        out[t <= r] = 1.0
        return out

    inside = t + d <= r          # sphere entirely within the ball
    outside = np.abs(t - d) >= r  # sphere entirely outside (or ball inside sphere)
    partial = ~(inside | outside)
    out[inside] = 1.0
    # t = 0 never lands in `partial`: |0 - d| < r would mean `inside`.
    if partial.any():
        if n == 1:
            # exactly one of the two points {-t, +t} is within reach
            out[partial] = 0.5
        else:
            c = _cos_theta(t[partial], d, r)
            s2 = np.clip(1.0 - c * c, 0.0, 1.0)
            half_cap = 0.5 * betainc(0.5 * (n - 1), 0.5, s2)
            out[partial] = np.where(c >= 0.0, half_cap, 1.0 - half_cap)
    return out
