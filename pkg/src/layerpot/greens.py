"""Fundamental solution and Green's function of a centered ball.

Conventions (n = 2 or 3):

    Phi(x) = log|x| / (2 pi)            n = 2
    Phi(x) = -1 / (4 pi |x|)            n = 3

so that the distributional Laplacian of Phi is the unit Dirac mass and
grad Phi(x) = x / (alpha_{n-1} |x|^n) with alpha_1 = 2 pi, alpha_2 = 4 pi
the areas of the unit sphere.  The Green's function of the ball B_r is

    G(x, y) = Phi(x - y) - Phi_rad(q(x, y)),
    q(x, y)^2 = r^2 - 2 x.y + |x|^2 |y|^2 / r^2,

where Phi_rad(s) is Phi at distance s.  The expanded form of q is smooth
at x = 0 (q -> r), so no special-casing of the center is needed; it also
makes the symmetry G(x, y) = G(y, x) explicit.  G vanishes for |y| = r
and is negative inside the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "BallContext",
    "HarmonicCenter",
    "fundamental",
    "fundamental_gradient",
    "greens_ball",
    "greens_gradient_x",
    "harmonic_center",
    "sphere_grid",
]


@dataclass(frozen=True)
class BallContext:
    """Ambient ball B_radius in R^n, n in {2, 3}."""

    n: int
    radius: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("dimension n must be 2 or 3")
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")

    @property
    def sphere_area_unit(self) -> float:
        """Surface measure of the unit sphere: 2 pi (n=2), 4 pi (n=3)."""
        return 2.0 * math.pi if self.n == 2 else 4.0 * math.pi


def _as_points(x, n):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != n:
        raise ValueError(f"points must have {n} components")
    return arr, single


def _phi_of_dist(ctx: BallContext, s):
    if ctx.n == 2:
        return np.log(s) / (2.0 * math.pi)
    return -1.0 / (4.0 * math.pi * s)


def fundamental(ctx: BallContext, x):
    """Fundamental solution Phi(x); x of shape (n,) or (m, n), x != 0."""
    pts, single = _as_points(x, ctx.n)
    s = np.linalg.norm(pts, axis=1)
    if np.any(s == 0.0):
        raise ValueError("fundamental solution is singular at the origin")
    out = _phi_of_dist(ctx, s)
    return float(out[0]) if single else out


def fundamental_gradient(ctx: BallContext, x):
    """grad Phi(x) = x / (alpha_{n-1} |x|^n)."""
    pts, single = _as_points(x, ctx.n)
    s = np.linalg.norm(pts, axis=1)
    if np.any(s == 0.0):
        raise ValueError("fundamental solution is singular at the origin")
    out = pts / (ctx.sphere_area_unit * (s**ctx.n))[:, None]
    return out[0] if single else out


def _check_in_ball(ctx, s, label):
    if np.any(s > ctx.radius * (1.0 + 1.0e-12)):
        raise ValueError(f"{label} must lie in the closed ball")


def _kelvin_distance(ctx: BallContext, xs, ys):
    # q^2 = r^2 - 2 x.y + |x|^2 |y|^2 / r^2, positive for points in the
    # closed ball that are not both on the boundary at the same spot.
    r = ctx.radius
    dot = np.sum(xs * ys, axis=1)
    q2 = r**2 - 2.0 * dot + (np.sum(xs**2, axis=1) * np.sum(ys**2, axis=1)) / r**2
    return np.sqrt(np.maximum(q2, 0.0))


def greens_ball(ctx: BallContext, x, y):
    """Green's function G(x, y) of the ball; x, y broadcastable points."""
    xs, single_x = _as_points(x, ctx.n)
    ys, single_y = _as_points(y, ctx.n)
    xs, ys = np.broadcast_arrays(xs, ys)
    _check_in_ball(ctx, np.linalg.norm(xs, axis=1), "x")
    _check_in_ball(ctx, np.linalg.norm(ys, axis=1), "y")
    diff = xs - ys
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0.0):
        raise ValueError("Green's function is singular on the diagonal x = y")
    out = _phi_of_dist(ctx, dist) - _phi_of_dist(ctx, _kelvin_distance(ctx, xs, ys))
    return float(out[0]) if single_x and single_y else out


def greens_gradient_x(ctx: BallContext, x, y):
    """Gradient of G(x, y) in x.

    The corrector part differentiates Phi_rad(q) through the expanded
    form of q, which stays smooth at x = 0 where it reduces to
    -y / (alpha_{n-1} r^n).
    """
    xs, single_x = _as_points(x, ctx.n)
    ys, single_y = _as_points(y, ctx.n)
    xs, ys = np.broadcast_arrays(xs, ys)
    _check_in_ball(ctx, np.linalg.norm(xs, axis=1), "x")
    _check_in_ball(ctx, np.linalg.norm(ys, axis=1), "y")
    diff = xs - ys
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0.0):
        raise ValueError("Green's function is singular on the diagonal x = y")
    alpha = ctx.sphere_area_unit
    grad_phi = diff / (alpha * dist**ctx.n)[:, None]
    q = _kelvin_distance(ctx, xs, ys)
    # d/dx Phi_rad(q) = Phi_rad'(q)/q * (x |y|^2 / r^2 - y)
    w = xs * (np.sum(ys**2, axis=1) / ctx.radius**2)[:, None] - ys
    grad_h = w / (alpha * q**ctx.n)[:, None]
    out = grad_phi - grad_h
    return out[0] if single_x and single_y else out


def sphere_grid(ctx: BallContext, n_polar: int, n_azimuth: int):
    """Quadrature grid on the sphere of radius ctx.radius.

    Returns (points, weights) with weights summing to the sphere area.
    For n = 3 the grid is Gauss-Legendre in cos(theta) crossed with a
    uniform azimuthal grid (trapezoidal, exact for trigonometric
    polynomials); for n = 2 it is the uniform grid on the circle with
    n_azimuth points.
    """
    r = ctx.radius
    if ctx.n == 2:
        if n_azimuth < 4:
            raise ValueError("need at least 4 azimuthal points")
        phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
        pts = r * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        w = np.full(n_azimuth, 2.0 * math.pi * r / n_azimuth)
        return pts, w
    if n_polar < 2 or n_azimuth < 4:
        raise ValueError("need n_polar >= 2 and n_azimuth >= 4")
    u, wu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    su = np.sqrt(1.0 - u**2)
    cos_p, sin_p = np.cos(phi), np.sin(phi)
    pts = np.empty((n_polar * n_azimuth, 3))
    pts[:, 0] = r * np.outer(su, cos_p).ravel()
    pts[:, 1] = r * np.outer(su, sin_p).ravel()
    pts[:, 2] = r * np.outer(u, np.ones(n_azimuth)).ravel()
    w = (r**2 * 2.0 * math.pi / n_azimuth) * np.outer(wu, np.ones(n_azimuth)).ravel()
    return pts, w


class HarmonicCenter(NamedTuple):
    """Center value and gradient recovered from boundary data."""

    v0: float
    grad0: np.ndarray


def harmonic_center(ctx: BallContext, boundary_values, n_polar: int = 32, n_azimuth: int = 64):
    """Value and gradient at the center of the harmonic extension.

    For v harmonic in B_r with boundary data f, the mean value property
    gives v(0) = avg_{|y|=r} f(y) and grad v(0) = (n / r^2) * avg f(y) y.

    boundary_values is a vectorized callable on (m, n) points of the
    sphere |y| = r.  Returns HarmonicCenter(v0, grad0).
    """
    pts, w = sphere_grid(ctx, n_polar, n_azimuth)
    f = np.asarray(boundary_values(pts), dtype=float)
    if f.shape != (pts.shape[0],):
        raise ValueError("boundary_values must return one value per point")
    area = ctx.sphere_area_unit * ctx.radius ** (ctx.n - 1)
    value = math.fsum((w * f).tolist()) / area
    grad = np.array(
        [math.fsum((w * f * pts[:, k]).tolist()) for k in range(ctx.n)]
    )
    grad *= ctx.n / (ctx.radius**2 * area)
    return HarmonicCenter(v0=value, grad0=grad)
