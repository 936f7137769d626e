"""Single-layer potentials in a ball with zero boundary values.

The object of study is

    u(x) = int_Gamma G(x, y) g(y) dH^{n-1}(y)

for the ball's Green's function G, a graph interface Gamma (or a
concentric sphere used as an analytic fixture) and a density g.  This u
solves Delta u = g dH^{n-1} restricted to Gamma in the ball, vanishing on
the boundary sphere.  Everything downstream - transmission jumps, blow-up
scans, the scale iteration - evaluates this representation.

Graph interfaces are integrated in the chart: the surface patch inside
the ball is { y' : |(y', psi(y'))| < r }, discovered by radial bisection
per direction, and the integrand carries the area element
sqrt(1 + |grad psi|^2).  Points on the interface are admissible for
evaluate_solution (weakly singular kernel); evaluate_gradient requires a
positive distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import InterfaceGraph, SphereInterface, SurfaceDensity
from .greens import BallContext, greens_ball, greens_gradient_x
from .quadrature import (
    DiskDomain,
    ImplicitStarDomain,
    QuadratureResult,
    QuadratureSpec,
    graph_patch_integral,
)
from .sampling import ball_points

__all__ = [
    "LayerProblem",
    "LinearPolynomial",
    "JumpResult",
    "FitResult",
    "evaluate_solution",
    "evaluate_gradient",
    "transmission_jump",
    "radial_oracle",
    "fit_linear_approximation",
]

# Evaluation closer to the boundary sphere than this relative margin
# returns the boundary value 0 directly.
_BOUNDARY_BAND = 1.0e-12

# Distance below which a point counts as lying on the interface.
_ON_SURFACE = 1.0e-13

# Projections further from the interface than this fraction of the ball
# radius skip the near-field refinement machinery entirely.
_NEAR_FRACTION = 0.25

DEFAULT_H_LADDER = (1.0e-2, 5.0e-3, 2.5e-3)


@dataclass(frozen=True)
class LayerProblem:
    """Ball context, interface, density and quadrature settings."""

    ctx: BallContext
    interface: InterfaceGraph | SphereInterface
    density: SurfaceDensity
    spec: QuadratureSpec = QuadratureSpec()

    def __post_init__(self):
        if isinstance(self.interface, SphereInterface):
            if not 0.0 < self.interface.radius < self.ctx.radius:
                raise ValueError("sphere interface must satisfy 0 < s < ball radius")
        else:
            if self.interface.n != self.ctx.n:
                raise ValueError("interface and ball dimensions disagree")
            if self.interface.chart_radius < self.ctx.radius * (1.0 - 1.0e-12):
                raise ValueError("interface chart must span the ball section")


@dataclass(frozen=True)
class LinearPolynomial:
    """Affine function a . x + b."""

    a: np.ndarray
    b: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.a @ x + self.b)
        return x @ self.a + self.b


@dataclass(frozen=True)
class JumpResult:
    """Transmission jump estimate with the per-step ladder."""

    jump: float
    per_h: tuple[tuple[float, float], ...]
    est_error: float
    converged: bool


@dataclass(frozen=True)
class FitResult:
    """Least-squares affine fit of the solution on one side."""

    poly: LinearPolynomial
    residual_sup: float
    samples: int
    converged: bool


def _clip_domain(p: LayerProblem):
    gamma = p.interface
    r = p.ctx.radius
    if gamma.family == "flat":
        return DiskDomain(r)
    chart = gamma.chart_radius

    def level(yp):
        rad2 = np.sum(yp**2, axis=1)
        out = rad2 - r**2
        ok = rad2 <= chart**2
        if np.any(ok):
            h = gamma.height(yp[ok])
            out[ok] = out[ok] + h**2
        return out

    return ImplicitStarDomain(level, t_hi=2.5 * r)


def _surface_geometry(p: LayerProblem, x):
    """Projection data of x onto the graph: (x', |x_n - psi(x')|)."""
    gamma = p.interface
    xp = x[:-1]
    if np.linalg.norm(xp) > gamma.chart_radius:
        return None, None
    gap = abs(x[-1] - gamma.psi(xp))
    return xp, gap


def _graph_kernel(p: LayerProblem, x, gradient: bool):
    gamma = p.interface
    ctx = p.ctx

    def f(yp):
        h = gamma.height(yp)
        grad = gamma.gradient(yp)
        pts = np.concatenate([yp, h[:, None]], axis=1)
        dens = p.density(pts) * np.sqrt(1.0 + np.sum(grad**2, axis=1))
        if gradient:
            ker = greens_gradient_x(ctx, x[None, :], pts)
            return ker * dens[:, None]
        return greens_ball(ctx, x[None, :], pts) * dens

    return f


def _evaluate_graph(p: LayerProblem, x, gradient: bool) -> QuadratureResult:
    ctx = p.ctx
    xp, gap = _surface_geometry(p, x)
    near_point = None
    near_dist = None
    if xp is not None and gap <= _NEAR_FRACTION * ctx.radius:
        near_point = xp
        snap = max(_ON_SURFACE, 10.0 * p.spec.target_tol)
        if not gradient and gap <= snap:
            # u is continuous across the interface, so points this close
            # are evaluated on it, where the polar rule cancels the kernel
            x = np.concatenate([xp, [float(p.interface.psi(xp))]])
            near_dist = 0.0
        else:
            near_dist = gap if gap > _ON_SURFACE else 0.0
    return graph_patch_integral(
        _graph_kernel(p, x, gradient),
        _clip_domain(p),
        dim=ctx.n - 1,
        near_point=near_point,
        near_dist=near_dist,
        spec=p.spec,
    )


def _axis_frame(e):
    """Deterministic orthonormal completion of a unit 3-vector."""
    k = int(np.argmin(np.abs(e)))
    v = np.zeros(3)
    v[k] = 1.0
    f1 = np.cross(e, v)
    f1 /= np.linalg.norm(f1)
    return f1, np.cross(e, f1)


def _evaluate_sphere(p: LayerProblem, x, gradient: bool) -> QuadratureResult:
    """Integrate the kernel over the interface sphere |y| = s.

    The polar axis of the grid is aligned with x, so the kernel peak (or
    the genuine singularity when x lies on the sphere) sits at the pole
    gamma = 0 where the sin(gamma) area factor cancels it: on the sphere
    |x - y| = 2 s sin(gamma/2), and sin(gamma) / sin(gamma/2) is smooth.
    Gauss nodes in gamma cluster at the pole, so the order-doubling loop
    resolves near-sphere peaks without special casing.
    """
    ctx = p.ctx
    s = p.interface.radius

    def f(pts):
        dens = p.density(pts)
        if gradient:
            return greens_gradient_x(ctx, x[None, :], pts) * dens[:, None]
        return greens_ball(ctx, x[None, :], pts) * dens

    if ctx.n == 2:
        nrm = np.linalg.norm(x)
        base = math.atan2(x[1], x[0]) if nrm > 0.0 else 0.0
        dist = abs(nrm - s)

        def circle_kernel(t):
            ang = base + t[:, 0]
            pts = s * np.stack([np.cos(ang), np.sin(ang)], axis=1)
            return f(pts) * s

        return graph_patch_integral(
            circle_kernel,
            DiskDomain(math.pi),
            dim=1,
            near_point=np.zeros(1),
            near_dist=dist if dist > _ON_SURFACE else 0.0,
            spec=p.spec,
        )

    nrm = np.linalg.norm(x)
    e = x / nrm if nrm > 0.0 else np.array([0.0, 0.0, 1.0])
    f1, f2 = _axis_frame(e)

    def value_at(order):
        ug, wg = np.polynomial.legendre.leggauss(order)
        gamma = 0.5 * math.pi * (ug + 1.0)
        w_gamma = 0.5 * math.pi * wg * np.sin(gamma)
        n_phi = 2 * order
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        dirs = (
            np.cos(gamma)[:, None, None] * e[None, None, :]
            + np.sin(gamma)[:, None, None]
            * (
                np.cos(phi)[None, :, None] * f1[None, None, :]
                + np.sin(phi)[None, :, None] * f2[None, None, :]
            )
        )
        pts = (s * dirs).reshape(-1, 3)
        fv = np.asarray(f(pts), dtype=float)
        if fv.ndim == 1:
            fv = fv[:, None]
        k = fv.shape[1]
        fv = fv.reshape(order, n_phi, k)
        w = w_gamma[:, None] * (2.0 * math.pi / n_phi) * s**2
        return np.array(
            [math.fsum((w * fv[:, :, j]).ravel().tolist()) for j in range(k)]
        )

    order = 16
    prev = value_at(order)
    evals = 1
    while True:
        order *= 2
        cur = value_at(order)
        evals += 1
        err = float(np.max(np.abs(cur - prev)))
        if err <= p.spec.target_tol or order >= 2048:
            value = cur if cur.size > 1 else float(cur[0])
            return QuadratureResult(
                value=value,
                est_error=err,
                panels=evals,
                converged=err <= p.spec.target_tol,
            )
        prev = cur


def _check_point(p: LayerProblem, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (p.ctx.n,):
        raise ValueError(f"evaluation point must have shape ({p.ctx.n},)")
    if np.linalg.norm(x) > p.ctx.radius * (1.0 + 1.0e-12):
        raise ValueError("evaluation point must lie in the closed ball")
    return x


def evaluate_solution(p: LayerProblem, x) -> QuadratureResult:
    """Evaluate u(x) = int_Gamma G(x, .) g dH.

    Points in the closed ball are admissible, including points on the
    interface itself.  On the boundary sphere the value is exactly 0.
    Returns a QuadratureResult; .converged is False when the adaptive
    rule hit its depth limit, with .value the best estimate.
    """
    x = _check_point(p, x)
    if np.linalg.norm(x) >= p.ctx.radius * (1.0 - _BOUNDARY_BAND):
        return QuadratureResult(value=0.0, est_error=0.0, panels=0, converged=True)
    if isinstance(p.interface, SphereInterface):
        return _evaluate_sphere(p, x, gradient=False)
    return _evaluate_graph(p, x, gradient=False)


def evaluate_gradient(p: LayerProblem, x) -> QuadratureResult:
    """Evaluate grad u(x) off the interface.

    The value is an (n,) array.  Raises for points on the interface,
    where the gradient jumps.
    """
    x = _check_point(p, x)
    if isinstance(p.interface, SphereInterface):
        if abs(np.linalg.norm(x) - p.interface.radius) <= _ON_SURFACE:
            raise ValueError("gradient is undefined on the interface")
        return _evaluate_sphere(p, x, gradient=True)
    xp, gap = _surface_geometry(p, x)
    if xp is not None and gap <= _ON_SURFACE:
        raise ValueError("gradient is undefined on the interface")
    return _evaluate_graph(p, x, gradient=True)


def _interface_normal(p: LayerProblem, x0):
    """Unit normal at x0 pointing into the plus side."""
    if isinstance(p.interface, SphereInterface):
        nrm = np.linalg.norm(x0)
        if nrm == 0.0:
            raise ValueError("normal undefined at the origin")
        return -np.asarray(x0) / nrm  # inward: the plus side is the inside
    grad = p.interface.grad_psi(x0[:-1])
    nu = np.concatenate([-grad, [1.0]])
    return nu / np.linalg.norm(nu)


def transmission_jump(p: LayerProblem, x0, h_ladder=DEFAULT_H_LADDER) -> JumpResult:
    """Jump of the normal derivative of u across the interface at x0.

    One-sided derivatives are formed with second-order differences along
    the normal nu (pointing into the plus side),

        D+(h) = (-3 u(x0) + 4 u(x0 + h nu) - u(x0 + 2 h nu)) / (2h),

    the jump estimate J(h) = D+(h) - D-(h) is recorded per ladder step
    and Richardson-extrapolated assuming second-order error decay.  The
    limit equals g(x0) for continuous densities.
    """
    x0 = _check_point(p, x0)
    ladder = tuple(float(h) for h in h_ladder)
    if len(ladder) < 2 or any(h <= 0.0 for h in ladder):
        raise ValueError("h_ladder needs at least two positive steps")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("h_ladder must be strictly decreasing")
    nu = _interface_normal(p, x0)
    if np.linalg.norm(x0 + 2.0 * ladder[0] * nu) >= p.ctx.radius or np.linalg.norm(
        x0 - 2.0 * ladder[0] * nu
    ) >= p.ctx.radius:
        raise ValueError("offset points leave the ball; shrink h_ladder")

    cache: dict[float, QuadratureResult] = {}

    def u_at(offset: float) -> QuadratureResult:
        key = round(offset, 15)
        if key not in cache:
            cache[key] = evaluate_solution(p, x0 + offset * nu)
        return cache[key]

    per_h = []
    est = 0.0
    converged = True
    for h in ladder:
        results = [u_at(0.0), u_at(h), u_at(2 * h), u_at(-h), u_at(-2 * h)]
        u0, up1, up2, um1, um2 = (r.value for r in results)
        jump_h = (-6.0 * u0 + 4.0 * (up1 + um1) - (up2 + um2)) / (2.0 * h)
        per_h.append((h, jump_h))
        est = max(est, sum(r.est_error for r in results) / (2.0 * h))
        converged = converged and all(r.converged for r in results)

    # Richardson assuming J(h) = J + c h^2: iterated Neville elimination.
    column = [j for _, j in per_h]
    hs = [h for h, _ in per_h]
    for level in range(1, len(column)):
        new = []
        for i in range(len(column) - 1):
            ratio = (hs[i] / hs[i + level]) ** 2
            new.append((ratio * column[i + 1] - column[i]) / (ratio - 1.0))
        column = new
    return JumpResult(
        jump=column[0], per_h=tuple(per_h), est_error=est, converged=converged
    )


def radial_oracle(x_abs: float, s: float, ctx: BallContext, g0: float = 1.0) -> float:
    """Closed-form solution for the unit-density sphere interface (n=3).

    For Gamma the concentric sphere of radius s with constant density g0,

        u(x) = -g0 * s^2 * (1/max(|x|, s) - 1/r),

    harmonic off the sphere, vanishing at |x| = r, with normal-derivative
    jump g0 across |x| = s.
    """
    if ctx.n != 3:
        raise ValueError("the radial closed form is implemented for n = 3")
    if not 0.0 < s < ctx.radius:
        raise ValueError("need 0 < s < ball radius")
    if not 0.0 <= x_abs <= ctx.radius:
        raise ValueError("need 0 <= |x| <= ball radius")
    return -g0 * s**2 * (1.0 / max(x_abs, s) - 1.0 / ctx.radius)


def _side_of(p: LayerProblem, pts):
    if isinstance(p.interface, SphereInterface):
        gap = np.linalg.norm(pts, axis=1) - p.interface.radius
        return np.where(gap < 0.0, "plus", "minus"), np.abs(gap)
    h = p.interface.height(pts[:, :-1])
    gap = pts[:, -1] - h
    return np.where(gap > 0.0, "plus", "minus"), np.abs(gap)


def fit_linear_approximation(
    p: LayerProblem,
    side: str,
    fit_radius: float,
    x0=None,
    sample_count: int = 200,
    seed: int = 0,
) -> FitResult:
    """Least-squares affine fit of u on one side of the interface.

    Quasi-random points in the ball of radius fit_radius about x0
    (default: the origin) are filtered to the requested side ("plus" or
    "minus"); u is evaluated there and fitted with a . x + b, x relative
    to x0.  residual_sup is the largest absolute fit residual, a lower
    bound witness for the sup distance between u and its affine model.

    Points closer to the interface than 1e-4 * fit_radius are discarded:
    u is continuous across, so they carry no extra information for the
    fit, while their evaluation cost grows without bound.
    """
    if side not in ("plus", "minus"):
        raise ValueError('side must be "plus" or "minus"')
    if not 0.0 < fit_radius <= 0.5 * p.ctx.radius:
        raise ValueError("need 0 < fit_radius <= ball radius / 2")
    if sample_count < 8:
        raise ValueError("need at least 8 samples for a stable fit")
    center = np.zeros(p.ctx.n) if x0 is None else np.asarray(x0, dtype=float)

    pts = np.empty((0, p.ctx.n))
    attempt = 3 * sample_count
    for draw in range(50):
        cand = ball_points(attempt, p.ctx.n, fit_radius, center=center, seed=seed + draw)
        inside = np.linalg.norm(cand, axis=1) < p.ctx.radius * (1.0 - 1.0e-9)
        cand = cand[inside]
        sides, gaps = _side_of(p, cand)
        keep = (sides == side) & (gaps > 1.0e-4 * fit_radius)
        pts = np.concatenate([pts, cand[keep]])
        if pts.shape[0] >= sample_count:
            break
    if pts.shape[0] < max(p.ctx.n + 2, sample_count // 4):
        raise ValueError("too few usable samples on the requested side")
    pts = pts[: min(sample_count, pts.shape[0])]
    sample_count = pts.shape[0]

    values = np.empty(sample_count)
    converged = True
    for i, xi in enumerate(pts):
        res = evaluate_solution(p, xi)
        values[i] = res.value
        converged = converged and res.converged

    design = np.concatenate([pts - center, np.ones((sample_count, 1))], axis=1)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    poly = LinearPolynomial(a=coef[:-1], b=float(coef[-1]))
    residual = np.abs(design @ coef - values)
    return FitResult(
        poly=poly,
        residual_sup=float(np.max(residual)),
        samples=sample_count,
        converged=converged,
    )
