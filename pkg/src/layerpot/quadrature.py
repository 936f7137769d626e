"""Adaptive quadrature over chart patches and spheres.

Chart-patch integrals are taken in polar coordinates (t, theta) centered
at the singular projection whenever the integrand has a weak singularity
there: the polar Jacobian t cancels kernels as strong as |y' - p'|^(2-n),
so the transformed integrand is bounded and panel-adaptive Gauss rules
converge.  With the radial direction rescaled by the per-direction domain
extent T(theta), every patch becomes the rectangle
[0, 2 pi) x [0, 1] in (theta, s) and the area element is exactly
s * T(theta)^2 ds dtheta (the T' term cancels in the Jacobian
determinant).

Panels are accepted when comparing the base-order tensor Gauss rule with
the doubled-order rule agrees to the panel's proportional share of the
tolerance.  For nearly singular integrands (evaluation point at small
distance d > 0 from the surface) an additional hard rule applies: panels
within singular_split_radius * d of the projection must be smaller than
d / 2 in each direction before their error estimate is trusted.

Panel evaluations are independent; results are accumulated in a fixed
traversal order and summed with math.fsum, so outputs are reproducible
bit-for-bit regardless of how the work is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadratureResult",
    "DiskDomain",
    "ImplicitStarDomain",
    "graph_patch_integral",
    "sphere_integral",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and refinement limits for the adaptive rules."""

    target_tol: float = 1.0e-6
    max_depth: int = 12
    base_order: int = 8
    singular_split_radius: float = 5.0

    def __post_init__(self):
        if self.target_tol <= 0.0:
            raise ValueError("target_tol must be positive")
        if self.max_depth < 1 or self.base_order < 2:
            raise ValueError("need max_depth >= 1 and base_order >= 2")
        if self.singular_split_radius <= 0.0:
            raise ValueError("singular_split_radius must be positive")


@dataclass(frozen=True)
class QuadratureResult:
    """Value with an a-posteriori error estimate.

    value is a float for scalar integrands, an ndarray for vector ones.
    converged is False when panels hit max_depth with their error share
    or the near-field size rule still unmet and the accumulated error
    estimate exceeds the target tolerance; the value is then the best
    available estimate and est_error its accumulated bound.
    """

    value: float | np.ndarray
    est_error: float
    panels: int
    converged: bool


class DiskDomain:
    """Disk (or interval, in 1-d charts) of given radius and center."""

    def __init__(self, radius: float, center=None):
        if radius <= 0.0:
            raise ValueError("disk radius must be positive")
        self.radius = radius
        self.center = None if center is None else np.asarray(center, dtype=float)

    def _rel(self, p):
        return p if self.center is None else p - self.center

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return float(np.linalg.norm(self._rel(p))) < self.radius

    def ray_exit(self, origin, dirs):
        """Distance to the boundary along unit directions from origin."""
        origin = self._rel(np.asarray(origin, dtype=float))
        b = dirs @ origin
        disc = b**2 + self.radius**2 - origin @ origin
        return -b + np.sqrt(np.maximum(disc, 0.0))


class ImplicitStarDomain:
    """Domain {level < 0}, star-shaped about interior ray origins.

    level is a vectorized callable on (m, dim) chart points, negative
    inside.  ray_exit assumes a single boundary crossing along each ray
    (true for the ball-clipped graph domains used here) and brackets it
    with [0, t_hi].
    """

    def __init__(self, level, t_hi: float):
        if t_hi <= 0.0:
            raise ValueError("t_hi must be positive")
        self.level = level
        self.t_hi = t_hi

    def contains(self, p) -> bool:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        return bool(self.level(p)[0] < 0.0)

    def ray_exit(self, origin, dirs):
        origin = np.asarray(origin, dtype=float)
        lo = np.zeros(dirs.shape[0])
        hi = np.full(dirs.shape[0], self.t_hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = self.level(origin[None, :] + mid[:, None] * dirs) < 0.0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def _unit_gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _tmax_evaluator(domain, pole, n_samples: int = 256):
    """Periodic boundary-distance function theta -> T(theta) from pole.

    Sampled once and continued by trigonometric interpolation (the
    boundary is smooth in every fixture, so the truncated Fourier series
    converges spectrally).  Disks get the exact closed form.
    """
    if isinstance(domain, DiskDomain):
        origin = np.asarray(pole, dtype=float)

        def tmax(theta):
            d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
            flat = d.reshape(-1, 2)
            return domain.ray_exit(origin, flat).reshape(theta.shape)

        return tmax

    theta_s = 2.0 * math.pi * np.arange(n_samples) / n_samples
    dirs = np.stack([np.cos(theta_s), np.sin(theta_s)], axis=1)
    samples = domain.ray_exit(np.asarray(pole, dtype=float), dirs)
    coeff = np.fft.rfft(samples) / n_samples
    if n_samples % 2 == 0:
        coeff[-1] *= 0.5  # unpaired Nyquist mode
    # drop the spectrally-negligible tail; keeps evaluation cost O(K n)
    mags = np.abs(coeff)
    keep = np.nonzero(mags > 1.0e-15 * mags.max())[0]
    high = coeff[1 : (int(keep[-1]) + 1 if keep.size else 1)]
    mean = float(np.real(coeff[0]))

    def tmax(theta):
        z = np.exp(1j * theta)
        acc = np.zeros_like(z)
        for c in high[::-1]:  # Horner in z = e^{i theta}
            acc += c
            acc *= z
        return mean + 2.0 * np.real(acc)

    return tmax


def _accept_order(values):
    # deterministic accumulation: fsum per component over the accepted list
    if not values:
        return None
    arr = np.asarray(values)
    if arr.ndim == 1:
        return math.fsum(arr.tolist())
    return np.array([math.fsum(arr[:, k].tolist()) for k in range(arr.shape[1])])


def _patch_polar(f, pole, tmax, spec, near_point, near_dist):
    """Adaptive tensor-Gauss integration on [0, 2pi] x [0, 1] panels."""
    x_lo, w_lo = _unit_gauss(spec.base_order)
    x_hi, w_hi = _unit_gauss(2 * spec.base_order)
    pole = np.asarray(pole, dtype=float)
    near = None if near_point is None or near_dist is None else np.asarray(near_point, dtype=float)

    # initial panels: four quadrants, full radial extent
    th0 = np.array([0.0, 0.5, 1.0, 1.5]) * math.pi
    th1 = th0 + 0.5 * math.pi
    s0 = np.zeros(4)
    s1 = np.ones(4)
    # per-axis refinement generation counts (max_depth caps each axis)
    depth_a = np.zeros(4, dtype=int)
    depth_r = np.zeros(4, dtype=int)

    accepted_vals: list[np.ndarray] = []
    accepted_errs: list[float] = []
    n_panels = 0
    converged = True

    def panel_values(a0, a1, b0, b1, nodes, weights):
        # tensor product rule on (theta, s) in [a0,a1] x [b0,b1]
        p = nodes.size
        theta = a0[:, None] + (a1 - a0)[:, None] * nodes[None, :]
        s = b0[:, None] + (b1 - b0)[:, None] * nodes[None, :]
        T = tmax(theta)  # (P, p)
        ct, st = np.cos(theta), np.sin(theta)
        # radial coordinate t = s * T(theta); points (P, p_s, p_theta, 2)
        t = s[:, :, None] * T[:, None, :]
        px = pole[0] + t * ct[:, None, :]
        py = pole[1] + t * st[:, None, :]
        pts = np.stack([px, py], axis=-1).reshape(-1, 2)
        fv = np.asarray(f(pts), dtype=float)
        if fv.ndim == 1:
            fv = fv[:, None]
        k = fv.shape[1]
        fv = fv.reshape(len(a0), p, p, k)
        g = fv * (s[:, :, None] * T[:, None, :] ** 2)[..., None]
        integ = np.einsum("i,j,aijk->ak", weights, weights, g)
        scale = ((a1 - a0) * (b1 - b0))[:, None]
        return integ * scale, g

    while th0.size:
        n_panels += th0.size
        I_lo, _ = panel_values(th0, th1, s0, s1, x_lo, w_lo)
        I_hi, g_hi = panel_values(th0, th1, s0, s1, x_hi, w_hi)
        err = np.max(np.abs(I_hi - I_lo), axis=1)
        frac = (th1 - th0) * (s1 - s0) / (2.0 * math.pi)
        share = spec.target_tol * frac

        # geometric footprint of each panel for the near-field rule
        force_r = np.zeros(th0.size, dtype=bool)
        force_a = np.zeros(th0.size, dtype=bool)
        if near is not None and near_dist is not None and near_dist > 0.0:
            th_m = 0.5 * (th0 + th1)
            T_m = tmax(th_m)
            radial = (s1 - s0) * T_m
            arc = s1 * T_m * (th1 - th0)
            t_mid = 0.5 * (s0 + s1) * T_m
            cx = pole[0] + t_mid * np.cos(th_m)
            cy = pole[1] + t_mid * np.sin(th_m)
            half_diag = 0.5 * np.hypot(radial, arc)
            dist = np.hypot(cx - near[0], cy - near[1]) - half_diag
            zone = dist <= spec.singular_split_radius * near_dist
            # graded: resolve to the local distance scale, floored at the gap
            limit = 0.5 * np.maximum(near_dist, dist)
            force_r = zone & (radial >= limit)
            force_a = zone & (arc >= limit)

        ok = (err <= share) & ~(force_r | force_a)

        # split-axis selection: forced rules first, then error-driven by
        # the total variation of the weighted integrand along each axis
        tv_s = np.abs(np.diff(g_hi, axis=1)).sum(axis=(1, 2, 3))
        tv_t = np.abs(np.diff(g_hi, axis=2)).sum(axis=(1, 2, 3))
        e_over = err > share
        do_r = (force_r | (e_over & (4.0 * tv_s >= tv_t))) & (depth_r < spec.max_depth)
        do_a = (force_a | (e_over & (4.0 * tv_t >= tv_s))) & (depth_a < spec.max_depth)
        do_r &= ~ok
        do_a &= ~ok
        final = ~(do_r | do_a)
        if np.any(final & ~ok):
            converged = False

        for idx in np.nonzero(final)[0]:
            accepted_vals.append(I_hi[idx])
            accepted_errs.append(float(err[idx]))

        split = ~final
        if not np.any(split):
            break
        a0, a1 = th0[split], th1[split]
        b0, b1 = s0[split], s1[split]
        da, dr = depth_a[split], depth_r[split]
        fa, fr = do_a[split], do_r[split]
        new = ([], [], [], [], [], [])
        for i in range(a0.size):
            sa = [(a0[i], a1[i])]
            ss = [(b0[i], b1[i])]
            if fa[i]:
                am = 0.5 * (a0[i] + a1[i])
                sa = [(a0[i], am), (am, a1[i])]
            if fr[i]:
                sm = 0.5 * (b0[i] + b1[i])
                ss = [(b0[i], sm), (sm, b1[i])]
            for ta, tb in sa:
                for tc, td in ss:
                    new[0].append(ta)
                    new[1].append(tb)
                    new[2].append(tc)
                    new[3].append(td)
                    new[4].append(da[i] + int(fa[i]))
                    new[5].append(dr[i] + int(fr[i]))
        th0 = np.array(new[0])
        th1 = np.array(new[1])
        s0 = np.array(new[2])
        s1 = np.array(new[3])
        depth_a = np.array(new[4], dtype=int)
        depth_r = np.array(new[5], dtype=int)

    value = _accept_order(accepted_vals)
    est = math.fsum(accepted_errs)
    if value is None:
        value = 0.0
    elif value.size == 1:
        value = float(value[0])
    converged = converged or est <= spec.target_tol
    return QuadratureResult(value=value, est_error=est, panels=n_panels, converged=converged)


def _patch_line(f, pole, domain, spec, near_dist):
    """1-d analogue for n = 2: split at the pole, adapt per side."""
    x_lo, w_lo = _unit_gauss(spec.base_order)
    x_hi, w_hi = _unit_gauss(2 * spec.base_order)
    pole = float(np.asarray(pole, dtype=float).ravel()[0])
    sides = domain.ray_exit(np.array([pole]), np.array([[1.0], [-1.0]]))

    accepted_vals: list[np.ndarray] = []
    accepted_errs: list[float] = []
    n_panels = 0
    converged = True
    total_len = float(sides[0] + sides[1])

    for sign, extent in ((1.0, float(sides[0])), (-1.0, float(sides[1]))):
        if extent <= 0.0:
            continue
        lo = np.array([0.0])
        hi = np.array([extent])
        depth = np.array([0], dtype=int)
        while lo.size:
            n_panels += lo.size
            h = hi - lo
            t_lo = lo[:, None] + h[:, None] * x_lo[None, :]
            t_hi_nodes = lo[:, None] + h[:, None] * x_hi[None, :]

            def rule(t_nodes, w):
                pts = (pole + sign * t_nodes).reshape(-1, 1)
                fv = np.asarray(f(pts), dtype=float)
                if fv.ndim == 1:
                    fv = fv[:, None]
                k = fv.shape[1]
                fv = fv.reshape(lo.size, w.size, k)
                return np.einsum("j,ajk->ak", w, fv) * h[:, None]

            I_lo = rule(t_lo, w_lo)
            I_hi = rule(t_hi_nodes, w_hi)
            err = np.max(np.abs(I_hi - I_lo), axis=1)
            share = spec.target_tol * h / total_len
            forced = np.zeros(lo.size, dtype=bool)
            if near_dist is not None and near_dist > 0.0:
                zone = lo <= spec.singular_split_radius * near_dist
                forced = zone & (h >= 0.5 * np.maximum(near_dist, lo))
            ok = (err <= share) & ~forced
            capped = depth >= spec.max_depth
            final = ok | capped
            if np.any(capped & ~ok):
                converged = False
            for idx in np.nonzero(final)[0]:
                accepted_vals.append(I_hi[idx])
                accepted_errs.append(float(err[idx]))
            keep = ~final
            mid = 0.5 * (lo[keep] + hi[keep])
            lo = np.concatenate([lo[keep], mid])
            hi = np.concatenate([mid, hi[keep]])
            depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])

    value = _accept_order(accepted_vals)
    est = math.fsum(accepted_errs)
    if value is None:
        value = 0.0
    elif value.size == 1:
        value = float(value[0])
    converged = converged or est <= spec.target_tol
    return QuadratureResult(value=value, est_error=est, panels=n_panels, converged=converged)


def graph_patch_integral(
    integrand,
    domain,
    dim: int,
    near_point=None,
    near_dist: float | None = None,
    spec: QuadratureSpec | None = None,
) -> QuadratureResult:
    """Integrate a chart-space integrand over a patch domain.

    Parameters
    ----------
    integrand : callable
        Vectorized on (m, dim) chart points; may return (m,) or (m, k)
        for k simultaneous components sharing the same refinement.
    domain : DiskDomain or ImplicitStarDomain
        Integration region in the chart.
    dim : int
        Chart dimension, n - 1 in {1, 2}.
    near_point : array_like, optional
        Chart projection of the (near-)singular point.  When it lies
        inside the domain it becomes the polar origin, which cancels
        singularities up to |y' - near_point|^(-1) in 2-d charts.
    near_dist : float, optional
        Distance scale of the near-singularity; 0 means the integrand is
        genuinely singular at near_point (polar cancellation only), a
        positive value activates the forced near-field refinement.
    spec : QuadratureSpec, optional

    Returns
    -------
    QuadratureResult
    """
    spec = spec or QuadratureSpec()
    if dim not in (1, 2):
        raise ValueError("chart dimension must be 1 or 2")
    pole = np.zeros(dim)
    if near_point is not None:
        cand = np.asarray(near_point, dtype=float)
        if cand.shape != (dim,):
            raise ValueError(f"near_point must have shape ({dim},)")
        if domain.contains(cand):
            pole = cand
    if dim == 1:
        return _patch_line(integrand, pole, domain, spec, near_dist)
    tmax = _tmax_evaluator(domain, pole)
    near = None if near_point is None else np.asarray(near_point, dtype=float)
    return _patch_polar(integrand, pole, tmax, spec, near, near_dist)


def sphere_integral(
    radius: float,
    integrand,
    spec: QuadratureSpec | None = None,
    n: int = 3,
    max_order: int = 1024,
) -> QuadratureResult:
    """Integrate a continuous integrand over the sphere |y| = radius.

    The product Gauss/trapezoid grid (see greens.sphere_grid) is doubled
    until two consecutive resolutions agree to target_tol.
    """
    from .greens import BallContext, sphere_grid  # local import, no cycle

    spec = spec or QuadratureSpec()
    ctx = BallContext(n, radius)

    def value_at(order):
        pts, w = sphere_grid(ctx, order, 2 * order) if ctx.n == 3 else sphere_grid(ctx, 2, order)
        fv = np.asarray(integrand(pts), dtype=float)
        if fv.ndim == 1:
            fv = fv[:, None]
        return np.array(
            [math.fsum((w * fv[:, k]).tolist()) for k in range(fv.shape[1])]
        )

    order = max(spec.base_order, 4)
    prev = value_at(order)
    evals = 1
    while True:
        order *= 2
        cur = value_at(order)
        evals += 1
        err = float(np.max(np.abs(cur - prev)))
        if err <= spec.target_tol or order >= max_order:
            value = cur if cur.size > 1 else float(cur[0])
            return QuadratureResult(
                value=value,
                est_error=err,
                panels=evals,
                converged=err <= spec.target_tol,
            )
        prev = cur
