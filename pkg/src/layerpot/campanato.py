"""Piecewise-affine refinement loop for transmission potentials.

The solution of a ball problem is approximated on each side of the
interface by affine functions l_k+/-, refined scale by scale: at radius
r_k = rho^k R the harmonic extension of u - p_k (p_k is the piecewise
candidate, glued across {x_n = 0}) is read off at the center, and its
value/gradient there update both sides at once.  The decay ladder

    d_k = max(omega(rho^k), sqrt(rho) d_{k-1}),   d_0 = 1,

controls the per-scale error, and sigma(r) = d_{k+1} + sum_{j>=k} d_j
(rho^{k+1} <= r < rho^k) is the scale function whose vanishing at 0
expresses gradient convergence.  The module also checks the defining
distributional identity Laplacian(p_k) = g(0) dH on {x_n = 0} against
explicit bump functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import InterfaceGraph, point_side
from .greens import BallContext, harmonic_center
from .modulus import Modulus, classify_dini, evaluate, improper_dini_integral
from .potential import LayerProblem, LinearPolynomial, evaluate_solution
from .sampling import ball_points

__all__ = [
    "IterationState",
    "SigmaResult",
    "bump_function",
    "dk_sequence",
    "iterate",
    "piecewise_laplacian_residual",
    "sigma",
]


def dk_sequence(omega: Modulus, rho: float, K: int) -> list[float]:
    """Decay ladder d_0..d_K for the refinement loop.

    d_0 = 1 and d_k = max(omega(rho^k), sqrt(rho) * d_{k-1}); the
    geometric branch keeps the ladder from collapsing faster than the
    harmonic step allows, the omega branch tracks the data.
    """
    if not 0.0 < rho <= 0.5:
        raise ValueError("need rho in (0, 1/2]")
    if K < 0:
        raise ValueError("need K >= 0")
    root = math.sqrt(rho)
    d = [1.0]
    for k in range(1, K + 1):
        d.append(max(evaluate(omega, rho**k), root * d[-1]))
    return d


@dataclass(frozen=True)
class SigmaResult:
    """Scale function value with truncation and summability data.

    value is sigma(r) with the tail cut at K_tail (tail_bound bounds the
    discarded part); partial_sum is sum_{j=1..K_tail} d_j and bound_ok
    records whether it stays below proof_bound = (c0 + sqrt(rho)) /
    (1 - sqrt(rho)) with c0 an upper bound for sum_{j>=1} omega(rho^j).
    """

    value: float
    k: int
    tail_bound: float
    partial_sum: float
    proof_bound: float
    bound_ok: bool


def sigma(omega: Modulus, rho: float, r: float, K_tail: int = 64) -> SigmaResult:
    """sigma(r) = d_{k+1} + sum_{j >= k} d_j at the scale index of r.

    Requires a summable ladder: a divergent omega (or one the
    classifier cannot settle) raises ValueError.
    """
    if not 0.0 < rho <= 0.5:
        raise ValueError("need rho in (0, 1/2]")
    if not 0.0 < r <= 0.5:
        raise ValueError("need r in (0, 1/2]")
    if K_tail < 1:
        raise ValueError("need K_tail >= 1")
    verdict = classify_dini(omega).verdict
    if verdict == "divergent":
        raise ValueError("sigma undefined: modulus fails the integral test")
    if verdict == "inconclusive":
        raise ValueError("sigma needs a conclusively summable modulus")

    # scale index: rho^{k+1} <= r < rho^k
    L = math.log(r) / math.log(rho)
    k = max(int(math.ceil(L - 1.0e-12)) - 1, 0)
    K = max(K_tail, k + 1)
    d = dk_sequence(omega, rho, K)
    value = d[k + 1] + math.fsum(d[k:])

    # tail of sum_{j > K} d_j: unroll the recursion and compare the
    # omega part with its integral (omega nondecreasing)
    log_inv = math.log(1.0 / rho)
    root = math.sqrt(rho)
    tail_integral, _ = improper_dini_integral(omega, hi=rho**K)
    omega_tail = tail_integral / log_inv
    tail_bound = (omega_tail + root * d[K]) / (1.0 - root)

    c0 = math.fsum(evaluate(omega, rho**j) for j in range(1, K + 1)) + omega_tail
    proof_bound = (c0 + root) / (1.0 - root)
    partial_sum = math.fsum(d[1:])
    return SigmaResult(
        value=value,
        k=k,
        tail_bound=tail_bound,
        partial_sum=partial_sum,
        proof_bound=proof_bound,
        bound_ok=partial_sum <= proof_bound + 1.0e-12,
    )


@dataclass(frozen=True)
class IterationState:
    """Per-scale record of the refinement loop.

    l_plus/l_minus approximate u on the epigraph/subgraph side; their
    slopes differ by g(0) e_n at every k by construction.  sup_error_*
    are measured over quasi-random samples of each side inside B_{r_k},
    increment is r_{k-1} |a_k - a_{k-1}| + |b_k - b_{k-1}| for the step
    that produced this state (0 for the initial one).
    """

    k: int
    l_plus: LinearPolynomial
    l_minus: LinearPolynomial
    d_k: float
    rho: float
    sup_error_plus: float
    sup_error_minus: float
    increment: float
    est_error: float
    converged: bool


def _side_sup(p: LayerProblem, l_plus, l_minus, radius, count, seed):
    """Sampled sup of |u - l| per side over the ball of given radius."""
    pts = ball_points(count, p.ctx.n, radius, seed=seed)
    sup_p = 0.0
    sup_m = 0.0
    est = 0.0
    converged = True
    for x in pts:
        res = evaluate_solution(p, x)
        est = max(est, res.est_error)
        converged = converged and res.converged
        side = point_side(p.interface, x)
        if side in ("plus", "on_interface"):
            sup_p = max(sup_p, abs(res.value - l_plus(x)))
        if side in ("minus", "on_interface"):
            sup_m = max(sup_m, abs(res.value - l_minus(x)))
    return sup_p, sup_m, est, converged


def iterate(
    p: LayerProblem,
    rho: float = 0.5,
    steps: int = 6,
    n_polar: int = 32,
    n_azimuth: int = 64,
    sup_samples: int = 200,
    seed: int = 42,
) -> list[IterationState]:
    """Run the per-scale refinement and return states k = 0..steps.

    State 0 is the seed pair a_0+/- = +/- g(0)/2 e_n, b_0 = 0.  Step k
    samples u - p_k on the sphere of radius r_k = rho^k R, takes the
    center value/gradient of its harmonic extension, and adds that
    affine correction to both sides, preserving the slope jump g(0) e_n
    exactly.  A quadrature failure during an update aborts there and the
    states computed so far are returned.
    """
    if not 0.0 < rho <= 0.5:
        raise ValueError("need rho in (0, 1/2]")
    if steps < 1:
        raise ValueError("need steps >= 1")
    if not isinstance(p.interface, InterfaceGraph):
        raise ValueError("refinement needs a graph interface through 0")
    n = p.ctx.n
    R = p.ctx.radius
    g0 = p.density.g0
    omega = Modulus.max_of(p.interface.omega_psi, p.density.omega_g)
    d = dk_sequence(omega, rho, steps)

    e_n = np.zeros(n)
    e_n[-1] = 1.0
    a_plus = 0.5 * g0 * e_n
    a_minus = -0.5 * g0 * e_n
    b = 0.0
    increment = 0.0
    est_update = 0.0
    states: list[IterationState] = []

    for k in range(steps + 1):
        r_k = R * rho**k
        l_plus = LinearPolynomial(a_plus.copy(), b)
        l_minus = LinearPolynomial(a_minus.copy(), b)
        sup_p, sup_m, est_sup, conv = _side_sup(
            p, l_plus, l_minus, r_k, sup_samples, seed + k
        )
        states.append(
            IterationState(
                k=k,
                l_plus=l_plus,
                l_minus=l_minus,
                d_k=d[k],
                rho=rho,
                sup_error_plus=sup_p,
                sup_error_minus=sup_m,
                increment=increment,
                est_error=max(est_sup, est_update),
                converged=conv,
            )
        )
        if k == steps:
            break

        # update: read the harmonic extension of u - p_k at the center
        est_update = 0.0
        update_ok = True

        def boundary_values(pts):
            nonlocal est_update, update_ok
            vals = np.empty(pts.shape[0])
            for i, y in enumerate(pts):
                res = evaluate_solution(p, y)
                vals[i] = res.value
                est_update = max(est_update, res.est_error)
                update_ok = update_ok and res.converged
            candidate = np.where(pts[:, -1] >= 0.0, l_plus(pts), l_minus(pts))
            return vals - candidate

        hc = harmonic_center(BallContext(n, r_k), boundary_values, n_polar, n_azimuth)
        if not update_ok:
            break
        a_plus = a_plus + hc.grad0
        a_minus = a_minus + hc.grad0
        b = b + hc.v0
        increment = r_k * float(np.linalg.norm(hc.grad0)) + abs(hc.v0)
    return states


@dataclass(frozen=True)
class BumpFunction:
    """Smooth test function (1 - |x-c|^2/R^2)^4 supported in B_R(c)."""

    center: np.ndarray
    radius: float

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        q = ((pts - self.center) ** 2).sum(axis=1) / self.radius**2
        return np.where(q < 1.0, (1.0 - np.minimum(q, 1.0)) ** 4, 0.0)

    def laplacian(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = pts.shape[1]
        q = ((pts - self.center) ** 2).sum(axis=1) / self.radius**2
        qc = np.minimum(q, 1.0)
        val = -8.0 / self.radius**2 * (1.0 - qc) ** 2 * (n * (1.0 - qc) - 6.0 * qc)
        return np.where(q < 1.0, val, 0.0)


def bump_function(center, radius: float) -> BumpFunction:
    if radius <= 0.0:
        raise ValueError("bump radius must be positive")
    return BumpFunction(center=np.asarray(center, dtype=float), radius=float(radius))


def _half_ball_quadrature(center, radius, n, sign):
    """Product rule, exact for polynomials of the degrees used here.

    Nodes/weights for the part of B_radius(center) with sign * x_n >= 0,
    sliced along x_n; each slice is a disk (n = 3) or a chord (n = 2).
    """
    c_n = center[-1]
    lo, hi = c_n - radius, c_n + radius
    if sign > 0:
        lo = max(lo, 0.0)
    else:
        hi = min(hi, 0.0)
    if hi <= lo:
        return np.zeros((0, n)), np.zeros(0)
    if n == 3:
        gz, wz = np.polynomial.legendre.leggauss(12)
        z = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gz
        wz = 0.5 * (hi - lo) * wz
        slice_r = np.sqrt(np.maximum(radius**2 - (z - c_n) ** 2, 0.0))
    else:
        # n = 2: odd powers of the chord half-width appear, so slice in
        # the angle z = c_n + R sin(alpha) where the width is R cos(alpha)
        a_lo = math.asin(min(max((lo - c_n) / radius, -1.0), 1.0))
        a_hi = math.asin(min(max((hi - c_n) / radius, -1.0), 1.0))
        ga, wa = np.polynomial.legendre.leggauss(24)
        alpha = 0.5 * (a_lo + a_hi) + 0.5 * (a_hi - a_lo) * ga
        z = c_n + radius * np.sin(alpha)
        slice_r = radius * np.cos(alpha)
        wz = 0.5 * (a_hi - a_lo) * wa * slice_r
    gt, wt = np.polynomial.legendre.leggauss(12)
    t = 0.5 * (gt + 1.0)
    wt = 0.5 * wt
    pts = []
    wts = []
    if n == 3:
        n_ang = 24
        theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
        w_ang = 2.0 * math.pi / n_ang
        ct, st = np.cos(theta), np.sin(theta)
        for zi, wzi, ri in zip(z, wz, slice_r):
            rr = ri * t
            x = center[0] + np.outer(rr, ct)
            y = center[1] + np.outer(rr, st)
            w = wzi * w_ang * ri**2 * np.outer(t * wt, np.ones(n_ang))
            pts.append(
                np.stack([x.ravel(), y.ravel(), np.full(x.size, zi)], axis=1)
            )
            wts.append(w.ravel())
    elif n == 2:
        for zi, wzi, ri in zip(z, wz, slice_r):
            x = center[0] + ri * (2.0 * t - 1.0)
            w = wzi * 2.0 * ri * wt
            pts.append(np.stack([x, np.full(x.size, zi)], axis=1))
            wts.append(w)
    else:
        raise ValueError("only n = 2 or 3")
    return np.concatenate(pts), np.concatenate(wts)


def piecewise_laplacian_residual(
    l_plus: LinearPolynomial, l_minus: LinearPolynomial, g0: float, bump: BumpFunction
) -> float:
    """Residual of the glued candidate's defining identity against a bump.

    The candidate p = l_plus on {x_n >= 0}, l_minus below, has
    distributional Laplacian g0 dH on {x_n = 0} whenever the slopes
    differ by g0 e_n and the constants agree; the residual

        int p Lap(phi) dx  -  g0 int_{x_n=0} phi dH

    then vanishes to roundoff.  All integrals use fixed product rules
    exact for the polynomial degrees involved.
    """
    n = bump.center.size
    total = []
    for sign, l in ((1.0, l_plus), (-1.0, l_minus)):
        pts, w = _half_ball_quadrature(bump.center, bump.radius, n, sign)
        if pts.shape[0]:
            total.extend((w * l(pts) * bump.laplacian(pts)).tolist())
    volume = math.fsum(total)

    # slice of the support at x_n = 0
    c_n = bump.center[-1]
    if abs(c_n) >= bump.radius:
        surface = 0.0
    else:
        ri = math.sqrt(bump.radius**2 - c_n**2)
        gt, wt = np.polynomial.legendre.leggauss(12)
        t = 0.5 * (gt + 1.0)
        wt = 0.5 * wt
        if n == 3:
            n_ang = 24
            theta = 2.0 * math.pi * np.arange(n_ang) / n_ang
            ct, st = np.cos(theta), np.sin(theta)
            rr = ri * t
            x = bump.center[0] + np.outer(rr, ct)
            y = bump.center[1] + np.outer(rr, st)
            pts = np.stack([x.ravel(), y.ravel(), np.zeros(x.size)], axis=1)
            w = (2.0 * math.pi / n_ang) * ri**2 * np.outer(t * wt, np.ones(n_ang))
            surface = g0 * math.fsum((w.ravel() * bump(pts)).tolist())
        else:
            x = bump.center[0] + ri * (2.0 * t - 1.0)
            pts = np.stack([x, np.zeros(x.size)], axis=1)
            surface = g0 * math.fsum((2.0 * ri * wt * bump(pts)).tolist())
    return volume - surface
