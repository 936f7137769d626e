"""Gradient blow-up scans and the flat-comparison ratio experiment.

Two scan families probe how regularity of the data limits regularity of
the solution.  The graph scan keeps the density constant but bends the
interface into the cusp profile t / |log t|, whose slope modulus 1/|log|
just fails the Dini condition; the density scan keeps the interface flat
but feeds it the density 1/|log x_1| on one side.  In both cases the
normal (resp. tangential) derivative at distance eps from the interface
is expected to diverge like log|log| as eps decreases, and the scans
record the finite ladder together with a least-squares line in the
log|log| abscissa.  Control runs with smooth data on the same geometry
give bounded, nearly constant derivatives.

The flat-comparison experiment measures, for a ball radius r, the sup of
w = u_curved - u_flat over the concentric ball of radius rho * r, where
the flat problem replaces the interface by its tangent plane and the
density by its value at the origin.  The reported ratio
sup|w| / (r * omega(r)) staying bounded along a radius ladder is the
quantitative signature of the first-order approximation estimate that
drives the scale iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import InterfaceGraph, SurfaceDensity, make_density, make_interface
from .greens import BallContext
from .modulus import Modulus
from .potential import LayerProblem, evaluate_gradient, evaluate_solution
from .quadrature import QuadratureSpec
from .sampling import ball_points

__all__ = [
    "BlowupScan",
    "KeyLemmaScan",
    "LineFit",
    "blowup_density_scan",
    "blowup_graph_scan",
    "key_lemma_ratio",
    "r_epsilon",
]

# chart radius of the cusp fixture; the profile is defined on t < 1/4
_CUSP_CHART = 0.25

# sup-sampling guard: values below this count as an exact zero when the
# normalizing factor r * omega(r) vanishes (flat/constant fixtures)
_ZERO_SUP = 1.0e-10


@dataclass(frozen=True)
class LineFit:
    """Least-squares line y = slope * x + intercept."""

    slope: float
    intercept: float


@dataclass(frozen=True)
class BlowupScan:
    """Ladder of one derivative component approaching the interface.

    epsilons are the evaluation heights (strictly decreasing),
    derivative_values the corresponding derivative component,
    r_epsilons the cusp-width roots (graph scan only, else None), and
    fit the least-squares line of -derivative against the log|log|
    abscissa (of r_eps for the graph scan, of eps for the density scan).
    est_errors and converged report per-entry quadrature diagnostics.
    """

    epsilons: tuple[float, ...]
    derivative_values: tuple[float, ...]
    r_epsilons: tuple[float, ...] | None
    fit: LineFit
    est_errors: tuple[float, ...]
    converged: tuple[bool, ...]

    def __post_init__(self):
        eps = self.epsilons
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        counts = {len(eps), len(self.derivative_values), len(self.est_errors), len(self.converged)}
        if self.r_epsilons is not None:
            counts.add(len(self.r_epsilons))
        if len(counts) != 1:
            raise ValueError("scan lists must have equal length")


@dataclass(frozen=True)
class KeyLemmaScan:
    """Flat-comparison ratios sup|w| / (r * omega(r)) per radius."""

    radii: tuple[float, ...]
    ratios: tuple[float, ...]
    rho: float
    sup_values: tuple[float, ...]
    omega_values: tuple[float, ...]
    est_errors: tuple[float, ...]
    converged: tuple[bool, ...]

    def __post_init__(self):
        if any(q < 0.0 for q in self.ratios):
            raise ValueError("ratios must be nonnegative")


def _cusp(t: float) -> float:
    return t / abs(math.log(t))


def r_epsilon(eps: float) -> float:
    """Radius at which the cusp profile t/|log t| reaches height eps.

    The profile is strictly increasing on (0, 1/4), so the root is
    unique; it is bracketed and bisected to an interval of width 1e-12.
    """
    top = _cusp(_CUSP_CHART)
    if not 0.0 < eps < top:
        raise ValueError(f"eps must lie in (0, {top:.6g})")
    lo, hi = 1.0e-300, _CUSP_CHART
    while hi - lo > 1.0e-12:
        mid = 0.5 * (lo + hi)
        if _cusp(mid) < eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _line_fit(x, y) -> LineFit:
    design = np.stack([np.asarray(x, dtype=float), np.ones(len(x))], axis=1)
    coef, *_ = np.linalg.lstsq(design, np.asarray(y, dtype=float), rcond=None)
    return LineFit(slope=float(coef[0]), intercept=float(coef[1]))


def _default_scan_spec(spec):
    # deeper refinement budget than the solver default: the scan points
    # approach the interface to distance 2^-12
    return spec if spec is not None else QuadratureSpec(max_depth=16)


def _derivative_ladder(problem, epsilons, component):
    values, errs, flags = [], [], []
    for eps in epsilons:
        x = np.zeros(problem.ctx.n)
        x[-1] = eps
        res = evaluate_gradient(problem, x)
        values.append(float(res.value[component]))
        errs.append(res.est_error)
        flags.append(res.converged)
    return values, errs, flags


def blowup_graph_scan(
    j_range=range(4, 13),
    n: int = 3,
    spec: QuadratureSpec | None = None,
    control: bool = False,
) -> BlowupScan:
    """Normal derivative above the cusp tip (or a flat control).

    Evaluates d_u/d_x_n at (0', eps_j), eps_j = 2^-j, for the cusp
    interface with unit density in the ball of radius 1/4 (the chart of
    the cusp profile).  The control run replaces the interface by the
    flat plane in the unit ball, where the same ladder stays bounded.
    The fit regresses -derivative on log|log r_eps|.
    """
    if n != 3:
        raise ValueError("blow-up scans are implemented for n = 3")
    spec = _default_scan_spec(spec)
    js = [int(j) for j in j_range]
    if not js:
        raise ValueError("empty j_range")
    epsilons = [2.0**-j for j in js]
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("j_range must be strictly increasing")
    if control:
        ctx = BallContext(n, 1.0)
        interface = make_interface("flat", n=n, chart_radius=1.0)
    else:
        ctx = BallContext(n, _CUSP_CHART)
        interface = make_interface("counterexample_graph", n=n)
        if epsilons[0] >= ctx.radius:
            raise ValueError("scan heights must stay inside the ball; start j at 3 or higher")
    density = make_density("constant", n=n, c=1.0)
    problem = LayerProblem(ctx, interface, density, spec)
    values, errs, flags = _derivative_ladder(problem, epsilons, component=n - 1)
    r_eps = [r_epsilon(e) for e in epsilons]
    abscissa = [math.log(abs(math.log(r))) for r in r_eps]
    fit = _line_fit(abscissa, [-v for v in values])
    return BlowupScan(
        epsilons=tuple(epsilons),
        derivative_values=tuple(values),
        r_epsilons=tuple(r_eps),
        fit=fit,
        est_errors=tuple(errs),
        converged=tuple(flags),
    )


def blowup_density_scan(
    j_range=range(4, 13),
    n: int = 3,
    spec: QuadratureSpec | None = None,
    control: bool = False,
) -> BlowupScan:
    """Tangential derivative above a flat interface with one-sided density.

    Evaluates d_u/d_x_1 at (0', eps_j) for the flat interface carrying
    the density 1/|log y_1| on {y_1 > 0} in the ball of radius 1/2.  The
    control run uses constant density, whose even symmetry makes the
    same derivative vanish.  The fit regresses -derivative on
    log|log eps|.
    """
    if n != 3:
        raise ValueError("blow-up scans are implemented for n = 3")
    spec = _default_scan_spec(spec)
    js = [int(j) for j in j_range]
    if not js:
        raise ValueError("empty j_range")
    epsilons = [2.0**-j for j in js]
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("j_range must be strictly increasing")
    ctx = BallContext(n, 0.5)
    if epsilons[0] >= ctx.radius:
        raise ValueError("scan heights must stay inside the ball; start j at 2 or higher")
    interface = make_interface("flat", n=n, chart_radius=1.0)
    density = (
        make_density("constant", n=n, c=1.0)
        if control
        else make_density("counterexample_eta", n=n)
    )
    problem = LayerProblem(ctx, interface, density, spec)
    values, errs, flags = _derivative_ladder(problem, epsilons, component=0)
    abscissa = [math.log(abs(math.log(e))) for e in epsilons]
    fit = _line_fit(abscissa, [-v for v in values])
    return BlowupScan(
        epsilons=tuple(epsilons),
        derivative_values=tuple(values),
        r_epsilons=None,
        fit=fit,
        est_errors=tuple(errs),
        converged=tuple(flags),
    )


def key_lemma_ratio(
    interface: InterfaceGraph,
    density: SurfaceDensity,
    rho: float = 0.5,
    radii=tuple(2.0**-j for j in range(1, 7)),
    sample_count: int = 2000,
    seed: int = 42,
    spec: QuadratureSpec | None = None,
) -> KeyLemmaScan:
    """Measure sup|u - v| / (r * omega(r)) along a radius ladder.

    For each r the curved problem (ball of radius r, the given interface
    and density) is compared against the flat problem (same ball, flat
    interface, constant density g(0)); both use the same ball Green's
    function, so the difference w has zero boundary values and its sup
    over B_{rho r} is the quantity the first-order estimate controls.
    The sup is taken over sample_count quasi-random points plus the
    center and is therefore a lower bound on the true sup.  omega is the
    pointwise max of the interface and density moduli.
    """
    if not 0.0 < rho <= 0.5:
        raise ValueError("need 0 < rho <= 1/2")
    if interface.n != 3:
        raise ValueError("the flat-comparison scan is implemented for n = 3")
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0.0 for r in radii):
        raise ValueError("radii must be positive")
    if max(radii) > interface.chart_radius:
        raise ValueError("radii exceed the interface chart")
    spec = spec or QuadratureSpec(max_depth=16)
    omega = Modulus.max_of(interface.omega_psi, density.omega_g)
    flat_iface = make_interface("flat", n=3, chart_radius=max(1.0, max(radii)))
    flat_dens = make_density("constant", n=3, c=density.g0)

    sups, ratios, omegas, errs, flags = [], [], [], [], []
    for r in radii:
        ctx = BallContext(3, r)
        curved = LayerProblem(ctx, interface, density, spec)
        flat = LayerProblem(ctx, flat_iface, flat_dens, spec)
        pts = ball_points(sample_count, 3, rho * r, seed=seed)
        pts = np.concatenate([np.zeros((1, 3)), pts])
        sup_w = 0.0
        err = 0.0
        ok = True
        for x in pts:
            a = evaluate_solution(curved, x)
            b = evaluate_solution(flat, x)
            sup_w = max(sup_w, abs(a.value - b.value))
            err = max(err, a.est_error + b.est_error)
            ok = ok and a.converged and b.converged
        w_r = float(omega(r))
        denom = r * w_r
        if denom > 0.0:
            ratio = sup_w / denom
        else:
            # flat/constant data: w vanishes identically and the
            # normalization degenerates; report 0 for a genuine zero
            ratio = 0.0 if sup_w <= _ZERO_SUP else math.inf
        sups.append(sup_w)
        ratios.append(ratio)
        omegas.append(w_r)
        errs.append(err)
        flags.append(ok)
    return KeyLemmaScan(
        radii=tuple(radii),
        ratios=tuple(ratios),
        rho=rho,
        sup_values=tuple(sups),
        omega_values=tuple(omegas),
        est_errors=tuple(errs),
        converged=tuple(flags),
    )
