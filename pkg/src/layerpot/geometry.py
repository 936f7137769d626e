"""Graph interfaces, surface densities, and side classification.

An interface is the graph x_n = psi(x') over a chart disk in R^{n-1},
with psi(0) = 0 and grad psi(0) = 0 so the tangent plane at the origin is
{x_n = 0}.  The regularity of psi is tracked through a modulus omega_psi
and a seminorm K with |grad psi(x')| <= K * omega_psi(|x'|) and
|psi(x')| <= K * |x'| * omega_psi(|x'|) on the chart.  Densities carry the
same structure around their value at the origin.

The sign convention used throughout the package: the "plus" side is the
epigraph {x_n > psi(x')}, and the normal used for transmission jumps
points into it (e_n on a flat interface).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .modulus import Modulus

__all__ = [
    "InterfaceGraph",
    "SphereInterface",
    "SurfaceDensity",
    "make_interface",
    "make_density",
    "area_element",
    "point_side",
]

# Width of the "on_interface" band for point_side, in absolute x_n units.
SIDE_TOLERANCE = 1.0e-14


@dataclass(frozen=True)
class InterfaceGraph:
    """Graph interface x_n = psi(x') over a chart disk.

    height and gradient are vectorized callables taking (m, n-1) arrays.
    seminorm bounds |grad psi| against omega_psi as described in the
    module docstring.
    """

    n: int
    height: Callable
    gradient: Callable
    seminorm: float
    omega_psi: Modulus
    chart_radius: float = 1.0
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("interface dimension n must be 2 or 3")
        if self.chart_radius <= 0.0:
            raise ValueError("chart_radius must be positive")
        if self.seminorm < 0.0:
            raise ValueError("seminorm must be nonnegative")

    def _check_chart(self, yp):
        t = np.linalg.norm(yp, axis=-1)
        if np.any(t > self.chart_radius * (1.0 + 1.0e-9)):
            raise ValueError("point outside interface chart")

    def psi(self, yp):
        """Heights at chart points; (m, n-1) -> (m,), (n-1,) -> float."""
        arr = np.asarray(yp, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        self._check_chart(arr)
        out = self.height(arr)
        return float(out[0]) if single else out

    def grad_psi(self, yp):
        """Gradients at chart points; (m, n-1) -> (m, n-1)."""
        arr = np.asarray(yp, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        self._check_chart(arr)
        out = self.gradient(arr)
        return out[0] if single else out


@dataclass(frozen=True)
class SphereInterface:
    """Concentric sphere |x| = radius, an analytic test fixture.

    Its "plus" side is the inside of the sphere (the bounded component).
    """

    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class SurfaceDensity:
    """Density g on the interface with continuity data at the origin."""

    g: Callable  # (m, n) -> (m,)
    g0: float
    omega_g: Modulus
    seminorm: float
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.g(pts)


# -- radial profile helpers --------------------------------------------


def _radial_graph(f, fprime):
    """Lift scalar profiles f(t), f'(t) to psi(y') = f(|y'|)."""

    def height(yp):
        t = np.linalg.norm(yp, axis=1)
        return f(t)

    def gradient(yp):
        t = np.linalg.norm(yp, axis=1)
        slope = np.zeros_like(t)
        pos = t > 0.0
        slope[pos] = fprime(t[pos]) / t[pos]
        return yp * slope[:, None]

    return height, gradient


def _cusp_profile(t):
    # t / |log t| with value 0 at t = 0; only used for t < 1/4 so the
    # logarithm is safely away from its zero.
    out = np.zeros_like(t)
    pos = t > 0.0
    out[pos] = t[pos] / np.abs(np.log(t[pos]))
    return out


def _cusp_slope(t):
    # derivative (|log t| + 1) / log(t)**2, increasing on (0, 1/4)
    L = np.abs(np.log(t))
    return (L + 1.0) / L**2


def make_interface(family: str, n: int = 3, **params) -> InterfaceGraph:
    """Build a named interface family.

    Families
    --------
    flat : psi = 0; params: chart_radius (default 1.0)
    holder : psi = coeff * |y'|**(1 + alpha); params: alpha, coeff (1.0),
        chart_radius (1.0)
    counterexample_graph : psi = |y'| / |log |y'||, chart radius 1/4.
        Its gradient decays only like 1/|log|, which fails the Dini
        condition; this is the fixture driving the gradient blow-up scans.
    table : radial profile interpolated from params radii/heights, with
        omega (a Modulus), seminorm, chart_radius supplied by the caller.
    """
    if family == "flat":
        chart = float(params.pop("chart_radius", 1.0))
        _reject_extra(params)

        def height(yp):
            return np.zeros(yp.shape[0])

        def gradient(yp):
            return np.zeros_like(yp)

        return InterfaceGraph(
            n=n, height=height, gradient=gradient, seminorm=0.0,
            omega_psi=Modulus.zero(), chart_radius=chart,
            family="flat", params={},
        )

    if family == "holder":
        alpha = float(params.pop("alpha"))
        coeff = float(params.pop("coeff", 1.0))
        chart = float(params.pop("chart_radius", 1.0))
        _reject_extra(params)
        if not 0.0 < alpha <= 1.0:
            raise ValueError("holder interface needs alpha in (0, 1]")

        def f(t):
            return coeff * t ** (1.0 + alpha)

        def fp(t):
            return coeff * (1.0 + alpha) * t**alpha

        height, gradient = _radial_graph(f, fp)
        return InterfaceGraph(
            n=n, height=height, gradient=gradient,
            seminorm=abs(coeff) * (1.0 + alpha),
            omega_psi=Modulus.power(alpha), chart_radius=chart,
            family="holder", params={"alpha": alpha, "coeff": coeff},
        )

    if family == "counterexample_graph":
        _reject_extra(params)
        height, gradient = _radial_graph(_cusp_profile, _cusp_slope)
        # sup over t < 1/4 of (|log t| + 1)/|log t| = 1 + 1/log 4
        return InterfaceGraph(
            n=n, height=height, gradient=gradient,
            seminorm=1.0 + 1.0 / math.log(4.0),
            omega_psi=Modulus.inverse_log(), chart_radius=0.25,
            family="counterexample_graph", params={},
        )

    if family == "table":
        radii = np.asarray(params.pop("radii"), dtype=float)
        heights = np.asarray(params.pop("heights"), dtype=float)
        omega = params.pop("omega")
        seminorm = float(params.pop("seminorm"))
        chart = float(params.pop("chart_radius", float(radii[-1])))
        _reject_extra(params)
        if radii.ndim != 1 or radii.shape != heights.shape or radii.size < 2:
            raise ValueError("table interface needs matching radii/heights, length >= 2")
        if radii[0] != 0.0 or heights[0] != 0.0:
            raise ValueError("table interface profile must start at (0, 0)")
        if np.any(np.diff(radii) <= 0.0):
            raise ValueError("table radii must be strictly increasing")
        slopes = np.diff(heights) / np.diff(radii)

        def f(t):
            return np.interp(t, radii, heights)

        def fp(t):
            # right-continuous piecewise-constant slope, defined a.e.
            idx = np.clip(np.searchsorted(radii, t, side="right") - 1, 0, slopes.size - 1)
            return slopes[idx]

        height, gradient = _radial_graph(f, fp)
        return InterfaceGraph(
            n=n, height=height, gradient=gradient, seminorm=seminorm,
            omega_psi=omega, chart_radius=chart,
            family="table", params={"radii": radii.tolist(), "heights": heights.tolist()},
        )

    raise ValueError(f"unknown interface family {family!r}")


def _reject_extra(params):
    if params:
        raise ValueError(f"unexpected parameters: {sorted(params)}")


def make_density(family: str, n: int = 3, **params) -> SurfaceDensity:
    """Build a named density family.

    Families
    --------
    constant : params c; omega_g = 0.
    holder : g(x) = base + amp * |x|**alpha; params alpha, amp (1.0),
        base (1.0).
    counterexample_eta : g(x) = 1/|log x_1| for x_1 in (0, 1/2), 0 for
        x_1 <= 0, continuous but not Dini continuous at the origin.
    table : g(x) interpolated in |x| from params radii/values, with
        omega (a Modulus) and seminorm supplied by the caller.
    """
    if family == "constant":
        c = float(params.pop("c"))
        _reject_extra(params)

        def g(pts):
            return np.full(pts.shape[0], c)

        return SurfaceDensity(
            g=g, g0=c, omega_g=Modulus.zero(), seminorm=0.0,
            family="constant", params={"c": c},
        )

    if family == "holder":
        alpha = float(params.pop("alpha"))
        amp = float(params.pop("amp", 1.0))
        base = float(params.pop("base", 1.0))
        _reject_extra(params)
        if not 0.0 < alpha <= 1.0:
            raise ValueError("holder density needs alpha in (0, 1]")

        def g(pts):
            return base + amp * np.linalg.norm(pts, axis=1) ** alpha

        return SurfaceDensity(
            g=g, g0=base, omega_g=Modulus.power(alpha), seminorm=abs(amp),
            family="holder", params={"alpha": alpha, "amp": amp, "base": base},
        )

    if family == "counterexample_eta":
        _reject_extra(params)

        def g(pts):
            x1 = pts[:, 0]
            out = np.zeros(pts.shape[0])
            pos = x1 > 0.0
            # formula intended for x_1 < 1/2; clamp keeps it continuous
            # (and bounded) if ever sampled beyond.
            t = np.minimum(x1[pos], 0.5)
            out[pos] = 1.0 / np.abs(np.log(t))
            return out

        # |g - g(0)| <= omega(|x|)/1 for x_1 <= 1/e; the cap region needs
        # the extra factor 1/log 2.
        return SurfaceDensity(
            g=g, g0=0.0, omega_g=Modulus.inverse_log(), seminorm=1.0 / math.log(2.0),
            family="counterexample_eta", params={},
        )

    if family == "table":
        radii = np.asarray(params.pop("radii"), dtype=float)
        values = np.asarray(params.pop("values"), dtype=float)
        omega = params.pop("omega")
        seminorm = float(params.pop("seminorm"))
        _reject_extra(params)
        if radii.ndim != 1 or radii.shape != values.shape or radii.size < 2:
            raise ValueError("table density needs matching radii/values, length >= 2")
        if radii[0] != 0.0:
            raise ValueError("table density profile must start at radius 0")
        if np.any(np.diff(radii) <= 0.0):
            raise ValueError("table radii must be strictly increasing")

        def g(pts):
            return np.interp(np.linalg.norm(pts, axis=1), radii, values)

        return SurfaceDensity(
            g=g, g0=float(values[0]), omega_g=omega, seminorm=seminorm,
            family="table", params={"radii": radii.tolist(), "values": values.tolist()},
        )

    raise ValueError(f"unknown density family {family!r}")


def area_element(gamma: InterfaceGraph, yp) -> float:
    """Surface area element sqrt(1 + |grad psi|^2) at chart points."""
    yp = np.atleast_2d(np.asarray(yp, dtype=float))
    grad = gamma.grad_psi(yp)
    out = np.sqrt(1.0 + np.sum(grad**2, axis=1))
    return float(out[0]) if out.size == 1 else out


def point_side(gamma: InterfaceGraph, x, tol: float = SIDE_TOLERANCE) -> str:
    """Classify x relative to the graph: "plus", "minus" or "on_interface".

    The plus side is the epigraph {x_n > psi(x')}.  Points with
    |x_n - psi(x')| <= tol land in the on_interface band.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (gamma.n,):
        raise ValueError(f"point must have shape ({gamma.n},)")
    gap = x[-1] - gamma.psi(x[:-1])
    if abs(gap) <= tol:
        return "on_interface"
    return "plus" if gap > 0.0 else "minus"
