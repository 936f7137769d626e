"""Potentials of measures supported on graph interfaces inside balls.

The package evaluates u solving  Delta u = g dH restricted to Gamma  in
a ball with zero boundary values, where Gamma is the graph of a C^1
function with a modulus-of-continuity-controlled gradient.  It bundles
the modulus calculus (Dini integral tests), the explicit ball Green's
function, adaptive quadrature tuned for the surface-supported data, the
potential evaluators (values, gradients, transmission jumps), blow-up
and ratio experiments for borderline regularity, and the
piecewise-affine refinement loop that certifies Lipschitz behaviour
scale by scale.
"""

from .modulus import (
    DiniClassification,
    Modulus,
    SeriesCheck,
    classify_dini,
    dini_integral,
    evaluate,
    improper_dini_integral,
    series_check,
)
from .geometry import (
    InterfaceGraph,
    SphereInterface,
    SurfaceDensity,
    area_element,
    make_density,
    make_interface,
    point_side,
)
from .greens import (
    BallContext,
    HarmonicCenter,
    fundamental,
    fundamental_gradient,
    greens_ball,
    greens_gradient_x,
    harmonic_center,
    sphere_grid,
)
from .quadrature import (
    DiskDomain,
    ImplicitStarDomain,
    QuadratureResult,
    QuadratureSpec,
    graph_patch_integral,
    sphere_integral,
)
from .potential import (
    FitResult,
    JumpResult,
    LayerProblem,
    LinearPolynomial,
    evaluate_gradient,
    evaluate_solution,
    fit_linear_approximation,
    radial_oracle,
    transmission_jump,
)
from .campanato import (
    IterationState,
    SigmaResult,
    bump_function,
    dk_sequence,
    iterate,
    piecewise_laplacian_residual,
    sigma,
)
from .experiments import (
    BlowupScan,
    KeyLemmaScan,
    LineFit,
    blowup_density_scan,
    blowup_graph_scan,
    key_lemma_ratio,
    r_epsilon,
)
from .descriptors import (
    DescriptorError,
    density_from_descriptor,
    interface_from_descriptor,
    modulus_from_descriptor,
    problem_from_descriptor,
    quadrature_spec_from_descriptor,
)
from .sampling import ball_points, halton

__version__ = "0.1.0"

__all__ = [
    "BallContext",
    "BlowupScan",
    "DescriptorError",
    "DiniClassification",
    "DiskDomain",
    "FitResult",
    "HarmonicCenter",
    "ImplicitStarDomain",
    "InterfaceGraph",
    "IterationState",
    "JumpResult",
    "KeyLemmaScan",
    "LayerProblem",
    "LineFit",
    "LinearPolynomial",
    "Modulus",
    "QuadratureResult",
    "QuadratureSpec",
    "SeriesCheck",
    "SigmaResult",
    "SphereInterface",
    "SurfaceDensity",
    "area_element",
    "ball_points",
    "blowup_density_scan",
    "blowup_graph_scan",
    "bump_function",
    "classify_dini",
    "density_from_descriptor",
    "dini_integral",
    "dk_sequence",
    "evaluate",
    "evaluate_gradient",
    "evaluate_solution",
    "fit_linear_approximation",
    "fundamental",
    "fundamental_gradient",
    "graph_patch_integral",
    "greens_ball",
    "greens_gradient_x",
    "halton",
    "harmonic_center",
    "improper_dini_integral",
    "interface_from_descriptor",
    "iterate",
    "key_lemma_ratio",
    "make_density",
    "make_interface",
    "modulus_from_descriptor",
    "piecewise_laplacian_residual",
    "point_side",
    "problem_from_descriptor",
    "quadrature_spec_from_descriptor",
    "r_epsilon",
    "radial_oracle",
    "series_check",
    "sigma",
    "sphere_grid",
    "sphere_integral",
    "transmission_jump",
]
