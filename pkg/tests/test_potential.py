import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from layerpot.geometry import SphereInterface, make_density, make_interface
from layerpot.greens import BallContext
from layerpot.potential import (
    LayerProblem,
    evaluate_gradient,
    evaluate_solution,
    fit_linear_approximation,
    radial_oracle,
    transmission_jump,
)
from layerpot.quadrature import QuadratureSpec


def flat_problem(n=3, spec=None):
    return LayerProblem(
        ctx=BallContext(n, 1.0),
        interface=make_interface("flat", n=n, chart_radius=1.0),
        density=make_density("constant", c=1.0, n=n),
        spec=spec or QuadratureSpec(),
    )


def sphere_problem(s=0.5, value=1.0, spec=None):
    return LayerProblem(
        ctx=BallContext(3, 1.0),
        interface=SphereInterface(radius=s),
        density=make_density("constant", c=value, n=3),
        spec=spec or QuadratureSpec(),
    )


def test_problem_validation():
    with pytest.raises(ValueError):
        sphere_problem(s=1.5)
    with pytest.raises(ValueError):
        LayerProblem(
            ctx=BallContext(3, 1.0),
            interface=make_interface("flat", n=3, chart_radius=0.5),
            density=make_density("constant", c=1.0, n=3),
        )
    with pytest.raises(ValueError):
        LayerProblem(
            ctx=BallContext(2, 1.0),
            interface=make_interface("flat", n=3, chart_radius=1.0),
            density=make_density("constant", c=1.0, n=3),
        )


def test_flat_center_value():
    # u(0) = int_{|y'|<1} (phi-corrector) dA = -1/2 + 1/4 = -1/4 exactly
    res = evaluate_solution(flat_problem(), np.zeros(3))
    assert res.converged
    assert_allclose(res.value, -0.25, atol=1.0e-9)


def test_point_checks():
    p = flat_problem()
    with pytest.raises(ValueError):
        evaluate_solution(p, [0.1, 0.2])
    with pytest.raises(ValueError):
        evaluate_solution(p, [1.5, 0.0, 0.0])


def test_boundary_fastpath_is_exact_zero():
    p = flat_problem()
    for x in ([1.0, 0.0, 0.0], [0.0, 1.0 - 1.0e-13, 0.0]):
        res = evaluate_solution(p, x)
        assert res.value == 0.0
        assert res.est_error == 0.0
        assert res.converged


def test_sphere_matches_radial_oracle():
    p = sphere_problem(s=0.5)
    for t in (0.25, 0.75):
        res = evaluate_solution(p, np.array([t, 0.0, 0.0]))
        assert res.converged
        assert_allclose(res.value, radial_oracle(t, 0.5, p.ctx), atol=5.0e-7)


def test_on_interface_evaluation_flat():
    # weakly singular kernel: on-surface values are still finite
    p = flat_problem()
    res = evaluate_solution(p, np.array([0.3, 0.2, 0.0]))
    assert res.converged
    assert np.isfinite(res.value)
    # interior values of a negative layer stay below the boundary value 0
    assert res.value < 0.0


def test_gradient_matches_finite_differences():
    p = flat_problem()
    x = np.array([0.25, 0.1, 0.35])
    grad = evaluate_gradient(p, x)
    assert grad.converged
    h = 1.0e-4
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        up = evaluate_solution(p, x + e).value
        um = evaluate_solution(p, x - e).value
        assert_allclose(grad.value[k], (up - um) / (2.0 * h), atol=5.0e-5)


def test_gradient_rejects_interface_points():
    with pytest.raises(ValueError):
        evaluate_gradient(flat_problem(), np.array([0.2, 0.1, 0.0]))
    with pytest.raises(ValueError):
        evaluate_gradient(sphere_problem(), np.array([0.5, 0.0, 0.0]))


def test_sphere_gradient_oracle():
    # outside the sphere u = -s^2 (1/|x| - 1/r), grad = s^2 x / |x|^3
    p = sphere_problem(s=0.5)
    x = np.array([0.6, 0.3, 0.2])
    t = float(np.linalg.norm(x))
    res = evaluate_gradient(p, x)
    assert res.converged
    assert_allclose(res.value, 0.25 * x / t**3, atol=5.0e-6)
    # inside, u is constant: gradient 0
    res_in = evaluate_gradient(p, np.array([0.1, -0.2, 0.05]))
    assert np.max(np.abs(res_in.value)) <= 5.0e-6


def test_snap_to_surface_band():
    p = flat_problem()
    on = evaluate_solution(p, np.array([0.2, -0.1, 0.0]))
    off = evaluate_solution(p, np.array([0.2, -0.1, 1.0e-14]))
    assert off.converged
    assert_allclose(off.value, on.value, rtol=1.0e-12)


def test_flat_jump_equals_density():
    res = transmission_jump(flat_problem(), np.zeros(3))
    assert res.converged
    assert_allclose(res.jump, 1.0, atol=2.0e-6)
    assert len(res.per_h) == 3
    # raw ladder values must already be close, extrapolation closer
    assert abs(res.per_h[-1][1] - 1.0) <= 1.0e-3


def test_flat_jump_n2_needs_tight_quadrature():
    # the h-difference divides quadrature bias by h, so the 1-d chart
    # runs at a tolerance well below the bias the ladder can tolerate
    p = flat_problem(n=2, spec=QuadratureSpec(target_tol=1.0e-9, max_depth=26))
    res = transmission_jump(p, np.zeros(2))
    assert res.converged
    assert_allclose(res.jump, 1.0, atol=1.0e-6)


def test_sphere_jump_scales_with_density():
    p = sphere_problem(s=0.5, value=2.5)
    res = transmission_jump(p, np.array([0.0, 0.0, 0.5]))
    assert res.converged
    assert_allclose(res.jump, 2.5, atol=1.0e-5)


def test_jump_ladder_validation():
    p = flat_problem()
    with pytest.raises(ValueError):
        transmission_jump(p, np.zeros(3), h_ladder=(1.0e-2,))
    with pytest.raises(ValueError):
        transmission_jump(p, np.zeros(3), h_ladder=(1.0e-3, 1.0e-2))
    with pytest.raises(ValueError):
        transmission_jump(p, np.zeros(3), h_ladder=(0.6, 0.3))


def test_radial_oracle_validation():
    ctx = BallContext(3, 1.0)
    assert radial_oracle(0.5, 0.5, ctx) == radial_oracle(0.25, 0.5, ctx)
    assert radial_oracle(1.0, 0.5, ctx) == 0.0
    with pytest.raises(ValueError):
        radial_oracle(0.5, 0.5, BallContext(2, 1.0))
    with pytest.raises(ValueError):
        radial_oracle(0.5, 1.5, ctx)
    with pytest.raises(ValueError):
        radial_oracle(2.0, 0.5, ctx)


def test_fit_linear_flat_plus_side():
    # near 0 on {x3 > 0}: u ~ -1/4 + x3/2 (jump 1 split evenly by symmetry)
    p = flat_problem()
    fit = fit_linear_approximation(p, "plus", 0.05, sample_count=64, seed=0)
    assert fit.converged
    assert fit.samples >= 32
    assert_allclose(fit.poly.a[2], 0.5, atol=0.02)
    assert np.max(np.abs(fit.poly.a[:2])) <= 0.01
    assert_allclose(fit.poly.b, -0.25, atol=0.005)
    assert fit.residual_sup <= 2.0e-3
    # the affine model reproduces held-out evaluations to the same order
    x = np.array([0.01, -0.02, 0.015])
    assert abs(fit.poly(x) - evaluate_solution(p, x).value) <= 2.0e-3


def test_fit_validation():
    p = flat_problem()
    with pytest.raises(ValueError):
        fit_linear_approximation(p, "top", 0.05)
    with pytest.raises(ValueError):
        fit_linear_approximation(p, "plus", 0.9)
    with pytest.raises(ValueError):
        fit_linear_approximation(p, "plus", 0.05, sample_count=4)
