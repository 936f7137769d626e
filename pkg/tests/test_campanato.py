import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from layerpot.campanato import (
    bump_function,
    dk_sequence,
    iterate,
    piecewise_laplacian_residual,
    sigma,
)
from layerpot.geometry import make_density, make_interface
from layerpot.greens import BallContext
from layerpot.modulus import Modulus
from layerpot.potential import LayerProblem, LinearPolynomial
from layerpot.quadrature import QuadratureSpec


def test_dk_examples():
    d = dk_sequence(Modulus.power(1.0), 0.25, 2)
    assert_allclose(d, [1.0, 0.5, 0.25], rtol=1.0e-15)
    # zero modulus: pure geometric ladder sqrt(rho)^k
    d0 = dk_sequence(Modulus.zero(), 0.25, 3)
    assert_allclose(d0, [1.0, 0.5, 0.25, 0.125], rtol=1.0e-15)


def test_dk_power_half_floor():
    # omega = power(1/2), rho = 1/2: both branches coincide at 2^(-k/2),
    # so d_8 = 1/16 -- strictly decreasing but still above 1e-2
    d = dk_sequence(Modulus.power(0.5), 0.5, 8)
    assert_allclose(d, [2.0 ** (-0.5 * k) for k in range(9)], rtol=1.0e-14)
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[8] == pytest.approx(0.0625)
    assert d[8] > 1.0e-2


def test_dk_slow_modulus_dominates():
    # inverse_log is capped at 1 near scale 1, so compare against
    # min(1, 1/(k log 2)) = omega(2^-k)
    d = dk_sequence(Modulus.inverse_log(), 0.5, 12)
    for k in range(1, 13):
        assert d[k] >= min(1.0, 1.0 / (k * math.log(2.0))) - 1.0e-15
    assert all(b <= a for a, b in zip(d, d[1:]))


def test_dk_validation():
    with pytest.raises(ValueError):
        dk_sequence(Modulus.power(1.0), 0.75, 3)
    with pytest.raises(ValueError):
        dk_sequence(Modulus.power(1.0), 0.0, 3)
    with pytest.raises(ValueError):
        dk_sequence(Modulus.power(1.0), 0.5, -1)


def test_sigma_zero_modulus_closed_form():
    # d_j = 2^-j for rho = 1/4; sigma = d_{k+1} + sum_{j>=k} d_j
    res = sigma(Modulus.zero(), 0.25, 0.25)
    assert res.k == 0
    assert_allclose(res.value, 2.5, rtol=1.0e-12)
    res2 = sigma(Modulus.zero(), 0.25, 0.0625)
    assert res2.k == 1
    assert_allclose(res2.value, 1.25, rtol=1.0e-12)
    res3 = sigma(Modulus.zero(), 0.25, 0.25**3)
    assert_allclose(res3.value, 0.625, rtol=1.0e-12)


def test_sigma_monotone_and_vanishing():
    vals = [sigma(Modulus.power(0.5), 0.5, 2.0**-j).value for j in range(1, 26, 4)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2.0e-3
    # interior radii use the scale index of their dyadic bracket
    assert sigma(Modulus.power(0.5), 0.5, 0.3).k == 1


def test_sigma_summability_bound():
    res = sigma(Modulus.power(0.5), 0.5, 0.25)
    assert res.bound_ok
    assert res.partial_sum <= res.proof_bound
    assert res.tail_bound < 1.0e-6


def test_sigma_rejects_divergent_and_bad_args():
    with pytest.raises(ValueError, match="integral test"):
        sigma(Modulus.inverse_log(), 0.5, 0.25)
    with pytest.raises(ValueError):
        sigma(Modulus.power(0.5), 0.75, 0.25)
    with pytest.raises(ValueError):
        sigma(Modulus.power(0.5), 0.5, 0.6)
    with pytest.raises(ValueError):
        sigma(Modulus.power(0.5), 0.5, 0.25, K_tail=0)


@pytest.mark.parametrize("n", [2, 3])
def test_bump_function_shape(n):
    c = np.zeros(n)
    bump = bump_function(c, 0.5)
    assert bump(c[None, :])[0] == 1.0
    edge = np.zeros(n)
    edge[0] = 0.5
    assert bump(edge[None, :])[0] == 0.0
    # laplacian against a central second-difference stencil
    rng = np.random.default_rng(3)
    h = 1.0e-4
    for _ in range(5):
        x = rng.uniform(-0.2, 0.2, size=n)
        lap = -2.0 * n * bump(x[None, :])[0]
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            lap += bump((x + e)[None, :])[0] + bump((x - e)[None, :])[0]
        assert_allclose(bump.laplacian(x[None, :])[0], lap / h**2, atol=1.0e-5)


@pytest.mark.parametrize("n", [2, 3])
def test_residual_vanishes_for_glued_affine(n):
    g0 = 0.7
    a_plus = np.array([0.3, -0.2, 0.9][:n])
    a_plus[-1] = 0.55
    a_minus = a_plus.copy()
    a_minus[-1] = 0.55 - g0
    lp = LinearPolynomial(a_plus, 0.13)
    lm = LinearPolynomial(a_minus, 0.13)
    rng = np.random.default_rng(7)
    for _ in range(5):
        c = rng.uniform(-0.3, 0.3, size=n)
        bump = bump_function(c, float(rng.uniform(0.2, 0.6)))
        assert abs(piecewise_laplacian_residual(lp, lm, g0, bump)) <= 1.0e-12


def test_residual_detects_wrong_jump():
    g0 = 1.0
    lp = LinearPolynomial(np.array([0.0, 0.0, 0.5]), 0.0)
    bad = LinearPolynomial(np.array([0.0, 0.0, -0.6]), 0.0)  # jump 1.1
    bump = bump_function(np.zeros(3), 0.5)
    assert abs(piecewise_laplacian_residual(lp, bad, g0, bump)) > 1.0e-4
    # a tangential slope mismatch makes the glued values jump; its
    # dipole term needs a bump with nonzero normal derivative on the
    # plane, i.e. one centered off it
    skew = LinearPolynomial(np.array([0.1, 0.0, -0.5]), 0.0)
    tilted = bump_function(np.array([0.05, -0.02, 0.2]), 0.6)
    assert abs(piecewise_laplacian_residual(lp, skew, g0, tilted)) > 1.0e-6
    assert abs(piecewise_laplacian_residual(lp, lp, 0.0, tilted)) <= 1.0e-13


def test_residual_one_sided_support():
    # bump strictly inside {x_n > 0}: both integrals drop to
    # int l Lap(phi) = 0 for affine l
    lp = LinearPolynomial(np.array([0.4, -0.1, 0.2]), 0.3)
    lm = LinearPolynomial(np.array([9.0, 9.0, 9.0]), -4.0)
    bump = bump_function(np.array([0.0, 0.0, 0.5]), 0.3)
    assert abs(piecewise_laplacian_residual(lp, lm, 2.0, bump)) <= 1.0e-13


def flat_problem():
    return LayerProblem(
        ctx=BallContext(3, 1.0),
        interface=make_interface("flat", n=3, chart_radius=1.0),
        density=make_density("constant", c=1.0, n=3),
    )


def test_iterate_flat_fixture():
    p = flat_problem()
    states = iterate(p, rho=0.5, steps=2, n_polar=16, n_azimuth=32, sup_samples=50)
    assert len(states) == 3
    assert [s.k for s in states] == [0, 1, 2]

    s0 = states[0]
    assert_allclose(s0.l_plus.a, [0.0, 0.0, 0.5], atol=1.0e-15)
    assert_allclose(s0.l_minus.a, [0.0, 0.0, -0.5], atol=1.0e-15)
    assert s0.l_plus.b == 0.0 and s0.increment == 0.0
    assert s0.d_k == 1.0

    for s in states:
        # construction-level invariants: slope jump g(0) e_n, shared b
        assert_allclose(s.l_plus.a - s.l_minus.a, [0.0, 0.0, 1.0], atol=1.0e-14)
        assert s.l_plus.b == s.l_minus.b
        assert s.converged

    # after one correction b picks up u(0) = -1/4; symmetry keeps the
    # tangential slopes at 0
    s1 = states[1]
    assert_allclose(s1.l_plus.b, -0.25, atol=5.0e-3)
    assert np.max(np.abs(s1.l_plus.a[:2])) <= 1.0e-2
    assert_allclose(s1.l_plus.a[2], 0.5, atol=1.0e-2)
    assert s1.increment > 0.2  # dominated by |v0| ~ 1/4

    # zero-modulus data: d_k is the geometric ladder rho^{k/2}
    assert_allclose([s.d_k for s in states], [1.0, 0.5**0.5, 0.5], rtol=1.0e-14)

    # the affine models improve where it counts: sup error shrinks
    assert states[2].sup_error_plus < states[0].sup_error_plus
    assert states[2].sup_error_minus < states[0].sup_error_minus
    assert states[2].increment < states[1].increment


def test_iterate_validation():
    p = flat_problem()
    with pytest.raises(ValueError):
        iterate(p, rho=0.75)
    with pytest.raises(ValueError):
        iterate(p, steps=0)
    from layerpot.geometry import SphereInterface

    sphere = LayerProblem(
        ctx=BallContext(3, 1.0),
        interface=SphereInterface(radius=0.5),
        density=make_density("constant", c=1.0, n=3),
    )
    with pytest.raises(ValueError):
        iterate(sphere)


def test_iterate_aborts_on_quadrature_failure():
    p = LayerProblem(
        ctx=BallContext(3, 0.25),
        interface=make_interface("holder", n=3, alpha=0.5, coeff=1.0),
        density=make_density("constant", c=1.0, n=3),
        spec=QuadratureSpec(target_tol=1.0e-15, max_depth=2, base_order=4),
    )
    states = iterate(p, steps=3, n_polar=4, n_azimuth=8, sup_samples=8)
    assert len(states) < 4
    assert not states[-1].converged
