import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from layerpot.experiments import (
    blowup_density_scan,
    blowup_graph_scan,
    key_lemma_ratio,
    r_epsilon,
)
from layerpot.geometry import make_density, make_interface
from layerpot.quadrature import QuadratureSpec


def test_r_epsilon_inverts_cusp_profile():
    for eps in (1.0e-3, 1.0e-2, 0.1):
        r = r_epsilon(eps)
        assert_allclose(r / abs(math.log(r)), eps, rtol=1.0e-8)
    assert r_epsilon(1.0e-3) < r_epsilon(1.0e-2)
    # the height eps sits well below the radius it is reached at
    assert r_epsilon(1.0e-3) > 1.0e-3


def test_r_epsilon_validation():
    with pytest.raises(ValueError):
        r_epsilon(0.0)
    with pytest.raises(ValueError):
        r_epsilon(0.2)  # above the profile top at the chart edge


def test_graph_scan_derivative_grows():
    scan = blowup_graph_scan(j_range=range(4, 7))
    assert len(scan.epsilons) == 3
    assert all(scan.converged)
    # the surrounding cusp walls drag the normal derivative down the
    # ladder (the flat value would approach +1/2 instead)
    vals = scan.derivative_values
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.25
    assert scan.fit.slope > 0.0
    # recorded abscissas invert the profile
    for eps, r in zip(scan.epsilons, scan.r_epsilons):
        assert_allclose(r / abs(math.log(r)), eps, rtol=1.0e-8)


def test_graph_scan_control_stays_bounded():
    scan = blowup_graph_scan(j_range=range(4, 7), control=True)
    assert all(scan.converged)
    # flat control: the ladder climbs monotonically toward the one-sided
    # derivative 1/2 and stays put, instead of drifting away from it
    vals = scan.derivative_values
    assert all(0.45 <= v <= 0.5 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))
    cusp = blowup_graph_scan(j_range=range(4, 7))
    drift_ctrl = abs(vals[-1] - vals[0])
    drift_cusp = abs(cusp.derivative_values[-1] - cusp.derivative_values[0])
    assert drift_cusp > 3.0 * drift_ctrl


def test_density_scan_derivative_grows():
    scan = blowup_density_scan(j_range=range(4, 7))
    assert all(scan.converged)
    assert scan.r_epsilons is None
    mags = [-v for v in scan.derivative_values]
    assert all(m > 0.0 for m in mags)
    assert all(b > a for a, b in zip(mags, mags[1:]))
    assert scan.fit.slope > 0.0


def test_density_scan_control_vanishes():
    # constant density is even in y_1, so the tangential derivative
    # vanishes on the axis
    scan = blowup_density_scan(j_range=range(4, 6), control=True)
    assert np.max(np.abs(scan.derivative_values)) <= 1.0e-6


def test_scan_validation():
    with pytest.raises(ValueError):
        blowup_graph_scan(n=2)
    with pytest.raises(ValueError):
        blowup_graph_scan(j_range=[])
    with pytest.raises(ValueError):
        blowup_graph_scan(j_range=[5, 4])
    with pytest.raises(ValueError):
        blowup_graph_scan(j_range=[1, 2])  # 2^-1 outside the cusp chart
    with pytest.raises(ValueError):
        blowup_density_scan(j_range=[0, 1])


def kl_spec():
    return QuadratureSpec(target_tol=1.0e-5, max_depth=16)


def test_key_lemma_flat_fixture_is_exact_zero():
    iface = make_interface("flat", n=3, chart_radius=1.0)
    dens = make_density("constant", c=1.0, n=3)
    scan = key_lemma_ratio(iface, dens, radii=(0.5, 0.25), sample_count=4, spec=kl_spec())
    assert scan.ratios == (0.0, 0.0)
    assert max(scan.sup_values) <= 1.0e-12
    assert all(scan.converged)


def test_key_lemma_curved_fixture_plumbing():
    iface = make_interface("holder", n=3, alpha=0.5, coeff=1.0)
    dens = make_density("constant", c=1.0, n=3)
    scan = key_lemma_ratio(iface, dens, radii=(0.5, 0.25), sample_count=8, spec=kl_spec())
    assert scan.rho == 0.5
    assert len(scan.ratios) == 2
    assert all(np.isfinite(scan.ratios))
    assert all(r > 0.0 for r in scan.ratios)
    assert all(scan.converged)
    # omega here is the interface modulus: power(1/2)
    assert_allclose(scan.omega_values, [0.5**0.5, 0.25**0.5], rtol=1.0e-12)
    assert_allclose(
        scan.ratios,
        [s / (r * w) for s, r, w in zip(scan.sup_values, scan.radii, scan.omega_values)],
        rtol=1.0e-15,
    )


def test_key_lemma_validation():
    iface = make_interface("holder", n=3, alpha=0.5, coeff=1.0)
    dens = make_density("constant", c=1.0, n=3)
    with pytest.raises(ValueError):
        key_lemma_ratio(iface, dens, rho=0.75)
    with pytest.raises(ValueError):
        key_lemma_ratio(iface, dens, radii=())
    with pytest.raises(ValueError):
        key_lemma_ratio(iface, dens, radii=(2.0,))
    with pytest.raises(ValueError):
        key_lemma_ratio(make_interface("flat", n=2, chart_radius=1.0), dens)
