import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from layerpot.modulus import (
    Modulus,
    classify_dini,
    dini_integral,
    evaluate,
    improper_dini_integral,
    series_check,
)


def test_evaluate_families():
    assert_allclose(evaluate(Modulus.power(0.5), 0.25), 0.5)
    assert_allclose(evaluate(Modulus.inverse_log(), math.exp(-2.0)), 0.5)
    assert_allclose(
        evaluate(Modulus.max_of(Modulus.power(0.5), Modulus.inverse_log()), math.exp(-2.0)),
        0.5,
    )
    assert_allclose(evaluate(Modulus.log_power(2.0), math.exp(-3.0)), 1.0 / 9.0)
    assert evaluate(Modulus.zero(), 0.3) == 0.0


def test_evaluate_domain_errors():
    m = Modulus.power(0.5)
    with pytest.raises(ValueError):
        evaluate(m, 0.0)
    with pytest.raises(ValueError):
        evaluate(m, 1.5)
    with pytest.raises(ValueError):
        evaluate(m, -0.1)


def test_log_caps_above_one_over_e():
    # both log families freeze at their 1/e value closer to 1 so they
    # stay nondecreasing
    m = Modulus.inverse_log()
    assert_allclose(evaluate(m, 0.9), 1.0)
    assert_allclose(evaluate(m, 1.0 / math.e), 1.0)
    m2 = Modulus.log_power(2.0)
    assert_allclose(evaluate(m2, 0.5), 1.0)


def test_monotone_on_random_pairs():
    rng = np.random.default_rng(0)
    families = [
        Modulus.power(0.25),
        Modulus.power(1.0),
        Modulus.inverse_log(),
        Modulus.log_power(2.0),
        Modulus.max_of(Modulus.power(0.5), Modulus.inverse_log()),
        Modulus.from_table([0.1, 0.5, 1.0], [0.2, 0.6, 1.0]),
        Modulus.zero(),
    ]
    pairs = rng.uniform(1.0e-8, 1.0, size=(1000, 2))
    for m in families:
        for r1, r2 in pairs:
            lo, hi = min(r1, r2), max(r1, r2)
            assert evaluate(m, lo) <= evaluate(m, hi) + 1.0e-15


def test_table_interpolation():
    m = Modulus.from_table([0.2, 1.0], [0.4, 1.0], value_at_zero=0.0)
    assert_allclose(evaluate(m, 0.2), 0.4)
    assert_allclose(evaluate(m, 0.6), 0.7)  # midway between knots
    assert_allclose(evaluate(m, 0.1), 0.2)  # linear down to (0, 0)
    with pytest.raises(ValueError):
        Modulus.from_table([0.5, 0.2], [0.1, 0.2])  # radii not increasing
    with pytest.raises(ValueError):
        Modulus.from_table([0.2, 0.5], [0.5, 0.2])  # values decreasing


def test_dini_integral_power_closed_form():
    # int_d^1 r^{alpha-1} dr = (1 - d^alpha)/alpha
    m = Modulus.power(0.5)
    val = dini_integral(m, 1.0e-6, 1.0)
    assert_allclose(val, (1.0 - 1.0e-3) / 0.5, rtol=1.0e-9)


def test_improper_integrals_match_antiderivatives():
    val, ok = improper_dini_integral(Modulus.power(0.5), hi=1.0)
    assert ok
    assert_allclose(val, 2.0, atol=1.0e-6)
    # substitution z = |log r| turns the log-power integral on (0, 1/e]
    # into int_1^inf z^-2 dz = 1
    val2, ok2 = improper_dini_integral(Modulus.log_power(2.0), hi=1.0 / math.e)
    assert ok2
    assert_allclose(val2, 1.0, atol=1.0e-6)
    val3, ok3 = improper_dini_integral(Modulus.inverse_log(), hi=1.0)
    assert not ok3
    assert val3 is None


def test_classify_power_and_log_power_dini():
    for alpha in (0.25, 0.5, 1.0):
        cls = classify_dini(Modulus.power(alpha))
        assert cls.verdict == "dini"
        assert_allclose(cls.dini_integral, 1.0 / alpha, rtol=1.0e-5)
    cls = classify_dini(Modulus.log_power(2.0))
    assert cls.verdict == "dini"


def test_classify_inverse_log_divergent():
    cls = classify_dini(Modulus.inverse_log())
    assert cls.verdict == "divergent"
    # partial integrals grow without stabilizing as delta decreases
    vals = [v for _, v in cls.partial_integrals]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_classify_partial_integrals_monotone():
    cls = classify_dini(Modulus.power(0.5))
    vals = [v for _, v in cls.partial_integrals]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_classify_rejects_bad_ladder():
    with pytest.raises(ValueError):
        classify_dini(Modulus.power(0.5), delta_ladder=[0.1, 0.5])


def test_log_dini_flag():
    # power moduli pass the log-weighted test as well
    cls = classify_dini(Modulus.power(0.5))
    assert cls.log_dini is True
    # oracle: int_0^1 |log r| r^{-1/2} dr = 4 via quad
    oracle, _ = quad(lambda r: -math.log(r) * r**-0.5, 0.0, 1.0)
    assert_allclose(cls.log_dini_integral, oracle, rtol=1.0e-4)
    # omega = 1/log^2 is Dini but fails the log-weighted test
    cls2 = classify_dini(Modulus.log_power(2.0))
    assert cls2.verdict == "dini"
    assert cls2.log_dini is False


def test_series_check_power_half():
    chk = series_check(Modulus.power(0.5), 0.25, 40)
    # sum_{j>=0} (1/2)^j = 2
    assert_allclose(chk.series, 2.0, atol=1.0e-11)
    assert chk.lower_ok and chk.upper_ok


def test_series_check_power_one_exact():
    chk = series_check(Modulus.power(1.0), 0.5, 30)
    assert_allclose(chk.series, 2.0 - 2.0**-30, rtol=1.0e-13)
    assert_allclose(chk.integral, 1.0 - 2.0**-31, rtol=1.0e-9)
    assert chk.lower_ok and chk.upper_ok


def test_series_check_harmonic_growth():
    # omega(2^-j) = 1/(j log 2): partial sums keep growing like log K
    s10 = series_check(Modulus.inverse_log(), 0.5, 10).series
    s20 = series_check(Modulus.inverse_log(), 0.5, 20).series
    harmonic = lambda k: sum(1.0 / j for j in range(1, k + 1))
    assert s20 - s10 > 0.5 * (harmonic(20) - harmonic(10)) / math.log(2.0)


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.7])
@pytest.mark.parametrize(
    "m",
    [
        Modulus.power(0.25),
        Modulus.power(0.5),
        Modulus.power(1.0),
        Modulus.log_power(2.0),
        Modulus.max_of(Modulus.power(0.5), Modulus.log_power(2.0)),
        Modulus.from_table([0.25, 1.0], [0.5, 1.0]),
    ],
)
def test_series_integral_sandwich(m, rho):
    chk = series_check(m, rho, 25)
    first = evaluate(m, 1.0)
    # (1-rho) sum_{j>=1} <= integral <= log(1/rho) sum_{j>=0}
    assert (1.0 - rho) * (chk.series - first) <= chk.integral + 1.0e-9
    assert chk.integral <= math.log(1.0 / rho) * chk.series + 1.0e-9
    assert chk.lower_ok and chk.upper_ok


def test_series_check_rejects_bad_rho():
    with pytest.raises(ValueError):
        series_check(Modulus.power(0.5), 1.0, 5)
