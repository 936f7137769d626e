"""Moduli of continuity and numerical probes of the Dini integral condition.

A modulus here is a nondecreasing, nonnegative function on (0, 1].  The
quantity that matters downstream is the Dini integral

    int_0^1 omega(r)/r dr

and its log-weighted variant int_0^1 |log r| omega(r)/r dr.  Both are
improper at r = 0 and the interesting behaviour sits far below the range
where r is representable in double precision, so all integration is done
in the substituted variable z = -log r, where the integrals become

    int_0^Z omega(exp(-z)) dz     and     int_0^Z z * omega(exp(-z)) dz

with Z -> inf.  Every family evaluates omega(exp(-z)) directly in z, which
stays well-conditioned for z up to ~1e12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "Modulus",
    "DiniClassification",
    "SeriesCheck",
    "evaluate",
    "classify_dini",
    "series_check",
    "dini_integral",
    "improper_dini_integral",
]

# Default delta ladder for partial Dini integrals: one decade per rung.
DEFAULT_DELTA_LADDER = tuple(10.0 ** (-k) for k in range(2, 13))

# Probes give up beyond this value of z = -log r.  Increments that have
# neither stabilised nor stalled by then yield verdict "inconclusive".
_Z_CAP = 1.0e12

# Tail increments whose octave-to-octave decay ratio stays above this are
# treated as non-summable (a genuinely convergent integral decays strictly;
# constant or growing increments mean divergence).
_STALL_RATIO = 0.999
_STALL_OCTAVES = 4


class Modulus:
    """Nondecreasing modulus of continuity on (0, 1].

    Construct through the classmethods ``power``, ``inverse_log``,
    ``log_power``, ``from_table``, ``max_of`` or ``zero``.  Instances are
    immutable and callable; ``m(r)`` accepts scalars or arrays with entries
    in (0, 1].
    """

    _kinds = ("power", "inverse_log", "log_power", "table", "max_of")

    def __init__(self, kind, alpha=None, beta=None, knots=None, parts=None):
        if kind not in self._kinds:
            raise ValueError(f"unknown modulus family {kind!r}")
        self.kind = kind
        self.alpha = alpha
        self.beta = beta
        self.knots = knots
        self.parts = parts
        if kind == "table":
            self._check_table()

    # -- constructors -------------------------------------------------

    @classmethod
    def power(cls, alpha: float) -> "Modulus":
        """omega(r) = r**alpha with alpha in (0, 1]."""
        if not 0.0 < alpha <= 1.0:
            raise ValueError("power modulus needs alpha in (0, 1]")
        return cls("power", alpha=float(alpha))

    @classmethod
    def inverse_log(cls) -> "Modulus":
        """omega(r) = 1/|log r| for r <= 1/e, capped at 1 above."""
        return cls("inverse_log")

    @classmethod
    def log_power(cls, beta: float) -> "Modulus":
        """omega(r) = |log r|**(-beta) for r <= 1/e, capped at 1 above."""
        if beta <= 0.0:
            raise ValueError("log_power modulus needs beta > 0")
        return cls("log_power", beta=float(beta))

    @classmethod
    def from_table(
        cls,
        radii: Sequence[float],
        values: Sequence[float],
        value_at_zero: float = 0.0,
    ) -> "Modulus":
        """Piecewise-linear modulus through (radii, values).

        Below the first knot the graph continues linearly down to
        (0, value_at_zero); above the last knot it is constant.
        """
        r = np.asarray(radii, dtype=float)
        w = np.asarray(values, dtype=float)
        return cls("table", knots=(r, w, float(value_at_zero)))

    @classmethod
    def max_of(cls, first: "Modulus", second: "Modulus") -> "Modulus":
        """Pointwise maximum of two moduli."""
        return cls("max_of", parts=(first, second))

    @classmethod
    def zero(cls) -> "Modulus":
        """The trivial modulus omega = 0 (for exact data)."""
        return cls("table", knots=(np.array([1.0]), np.array([0.0]), 0.0))

    # -- evaluation ----------------------------------------------------

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0) or np.any(r > 1.0):
            raise ValueError("modulus argument must lie in (0, 1]")
        out = self.eval_log(-np.log(r))
        return float(out) if out.ndim == 0 else out

    def eval_log(self, z):
        """Evaluate omega(exp(-z)) for z >= 0, stable for very large z."""
        z = np.asarray(z, dtype=float)
        if np.any(z < -1e-12):
            raise ValueError("eval_log needs z >= 0")
        z = np.maximum(z, 0.0)
        if self.kind == "power":
            return np.exp(-self.alpha * z)
        if self.kind == "inverse_log":
            return 1.0 / np.maximum(z, 1.0)
        if self.kind == "log_power":
            return np.maximum(z, 1.0) ** (-self.beta)
        if self.kind == "max_of":
            a, b = self.parts
            return np.maximum(a.eval_log(z), b.eval_log(z))
        # table: linear in r between knots, linear to (0, w0) below the
        # first knot (expressed in z to survive r underflow), constant above.
        radii, vals, w0 = self.knots
        z1 = -math.log(radii[0])
        r_safe = np.exp(-np.minimum(z, z1))
        interp = np.interp(r_safe, radii, vals, left=vals[0], right=vals[-1])
        below = w0 + (vals[0] - w0) * np.exp(z1 - z)
        return np.where(z > z1, below, interp)

    def _check_table(self):
        radii, vals, w0 = self.knots
        if radii.ndim != 1 or radii.shape != vals.shape or radii.size == 0:
            raise ValueError("table modulus needs matching 1-d radii and values")
        if np.any(radii <= 0.0) or np.any(radii > 1.0):
            raise ValueError("table radii must lie in (0, 1]")
        if np.any(np.diff(radii) <= 0.0):
            raise ValueError("table radii must be strictly increasing")
        if np.any(np.diff(vals) < 0.0) or np.any(vals < 0.0):
            raise ValueError("table values must be nonnegative and nondecreasing")
        if not 0.0 <= w0 <= vals[0]:
            raise ValueError("value_at_zero must lie in [0, values[0]]")

    def __repr__(self):
        if self.kind == "power":
            return f"Modulus.power({self.alpha})"
        if self.kind == "log_power":
            return f"Modulus.log_power({self.beta})"
        if self.kind == "max_of":
            return f"Modulus.max_of({self.parts[0]!r}, {self.parts[1]!r})"
        if self.kind == "table":
            return f"Modulus.from_table(<{self.knots[0].size} knots>)"
        return "Modulus.inverse_log()"


def evaluate(m: Modulus, r) -> float:
    """Evaluate the modulus; scalar or array r in (0, 1]."""
    return m(r)


# -- 1-d adaptive quadrature in z --------------------------------------


@lru_cache(maxsize=None)
def _gauss_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # rescaled to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def _line_integral(f, a: float, b: float, tol: float, max_depth: int = 52):
    """Adaptive Gauss quadrature of a vectorized scalar f over [a, b].

    Error estimated per panel by comparing order 8 against order 16;
    panels failing a proportional share of tol are bisected.  Returns
    (value, est_error, converged).
    """
    if b <= a:
        return 0.0, 0.0, True
    x_lo, w_lo = _gauss_rule(8)
    x_hi, w_hi = _gauss_rule(16)
    lefts = np.array([a])
    rights = np.array([b])
    depths = np.array([0])
    vals: list[float] = []
    errs: list[float] = []
    converged = True
    while lefts.size:
        h = rights - lefts
        n_lo = lefts[:, None] + h[:, None] * x_lo[None, :]
        n_hi = lefts[:, None] + h[:, None] * x_hi[None, :]
        f_lo = f(n_lo.ravel()).reshape(n_lo.shape)
        f_hi = f(n_hi.ravel()).reshape(n_hi.shape)
        i_lo = h * (f_lo @ w_lo)
        i_hi = h * (f_hi @ w_hi)
        err = np.abs(i_hi - i_lo)
        share = tol * h / (b - a)
        done = (err <= share) | (depths >= max_depth)
        if np.any((depths >= max_depth) & (err > share)):
            converged = False
        for k in np.nonzero(done)[0]:
            vals.append(float(i_hi[k]))
            errs.append(float(err[k]))
        keep = ~done
        mid = 0.5 * (lefts[keep] + rights[keep])
        lefts = np.concatenate([lefts[keep], mid])
        rights = np.concatenate([mid, rights[keep]])
        depths = np.concatenate([depths[keep] + 1, depths[keep] + 1])
    return math.fsum(vals), math.fsum(errs), converged


def dini_integral(m: Modulus, lo: float, hi: float, tol: float = 1.0e-9) -> float:
    """Proper integral int_lo^hi omega(r)/r dr for 0 < lo < hi <= 1."""
    if not 0.0 < lo < hi <= 1.0:
        raise ValueError("need 0 < lo < hi <= 1")
    value, _, _ = _line_integral(m.eval_log, -math.log(hi), -math.log(lo), tol)
    return value


@dataclass(frozen=True)
class _ProbeResult:
    status: str  # "converged" | "divergent" | "inconclusive"
    value: float | None
    increments: tuple[float, ...]


def _tail_probe(m: Modulus, weight: int, z_start: float, tol: float) -> _ProbeResult:
    """Probe int_z_start^inf z**weight * omega(exp(-z)) dz by octaves.

    Consecutive increments over [Z, 2Z] decay strictly for a convergent
    integral; increments that stall near a constant (ratio >= _STALL_RATIO
    over _STALL_OCTAVES octaves while staying above tol) signal divergence.
    """

    def f(z):
        fz = m.eval_log(z)
        return fz if weight == 0 else z * fz

    z = max(z_start, 1.0)
    quad_tol = tol * 1.0e-3
    increments: list[float] = []
    total = 0.0
    stall = 0
    while z < _Z_CAP:
        g, _, _ = _line_integral(f, z, 2.0 * z, quad_tol)
        increments.append(g)
        total += g
        if len(increments) >= 2 and increments[-2] > 0.0:
            ratio = g / increments[-2]
        else:
            ratio = 0.0
        if g >= tol and ratio >= _STALL_RATIO:
            stall += 1
            if stall >= _STALL_OCTAVES:
                return _ProbeResult("divergent", None, tuple(increments))
        else:
            stall = 0
        # Geometric extrapolation of the remaining tail once decay sets in.
        if ratio < 0.9 and g <= 0.01 * tol:
            tail = g * ratio / (1.0 - ratio) if ratio > 0.0 else 0.0
            if tail <= 0.2 * tol:
                return _ProbeResult("converged", total + tail, tuple(increments))
        z *= 2.0
    return _ProbeResult("inconclusive", None, tuple(increments))


@dataclass(frozen=True)
class DiniClassification:
    """Outcome of the numerical Dini probe.

    verdict is one of "dini", "log_dini_only", "divergent", "inconclusive".
    "log_dini_only" marks the rare case where the direct probe was
    inconclusive but the stronger log-weighted integral converged, which
    certifies the plain condition indirectly.  partial_integrals holds
    (delta, int_delta^1 omega(r)/r dr) along the ladder; log_partial the
    log-weighted analogue.  dini_integral / log_dini_integral carry the
    extrapolated totals when the corresponding probe converged.
    """

    verdict: str
    partial_integrals: tuple[tuple[float, float], ...]
    log_partial_integrals: tuple[tuple[float, float], ...]
    series_sums: tuple[tuple[float, int, float], ...]
    dini_integral: float | None
    log_dini: bool | None
    log_dini_integral: float | None


def improper_dini_integral(m: Modulus, hi: float = 1.0, tol: float = 1.0e-6):
    """Improper integral int_0^hi omega(r)/r dr.

    Returns (value, converged).  value is None when the probe diverges or
    stays inconclusive.
    """
    if not 0.0 < hi <= 1.0:
        raise ValueError("need hi in (0, 1]")
    z0 = -math.log(hi) if hi < 1.0 else 0.0
    z1 = max(2.0 * z0, 32.0)
    head, _, _ = _line_integral(m.eval_log, z0, z1, tol * 1.0e-3)
    probe = _tail_probe(m, 0, z1, tol)
    if probe.status == "converged":
        return head + probe.value, True
    return None, False


def classify_dini(
    m: Modulus,
    delta_ladder: Sequence[float] | None = None,
    tol: float = 1.0e-6,
) -> DiniClassification:
    """Classify the Dini condition for a modulus.

    Parameters
    ----------
    m : Modulus
    delta_ladder : sequence of float, optional
        Strictly decreasing truncation points in (0, 1); partial integrals
        int_delta^1 omega(r)/r dr are reported for each.  Defaults to one
        decade per rung from 1e-2 down to 1e-12.
    tol : float
        Stabilisation tolerance for the tail probes.

    The verdict comes from probing the integral in z = -log r well past
    the ladder (up to z ~ 1e12), so slowly convergent families such as
    omega = |log r|**-2 are still resolved to tolerance.
    """
    ladder = DEFAULT_DELTA_LADDER if delta_ladder is None else tuple(delta_ladder)
    if not ladder or any(not 0.0 < d < 1.0 for d in ladder):
        raise ValueError("delta ladder entries must lie in (0, 1)")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("delta ladder must be strictly decreasing")

    quad_tol = tol * 1.0e-3
    partials = []
    log_partials = []
    cum = 0.0
    log_cum = 0.0
    z_prev = 0.0
    for delta in ladder:
        z_next = -math.log(delta)
        seg, _, _ = _line_integral(m.eval_log, z_prev, z_next, quad_tol)
        log_seg, _, _ = _line_integral(
            lambda z: z * m.eval_log(z), z_prev, z_next, quad_tol
        )
        cum += seg
        log_cum += log_seg
        partials.append((delta, cum))
        log_partials.append((delta, log_cum))
        z_prev = z_next

    probe = _tail_probe(m, 0, z_prev, tol)
    log_probe = _tail_probe(m, 1, z_prev, tol)

    if probe.status == "converged":
        verdict = "dini"
        total = cum + probe.value
    elif probe.status == "divergent":
        verdict = "divergent"
        total = None
    elif log_probe.status == "converged":
        verdict = "log_dini_only"
        total = None
    else:
        verdict = "inconclusive"
        total = None

    if log_probe.status == "converged":
        log_flag, log_total = True, log_cum + log_probe.value
    elif log_probe.status == "divergent":
        log_flag, log_total = False, None
    else:
        log_flag, log_total = None, None

    series = []
    for rho in (0.3, 0.5, 0.7):
        K = 64
        js = np.arange(0, K + 1, dtype=float)
        terms = m.eval_log(js * (-math.log(rho)))
        series.append((rho, K, math.fsum(terms.tolist())))

    return DiniClassification(
        verdict=verdict,
        partial_integrals=tuple(partials),
        log_partial_integrals=tuple(log_partials),
        series_sums=tuple(series),
        dini_integral=total,
        log_dini=log_flag,
        log_dini_integral=log_total,
    )


@dataclass(frozen=True)
class SeriesCheck:
    """Two-sided comparison of the scale series with the Dini integral."""

    series: float
    integral: float
    lower_ok: bool
    upper_ok: bool


def series_check(m: Modulus, rho: float, K: int, tol: float = 1.0e-9) -> SeriesCheck:
    """Compare sum_j omega(rho**j) against int omega(r)/r dr at truncation K.

    Checks the two-sided bounds

        (1 - rho) * sum_{j=1}^{K} omega(rho**j)
            <= int_{rho**(K+1)}^{1} omega(r)/r dr
            <= log(1/rho) * sum_{j=0}^{K} omega(rho**j)

    which hold exactly; tol only absorbs quadrature error.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("need rho in (0, 1)")
    if K < 1:
        raise ValueError("need K >= 1")
    step = -math.log(rho)
    js = np.arange(0, K + 1, dtype=float)
    terms = m.eval_log(js * step)
    series = math.fsum(terms.tolist())
    series_from_1 = series - float(terms[0])
    integral, _, _ = _line_integral(m.eval_log, 0.0, (K + 1) * step, tol * 1e-2)
    lower_ok = (1.0 - rho) * series_from_1 <= integral + tol
    upper_ok = integral <= step * series + tol
    return SeriesCheck(series=series, integral=integral, lower_ok=lower_ok, upper_ok=upper_ok)
