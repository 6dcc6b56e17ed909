"""Exact (quadrature-limited) probabilities p_{n,m} of seeing exactly m real
eigenvalues, via four independent routes:

* closed form for p_{n,n};
* the Laguerre-erfc integral for the single-pair ratio p_{n,n-2}/p_{n,n};
* the prefactored (0,1) integral for the same ratio;
* power traces of the Laguerre-erfc moment matrix fed into Z_{(1^l)} for
  general l.

Probabilities are carried as natural logs; exponentiation is left to the
presentation layer (p_{n,n} underflows doubles near n = 65 at tau = 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import mpmath as mp
import numpy as np
from scipy import special as _sp

from . import combinatorics
from .quadrature import gauss_legendre, integrate_jacobi_endpoints, integrate_semi_infinite_gaussian
from .specfun import DomainError, SignedLog, laguerre_log_coeffs

__all__ = [
    "Strong",
    "Weak",
    "EnsembleParams",
    "LogProb",
    "RhoTraces",
    "MeanCount",
    "log_p_nn",
    "ratio_l1_laguerre",
    "ratio_l1_prefactored",
    "rho_traces",
    "log_p_nm",
    "mean_count_exact",
]


@dataclass(frozen=True)
class Strong:
    """Fixed asymmetry tau in [0, 1)."""

    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.0:
            raise DomainError(f"strong regime needs tau in [0,1), got {self.tau}")


@dataclass(frozen=True)
class Weak:
    """tau = 1 - alpha^2/n with alpha >= 0 fixed."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise DomainError(f"weak regime needs alpha >= 0, got {self.alpha}")


@dataclass(frozen=True)
class EnsembleParams:
    n: int
    regime: Union[Strong, Weak]

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise DomainError(f"n must be a positive even integer, got {self.n}")
        if isinstance(self.regime, Weak) and self.regime.alpha**2 > self.n:
            raise DomainError("weak regime needs alpha^2 <= n so tau stays in [0,1]")

    @property
    def tau(self) -> float:
        """Effective asymmetry parameter."""
        if isinstance(self.regime, Strong):
            return self.regime.tau
        return 1.0 - self.regime.alpha**2 / self.n

    @classmethod
    def strong(cls, n: int, tau: float) -> "EnsembleParams":
        return cls(n, Strong(tau))

    @classmethod
    def weak(cls, n: int, alpha: float) -> "EnsembleParams":
        return cls(n, Weak(alpha))


@dataclass(frozen=True)
class LogProb:
    """log p_{n,m} plus numeric-quality flags picked up along the route."""

    log: float
    flags: tuple = ()

    @property
    def probability(self) -> float:
        return math.exp(self.log)


@dataclass(frozen=True)
class RhoTraces:
    """Tr rho, ..., Tr rho^l of the half-size Laguerre-erfc moment matrix."""

    l: int
    traces: tuple  # SignedLog, length l
    entry_quad_err: float
    traces_mp: Optional[tuple] = None  # mpf carriers for the zonal sum
    dps: int = 0


@dataclass(frozen=True)
class MeanCount:
    mean: float
    variance: float
    probabilities: tuple  # p_{n,n-2l} for l = 0..n/2


def log_p_nn(params: EnsembleParams) -> LogProb:
    """Closed form: log p_{n,n} = -(1/4)log(2/(1+tau)) n^2 + (1/4)log(2/(1+tau)) n."""
    n = params.n
    c = 0.25 * math.log(2.0 / (1.0 + params.tau))
    return LogProb(-c * n * n + c * n)


def _c_erfc(tau: float) -> float:
    """Argument scale of the erfc factor, c = sqrt(2/(1-tau))."""
    return math.sqrt(2.0 / (1.0 - tau))


def ratio_l1_laguerre(params: EnsembleParams, order: int = 0) -> SignedLog:
    """p_{n,n-2}/p_{n,n} = int_0^inf 2y e^{y^2} erfc(cy) L_{n-2}^2(-2y^2) dy.

    Assembled as 2y erfcx(cy) L_{n-2}^2(-2y^2) e^{-(c^2-1)y^2}; the Laguerre
    value at negative argument is an all-positive sum, done in log space.
    """
    n, tau = params.n, params.tau
    if tau >= 1.0:
        raise DomainError("ratio requires tau < 1")
    c = _c_erfc(tau)
    decay = c * c - 1.0  # (1+tau)/(1-tau)
    clogs, _ = laguerre_log_coeffs(n - 2, 2)  # all coefficients positive here
    i = np.arange(n - 1, dtype=float)

    def h_log(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            logu = np.log(2.0 * y * y)
            lag = _sp.logsumexp(clogs[None, :] + i[None, :] * logu[:, None], axis=1)
            la = np.log(2.0 * y) + np.log(_sp.erfcx(c * y)) + lag - decay * y * y
        return la, np.ones_like(y)

    if order == 0:
        order = max(80, n)
    res = integrate_semi_infinite_gaussian(h_log, _effective_decay(2 * n - 3, decay), order)
    return res.value


def _effective_decay(poly_degree: int, decay: float) -> float:
    """Decay constant to certify for y^degree e^{-decay y^2} integrands: the
    truncation radius must cover the polynomial peak plus a Gaussian tail."""
    peak = math.sqrt(max(poly_degree, 1) / (2.0 * decay))
    radius = peak + math.sqrt(80.0 / decay)
    return 80.0 / radius**2


def ratio_l1_prefactored(params: EnsembleParams, order: int = 0) -> SignedLog:
    """Same ratio from the prefactored integral over s in (0, 1).

    The bracket [(1+u)^n - n u - 1], u = 2(1-tau)(1-s)/(1+tau), vanishes to
    second order at s = 1 and is evaluated in compensated form there.
    """
    n, tau = params.n, params.tau
    if tau >= 1.0:
        raise DomainError("ratio requires tau < 1")
    ctil = 2.0 * (1.0 - tau) / (1.0 + tau)

    def g_log(s):
        s = np.asarray(s, dtype=float)
        u = ctil * (1.0 - s)
        v = n * np.log1p(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            logbr = v + np.log1p(-(1.0 + n * u) * np.exp(-v))
        small = v < 1e-4
        if np.any(small):
            vs = v[small]
            us = u[small]
            # bracket = (expm1(v) - v) + n(log1p(u) - u) with both pieces O(u^2)
            logbr[small] = np.log((np.expm1(vs) - vs) + n * (np.log1p(us) - us))
        # divide out s^{-1/2}(1-s)^{+1/2}: g = bracket/(1-s)^2 / (1-(1-tau)s/2)
        la = logbr - 2.0 * np.log1p(-s) - np.log(1.0 - (1.0 - tau) * s / 2.0)
        return la, np.ones_like(s)

    if order == 0:
        order = max(120, n)
    res = integrate_jacobi_endpoints(g_log, -0.5, 0.5, order)
    pref = 1.5 * math.log1p(tau) - math.log(4.0 * math.sqrt(2.0) * math.pi * (1.0 - tau))
    return SignedLog.from_log(pref, 1) * res.value


# ---------------------------------------------------------------------------
# rho-matrix route (general l)


@lru_cache(maxsize=None)
def _laguerre_frac_coeffs(k: int, a: int):
    """Exact monomial coefficients of L_k^a as Fractions (k >= -1)."""
    if k == -1:
        return ()
    out = []
    for i in range(k + 1):
        top = k + a
        if top >= 0:
            b = math.comb(top, k - i) if k - i <= top else 0
        else:
            b = (-1) ** (k - i) * math.comb((k - i) - top - 1, k - i)
        out.append(Fraction((-1) ** i * b, math.factorial(i)))
    return tuple(out)


@lru_cache(maxsize=None)
def _entry_poly(j: int, k: int):
    """Coefficients (by odd power of y) of the rho-entry integrand's
    polynomial part: y^{2(k-j)-1} [(2j-1) L_{2j-1}^{2(k-j)-1}(-2y^2)
    + 2y^2 L_{2j-3}^{2(k-j)+1}(-2y^2)].  All coefficients are nonnegative;
    negative powers of y cancel structurally."""
    d = k - j
    acc: dict = {}
    for i, c in enumerate(_laguerre_frac_coeffs(2 * j - 1, 2 * d - 1)):
        p = 2 * i + 2 * d - 1
        acc[p] = acc.get(p, Fraction(0)) + (2 * j - 1) * c * Fraction((-2) ** i)
    for i, c in enumerate(_laguerre_frac_coeffs(2 * j - 3, 2 * d + 1)):
        p = 2 * i + 2 * d + 1
        acc[p] = acc.get(p, Fraction(0)) + 2 * c * Fraction((-2) ** i)
    items = sorted((p, c) for p, c in acc.items() if c != 0)
    assert all(p >= 1 and c > 0 for p, c in items), "entry integrand must be a positive odd polynomial"
    return tuple(items)


def _auto_dps(n: int, l: int) -> int:
    """Working precision for the trace route: the zonal sum cancels roughly
    n^{l(l-1)/2} of headroom at strong non-Hermiticity."""
    cancel_digits = 0.5 * l * (l - 1) * math.log10(max(n, 2)) + math.log10(math.factorial(l))
    return max(30, 22 + int(cancel_digits))


@lru_cache(maxsize=None)
def _mp_gauss_legendre(order: int, prec_dps: int):
    """Gauss-Legendre nodes/weights on [-1,1] at mpmath precision (cached)."""
    with mp.workdps(prec_dps + 10):
        seeds = gauss_legendre(order).nodes
        xs, ws = [], []
        for s in seeds:
            x = mp.mpf(float(s))
            for _ in range(60):
                p0, p1 = mp.mpf(1), x
                for jj in range(1, order):
                    p0, p1 = p1, ((2 * jj + 1) * x * p1 - jj * p0) / (jj + 1)
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mpf(10) ** (-(prec_dps + 5)):
                    break
            p0, p1 = mp.mpf(1), x
            for jj in range(1, order):
                p0, p1 = p1, ((2 * jj + 1) * x * p1 - jj * p0) / (jj + 1)
            dp = order * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
        return tuple(xs), tuple(ws)


def _rho_matrix_mp(n: int, tau: float, dps: int, order: int = 0):
    """Half-size moment matrix by composite Gauss quadrature in mp floats.

    The quadrature is applied to the monomial moments of the weight
    e^{y^2} erfc(cy) once (all integrands are positive polynomials against
    that weight), and entries are exact rational combinations of the moments.
    Returns (matrix as list of lists of mpf, quad relative-error estimate).
    """
    half = n // 2
    pmax = 2 * n - 3
    with mp.workdps(dps):
        c = mp.sqrt(2 / (1 - mp.mpf(tau)))
        lam = c * c - 1
        # truncation: lam R^2 - pmax log R >= dps ln10 + 40
        R = mp.sqrt((dps * mp.log(10) + 40) / lam)
        for _ in range(40):
            R_new = mp.sqrt((dps * mp.log(10) + 40 + pmax * mp.log(max(R, mp.mpf(2)))) / lam)
            if abs(R_new - R) < mp.mpf("1e-3"):
                break
            R = R_new
        if order == 0:
            order = max(60, pmax // 2 + 24)

        def moments_with(order_, npan):
            xs, ws = _mp_gauss_legendre(order_, dps)
            nodes, wts = [], []
            for ip in range(npan):
                lo = R * ip / npan
                hi = R * (ip + 1) / npan
                scale = (hi - lo) / 2
                for x, w in zip(xs, ws):
                    nodes.append(lo + (x + 1) * scale)
                    wts.append(w * scale)
            wfun = [w * mp.exp(y * y) * mp.erfc(c * y) for y, w in zip(nodes, wts)]
            mom = []
            cur = wfun[:]
            for _p in range(pmax + 1):
                mom.append(mp.fsum(cur))
                cur = [v * y for v, y in zip(cur, nodes)]
            return mom

        mom1 = moments_with(order, 3)
        mom2 = moments_with(order + order // 2, 4)

        def entries_from(mom):
            mat = [[mp.mpf(0)] * half for _ in range(half)]
            for j in range(1, half + 1):
                for k in range(1, half + 1):
                    tot = mp.mpf(0)
                    for p, coef in _entry_poly(j, k):
                        tot += mp.mpf(coef.numerator) / coef.denominator * mom[p]
                    mat[j - 1][k - 1] = tot
            return mat

        m1 = entries_from(mom1)
        m2 = entries_from(mom2)
        err = mp.mpf(0)
        for j in range(half):
            for k in range(half):
                if m2[j][k] != 0:
                    err = max(err, abs(m1[j][k] / m2[j][k] - 1))
        return m2, float(err)


def rho_traces(params: EnsembleParams, l: int, dps: int = 0, order: int = 0) -> RhoTraces:
    """Tr rho^1 .. Tr rho^l for the zonal route.

    l = 1 needs only diagonal entries (all-positive integrands) and runs in
    double-precision log space; l >= 2 assembles the full matrix at elevated
    precision because the zonal alternating sum cancels ~n^{l(l-1)/2}.
    """
    n = params.n
    if l < 1 or l > n // 2:
        raise DomainError("rho_traces requires 1 <= l <= n/2")
    tau = params.tau
    if l == 1:
        return _rho_trace1_float(params, order)
    if dps == 0:
        dps = _auto_dps(n, l)
    mat, err = _rho_matrix_mp(n, tau, dps, order)
    half = n // 2
    with mp.workdps(dps):
        traces_mp = []
        power = [row[:] for row in mat]
        for step in range(l):
            if step > 0:
                power = _mp_matmul(power, mat)
            traces_mp.append(mp.fsum(power[i][i] for i in range(half)))
        traces = tuple(SignedLog.from_log(float(mp.log(abs(t))), int(mp.sign(t))) if t != 0 else SignedLog.zero()
                       for t in traces_mp)
    if err > 1e-9:
        warnings.warn(f"rho entry quadrature error estimate {err:.2e} above 1e-9 target")
    return RhoTraces(l, traces, err, tuple(traces_mp), dps)


def _mp_matmul(A, B):
    h = len(A)
    return [[mp.fsum(A[i][k] * B[k][j] for k in range(h)) for j in range(h)] for i in range(h)]


def _rho_trace1_float(params: EnsembleParams, order: int = 0) -> RhoTraces:
    """Tr rho via the diagonal entries only, double-precision log domain."""
    n, tau = params.n, params.tau
    c = _c_erfc(tau)
    decay = c * c - 1.0
    half = n // 2
    total = SignedLog.zero()
    worst = 0.0
    for j in range(1, half + 1):
        poly = _entry_poly(j, j)
        powers = np.array([p for p, _ in poly], dtype=float)
        logcoef = np.array([math.log(cc.numerator) - math.log(cc.denominator) for _, cc in poly])

        def h_log(y, powers=powers, logcoef=logcoef):
            y = np.asarray(y, dtype=float)
            with np.errstate(divide="ignore"):
                logy = np.log(y)
                la = _sp.logsumexp(logcoef[None, :] + powers[None, :] * logy[:, None], axis=1)
                la += np.log(_sp.erfcx(c * y)) - decay * y * y
            return la, np.ones_like(y)

        res = integrate_semi_infinite_gaussian(
            h_log, _effective_decay(2 * n - 3, decay), order or max(80, n)
        )
        worst = max(worst, res.rel_err_estimate)
        total = total + res.value
    return RhoTraces(1, (total,), worst)


def log_p_nm(params: EnsembleParams, l: int, verify: bool = False, dps: int = 0) -> LogProb:
    """log p_{n, n-2l}.

    l = 0 is the closed form; l = 1 uses the Laguerre integral (the (0,1)
    integral as a cross-check when ``verify``); l >= 2 goes through the
    trace/zonal route.
    """
    n = params.n
    if l < 0 or l > n // 2:
        raise DomainError(f"need 0 <= l <= n/2, got l={l}")
    base = log_p_nn(params)
    if l == 0:
        return base
    flags: list = []
    if l == 1:
        ratio = ratio_l1_laguerre(params)
        if verify:
            diff = ratio - ratio_l1_prefactored(params)
            rel = 0.0 if diff.is_zero() else math.exp(diff.log_abs - ratio.log_abs)
            if rel > 1e-6:
                flags.append(f"l1-route-disagreement:{rel:.2e}")
        if ratio.sign <= 0:
            raise DomainError("l=1 ratio must be positive")
        return LogProb(base.log + ratio.log_abs, tuple(flags))
    rt = rho_traces(params, l, dps=dps)
    with mp.workdps(rt.dps or 30):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", combinatorics.CancellationWarning)
            z = combinatorics.zonal_1k(list(rt.traces_mp))
            if any(issubclass(w.category, combinatorics.CancellationWarning) for w in caught):
                flags.append("zonal-cancellation")
        if z <= 0:
            raise DomainError(f"zonal value nonpositive at n={n}, l={l}; raise dps")
        log_ratio = float(mp.log(z)) - math.lgamma(l + 1)
    if rt.entry_quad_err > 1e-9:
        flags.append(f"entry-quad-err:{rt.entry_quad_err:.2e}")
    return LogProb(base.log + log_ratio, tuple(flags))


def mean_count_exact(params: EnsembleParams) -> MeanCount:
    """E N and Var N from the full distribution (n <= 12)."""
    n = params.n
    if n > 12:
        raise DomainError("mean_count_exact supports n <= 12")
    probs = []
    for l in range(n // 2 + 1):
        probs.append(log_p_nm(params, l).probability)
    mean = sum((n - 2 * l) * p for l, p in enumerate(probs))
    second = sum((n - 2 * l) ** 2 * p for l, p in enumerate(probs))
    return MeanCount(mean, second - mean * mean, tuple(probs))
