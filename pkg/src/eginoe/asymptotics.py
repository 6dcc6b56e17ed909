"""Expansion coefficients of the two large-n regimes and truncated-series
evaluation with residual diagnostics.

Strong non-Hermiticity (fixed tau):
    log p_{n,n-2l} = a1 n^2 + a2 n + a3 log n + O(1),
and for l = 1 the full series  ratio = n^{-1/2} ((3-tau)/(1+tau))^n sum_k A_k(tau) n^{-k}.

Weak non-Hermiticity (tau = 1 - alpha^2/n):
    log p_{n,n-2l} = b1 n + b2 log n + b3 + o(1),
and for l = 1  ratio = (n/2) sum_k B_k(alpha) n^{-k}.

Closed-form reductions of the low-order coefficients exist (Bessel and
rational expressions); the forms used as test references here were verified
against series fits of the exact ratio at desk scale.  In particular
B_1(alpha) = (1 - e^{w} I_0(w))/2 with w = alpha^2/2, and the A_r double sum
carries an overall sqrt(2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .combinatorics import CancellationWarning, compositions
from .exactprob import EnsembleParams, Strong, Weak, log_p_nm
from .specfun import DomainError, PolyCoeffs, SignedLog, bessel_i, hyp1f1, ln_gamma

__all__ = [
    "StrongCoeffs",
    "WeakCoeffs",
    "SeriesEval",
    "DegenerateRegimeError",
    "strong_coeffs",
    "weak_coeffs",
    "truncation_poly",
    "weak_truncation_poly",
    "strong_series_coeff",
    "weak_series_coeff",
    "eval_series",
    "residual",
]


class DegenerateRegimeError(DomainError):
    """Weak regime at alpha = 0 with l >= 1: the limiting probability is zero,
    which must not be conflated with numeric underflow."""


@dataclass(frozen=True)
class StrongCoeffs:
    a1: float
    a2: float
    a3: float


@dataclass(frozen=True)
class WeakCoeffs:
    b1: float
    b2: float
    b3: float


@dataclass(frozen=True)
class SeriesEval:
    order: int
    terms: tuple  # series coefficients (A_k or B_k), or the plain prediction pieces
    prefactor_log: float
    total_log: SignedLog


def strong_coeffs(tau: float, l: int) -> StrongCoeffs:
    if not 0.0 <= tau < 1.0 or l < 0:
        raise DomainError("strong_coeffs: tau in [0,1), l >= 0")
    c = 0.25 * math.log(2.0 / (1.0 + tau))
    return StrongCoeffs(-c, c + l * math.log((3.0 - tau) / (1.0 + tau)), -0.5 * l * l)


def weak_coeffs(alpha: float, l: int) -> WeakCoeffs:
    if alpha < 0 or l < 0:
        raise DomainError("weak_coeffs: alpha >= 0, l >= 0")
    if alpha == 0.0 and l >= 1:
        raise DegenerateRegimeError("B_0(0) = 0: p_{n,n-2l} vanishes in the GOE limit")
    b1 = -(alpha**2) / 8.0
    b3 = alpha**2 / 8.0 - alpha**4 / 32.0
    if l >= 1:
        w = alpha**2 / 2.0
        base = math.exp(w) * (bessel_i(0, w) - bessel_i(1, w)) - 1.0
        b3 += l * math.log(base / 2.0) - ln_gamma(l + 1)
    return WeakCoeffs(b1, float(l), b3)


@lru_cache(maxsize=None)
def _comp_sum(q: int, k: int) -> Fraction:
    """sum over compositions u_1+..+u_k = q of prod 1/(u_v + 1), exact."""
    tot = Fraction(0)
    for comp in compositions(q, k):
        pr = Fraction(1)
        for u in comp.parts:
            pr *= Fraction(1, u + 1)
        tot += pr
    return tot


@lru_cache(maxsize=None)
def _F_coeffs(q: int):
    """truncation_poly(x) = sum_k c_k x^k with exact rational c_k."""
    if q == 0:
        return (Fraction(1),)
    out = [Fraction(0)] * (q + 1)
    for k in range(1, q + 1):
        out[k] = Fraction((-1) ** k, math.factorial(k)) * _comp_sum(q, k)
    return tuple(out)


def truncation_poly(x: float, q: int) -> float:
    """Correction polynomial F_q in (1 - x/N)^N = e^{-x} sum_q F_q(x) (x/N)^q."""
    if q < 0 or q > 20:
        raise DomainError("truncation_poly supports 0 <= q <= 20")
    acc = 0.0
    for c in reversed(_F_coeffs(q)):
        acc = acc * x + float(c)
    return acc


@lru_cache(maxsize=None)
def _G_coeff_table(q: int):
    """G_q(t) = sum_{k=1}^q alpha^{2k} P_{q,k}(t); returns exact P_{q,k}
    coefficient tuples (degree up to 2q)."""
    table = []
    for k in range(1, q + 1):
        poly = [Fraction(0)] * (2 * q + 1)
        pref = Fraction(1, 2 ** (q + k) * math.factorial(k))
        for comp in compositions(q, k):
            prod = [Fraction(1)]
            for j in comp.parts:
                # (1 - (1-2t)^{j+1})/(j+1)
                fac = [Fraction(0)] * (j + 2)
                for m in range(j + 2):
                    fac[m] -= Fraction(math.comb(j + 1, m) * (-2) ** m)
                fac[0] += 1
                fac = [c / (j + 1) for c in fac]
                new = [Fraction(0)] * (len(prod) + len(fac) - 1)
                for i1, c1 in enumerate(prod):
                    if c1 == 0:
                        continue
                    for i2, c2 in enumerate(fac):
                        new[i1 + i2] += c1 * c2
                prod = new
            for i1, c1 in enumerate(prod):
                poly[i1] += pref * c1
        table.append(tuple(poly))
    return tuple(table)


def weak_truncation_poly(alpha: float, q: int) -> PolyCoeffs:
    """Correction polynomial G_q (in t, degree <= 2q) of the weak-regime
    analogue (1 + 2 alpha^2 t/(2N - alpha^2))^N = e^{alpha^2 t} sum_q G_q(t) (alpha^2/N)^q;
    G_0 is the constant 1."""
    if q < 0 or q > 20:
        raise DomainError("weak_truncation_poly supports 0 <= q <= 20")
    if q == 0:
        return PolyCoeffs((1.0,))
    table = _G_coeff_table(q)
    out = [0.0] * (2 * q + 1)
    a2k = 1.0
    for k in range(1, q + 1):
        a2k *= alpha * alpha
        for i, c in enumerate(table[k - 1]):
            out[i] += a2k * float(c)
    return PolyCoeffs(tuple(out))


@lru_cache(maxsize=None)
def strong_series_coeff(r: int, tau: float) -> float:
    """Coefficient A_r(tau) of the strong-regime l = 1 series.

    Double sum over j <= r with the composition-sum bracket; carries the
    sqrt(2) normalization that reproduces the r <= 2 closed forms.
    """
    if r < 0 or r > 12:
        raise DomainError("strong_series_coeff supports 0 <= r <= 12")
    if not 0.0 <= tau < 1.0:
        raise DomainError("strong_series_coeff: tau in [0,1)")
    pref = math.sqrt(2.0) * (1.0 + tau) ** 1.5 / (4.0 * math.pi**1.5 * (1.0 - tau))
    total = SignedLog.zero()
    max_mag = float("-inf")
    for j in range(r + 1):
        coeff = (
            (r + 0.5) * math.log((3.0 - tau) / 4.0)
            + (j + 0.5) * math.log(2.0 / (1.0 - tau))
            + ln_gamma(j + 1.5)
            - ln_gamma(j + 1.0)
        )
        bracket = SignedLog.from_log(ln_gamma(r + 0.5), 1)
        for q in range(1, r - j + 1):
            for k in range(1, q + 1):
                s = _comp_sum(q, k)
                term = SignedLog.from_log(
                    q * math.log(4.0 / (3.0 - tau))
                    + ln_gamma(r + k + 0.5)
                    - ln_gamma(k + 1.0)
                    + math.log(float(s)),
                    (-1) ** k,
                )
                max_mag = max(max_mag, term.log_abs)
                bracket = bracket + term
        contrib = SignedLog.from_log(coeff, 1) * bracket
        max_mag = max(max_mag, contrib.log_abs if not contrib.is_zero() else float("-inf"))
        total = total + contrib
    if not total.is_zero() and max_mag - total.log_abs > 10 * math.log(10.0):
        warnings.warn(f"strong_series_coeff({r}, {tau}) lost > 10 digits to cancellation", CancellationWarning)
    return pref * total.to_real()


@lru_cache(maxsize=None)
def _binom_half(j: int) -> float:
    """binomial(1/2, j) by the exact product formula."""
    num, den = Fraction(1), Fraction(1)
    for i in range(j):
        num *= Fraction(1, 2) - i
        den *= i + 1
    return float(num / den)


@lru_cache(maxsize=None)
def _s_k(k: int, alpha: float) -> float:
    """Series kernel s_k: s_0 = e^w(I_0(w) - I_1(w)) - 1, w = alpha^2/2;
    for k >= 1 the 1F1/gamma-ratio evaluation driven by the G_q coefficients."""
    a2 = alpha * alpha
    if k == 0:
        w = a2 / 2.0
        return math.exp(w) * (bessel_i(0, w) - bessel_i(1, w)) - 1.0
    piece1 = (
        math.sqrt(math.pi)
        * (2 * k - (2 * k - 1) * a2)
        * math.gamma(k - 0.5)
        / (2 ** (k + 1) * math.pi * a2 * math.factorial(k))
    )
    u_k = weak_truncation_poly(alpha, k).coeffs
    piece2 = 0.0
    for j in range(1, len(u_k)):  # the j = 0 slot is killed by 1/Gamma(0)
        if u_k[j] == 0.0:
            continue
        piece2 += u_k[j] * math.gamma(j - 0.5) / (math.sqrt(math.pi) * a2 * math.gamma(j)) * hyp1f1(j - 0.5, j, a2)
    piece3 = 0.0
    for q in range(1, k + 1):
        u_kq = weak_truncation_poly(alpha, k - q).coeffs
        for j in range(len(u_kq)):
            if u_kq[j] == 0.0:
                continue
            piece3 += (
                u_kq[j]
                / 2**q
                * math.gamma(j + 0.5)
                * math.gamma(q - 0.5)
                / (math.pi * a2 * math.gamma(j + q))
                * hyp1f1(j + 0.5, j + q, a2)
            )
    return piece1 + piece2 - piece3


@lru_cache(maxsize=None)
def weak_series_coeff(k: int, alpha: float) -> float:
    """Coefficient B_k(alpha) of the weak-regime l = 1 series:
    B_k = sum_j binom(1/2, j) (-alpha^2/2)^j alpha^{2(k-j)} s_{k-j}."""
    if k < 0 or k > 10:
        raise DomainError("weak_series_coeff supports 0 <= k <= 10")
    if alpha <= 0:
        raise DegenerateRegimeError("weak_series_coeff requires alpha > 0")
    a2 = alpha * alpha
    total = 0.0
    for j in range(k + 1):
        total += _binom_half(j) * (-a2 / 2.0) ** j * a2 ** (k - j) * _s_k(k - j, alpha)
    return total


def eval_series(params: EnsembleParams, l: int, M: int) -> SeriesEval:
    """Truncated prediction of log(p_{n,n-2l}/p_{n,n}).

    l = 1 gives the full-order series through M terms; other l fall back to
    the three-term regime expansion (relative to the closed form).
    """
    n = params.n
    if M < 1:
        raise DomainError("M >= 1")
    if l == 0:
        return SeriesEval(1, (1.0,), 0.0, SignedLog.from_real(1.0))
    if l == 1:
        if isinstance(params.regime, Strong):
            tau = params.regime.tau
            coeffs = tuple(strong_series_coeff(k, tau) for k in range(M))
            pref = n * math.log((3.0 - tau) / (1.0 + tau)) - 0.5 * math.log(n)
        else:
            alpha = params.regime.alpha
            if alpha == 0.0:
                raise DegenerateRegimeError("weak series needs alpha > 0 for l >= 1")
            coeffs = tuple(weak_series_coeff(k, alpha) for k in range(M))
            pref = math.log(n / 2.0)
        acc = SignedLog.zero()
        for k, c in enumerate(coeffs):
            acc = acc + SignedLog.from_real(c) * SignedLog.from_log(-k * math.log(n), 1)
        return SeriesEval(M, coeffs, pref, SignedLog.from_log(pref, 1) * acc)
    # general l: three-term regime prediction for the ratio
    if isinstance(params.regime, Strong):
        sc = strong_coeffs(params.regime.tau, l)
        base = strong_coeffs(params.regime.tau, 0)
        log_ratio = (sc.a2 - base.a2) * n + sc.a3 * math.log(n)
    else:
        alpha = params.regime.alpha
        wc = weak_coeffs(alpha, l)
        base = weak_coeffs(alpha, 0)
        log_ratio = wc.b2 * math.log(n) + (wc.b3 - base.b3)
    return SeriesEval(1, (log_ratio,), log_ratio, SignedLog.from_log(log_ratio, 1))


def residual(params: EnsembleParams, l: int, exact_log_p: float | None = None) -> float:
    """exact log p_{n,n-2l} minus the three-term regime prediction.

    This is the quantity the verification sweeps emit: bounded in n at strong
    non-Hermiticity, tending to zero at weak non-Hermiticity.
    """
    n = params.n
    if exact_log_p is None:
        exact_log_p = log_p_nm(params, l).log
    if isinstance(params.regime, Strong):
        sc = strong_coeffs(params.regime.tau, l)
        pred = sc.a1 * n * n + sc.a2 * n + sc.a3 * math.log(n)
    else:
        wc = weak_coeffs(params.regime.alpha, l)
        pred = wc.b1 * n + wc.b2 * math.log(n) + wc.b3
    return exact_log_p - pred
