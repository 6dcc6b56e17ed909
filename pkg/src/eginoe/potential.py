"""Electrostatic landscape seen by a complex-conjugate eigenvalue pair.

Q(z) combines the pair's external potential (with the finite-n erfc factor)
and the log-potential of the semicircle background.  Its unique minimum on
the positive imaginary axis, the depth of that minimum relative to the
regularized on-axis value, and the Hessian there are the computational
content of the landscape analysis.

On-axis reference: Q(iy) contains -(1/n) log(4y^2 erfc(c_n y)), which
diverges like -(2/n) log(2y) as y -> 0+.  The reference value Q(0) is the
limit with that divergence removed, which leaves exactly Q_sc(0); the gap
reported here is Q(0) - Q(i y*_n) > 0, the energy gained by parking the pair
at the minimum.  It converges to log((3-tau)/(1+tau)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx

from .quadrature import gauss_legendre
from .specfun import DomainError

__all__ = [
    "PotentialParams",
    "MinimumReport",
    "NearSupportWarning",
    "Q_tau_n",
    "Q_sc",
    "Q_sc_axis",
    "Q_n0",
    "dQ_dy_axis",
    "find_minimum",
]


class NearSupportWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PotentialParams:
    n: int
    tau: float
    r: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n >= 1")
        if not 0.0 <= self.tau < 1.0:
            raise DomainError("tau in [0,1)")
        if self.r < 0:
            raise DomainError("r >= 0")

    @property
    def c_n(self) -> float:
        return math.sqrt(2.0 * self.n / (1.0 - self.tau**2))


def Q_tau_n(z: complex, params: PotentialParams) -> float:
    """Pair potential -(1/n) log[2y erfc(c_n y)] + (x^2 - y^2)/(1+tau), y = Im z > 0."""
    x, y = z.real, z.imag
    if y <= 0:
        raise DomainError("Q_tau_n needs Im z > 0")
    t = params.c_n * y
    log_erfc = math.log(erfcx(t)) - t * t
    return -(math.log(2.0 * y) + log_erfc) / params.n + (x * x - y * y) / (1.0 + params.tau)


def Q_sc(z: complex, tau: float, order: int = 400) -> float:
    """Semicircle log-potential Q_sc(z) = -int log|z-t|^2 rho_sc(t) dt.

    Quadrature after t = a sin(theta); warns within 1e-6 of the support.
    """
    a = math.sqrt(2.0 * (1.0 + tau))
    x, y = z.real, z.imag
    if abs(y) < 1e-6 and abs(x) <= a + 1e-6:
        warnings.warn("Q_sc evaluated within 1e-6 of the spectrum", NearSupportWarning)
    rule = gauss_legendre(order).mapped(-math.pi / 2, math.pi / 2)
    t = a * np.sin(rule.nodes)
    dens = (2.0 / math.pi) * np.cos(rule.nodes) ** 2  # rho_sc(a sin) * a cos
    return float(-np.dot(rule.weights, dens * np.log((x - t) ** 2 + y * y)))


def Q_sc_axis(y: float, tau: float) -> float:
    """Closed form of Q_sc(iy), y >= 0, via the two arcsine-weight log integrals."""
    a = math.sqrt(2.0 * (1.0 + tau))
    q0 = -2.0 * math.log(a / 2.0) + 1.0
    if y == 0.0:
        return q0
    b2 = (y / a) ** 2
    rt = math.sqrt(1.0 + 1.0 / b2)
    j = (
        (math.pi / 4.0) * math.log(b2)
        + (math.pi / 2.0) * (math.log((1.0 + rt) / 2.0) + 0.5 * (1.0 - rt) / (1.0 + rt))
        + (math.pi / 4.0) * (2.0 * math.log(2.0) + 1.0)
    )
    return q0 - (4.0 / math.pi) * j


def Q_n0(z: complex, params: PotentialParams, sc_order: int = 400) -> float:
    """Full finite-n potential: erfc part with |z - conj z|^2, confinement, Q_sc."""
    x, y = z.real, z.imag
    if y <= 0:
        raise DomainError("Q_n0 needs Im z > 0")
    t = params.c_n * y
    log_erfc = math.log(erfcx(t)) - t * t
    erfc_part = -(math.log(4.0 * y * y) + log_erfc) / params.n
    if x == 0.0:
        sc = Q_sc_axis(y, params.tau)
    else:
        sc = Q_sc(complex(x, y), params.tau, sc_order)
    return erfc_part + (x * x - y * y) / (1.0 + params.tau) + sc


def dQ_dy_axis(y: float, params: PotentialParams) -> float:
    """d/dy of Q_n0 along the imaginary axis (convex in y, one sign change)."""
    n, tau = params.n, params.tau
    cn = params.c_n
    return (
        -2.0 / (n * y)
        + (2.0 * cn / (n * math.sqrt(math.pi))) / erfcx(cn * y)
        - 2.0 * math.sqrt(2.0 * (1.0 + tau) + y * y) / (1.0 + tau)
    )


@dataclass(frozen=True)
class MinimumReport:
    y_star_n: float
    q_gap: float
    hessian: tuple  # ((Hxx, Hxy), (Hxy, Hyy))


def find_minimum(params: PotentialParams, fd_step: float = 1e-4) -> MinimumReport:
    """Locate the axis minimum by bisection, report the gap and the Hessian.

    The derivative is convex-monotone on (0, inf) so bisection is safe; a
    non-bracketing configuration signals parameter pathology.
    """
    lo, hi = 1e-8, 10.0
    flo, fhi = dQ_dy_axis(lo, params), dQ_dy_axis(hi, params)
    if not (flo < 0 < fhi):
        raise DomainError("d/dy Q does not change sign on (1e-8, 10); pathological parameters")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dQ_dy_axis(mid, params) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * hi:
            break
    y_star = 0.5 * (lo + hi)
    gap = Q_sc_axis(0.0, params.tau) - Q_n0(complex(0.0, y_star), params)
    h = fd_step
    qc = Q_n0(complex(0.0, y_star), params)
    hxx = (Q_n0(complex(h, y_star), params) - 2 * qc + Q_n0(complex(-h, y_star), params)) / (h * h)
    hyy = (Q_n0(complex(0.0, y_star + h), params) - 2 * qc + Q_n0(complex(0.0, y_star - h), params)) / (h * h)
    hxy = (
        Q_n0(complex(h, y_star + h), params)
        - Q_n0(complex(h, y_star - h), params)
        - Q_n0(complex(-h, y_star + h), params)
        + Q_n0(complex(-h, y_star - h), params)
    ) / (4 * h * h)
    return MinimumReport(y_star, gap, ((hxx, hxy), (hxy, hyy)))
