"""Pure-Python reference kernels: polar Gaussian sampling, elliptic matrix
assembly, and a Francis double-shift reduction to real quasi-triangular form.

The Cython extension (eginoe._kernels) implements the same arithmetic in the
same order; this module is the fallback selected at import when the compiled
extension is unavailable, and the semantic reference in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_EPS = np.finfo(float).eps


def polar_normals(next_double, count: int) -> np.ndarray:
    """Marsaglia polar method; consumes uniforms in pairs until acceptance."""
    out = np.empty(count)
    i = 0
    spare_ok = False
    spare = 0.0
    while i < count:
        if spare_ok:
            out[i] = spare
            i += 1
            spare_ok = False
            continue
        u = 2.0 * next_double() - 1.0
        v = 2.0 * next_double() - 1.0
        s = u * u + v * v
        if s >= 1.0 or s == 0.0:
            continue
        f = math.sqrt(-2.0 * math.log(s) / s)
        out[i] = u * f
        i += 1
        spare = v * f
        spare_ok = True
    return out


def build_elliptic(g: np.ndarray, n: int, tau: float) -> np.ndarray:
    """X = a G + b G^T with a, b = (sqrt(1+tau) +/- sqrt(1-tau))/2."""
    a = 0.5 * (math.sqrt(1.0 + tau) + math.sqrt(1.0 - tau))
    b = 0.5 * (math.sqrt(1.0 + tau) - math.sqrt(1.0 - tau))
    G = g.reshape(n, n)
    X = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            X[i, j] = a * G[i, j] + b * G[j, i]
    return X


def _hessenberg(h: np.ndarray, n: int) -> None:
    """In-place Householder reduction to upper Hessenberg form."""
    for k in range(n - 2):
        scale = 0.0
        for i in range(k + 1, n):
            scale += abs(h[i, k])
        if scale == 0.0:
            continue
        v = np.zeros(n)
        norm2 = 0.0
        for i in range(k + 1, n):
            v[i] = h[i, k] / scale
            norm2 += v[i] * v[i]
        alpha = math.sqrt(norm2)
        if v[k + 1] > 0:
            alpha = -alpha
        v[k + 1] -= alpha
        vnorm2 = 0.0
        for i in range(k + 1, n):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        for j in range(n):
            s = 0.0
            for i in range(k + 1, n):
                s += v[i] * h[i, j]
            s *= beta
            for i in range(k + 1, n):
                h[i, j] -= s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += h[i, j] * v[j]
            s *= beta
            for j in range(k + 1, n):
                h[i, j] -= s * v[j]
        h[k + 1, k] = alpha * scale
        for i in range(k + 2, n):
            h[i, k] = 0.0


def _reflect(h, n, lo, hi, k, x, y, z, use3: bool) -> None:
    """Householder on rows k..k+1(+2) zeroing the bulge below column k-1."""
    norm = abs(x) + abs(y) + (abs(z) if use3 else 0.0)
    if norm == 0.0:
        return
    x /= norm
    y /= norm
    z = z / norm if use3 else 0.0
    g = math.sqrt(x * x + y * y + z * z)
    if x > 0.0:
        g = -g
    v0 = x - g
    v1 = y
    v2 = z
    vn = v0 * v0 + v1 * v1 + v2 * v2
    if vn == 0.0:
        return
    beta = 2.0 / vn
    jlo = max(lo, k - 1)
    for j in range(jlo, n):
        s = v0 * h[k, j] + v1 * h[k + 1, j] + (v2 * h[k + 2, j] if use3 else 0.0)
        s *= beta
        h[k, j] -= s * v0
        h[k + 1, j] -= s * v1
        if use3:
            h[k + 2, j] -= s * v2
    iend = min(hi, k + 3) + 1
    for i in range(iend):
        s = h[i, k] * v0 + h[i, k + 1] * v1 + (h[i, k + 2] * v2 if use3 else 0.0)
        s *= beta
        h[i, k] -= s * v0
        h[i, k + 1] -= s * v1
        if use3:
            h[i, k + 2] -= s * v2


def real_quasi_schur(A: np.ndarray):
    """Francis double-shift iteration to real quasi-triangular form.

    Returns (real_count, eigenvalues): the count is the number of structurally
    real eigenvalues (1x1 diagonal blocks, plus 2x2 blocks whose discriminant
    is nonnegative, which split); no imaginary-part thresholding anywhere.
    Deflation uses |h[i+1,i]| <= eps (|h[ii]| + |h[i+1,i+1]|); ad-hoc shifts
    kick in after every 10 stalled sweeps; RuntimeError after 30n iterations.
    """
    n = A.shape[0]
    h = np.array(A, dtype=float, order="C", copy=True)
    if n == 1:
        return 1, [complex(h[0, 0])]
    _hessenberg(h, n)
    eigs: list = []
    real_count = 0
    total_iter = 0
    max_iter = 30 * n
    hi = n - 1
    stall = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            small = _EPS * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]))
            if abs(h[lo, lo - 1]) <= small:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(h[hi, hi]))
            real_count += 1
            hi -= 1
            stall = 0
            continue
        if lo == hi - 1:
            a11, a12 = h[hi - 1, hi - 1], h[hi - 1, hi]
            a21, a22 = h[hi, hi - 1], h[hi, hi]
            p = 0.5 * (a11 - a22)
            q = p * p + a12 * a21
            if q >= 0.0:
                sq = math.sqrt(q)
                lam1 = a22 + p + (sq if p >= 0.0 else -sq)
                lam2 = (a11 * a22 - a12 * a21) / lam1 if lam1 != 0.0 else a22 + p - (sq if p >= 0.0 else -sq)
                eigs.append(complex(lam1))
                eigs.append(complex(lam2))
                real_count += 2
            else:
                sq = math.sqrt(-q)
                eigs.append(complex(a22 + p, sq))
                eigs.append(complex(a22 + p, -sq))
            hi -= 2
            stall = 0
            continue
        if total_iter >= max_iter:
            raise RuntimeError(f"Francis iteration failed to converge; matrix:\n{A!r}")
        if stall > 0 and stall % 10 == 0:
            s = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            tr = 1.5 * s
            det = -0.4375 * s * s
        else:
            tr = h[hi - 1, hi - 1] + h[hi, hi]
            det = h[hi - 1, hi - 1] * h[hi, hi] - h[hi - 1, hi] * h[hi, hi - 1]
        x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - tr * h[lo, lo] + det
        y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - tr)
        z = h[lo + 2, lo + 1] * h[lo + 1, lo] if lo + 2 <= hi else 0.0
        for k in range(lo, hi):
            use3 = k + 2 <= hi
            _reflect(h, n, lo, hi, k, x, y, z, use3)
            if k > lo:
                h[k + 1, k - 1] = 0.0
                if use3:
                    h[k + 2, k - 1] = 0.0
            if k < hi - 1:
                x = h[k + 1, k]
                y = h[k + 2, k]
                z = h[k + 3, k] if k + 3 <= hi else 0.0
        total_iter += 1
        stall += 1
    return real_count, eigs


def count_real_eigs(A: np.ndarray):
    return real_quasi_schur(A)


def _trial_stream(seed: int, trial: int):
    bg = np.random.Philox(counter=[0, 0, 0, trial], key=seed)
    gen = np.random.Generator(bg)
    return gen.random  # next uniform in [0, 1)


def run_mc_kernel(n: int, tau: float, trials: int, seed: int) -> np.ndarray:
    """Histogram over the real-eigenvalue count m for ``trials`` samples."""
    hist = np.zeros(n + 1, dtype=np.int64)
    for t in range(trials):
        nd = _trial_stream(seed, t)
        g = polar_normals(nd, n * n)
        X = build_elliptic(g, n, tau)
        cnt, _ = real_quasi_schur(X)
        hist[cnt] += 1
    return hist


def sample_matrix_kernel(n: int, tau: float, seed: int, trial: int) -> np.ndarray:
    nd = _trial_stream(seed, trial)
    return build_elliptic(polar_normals(nd, n * n), n, tau)
