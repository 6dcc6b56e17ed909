# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: polar sampling, elliptic assembly, Francis double-shift.

Arithmetic mirrors eginoe._kernels_py line by line so both backends produce
bit-identical Monte Carlo histograms for the same seed.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport fabs, log, sqrt

from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "cython"

cdef double _EPS = np.finfo(float).eps

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef int _polar_fill(bitgen_t *rng, double *out, int count) nogil:
    cdef int i = 0
    cdef bint spare_ok = 0
    cdef double spare = 0.0, u, v, s, f
    while i < count:
        if spare_ok:
            out[i] = spare
            i += 1
            spare_ok = 0
            continue
        u = 2.0 * rng.next_double(rng.state) - 1.0
        v = 2.0 * rng.next_double(rng.state) - 1.0
        s = u * u + v * v
        if s >= 1.0 or s == 0.0:
            continue
        f = sqrt(-2.0 * log(s) / s)
        out[i] = u * f
        i += 1
        spare = v * f
        spare_ok = 1
    return 0


cdef void _build_elliptic(double *g, double *x, int n, double tau) nogil:
    cdef double a = 0.5 * (sqrt(1.0 + tau) + sqrt(1.0 - tau))
    cdef double b = 0.5 * (sqrt(1.0 + tau) - sqrt(1.0 - tau))
    cdef int i, j
    for i in range(n):
        for j in range(n):
            x[i * n + j] = a * g[i * n + j] + b * g[j * n + i]


cdef void _hessenberg(double *h, double *v, int n) nogil:
    cdef int k, i, j
    cdef double scale, norm2, alpha, vnorm2, beta, s
    for k in range(n - 2):
        scale = 0.0
        for i in range(k + 1, n):
            scale += fabs(h[i * n + k])
        if scale == 0.0:
            continue
        for i in range(n):
            v[i] = 0.0
        norm2 = 0.0
        for i in range(k + 1, n):
            v[i] = h[i * n + k] / scale
            norm2 += v[i] * v[i]
        alpha = sqrt(norm2)
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
                s += v[i] * h[i * n + j]
            s *= beta
            for i in range(k + 1, n):
                h[i * n + j] -= s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += h[i * n + j] * v[j]
            s *= beta
            for j in range(k + 1, n):
                h[i * n + j] -= s * v[j]
        h[(k + 1) * n + k] = alpha * scale
        for i in range(k + 2, n):
            h[i * n + k] = 0.0


cdef void _reflect(double *h, int n, int lo, int hi, int k,
                   double x, double y, double z, bint use3) nogil:
    cdef double norm, g, v0, v1, v2, vn, beta, s
    cdef int j, i, jlo, iend
    norm = fabs(x) + fabs(y)
    if use3:
        norm += fabs(z)
    if norm == 0.0:
        return
    x /= norm
    y /= norm
    z = z / norm if use3 else 0.0
    g = sqrt(x * x + y * y + z * z)
    if x > 0.0:
        g = -g
    v0 = x - g
    v1 = y
    v2 = z
    vn = v0 * v0 + v1 * v1 + v2 * v2
    if vn == 0.0:
        return
    beta = 2.0 / vn
    jlo = k - 1
    if lo > jlo:
        jlo = lo
    for j in range(jlo, n):
        s = v0 * h[k * n + j] + v1 * h[(k + 1) * n + j]
        if use3:
            s += v2 * h[(k + 2) * n + j]
        s *= beta
        h[k * n + j] -= s * v0
        h[(k + 1) * n + j] -= s * v1
        if use3:
            h[(k + 2) * n + j] -= s * v2
    iend = k + 3
    if hi < iend:
        iend = hi
    iend += 1
    for i in range(iend):
        s = h[i * n + k] * v0 + h[i * n + k + 1] * v1
        if use3:
            s += h[i * n + k + 2] * v2
        s *= beta
        h[i * n + k] -= s * v0
        h[i * n + k + 1] -= s * v1
        if use3:
            h[i * n + k + 2] -= s * v2


cdef int _quasi_schur_count(double *h, double *v, int n,
                            double *wr, double *wi) nogil:
    """Returns real-eigenvalue count, -1 on convergence failure.
    Eigenvalues land in (wr, wi) in deflation order."""
    cdef int hi, lo, k, total_iter, max_iter, stall, real_count, nfound
    cdef double small, a11, a12, a21, a22, p, q, sq, lam1, lam2, s, tr, det, x, y, z
    cdef bint use3
    if n == 1:
        wr[0] = h[0]
        wi[0] = 0.0
        return 1
    _hessenberg(h, v, n)
    real_count = 0
    nfound = 0
    total_iter = 0
    max_iter = 30 * n
    hi = n - 1
    stall = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            small = _EPS * (fabs(h[(lo - 1) * n + lo - 1]) + fabs(h[lo * n + lo]))
            if fabs(h[lo * n + lo - 1]) <= small:
                h[lo * n + lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            wr[nfound] = h[hi * n + hi]
            wi[nfound] = 0.0
            nfound += 1
            real_count += 1
            hi -= 1
            stall = 0
            continue
        if lo == hi - 1:
            a11 = h[(hi - 1) * n + hi - 1]
            a12 = h[(hi - 1) * n + hi]
            a21 = h[hi * n + hi - 1]
            a22 = h[hi * n + hi]
            p = 0.5 * (a11 - a22)
            q = p * p + a12 * a21
            if q >= 0.0:
                sq = sqrt(q)
                lam1 = a22 + p + (sq if p >= 0.0 else -sq)
                if lam1 != 0.0:
                    lam2 = (a11 * a22 - a12 * a21) / lam1
                else:
                    lam2 = a22 + p - (sq if p >= 0.0 else -sq)
                wr[nfound] = lam1
                wi[nfound] = 0.0
                wr[nfound + 1] = lam2
                wi[nfound + 1] = 0.0
                real_count += 2
            else:
                sq = sqrt(-q)
                wr[nfound] = a22 + p
                wi[nfound] = sq
                wr[nfound + 1] = a22 + p
                wi[nfound + 1] = -sq
            nfound += 2
            hi -= 2
            stall = 0
            continue
        if total_iter >= max_iter:
            return -1
        if stall > 0 and stall % 10 == 0:
            s = fabs(h[hi * n + hi - 1]) + fabs(h[(hi - 1) * n + hi - 2])
            tr = 1.5 * s
            det = -0.4375 * s * s
        else:
            tr = h[(hi - 1) * n + hi - 1] + h[hi * n + hi]
            det = h[(hi - 1) * n + hi - 1] * h[hi * n + hi] - h[(hi - 1) * n + hi] * h[hi * n + hi - 1]
        x = h[lo * n + lo] * h[lo * n + lo] + h[lo * n + lo + 1] * h[(lo + 1) * n + lo] - tr * h[lo * n + lo] + det
        y = h[(lo + 1) * n + lo] * (h[lo * n + lo] + h[(lo + 1) * n + lo + 1] - tr)
        z = h[(lo + 2) * n + lo + 1] * h[(lo + 1) * n + lo] if lo + 2 <= hi else 0.0
        for k in range(lo, hi):
            use3 = k + 2 <= hi
            _reflect(h, n, lo, hi, k, x, y, z, use3)
            if k > lo:
                h[(k + 1) * n + k - 1] = 0.0
                if use3:
                    h[(k + 2) * n + k - 1] = 0.0
            if k < hi - 1:
                x = h[(k + 1) * n + k]
                y = h[(k + 2) * n + k]
                z = h[(k + 3) * n + k] if k + 3 <= hi else 0.0
        total_iter += 1
        stall += 1
    return real_count


def count_real_eigs(double[:, ::1] A):
    """(structural real count, eigenvalues) of a real square matrix."""
    cdef int n = A.shape[0]
    cdef cnp.ndarray[double, ndim=1] h = np.array(A, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] v = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] wr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] wi = np.empty(n)
    cdef int cnt = _quasi_schur_count(&h[0], &v[0], n, &wr[0], &wi[0])
    if cnt < 0:
        raise RuntimeError(f"Francis iteration failed to converge; matrix:\n{np.asarray(A)!r}")
    eigs = [complex(wr[i], wi[i]) for i in range(n)]
    return cnt, eigs


def run_mc_kernel(int n, double tau, long trials, object seed):
    """Histogram over the real-eigenvalue count m for ``trials`` samples."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hist = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] g = np.empty(n * n)
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n * n)
    cdef cnp.ndarray[double, ndim=1] v = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] wr = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] wi = np.empty(n)
    cdef bitgen_t *rng
    cdef long t
    cdef int cnt
    for t in range(trials):
        bg = np.random.Philox(counter=[0, 0, 0, t], key=seed)
        capsule = bg.capsule
        if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
            raise ValueError("invalid bit generator capsule")
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)
        with nogil:
            _polar_fill(rng, &g[0], n * n)
            _build_elliptic(&g[0], &x[0], n, tau)
            cnt = _quasi_schur_count(&x[0], &v[0], n, &wr[0], &wi[0])
        if cnt < 0:
            raise RuntimeError(f"Francis convergence failure in trial {t}")
        hist[cnt] += 1
    return hist


def sample_matrix_kernel(int n, double tau, object seed, long trial):
    cdef cnp.ndarray[double, ndim=1] g = np.empty(n * n)
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n * n)
    cdef bitgen_t *rng
    bg = np.random.Philox(counter=[0, 0, 0, trial], key=seed)
    capsule = bg.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("invalid bit generator capsule")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)
    _polar_fill(rng, &g[0], n * n)
    _build_elliptic(&g[0], &x[0], n, tau)
    return x.reshape(n, n).copy()
