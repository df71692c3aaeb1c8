# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled criterion kernels.

Same contracts as ``_pykernels``. Work is split over independent output
points (directions or latitude rows), so results do not depend on the thread
count. Pair totals use Neumaier-compensated summation.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, parallel
from libc.math cimport acos, atan2, ceil, floor, hypot, cos, sin, fabs, M_PI
from libc.stdlib cimport malloc, free, calloc

cnp.import_array()

BACKEND = "cython"

cdef double NEAR_ONE = 1e-9


cdef inline double _dot(const double[:, ::1] u, Py_ssize_t e,
                        const double[:, ::1] b, Py_ssize_t p, Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t h
    for h in range(d):
        acc = acc + u[e, h] * b[p, h]
    return acc


cdef inline double _side(const long long[::1] ptr, Py_ssize_t q,
                         const double[:, ::1] u, const double[:, ::1] u2, bint two,
                         const double[::1] w, const double[:, ::1] b, Py_ssize_t p,
                         Py_ssize_t d) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t e
    for e in range(ptr[q], ptr[q + 1]):
        if _dot(u, e, b, p, d) <= 0.0:
            if two:
                if _dot(u2, e, b, p, d) > 0.0:
                    continue
            s = s + w[e]
    return s


def criterion_totals(betas, k_ptr, k_u, k_u2, k_w, l_ptr, l_u, l_u2, l_w, int num_threads=1):
    cdef const double[:, ::1] B = np.ascontiguousarray(betas, dtype=np.float64)
    cdef const long long[::1] kp = np.ascontiguousarray(k_ptr, dtype=np.int64)
    cdef const long long[::1] lp = np.ascontiguousarray(l_ptr, dtype=np.int64)
    cdef const double[:, ::1] ku = np.ascontiguousarray(k_u, dtype=np.float64)
    cdef const double[:, ::1] lu = np.ascontiguousarray(l_u, dtype=np.float64)
    cdef bint two = k_u2 is not None
    cdef const double[:, ::1] ku2 = np.ascontiguousarray(k_u2 if two else k_u, dtype=np.float64)
    cdef const double[:, ::1] lu2 = np.ascontiguousarray(l_u2 if two else l_u, dtype=np.float64)
    cdef const double[::1] kw = np.ascontiguousarray(k_w, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(l_w, dtype=np.float64)
    cdef Py_ssize_t P = B.shape[0]
    cdef Py_ssize_t d = B.shape[1]
    cdef Py_ssize_t n_pairs = kp.shape[0] - 1
    out_arr = np.zeros(P, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t p, q
    cdef double total, comp, term, t, s1, s2
    if n_pairs <= 0 or P == 0:
        return out_arr
    if num_threads < 1:
        num_threads = 1
    for p in prange(P, nogil=True, schedule="static", num_threads=num_threads):
        total = 0.0
        comp = 0.0
        for q in range(n_pairs):
            s1 = _side(kp, q, ku, ku2, two, kw, B, p, d)
            if s1 == 0.0:
                continue
            s2 = _side(lp, q, lu, lu2, two, lw, B, p, d)
            term = s1 * s2
            t = total + term
            if fabs(total) >= fabs(term):
                comp = comp + ((total - t) + term)
            else:
                comp = comp + ((term - t) + total)
            total = t
        out[p] = total + comp
    return out_arr


cdef inline bint _exact3(const double[:, ::1] u, Py_ssize_t e,
                         const double[:, ::1] b, Py_ssize_t j) noexcept nogil:
    return (u[e, 0] * b[j, 0] + u[e, 1] * b[j, 1] + u[e, 2] * b[j, 2]) <= 0.0


cdef inline Py_ssize_t _mod(long long a, long long L) noexcept nogil:
    cdef long long r = a % L
    if r < 0:
        r += L
    return <Py_ssize_t>r


cdef void _row_side(double theta1, double theta0, Py_ssize_t L,
                    const double[:, ::1] rb, const long long[::1] ptr, Py_ssize_t q,
                    const double[:, ::1] u, const double[::1] w,
                    double* diff, double* point, double* S) noexcept nogil:
    # S receives L + 1 column totals for pair q on this row
    cdef Py_ssize_t e, j, m, k2
    cdef double h = 2.0 * M_PI / L
    cdef double c1 = cos(theta1)
    cdef double s1 = sin(theta1)
    cdef double r, C, c, phi, alpha, ta, tb, wt, running, last_sum = 0.0
    cdef long long ja, jb, count, start, stop
    cdef long long cand[4]
    cdef Py_ssize_t col
    cdef bint pred, truth, dup
    for j in range(L + 1):
        diff[j] = 0.0
    for j in range(L):
        point[j] = 0.0
    for e in range(ptr[q], ptr[q + 1]):
        wt = w[e]
        if _exact3(u, e, rb, L):
            last_sum = last_sum + wt
        r = hypot(u[e, 0], u[e, 1]) * c1
        C = u[e, 2] * s1
        if r == 0.0 or c1 <= 0.0:
            if u[e, 0] == 0.0 and u[e, 1] == 0.0:
                # constant along the row: 0*b1 + 0*b2 + u3*b3 is exact
                if _exact3(u, e, rb, 0):
                    diff[0] += wt
                    diff[L] -= wt
            else:
                for j in range(L):
                    if _exact3(u, e, rb, j):
                        point[j] += wt
            continue
        c = -C / r
        if fabs(fabs(c) - 1.0) < NEAR_ONE:
            for j in range(L):
                if _exact3(u, e, rb, j):
                    point[j] += wt
            continue
        if c >= 1.0:
            diff[0] += wt
            diff[L] -= wt
            continue
        if c <= -1.0:
            continue
        phi = atan2(u[e, 1], u[e, 0])
        alpha = acos(c)
        ta = (phi + alpha - theta0) / h
        tb = ta + (2.0 * M_PI - 2.0 * alpha) / h
        ja = <long long>ceil(ta)
        jb = <long long>floor(tb)
        count = jb - ja + 1
        if count < 0:
            count = 0
        if count > L:
            count = L
        start = _mod(ja, L)
        stop = start + count
        if stop <= L:
            diff[start] += wt
            diff[stop] -= wt
        else:
            diff[start] += wt
            diff[L] -= wt
            diff[0] += wt
            diff[stop - L] -= wt
        cand[0] = _mod(ja - 1, L)
        cand[1] = _mod(ja, L)
        cand[2] = _mod(jb, L)
        cand[3] = _mod(jb + 1, L)
        for m in range(4):
            dup = False
            for k2 in range(m):
                if cand[k2] == cand[m]:
                    dup = True
            if dup:
                continue
            col = <Py_ssize_t>cand[m]
            pred = _mod(col - start, L) < count
            truth = _exact3(u, e, rb, col)
            if truth and not pred:
                point[col] += wt
            elif pred and not truth:
                point[col] -= wt
    running = 0.0
    for j in range(L):
        running = running + diff[j]
        S[j] = running + point[j]
    S[L] = last_sum


def sweep_totals_s2(theta1, double theta0, Py_ssize_t L, grid_betas,
                    k_ptr, k_u, k_w, l_ptr, l_u, l_w, int num_threads=1):
    cdef const double[::1] T1 = np.ascontiguousarray(theta1, dtype=np.float64)
    cdef const double[:, :, ::1] G = np.ascontiguousarray(grid_betas, dtype=np.float64)
    cdef const long long[::1] kp = np.ascontiguousarray(k_ptr, dtype=np.int64)
    cdef const long long[::1] lp = np.ascontiguousarray(l_ptr, dtype=np.int64)
    cdef const double[:, ::1] ku = np.ascontiguousarray(k_u, dtype=np.float64)
    cdef const double[:, ::1] lu = np.ascontiguousarray(l_u, dtype=np.float64)
    cdef const double[::1] kw = np.ascontiguousarray(k_w, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(l_w, dtype=np.float64)
    cdef Py_ssize_t R = T1.shape[0]
    cdef Py_ssize_t n_pairs = kp.shape[0] - 1
    out_arr = np.zeros((R, L + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, q, j
    cdef double *buf
    cdef double *diff
    cdef double *point
    cdef double *Sk
    cdef double *Sl
    cdef double *comp
    cdef double term, t, tot
    if n_pairs <= 0 or R == 0:
        return out_arr
    if num_threads < 1:
        num_threads = 1
    with nogil, parallel(num_threads=num_threads):
        buf = <double*>malloc((6 * (L + 1) + 8) * sizeof(double))
        diff = buf
        point = buf + (L + 1)
        Sk = buf + 2 * (L + 1)
        Sl = buf + 3 * (L + 1)
        comp = buf + 4 * (L + 1)
        for r in prange(R, schedule="static"):
            for j in range(L + 1):
                comp[j] = 0.0
            for q in range(n_pairs):
                _row_side(T1[r], theta0, L, G[r], kp, q, ku, kw, diff, point, Sk)
                _row_side(T1[r], theta0, L, G[r], lp, q, lu, lw, diff, point, Sl)
                for j in range(L + 1):
                    term = Sk[j] * Sl[j]
                    tot = out[r, j]
                    t = tot + term
                    if fabs(tot) >= fabs(term):
                        comp[j] = comp[j] + ((tot - t) + term)
                    else:
                        comp[j] = comp[j] + ((term - t) + tot)
                    out[r, j] = t
            for j in range(L + 1):
                out[r, j] = out[r, j] + comp[j]
        free(buf)
    return out_arr
