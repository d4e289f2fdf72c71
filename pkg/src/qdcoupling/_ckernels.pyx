# cython: language_level=3
"""Compiled versions of the hot kernels in ``_pykernels``.

Same signatures and semantics; the polarization kernel diagonalizes each 4x4
Hamiltonian with cyclic Jacobi rotations instead of LAPACK.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, fabs

cnp.import_array()

cdef double[4] _ZL = [1.0, 1.0, -1.0, -1.0]
cdef double[4] _ZR = [1.0, -1.0, 1.0, -1.0]


cdef void _jacobi4(double a[4][4], double v[4][4], double d[4]) noexcept nogil:
    cdef int p, q, k, sweep
    cdef double off, scale, theta, t, c, s, akp, akq, apk, aqk
    for p in range(4):
        for q in range(4):
            v[p][q] = 1.0 if p == q else 0.0
    scale = 0.0
    for p in range(4):
        for q in range(4):
            scale += a[p][q] * a[p][q]
    for sweep in range(50):
        off = 0.0
        for p in range(3):
            for q in range(p + 1, 4):
                off += a[p][q] * a[p][q]
        if off <= 1e-34 * scale:
            break
        for p in range(3):
            for q in range(p + 1, 4):
                if a[p][q] == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q])
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(4):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(4):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                for k in range(4):
                    akp = v[k][p]
                    akq = v[k][q]
                    v[k][p] = c * akp - s * akq
                    v[k][q] = s * akp + c * akq
    for p in range(4):
        d[p] = a[p][p]


def polarization_grid(const double[::1] eps_l, const double[::1] eps_r,
                      double t_l, double t_r, double g, double kt):
    cdef Py_ssize_t n = eps_l.shape[0]
    out_l = np.empty(n)
    out_r = np.empty(n)
    cdef double[::1] pl = out_l
    cdef double[::1] pr = out_r
    cdef double a[4][4]
    cdef double v[4][4]
    cdef double d[4]
    cdef double w[4]
    cdef double emin, z, sl, sr, prob
    cdef Py_ssize_t idx
    cdef int i, k
    with nogil:
        for idx in range(n):
            for i in range(4):
                for k in range(4):
                    a[i][k] = 0.0
            a[0][0] = 0.5 * eps_l[idx] + 0.5 * eps_r[idx]
            a[1][1] = 0.5 * eps_l[idx] - 0.5 * eps_r[idx]
            a[2][2] = -0.5 * eps_l[idx] + 0.5 * eps_r[idx]
            a[3][3] = -0.5 * eps_l[idx] - 0.5 * eps_r[idx] + g
            a[0][2] = t_l
            a[2][0] = t_l
            a[1][3] = t_l
            a[3][1] = t_l
            a[0][1] = t_r
            a[1][0] = t_r
            a[2][3] = t_r
            a[3][2] = t_r
            _jacobi4(a, v, d)
            emin = d[0]
            for i in range(1, 4):
                if d[i] < emin:
                    emin = d[i]
            z = 0.0
            for i in range(4):
                w[i] = exp(-(d[i] - emin) / kt)
                z += w[i]
            sl = 0.0
            sr = 0.0
            for i in range(4):
                for k in range(4):
                    prob = v[k][i] * v[k][i]
                    sl += w[i] * prob * _ZL[k]
                    sr += w[i] * prob * _ZR[k]
            pl[idx] = sl / z
            pr[idx] = sr / z
    return out_l, out_r


def occupation_grid(const double[:, ::1] configs, const double[::1] quad,
                    const double[:, ::1] lin, double kt):
    cdef Py_ssize_t n = lin.shape[0]
    cdef Py_ssize_t m = configs.shape[0]
    ground_arr = np.empty(n, dtype=np.int64)
    mean_arr = np.empty((n, 4))
    cdef cnp.int64_t[::1] ground = ground_arr
    cdef double[:, ::1] mean = mean_arr
    cdef Py_ssize_t p, j, best
    cdef double acc, e, emin, w, z, m0, m1, m2, m3
    # configurations 50 kT or more above the ground state are dropped
    with nogil:
        for p in range(n):
            best = 0
            emin = 0.0
            for j in range(m):
                acc = configs[j, 0] * lin[p, 0]
                acc = acc + configs[j, 1] * lin[p, 1]
                acc = acc + configs[j, 2] * lin[p, 2]
                acc = acc + configs[j, 3] * lin[p, 3]
                e = quad[j] - acc
                if j == 0 or e < emin:
                    emin = e
                    best = j
            ground[p] = best
            if kt > 0:
                z = 0.0
                m0 = 0.0
                m1 = 0.0
                m2 = 0.0
                m3 = 0.0
                for j in range(m):
                    acc = configs[j, 0] * lin[p, 0]
                    acc = acc + configs[j, 1] * lin[p, 1]
                    acc = acc + configs[j, 2] * lin[p, 2]
                    acc = acc + configs[j, 3] * lin[p, 3]
                    e = (quad[j] - acc - emin) / kt
                    if e >= 50.0:
                        continue
                    w = exp(-e)
                    z += w
                    m0 += w * configs[j, 0]
                    m1 += w * configs[j, 1]
                    m2 += w * configs[j, 2]
                    m3 += w * configs[j, 3]
                mean[p, 0] = m0 / z
                mean[p, 1] = m1 / z
                mean[p, 2] = m2 / z
                mean[p, 3] = m3 / z
            else:
                mean[p, 0] = configs[best, 0]
                mean[p, 1] = configs[best, 1]
                mean[p, 2] = configs[best, 2]
                mean[p, 3] = configs[best, 3]
    return ground_arr, mean_arr


def bem_potential(const double[::1] x, const double[::1] y,
                  const double[::1] radius_eq, double depth, bint screened):
    cdef Py_ssize_t n = x.shape[0]
    out = np.empty((n, n))
    cdef double[:, ::1] p = out
    cdef Py_ssize_t i, j
    cdef double dx, dy, r2, four_h2 = 4.0 * depth * depth
    with nogil:
        for i in range(n):
            for j in range(n):
                dx = x[i] - x[j]
                dy = y[i] - y[j]
                r2 = dx * dx + dy * dy
                if i == j:
                    p[i, j] = 2.0 / radius_eq[i]
                else:
                    p[i, j] = 1.0 / sqrt(r2)
                if screened:
                    p[i, j] = p[i, j] - 1.0 / sqrt(r2 + four_h2)
    return out
