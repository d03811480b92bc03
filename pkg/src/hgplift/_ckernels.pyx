# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: packed GF(2) elimination and flooding BP.

Both functions mirror ``hgplift._pykernels`` exactly in contract; the pure
module is the reference and the test suite cross-checks the two.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.math cimport exp, log, fabs, tanh

cnp.import_array()

BACKEND = "cython"


def echelon_inplace(uint64_t[:, ::1] a, Py_ssize_t ncols, bint reduced=False):
    """Row-reduce a packed GF(2) matrix in place; return pivot columns.

    Rows are bit-packed little-endian in 64-bit words.  With ``reduced`` the
    result is the reduced row echelon form.
    """
    cdef Py_ssize_t nrows = a.shape[0]
    cdef Py_ssize_t nwords = a.shape[1]
    cdef Py_ssize_t r = 0, c, w, p, i, k
    cdef uint64_t bit, tmp
    pivots = []
    for c in range(ncols):
        if r >= nrows:
            break
        w = c >> 6
        bit = (<uint64_t>1) << (c & 63)
        p = -1
        for i in range(r, nrows):
            if a[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(w, nwords):
                tmp = a[p, k]
                a[p, k] = a[r, k]
                a[r, k] = tmp
        if reduced:
            for i in range(nrows):
                if i != r and (a[i, w] & bit):
                    for k in range(w, nwords):
                        a[i, k] ^= a[r, k]
        else:
            for i in range(r + 1, nrows):
                if a[i, w] & bit:
                    for k in range(w, nwords):
                        a[i, k] ^= a[r, k]
        pivots.append(c)
        r += 1
    return np.asarray(pivots, dtype=np.int64)


cdef inline double _phi(double x) nogil:
    if x < 1e-12:
        x = 1e-12
    elif x > 40.0:
        x = 40.0
    return log((exp(x) + 1.0) / (exp(x) - 1.0))


def bp_flood(
    const int64_t[::1] xptr, const int64_t[::1] xvar,
    const int64_t[::1] zptr, const int64_t[::1] zvar,
    const int64_t[::1] vxptr, const int64_t[::1] vxedge,
    const int64_t[::1] vzptr, const int64_t[::1] vzedge,
    const uint8_t[::1] sx, const uint8_t[::1] sz,
    Py_ssize_t n, double p, Py_ssize_t max_iter, double clip,
):
    """Flooding BP over the X-check (z-bit) and Z-check (x-bit) graphs.

    Returns ``(xhat, zhat, posterior, converged, iterations)``.
    """
    cdef Py_ssize_t mx = xptr.shape[0] - 1
    cdef Py_ssize_t mz = zptr.shape[0] - 1
    cdef Py_ssize_t ex = xvar.shape[0]
    cdef Py_ssize_t ez = zvar.shape[0]
    cdef double[::1] lam_x = np.zeros(ex)   # X-check -> var, z-bit LLR
    cdef double[::1] lam_z = np.zeros(ez)   # Z-check -> var, x-bit LLR
    cdef double[::1] mu_x = np.zeros(ex)
    cdef double[::1] mu_z = np.zeros(ez)
    cdef double[::1] ph_x = np.zeros(ex)
    cdef double[::1] ph_z = np.zeros(ez)
    cdef double[::1] Lz = np.zeros(n)
    cdef double[::1] Lx = np.zeros(n)
    post_arr = np.zeros((n, 4))
    cdef double[:, ::1] post = post_arr
    xhat_arr = np.zeros(n, dtype=np.uint8)
    zhat_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] xhat = xhat_arr
    cdef uint8_t[::1] zhat = zhat_arr
    cdef double lp_i = log(1.0 - p), lp_o = log(p / 3.0)
    cdef double q0 = 1.0 - p, q1 = p / 3.0
    cdef Py_ssize_t it, q, e, c, k, best
    cdef double t, g, tot, sgn, m, lw0, lw1, lw2, lw3, mx_w, ssum
    cdef int parity, neg
    cdef bint ok = False
    cdef Py_ssize_t used = 0
    for it in range(1, max_iter + 1):
        used = it
        # variable -> check
        for q in range(n):
            t = exp(-Lx[q])
            g = log(q0 + q1 * t) - log(q1 * (1.0 + t))
            for k in range(vxptr[q], vxptr[q + 1]):
                e = vxedge[k]
                mu_x[e] = Lz[q] - lam_x[e] + g
            t = exp(-Lz[q])
            g = log(q0 + q1 * t) - log(q1 * (1.0 + t))
            for k in range(vzptr[q], vzptr[q + 1]):
                e = vzedge[k]
                mu_z[e] = Lx[q] - lam_z[e] + g
        # check -> variable
        for c in range(mx):
            ssum = 0.0
            parity = sx[c]
            for e in range(xptr[c], xptr[c + 1]):
                ph_x[e] = _phi(fabs(mu_x[e]))
                ssum += ph_x[e]
                if mu_x[e] < 0:
                    parity ^= 1
            for e in range(xptr[c], xptr[c + 1]):
                m = _phi(ssum - ph_x[e])
                if m > clip:
                    m = clip
                neg = parity ^ (1 if mu_x[e] < 0 else 0)
                lam_x[e] = -m if neg else m
        for c in range(mz):
            ssum = 0.0
            parity = sz[c]
            for e in range(zptr[c], zptr[c + 1]):
                ph_z[e] = _phi(fabs(mu_z[e]))
                ssum += ph_z[e]
                if mu_z[e] < 0:
                    parity ^= 1
            for e in range(zptr[c], zptr[c + 1]):
                m = _phi(ssum - ph_z[e])
                if m > clip:
                    m = clip
                neg = parity ^ (1 if mu_z[e] < 0 else 0)
                lam_z[e] = -m if neg else m
        # totals and hard decision
        for q in range(n):
            tot = 0.0
            for k in range(vxptr[q], vxptr[q + 1]):
                tot += lam_x[vxedge[k]]
            Lz[q] = tot
            tot = 0.0
            for k in range(vzptr[q], vzptr[q + 1]):
                tot += lam_z[vzedge[k]]
            Lx[q] = tot
            lw0 = lp_i
            lw1 = lp_o - Lx[q]
            lw2 = lp_o - Lz[q]
            lw3 = lp_o - Lx[q] - Lz[q]
            best = 0
            mx_w = lw0
            if lw1 > mx_w:
                best = 1
                mx_w = lw1
            if lw2 > mx_w:
                best = 2
                mx_w = lw2
            if lw3 > mx_w:
                best = 3
                mx_w = lw3
            xhat[q] = 1 if (best == 1 or best == 3) else 0
            zhat[q] = 1 if (best == 2 or best == 3) else 0
        ok = True
        for c in range(mx):
            parity = sx[c]
            for e in range(xptr[c], xptr[c + 1]):
                parity ^= zhat[xvar[e]]
            if parity:
                ok = False
                break
        if ok:
            for c in range(mz):
                parity = sz[c]
                for e in range(zptr[c], zptr[c + 1]):
                    parity ^= xhat[zvar[e]]
                if parity:
                    ok = False
                    break
        if ok:
            break
    for q in range(n):
        lw0 = lp_i
        lw1 = lp_o - Lx[q]
        lw2 = lp_o - Lz[q]
        lw3 = lp_o - Lx[q] - Lz[q]
        mx_w = lw0
        if lw1 > mx_w:
            mx_w = lw1
        if lw2 > mx_w:
            mx_w = lw2
        if lw3 > mx_w:
            mx_w = lw3
        lw0 = exp(lw0 - mx_w)
        lw1 = exp(lw1 - mx_w)
        lw2 = exp(lw2 - mx_w)
        lw3 = exp(lw3 - mx_w)
        tot = lw0 + lw1 + lw2 + lw3
        post[q, 0] = lw0 / tot
        post[q, 1] = lw1 / tot
        post[q, 2] = lw2 / tot
        post[q, 3] = lw3 / tot
    return xhat_arr, zhat_arr, post_arr, bool(ok), used
