"""Pure numpy reference kernels (fallback when the extension is not built)."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def echelon_inplace(a: np.ndarray, ncols: int, reduced: bool = False) -> np.ndarray:
    """Row-reduce a packed GF(2) matrix in place; return pivot columns."""
    nrows = a.shape[0]
    r = 0
    pivots: list[int] = []
    one = np.uint64(1)
    for c in range(ncols):
        if r >= nrows:
            break
        w = c >> 6
        bit = one << np.uint64(c & 63)
        hits = np.flatnonzero(a[r:, w] & bit)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            a[[r, p], w:] = a[[p, r], w:]
        if reduced:
            rows = np.flatnonzero(a[:, w] & bit)
            rows = rows[rows != r]
        else:
            rows = r + 1 + np.flatnonzero(a[r + 1:, w] & bit)
        if rows.size:
            a[rows, w:] ^= a[r, w:]
        pivots.append(c)
        r += 1
    return np.asarray(pivots, dtype=np.int64)


def _phi(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 1e-12, 40.0)
    return np.log((np.exp(x) + 1.0) / (np.exp(x) - 1.0))


def _check_update(mu, ptr, syn, clip):
    m = ptr.size - 1
    deg = np.diff(ptr)
    owner = np.repeat(np.arange(m), deg)
    ph = _phi(np.abs(mu))
    ssum = np.add.reduceat(ph, ptr[:-1]) if mu.size else np.zeros(m)
    ssum[deg == 0] = 0.0
    neg = (mu < 0).astype(np.int64)
    par = np.zeros(m, dtype=np.int64)
    np.add.at(par, owner, neg)
    par = (par + syn) & 1
    mag = np.minimum(_phi(ssum[owner] - ph), clip)
    sign = par[owner] ^ neg
    return np.where(sign == 1, -mag, mag)


def bp_flood(xptr, xvar, zptr, zvar, vxptr, vxedge, vzptr, vzedge,
             sx, sz, n, p, max_iter, clip):
    """Flooding BP; same contract as the compiled kernel."""
    xvar = np.asarray(xvar)
    zvar = np.asarray(zvar)
    sx = np.asarray(sx, dtype=np.int64)
    sz = np.asarray(sz, dtype=np.int64)
    lam_x = np.zeros(xvar.size)
    lam_z = np.zeros(zvar.size)
    Lx = np.zeros(n)
    Lz = np.zeros(n)
    q0, q1 = 1.0 - p, p / 3.0
    lp_i, lp_o = np.log(1.0 - p), np.log(p / 3.0)
    xhat = np.zeros(n, dtype=np.uint8)
    zhat = np.zeros(n, dtype=np.uint8)
    ok = False
    used = 0

    def weights():
        return np.stack([np.full(n, lp_i), lp_o - Lx, lp_o - Lz, lp_o - Lx - Lz], axis=1)

    for it in range(1, max_iter + 1):
        used = it
        tx = np.exp(-Lx)
        gx = np.log(q0 + q1 * tx) - np.log(q1 * (1.0 + tx))
        tz = np.exp(-Lz)
        gz = np.log(q0 + q1 * tz) - np.log(q1 * (1.0 + tz))
        mu_x = Lz[xvar] - lam_x + gx[xvar]
        mu_z = Lx[zvar] - lam_z + gz[zvar]
        lam_x = _check_update(mu_x, np.asarray(xptr), sx, clip)
        lam_z = _check_update(mu_z, np.asarray(zptr), sz, clip)
        Lz = np.bincount(xvar, weights=lam_x, minlength=n)
        Lx = np.bincount(zvar, weights=lam_z, minlength=n)
        best = np.argmax(weights(), axis=1)
        xhat = ((best == 1) | (best == 3)).astype(np.uint8)
        zhat = ((best == 2) | (best == 3)).astype(np.uint8)
        rx = np.zeros(sx.size, dtype=np.int64)
        np.add.at(rx, np.repeat(np.arange(sx.size), np.diff(xptr)), zhat[xvar])
        rz = np.zeros(sz.size, dtype=np.int64)
        np.add.at(rz, np.repeat(np.arange(sz.size), np.diff(zptr)), xhat[zvar])
        if not ((rx + sx) & 1).any() and not ((rz + sz) & 1).any():
            ok = True
            break
    w = weights()
    w = np.exp(w - w.max(axis=1, keepdims=True))
    post = w / w.sum(axis=1, keepdims=True)
    return xhat, zhat, post, ok, used
