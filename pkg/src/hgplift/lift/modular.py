"""Dense row reduction over Z_m with unit pivots."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np


@dataclass
class ModRref:
    """Reduced rows ``R`` (pivot entries 1, zero in other pivot columns).

    ``stuck`` holds rows that still have nonzero entries but no unit entry;
    over a prime field it is always empty.
    """

    mod: int
    rows: np.ndarray
    pivots: np.ndarray
    stuck: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.pivots.size)

    def free_columns(self, n_cols: int) -> np.ndarray:
        mask = np.ones(n_cols, dtype=bool)
        mask[self.pivots] = False
        return np.flatnonzero(mask)


def mod_rref(a: np.ndarray, mod: int) -> ModRref:
    """Gauss-Jordan elimination of ``a`` modulo ``mod`` using unit pivots only.

    Entries must satisfy ``mod**2 < 2**62``.  The input is copied.
    """
    if mod < 2:
        raise ValueError("modulus must be at least 2")
    a = np.array(a, dtype=np.int64) % mod
    n_rows, n_cols = a.shape
    units = np.array([gcd(v, mod) == 1 for v in range(mod)]) if mod <= 1 << 16 else None
    r = 0
    pivots: list[int] = []
    for c in range(n_cols):
        if r >= n_rows:
            break
        col = a[r:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        if units is None:
            cand = nz  # prime modulus: every nonzero entry is a unit
        else:
            cand = nz[units[col[nz]]]
            if cand.size == 0:
                continue
        p = r + int(cand[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        inv = pow(int(a[r, c]), -1, mod)
        if inv != 1:
            a[r] = a[r] * inv % mod
        hits = np.flatnonzero(a[:, c])
        hits = hits[hits != r]
        if hits.size:
            a[hits] = (a[hits] - a[hits, c:c + 1] * a[r]) % mod
        pivots.append(c)
        r += 1
    rest = a[r:]
    stuck = rest[rest.any(axis=1)]
    return ModRref(mod, a[:r].copy(), np.asarray(pivots, dtype=np.int64), stuck)


def kernel_sample(red: ModRref, n_cols: int, rng, frozen: np.ndarray | None = None) -> np.ndarray:
    """Uniform-ish random kernel vector: random free values, pivots solved.

    Free columns touched by ``stuck`` rows (or listed in ``frozen``) are held
    at zero so that every original equation stays satisfied.
    """
    x = np.zeros(n_cols, dtype=np.int64)
    free = red.free_columns(n_cols)
    hold = np.zeros(n_cols, dtype=bool)
    if red.stuck.size:
        hold |= red.stuck.any(axis=0)
    if frozen is not None:
        hold[frozen] = True
    free = free[~hold[free]]
    if free.size == 0:
        return x
    x[free] = [rng.randrange(red.mod) for _ in range(free.size)]
    if red.rank:
        x[red.pivots] = (-(red.rows[:, free] @ x[free])) % red.mod
    return x
