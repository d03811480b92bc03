"""GF(2) linear algebra over sparse-row binary matrices.

The canonical external form is a list of sorted column-index rows.  All
elimination runs on bit-packed 64-bit words through the kernels selected in
:mod:`hgplift._backend`.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hgplift._backend import kernels

MAX_ENUM_CORANK = 16


@dataclass(frozen=True)
class BitVec:
    length: int
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        sup = tuple(int(i) for i in self.support)
        object.__setattr__(self, "support", sup)
        if any(b <= a for a, b in zip(sup, sup[1:])):
            raise ValueError("BitVec support must be strictly increasing")
        if sup and (sup[0] < 0 or sup[-1] >= self.length):
            raise ValueError("BitVec index out of range")

    @classmethod
    def zeros(cls, length: int) -> BitVec:
        return cls(length, ())

    @classmethod
    def from_dense(cls, bits: Iterable[int]) -> BitVec:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        return cls(int(arr.size), tuple(int(i) for i in np.flatnonzero(arr & 1)))

    @classmethod
    def unit(cls, length: int, i: int) -> BitVec:
        return cls(length, (i,))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.uint8)
        out[list(self.support)] = 1
        return out

    def to_int(self) -> int:
        x = 0
        for i in self.support:
            x |= 1 << i
        return x

    @property
    def weight(self) -> int:
        return len(self.support)

    def __xor__(self, other: BitVec) -> BitVec:
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitVec(self.length, tuple(sorted(set(self.support) ^ set(other.support))))

    def __bool__(self) -> bool:
        return bool(self.support)


@dataclass(frozen=True)
class BitMatrix:
    n_rows: int
    n_cols: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(c) for c in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.n_rows:
            raise ValueError(f"expected {self.n_rows} rows, got {len(rows)}")
        for r in rows:
            if any(b <= a for a, b in zip(r, r[1:])):
                raise ValueError("row indices must be strictly increasing")
            if r and (r[0] < 0 or r[-1] >= self.n_cols):
                raise ValueError("column index out of range")

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable[int]], n_cols: int | None = None) -> BitMatrix:
        clean = [tuple(sorted(set(int(c) for c in r))) for r in rows]
        if n_cols is None:
            n_cols = max((r[-1] for r in clean if r), default=-1) + 1
        return cls(len(clean), n_cols, tuple(clean))

    @classmethod
    def from_dense(cls, a: np.ndarray | Sequence[Sequence[int]]) -> BitMatrix:
        arr = np.asarray(a, dtype=np.int64) & 1
        if arr.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        return cls(arr.shape[0], arr.shape[1], tuple(tuple(np.flatnonzero(r).tolist()) for r in arr))

    @classmethod
    def identity(cls, s: int) -> BitMatrix:
        return cls(s, s, tuple((i,) for i in range(s)))

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> BitMatrix:
        return cls(n_rows, n_cols, tuple(() for _ in range(n_rows)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i, list(r)] = 1
        return out

    def packed(self) -> np.ndarray:
        return pack_rows(self.rows, self.n_cols)

    def transpose(self) -> BitMatrix:
        return BitMatrix(self.n_cols, self.n_rows, tuple(tuple(r) for r in self.col_supports()))

    @property
    def T(self) -> BitMatrix:
        return self.transpose()

    def col_supports(self) -> list[list[int]]:
        cols: list[list[int]] = [[] for _ in range(self.n_cols)]
        for i, r in enumerate(self.rows):
            for c in r:
                cols[c].append(i)
        return cols

    def row_weights(self) -> list[int]:
        return [len(r) for r in self.rows]

    def col_weights(self) -> list[int]:
        w = [0] * self.n_cols
        for r in self.rows:
            for c in r:
                w[c] += 1
        return w

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def permute(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> BitMatrix:
        """Row ``i`` of the result is row ``row_perm[i]``; column ``c`` moves to ``col_perm[c]``."""
        rows = [sorted(col_perm[c] for c in self.rows[i]) for i in row_perm]
        return BitMatrix(self.n_rows, self.n_cols, tuple(tuple(r) for r in rows))

    def to_json(self) -> dict:
        return {"n_rows": self.n_rows, "n_cols": self.n_cols, "rows": [list(r) for r in self.rows]}


def pack_rows(rows: Sequence[Sequence[int]], n_cols: int) -> np.ndarray:
    """Bit-pack sparse rows into an ``(n_rows, ceil(n_cols/64))`` uint64 array."""
    nwords = max(1, (n_cols + 63) // 64)
    out = np.zeros((len(rows), nwords), dtype=np.uint64)
    lens = [len(r) for r in rows]
    if sum(lens):
        ri = np.repeat(np.arange(len(rows)), lens)
        ci = np.fromiter((c for r in rows for c in r), dtype=np.int64, count=sum(lens))
        np.bitwise_or.at(out, (ri, ci >> 6), np.left_shift(np.uint64(1), (ci & 63).astype(np.uint64)))
    return out


def pack_vec(v: BitVec | np.ndarray, n_cols: int) -> np.ndarray:
    sup = v.support if isinstance(v, BitVec) else np.flatnonzero(v)
    return pack_rows([list(sup)], n_cols)[0]


def unpack_row(words: np.ndarray, n_cols: int) -> np.ndarray:
    """Dense 0/1 uint8 vector from one packed row."""
    bits = np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")
    return bits[:n_cols]


def rank(m: BitMatrix) -> int:
    """Rank over GF(2)."""
    if m.n_rows == 0 or m.n_cols == 0:
        return 0
    a = m.packed()
    return int(kernels.echelon_inplace(a, m.n_cols, False).size)


def rref(m: BitMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Packed reduced row echelon form (nonzero rows only) and its pivot columns."""
    a = m.packed()
    piv = kernels.echelon_inplace(a, m.n_cols, True)
    return a[: piv.size].copy(), piv


def kernel_basis(m: BitMatrix) -> list[BitVec]:
    """Right null space basis, one vector per free column in ascending order."""
    n = m.n_cols
    if m.n_rows == 0:
        return [BitVec.unit(n, i) for i in range(n)]
    r, piv = rref(m)
    pivset = set(piv.tolist())
    dense = np.stack([unpack_row(row, n) for row in r]) if piv.size else np.zeros((0, n), np.uint8)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        sup = {f}
        for i, pc in enumerate(piv.tolist()):
            if dense[i, f]:
                sup.add(pc)
        basis.append(BitVec(n, tuple(sorted(sup))))
    return basis


def mul_vec(m: BitMatrix, v: BitVec) -> BitVec:
    """``M v`` over GF(2)."""
    if v.length != m.n_cols:
        raise ValueError(f"vector length {v.length} != n_cols {m.n_cols}")
    s = set(v.support)
    return BitVec(m.n_rows, tuple(i for i, r in enumerate(m.rows) if sum(1 for c in r if c in s) & 1))


class RowSpace:
    """Cached reduced basis of a row space for repeated membership tests."""

    def __init__(self, m: BitMatrix) -> None:
        self.n_cols = m.n_cols
        self.basis, self.pivots = rref(m)
        self._pw = self.pivots >> 6
        self._pb = np.left_shift(np.uint64(1), (self.pivots & 63).astype(np.uint64))

    @property
    def dim(self) -> int:
        return int(self.pivots.size)

    def reduce(self, words: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return words.copy()
        sel = (words[self._pw] & self._pb) != 0
        if not sel.any():
            return words.copy()
        return words ^ np.bitwise_xor.reduce(self.basis[sel], axis=0)

    def contains(self, v: BitVec | np.ndarray) -> bool:
        if isinstance(v, BitVec):
            if v.length != self.n_cols:
                raise ValueError("length mismatch")
            words = pack_vec(v, self.n_cols)
        else:
            words = np.asarray(v)
            if words.dtype != np.uint64:
                if words.size != self.n_cols:
                    raise ValueError("length mismatch")
                words = pack_vec(words, self.n_cols)
        return not self.reduce(words).any()


def row_space_contains(m: BitMatrix, v: BitVec) -> bool:
    """True iff ``v`` is a GF(2) combination of rows of ``m``."""
    if v.length != m.n_cols:
        raise ValueError(f"vector length {v.length} != n_cols {m.n_cols}")
    return RowSpace(m).contains(v)


def min_kernel_weight(m: BitMatrix, cap: int = MAX_ENUM_CORANK) -> int | None:
    """Minimum weight of a nonzero kernel vector by exhaustive span enumeration.

    Returns None when the kernel is trivial.  Raises ValueError when the
    kernel dimension exceeds ``cap``.
    """
    basis = kernel_basis(m)
    k = len(basis)
    if k == 0:
        return None
    if k > cap:
        raise ValueError(f"kernel dimension {k} exceeds enumeration cap {cap}")
    ints = [b.to_int() for b in basis]
    best = m.n_cols + 1
    x = 0
    # Gray code walk visits every nonzero combination once
    for i in range(1, 1 << k):
        x ^= ints[(i & -i).bit_length() - 1]
        w = x.bit_count()
        if w < best:
            best = w
    return best


def solve_packed(a: np.ndarray, n_vars: int) -> tuple[np.ndarray, list[np.ndarray]] | None:
    """Solve the augmented packed system ``[A | b]`` (b at column ``n_vars``).

    Returns ``(particular, null_basis)`` as dense uint8 vectors, or None when
    inconsistent.  ``a`` is modified in place.
    """
    piv = kernels.echelon_inplace(a, n_vars + 1, True)
    if piv.size and piv[-1] == n_vars:
        return None
    rows = [unpack_row(a[i], n_vars + 1) for i in range(piv.size)]
    x = np.zeros(n_vars, dtype=np.uint8)
    for i, pc in enumerate(piv.tolist()):
        x[pc] = rows[i][n_vars]
    pivset = set(piv.tolist())
    null = []
    for f in range(n_vars):
        if f in pivset:
            continue
        v = np.zeros(n_vars, dtype=np.uint8)
        v[f] = 1
        for i, pc in enumerate(piv.tolist()):
            if rows[i][f]:
                v[pc] = 1
        null.append(v)
    return x, null


def load_matrix(path: str | Path) -> BitMatrix:
    """Read a JSON rows file (bare array or ``{"n_cols", "rows"}`` wrapper)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        return BitMatrix.from_rows(data["rows"], data.get("n_cols"))
    return BitMatrix.from_rows(data)


def save_matrix(m: BitMatrix, path: str | Path, wrapped: bool = False) -> None:
    payload = m.to_json() if wrapped else [list(r) for r in m.rows]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
