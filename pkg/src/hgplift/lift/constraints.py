"""Shift variables, zero congruences, and cycle-voltage constraints."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from scipy import sparse

from hgplift.hgp import CssCode
from hgplift.lift.modular import ModRref, mod_rref
from hgplift.tanner import OverlapGraph, iter_four_cycles, iter_row_cycles

Side = Literal["X", "Z"]
Term = tuple[int, Side, int, int]  # (sign, side, check row, column)

DEFAULT_PRIME = 1000003
DEFAULT_WEIGHTS = {"w4": 100, "w6": 10, "w8": 3, "w10": 8, "w12": 20}


class OddOverlapError(ValueError):
    def __init__(self, x_row: int, z_row: int, columns: list[int]) -> None:
        super().__init__(f"x-row {x_row} and z-row {z_row} overlap on odd set {columns}")
        self.witness = {"x_check": x_row, "z_check": z_row, "common_variables": columns}


class MissingShiftError(KeyError):
    pass


@dataclass(frozen=True)
class ZeroEquation:
    """``s^X(i,c) - s^Z(j,c) - s^X(i,c2) + s^Z(j,c2) = 0``."""

    x_row: int
    z_row: int
    c: int
    c2: int

    def __post_init__(self) -> None:
        if self.c == self.c2:
            raise ValueError("paired columns must differ")

    @property
    def terms(self) -> tuple[Term, ...]:
        return (
            (1, "X", self.x_row, self.c),
            (-1, "Z", self.z_row, self.c),
            (-1, "X", self.x_row, self.c2),
            (1, "Z", self.z_row, self.c2),
        )


@dataclass(frozen=True)
class CycleConstraint:
    """Tanner cycle ``rows[0] - labels[0] - rows[1] - ... - labels[-1] - rows[0]``.

    ``labels[a]`` is the column shared by ``rows[a]`` and ``rows[a+1]``.
    """

    side: Side
    rows: tuple[int, ...]
    labels: tuple[int, ...]
    weight: int = 1

    @property
    def length(self) -> int:
        return 2 * len(self.rows)

    @property
    def ctype(self) -> str:
        return f"{self.length}H{self.side.lower()}"

    @property
    def terms(self) -> tuple[Term, ...]:
        out: list[Term] = []
        for a, r in enumerate(self.rows):
            out.append((1, self.side, r, self.labels[a - 1]))
            out.append((-1, self.side, r, self.labels[a]))
        return tuple(out)


@dataclass
class ShiftAssignment:
    P: int
    x_shifts: dict[tuple[int, int], int]
    z_shifts: dict[tuple[int, int], int]

    def __post_init__(self) -> None:
        if self.P < 1:
            raise ValueError("P must be positive")
        for table in (self.x_shifts, self.z_shifts):
            for key, t in table.items():
                if not 0 <= t < self.P:
                    raise ValueError(f"shift {t} at {key} outside [0, {self.P})")

    def get(self, side: Side, row: int, col: int) -> int:
        table = self.x_shifts if side == "X" else self.z_shifts
        try:
            return table[(row, col)]
        except KeyError:
            raise MissingShiftError(f"no {side} shift for entry ({row}, {col})") from None

    @classmethod
    def zeros(cls, code: CssCode, P: int) -> ShiftAssignment:
        vi = VarIndex(code)
        return vi.assignment(np.zeros(vi.n, dtype=np.int64), P)

    def covers(self, code: CssCode) -> bool:
        return set(self.x_shifts) == _entries(code.hx.rows) and set(self.z_shifts) == _entries(code.hz.rows)


def _entries(rows) -> set[tuple[int, int]]:
    return {(r, c) for r, row in enumerate(rows) for c in row}


class VarIndex:
    """Dense numbering of shift variables: all X entries row-major, then Z."""

    def __init__(self, code: CssCode) -> None:
        self.keys: list[tuple[Side, int, int]] = []
        for side, m in (("X", code.hx), ("Z", code.hz)):
            for r, row in enumerate(m.rows):
                for c in row:
                    self.keys.append((side, r, c))
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.n = len(self.keys)

    def __getitem__(self, key: tuple[Side, int, int]) -> int:
        return self.index[key]

    def vector(self, a: ShiftAssignment) -> np.ndarray:
        return np.array([a.get(*k) for k in self.keys], dtype=np.int64)

    def assignment(self, w: np.ndarray, P: int) -> ShiftAssignment:
        x, z = {}, {}
        for (side, r, c), t in zip(self.keys, np.asarray(w) % P):
            (x if side == "X" else z)[(r, c)] = int(t)
        return ShiftAssignment(P, x, z)

    def matrix(self, items, n_terms: int | None = None) -> sparse.csr_matrix:
        """Signed incidence matrix (one row per equation or constraint)."""
        rows, cols, vals = [], [], []
        for i, it in enumerate(items):
            for sign, side, r, c in it.terms:
                rows.append(i)
                cols.append(self.index[(side, r, c)])
                vals.append(sign)
        shape = (len(items) if n_terms is None else n_terms, self.n)
        m = sparse.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=shape)
        m.sum_duplicates()
        return m


def build_zero_equations(code: CssCode) -> list[ZeroEquation]:
    """Consecutive pairing of each (x-row, z-row) overlap in ascending column order."""
    z_cols = code.hz.col_supports()
    out: list[ZeroEquation] = []
    for i, row in enumerate(code.hx.rows):
        shared: dict[int, list[int]] = {}
        for c in row:
            for j in z_cols[c]:
                shared.setdefault(j, []).append(c)
        for j in sorted(shared):
            cols = shared[j]
            if len(cols) % 2:
                raise OddOverlapError(i, j, cols)
            for a in range(0, len(cols), 2):
                out.append(ZeroEquation(i, j, cols[a], cols[a + 1]))
    return out


def enumerate_cycle_constraints(
    code: CssCode, up_to: int = 10, weights: dict[str, int] | None = None
) -> list[CycleConstraint]:
    """All 4-, simple 6-, 8- and (optionally) 10-cycles of both Tanner graphs."""
    if up_to not in (4, 6, 8, 10):
        raise ValueError("up_to must be 4, 6, 8 or 10")
    w = {**DEFAULT_WEIGHTS, **(weights or {})}
    out: list[CycleConstraint] = []
    for side, m in (("X", code.hx), ("Z", code.hz)):
        g = OverlapGraph(m)
        for (a, b), (c1, c2) in iter_four_cycles(g):
            out.append(CycleConstraint(side, (a, b), (c1, c2), w["w4"]))
        for k in range(3, up_to // 2 + 1):
            wk = w[f"w{2 * k}"]
            for rows, labels in iter_row_cycles(g, k):
                out.append(CycleConstraint(side, tuple(rows), tuple(labels), wk))
    return out


def cycle_voltage(a: ShiftAssignment, c: CycleConstraint) -> int:
    return sum(sign * a.get(side, r, col) for sign, side, r, col in c.terms) % a.P


def equation_residue(a: ShiftAssignment, e: ZeroEquation) -> int:
    return sum(sign * a.get(side, r, col) for sign, side, r, col in e.terms) % a.P


@dataclass
class UnavoidableFilter:
    kept: list[CycleConstraint]
    removed: list[CycleConstraint]
    basis_rank: int
    prime: int
    stats: dict[str, Any] = field(default_factory=dict)


def span_membership(vectors: sparse.csr_matrix, red: ModRref) -> np.ndarray:
    """Rows of ``vectors`` lying in the row span of a reduced basis over GF(prime)."""
    prime = red.mod
    if vectors.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    if red.rank == 0:
        return np.asarray(vectors.getnnz(axis=1) == 0)
    rr = sparse.csr_matrix(red.rows)
    v = vectors.tocsc()
    resid = (v - sparse.csr_matrix(v[:, red.pivots] @ rr)).tocsr()
    resid.data %= prime
    resid.eliminate_zeros()
    return np.asarray(resid.getnnz(axis=1) == 0)


def filter_unavoidable_8cycles(
    constraints: list[CycleConstraint],
    zero_eqs: list[ZeroEquation],
    code: CssCode,
    prime: int = DEFAULT_PRIME,
) -> UnavoidableFilter:
    """Drop 8-cycles whose voltage vector lies in the span of the zero congruences."""
    vi = VarIndex(code)
    eq_mat = vi.matrix(zero_eqs)
    eights = [c for c in constraints if c.length == 8]
    red = mod_rref(eq_mat.toarray(), prime)
    basis_rank = red.rank
    in_span = span_membership(vi.matrix(eights), red)
    forced = {id(c) for c, f in zip(eights, in_span) if f}
    kept = [c for c in constraints if id(c) not in forced]
    removed = [c for c in eights if id(c) in forced]
    stats: dict[str, Any] = {"enabled": True, "mod_prime": prime, "basis_rank": basis_rank}
    for side in ("X", "Z"):
        tag = f"h{side.lower()}"
        stats[f"{tag}_total"] = sum(1 for c in eights if c.side == side)
        stats[f"{tag}_removed_unavoidable"] = sum(1 for c in removed if c.side == side)
        stats[f"{tag}_kept"] = stats[f"{tag}_total"] - stats[f"{tag}_removed_unavoidable"]
    return UnavoidableFilter(kept, removed, basis_rank, prime, stats)


def counts_by_type(constraints: list[CycleConstraint]) -> dict[str, int]:
    return dict(Counter(c.ctype for c in constraints))
