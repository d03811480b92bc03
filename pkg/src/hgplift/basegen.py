"""Square base matrices: finite-geometry incidences, edge switching, search."""

from __future__ import annotations

import itertools
import json
import random
from collections.abc import Callable
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from hgplift import gf2, tanner
from hgplift.gf2 import BitMatrix


@dataclass(frozen=True)
class BaseMatrix:
    matrix: BitMatrix
    label: str
    construction: str  # fano | pg2q | wq | edge_switch | direct_sum | search | explicit

    def __post_init__(self) -> None:
        if self.matrix.n_rows != self.matrix.n_cols:
            raise ValueError("base matrix must be square")

    @property
    def s(self) -> int:
        return self.matrix.n_rows


@dataclass
class BaseReport:
    s: int
    target_weight: int
    regular: bool
    max_row_pair_overlap: int
    max_col_pair_overlap: int
    simple_6_cycle_free: bool
    tanner_girth: int | None  # None: no cycle up to length 8
    girth_witness: dict[str, Any] | None
    connected: bool
    rank: int
    corank: int

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


class SearchFailure(RuntimeError):
    def __init__(self, message: str, best_score: float | None = None) -> None:
        super().__init__(message)
        self.best_score = best_score


# --- finite geometry -------------------------------------------------------

def _projective_points(q: int, dim: int) -> list[tuple[int, ...]]:
    """Normalized representatives (first nonzero coordinate 1), lexicographic."""
    pts = []
    for v in itertools.product(range(q), repeat=dim):
        nz = [x for x in v if x]
        if nz and nz[0] == 1:
            pts.append(v)
    return pts


def _normalize(v: tuple[int, ...], q: int) -> tuple[int, ...]:
    lead = next(x for x in v if x)
    inv = pow(lead, -1, q)
    return tuple((x * inv) % q for x in v)


def projective_plane_incidence(q: int) -> BaseMatrix:
    """Point-line incidence of PG(2, q) for q in {2, 3}; rows are points."""
    if q not in (2, 3):
        raise ValueError(f"unsupported q={q}; expected 2 or 3")
    pts = _projective_points(q, 3)
    lines = _projective_points(q, 3)  # dual coordinates
    rows = [[j for j, ln in enumerate(lines) if sum(a * b for a, b in zip(p, ln)) % q == 0] for p in pts]
    label, kind = ("B7", "fano") if q == 2 else ("B13", "pg2q")
    return BaseMatrix(BitMatrix.from_rows(rows, len(lines)), label, kind)


def symplectic_gq_incidence(q: int) -> BaseMatrix:
    """Point-line incidence of W(q) for q in {2, 3}; rows are points of PG(3, q).

    Lines are the totally isotropic 2-spaces of the form
    ``x1*y2 - x2*y1 + x3*y4 - x4*y3``, ordered by their sorted point lists.
    """
    if q not in (2, 3):
        raise ValueError(f"unsupported q={q}; expected 2 or 3")
    pts = _projective_points(q, 4)
    index = {p: i for i, p in enumerate(pts)}

    def form(x, y):
        return (x[0] * y[1] - x[1] * y[0] + x[2] * y[3] - x[3] * y[2]) % q

    lines = set()
    for a, b in itertools.combinations(pts, 2):
        if form(a, b):
            continue
        span = set()
        for s, t in itertools.product(range(q), repeat=2):
            v = tuple((s * x + t * y) % q for x, y in zip(a, b))
            if any(v):
                span.add(index[_normalize(v, q)])
        lines.add(tuple(sorted(span)))
    ordered = sorted(lines)
    rows: list[list[int]] = [[] for _ in pts]
    for j, ln in enumerate(ordered):
        for p in ln:
            rows[p].append(j)
    label = "B15" if q == 2 else "B40"
    return BaseMatrix(BitMatrix.from_rows(rows, len(ordered)), label, "wq")


# Row supports of the W(2) ordering used by the published P=64 shift tables.
_B15_TABLE_ROWS = (
    (0, 1, 2), (0, 7, 8), (0, 9, 10), (1, 3, 5), (1, 4, 6), (2, 11, 14), (2, 12, 13),
    (3, 7, 11), (3, 9, 13), (4, 7, 12), (4, 9, 14), (5, 8, 14), (5, 10, 12),
    (6, 8, 13), (6, 10, 11),
)


def b15_table_ordering() -> BaseMatrix:
    """W(2) incidence in the row/column order of the P=64 shift tables."""
    return BaseMatrix(BitMatrix.from_rows(_B15_TABLE_ROWS, 15), "B15", "wq")


def direct_sum(a: BaseMatrix, b: BaseMatrix) -> BaseMatrix:
    s = a.s
    rows = [list(r) for r in a.matrix.rows] + [[c + s for c in r] for r in b.matrix.rows]
    return BaseMatrix(BitMatrix.from_rows(rows, s + b.s), f"{a.label}+{b.label}", "direct_sum")


def edge_switch_enlarge(b: BaseMatrix) -> BaseMatrix:
    """Two copies of ``b`` with (0,0),(s,s) replaced by (0,s),(s,0)."""
    s = b.s
    if 0 not in b.matrix.rows[0]:
        raise ValueError("edge switch needs a 1 at (0, 0)")
    rows = [set(r) for r in direct_sum(b, b).matrix.rows]
    rows[0].discard(0)
    rows[s].discard(s)
    rows[0].add(s)
    rows[s].add(0)
    label = "B30" if b.label == "B15" else f"switch({b.label})"
    return BaseMatrix(BitMatrix.from_rows([sorted(r) for r in rows], 2 * s), label, "edge_switch")


def named_base(name: str) -> BaseMatrix:
    """Fixture lookup: b7/fano, b13/pg23, b15/w2, b15t (table order), b30, b40/w3."""
    key = name.lower()
    table: dict[str, Callable[[], BaseMatrix]] = {
        "b7": lambda: projective_plane_incidence(2),
        "fano": lambda: projective_plane_incidence(2),
        "b13": lambda: projective_plane_incidence(3),
        "pg23": lambda: projective_plane_incidence(3),
        "b15": lambda: symplectic_gq_incidence(2),
        "w2": lambda: symplectic_gq_incidence(2),
        "b15t": b15_table_ordering,
        "b30": lambda: edge_switch_enlarge(symplectic_gq_incidence(2)),
        "b40": lambda: symplectic_gq_incidence(3),
        "w3": lambda: symplectic_gq_incidence(3),
    }
    if key not in table:
        raise KeyError(f"unknown base matrix {name!r}; choose from {sorted(table)}")
    return table[key]()


# --- validation ------------------------------------------------------------

def _max_pair_overlap(m: BitMatrix) -> int:
    a = m.to_dense().astype(np.int64)
    o = a @ a.T
    np.fill_diagonal(o, 0)
    return int(o.max()) if o.size else 0


def validate_base(b: BaseMatrix | BitMatrix, w: int) -> BaseReport:
    """Certify weights, overlaps, short cycles, connectivity, and rank."""
    m = getattr(b, "matrix", b)
    if m.n_rows != m.n_cols:
        raise ValueError("base matrix must be square")
    rep = tanner.tanner_girth_upto(m, 8)
    r = gf2.rank(m)
    sizes = tanner.connected_components(m)
    return BaseReport(
        s=m.n_rows,
        target_weight=w,
        regular=set(m.row_weights()) == {w} and set(m.col_weights()) == {w},
        max_row_pair_overlap=_max_pair_overlap(m),
        max_col_pair_overlap=_max_pair_overlap(m.transpose()),
        simple_6_cycle_free=rep.simple_six_cycle_witness is None,
        tanner_girth=rep.girth,
        girth_witness=rep.witness,
        connected=len(sizes) == 1,
        rank=r,
        corank=m.n_rows - r,
    )


# --- randomized search -----------------------------------------------------

def _structure_score(a: np.ndarray) -> tuple[int, int, int, int]:
    """(collisions, 4-cycles, simple 6-cycles, extra components) of a count matrix."""
    collisions = int(np.maximum(a - 1, 0).sum())
    bm = (a > 0).astype(np.int64)
    o = bm @ bm.T
    np.fill_diagonal(o, 0)
    four = int((o * (o - 1) // 2).sum() // 2)
    oc = bm.T @ bm
    np.fill_diagonal(oc, 0)
    four += int((oc * (oc - 1) // 2).sum() // 2)
    g = (o > 0).astype(np.int64)
    triangles = int(np.trace(g @ g @ g) // 6)
    colw = bm.sum(axis=0)
    degenerate = int((colw * (colw - 1) * (colw - 2) // 6).sum())
    six = max(triangles - degenerate, 0)
    # components of the bipartite graph via row-graph reachability
    s = a.shape[0]
    seen = np.zeros(s, bool)
    comps = 0
    for start in range(s):
        if seen[start]:
            continue
        comps += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(o[v]):
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
    return collisions, four, six, comps - 1


def _corank_dense(bm: np.ndarray) -> int:
    m = BitMatrix.from_dense(bm)
    return m.n_rows - gf2.rank(m)


def search_regular_base(
    s: int,
    w: int,
    corank_target: int | Callable[[int], bool],
    seed: int = 0,
    budget: int = 200_000,
    restart_after: int = 4000,
) -> BaseMatrix:
    """Hill-climb over unions of ``w`` permutation matrices.

    Violation score: 100 per 4-cycle or collision, 10 per simple 6-cycle,
    5 per extra component, 5 per unit of corank mismatch.  Moves swap two
    images inside one permutation; a restart happens after ``restart_after``
    moves without improvement, or at once when the structure is valid but the
    corank is wrong (such matrices rarely admit a structure-preserving swap).
    Raises SearchFailure when the budget is spent.
    """
    if w < 2 or s < w:
        raise ValueError("need w >= 2 and s >= w")
    # 4-cycle-free needs s - 1 >= w(w-1); girth 8 needs s >= w(1 + (w-1)^2)
    if s < w * (1 + (w - 1) ** 2):
        raise SearchFailure(f"infeasible: s={s} too small for girth-8 w={w} base")
    if callable(corank_target):
        target_ok = corank_target

        def corank_pen(c: int) -> int:
            return 0 if target_ok(c) else 5
    else:
        target = int(corank_target)

        def corank_pen(c: int) -> int:
            return 5 * abs(c - target)

    rng = random.Random(seed)

    def fresh() -> list[list[int]]:
        perms = []
        for _ in range(w):
            p = list(range(s))
            rng.shuffle(p)
            perms.append(p)
        return perms

    def counts(perms: list[list[int]]) -> np.ndarray:
        a = np.zeros((s, s), dtype=np.int64)
        for p in perms:
            a[np.arange(s), p] += 1
        return a

    def score(perms: list[list[int]]) -> int:
        a = counts(perms)
        col, four, six, comp = _structure_score(a)
        val = 100 * (col + four) + 10 * six + 5 * comp
        if val == 0:
            pen = corank_pen(_corank_dense((a > 0).astype(np.uint8)))
            # negative marks a valid structure with the wrong corank
            return -pen if pen else 0
        return val

    perms = fresh()
    cur = score(perms)
    best = abs(cur)
    since = 0
    for _ in range(budget):
        if cur < 0:
            perms = fresh()
            cur = score(perms)
            since = 0
            continue
        if cur == 0:
            m = BitMatrix.from_dense((counts(perms) > 0).astype(np.uint8))
            rep = validate_base(m, w)
            ok = (
                rep.regular and rep.max_row_pair_overlap <= 1 and rep.max_col_pair_overlap <= 1
                and rep.simple_6_cycle_free and rep.connected and corank_pen(rep.corank) == 0
            )
            if ok:
                return BaseMatrix(m, f"B{s}", "search")
            raise AssertionError("search score 0 but deterministic validation failed")
        k = rng.randrange(w)
        i, j = rng.sample(range(s), 2)
        p = perms[k]
        p[i], p[j] = p[j], p[i]
        new = score(perms)
        if new < 0 or new <= cur or rng.random() < 0.01:
            if abs(new) < best:
                best = abs(new)
                since = 0
            cur = new
        else:
            p[i], p[j] = p[j], p[i]
        since += 1
        if since > restart_after:
            perms = fresh()
            cur = score(perms)
            since = 0
    raise SearchFailure(f"budget of {budget} moves exhausted", best_score=best)


# --- serialization -----------------------------------------------------------

def to_text_bitmap(m: BitMatrix) -> str:
    return "\n".join("".join("1" if v else "0" for v in row) for row in m.to_dense()) + "\n"


def save_base(b: BaseMatrix, out_dir: str | Path, w: int | None = None) -> dict[str, str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = b.label
    paths = {"rows": str(out / f"{stem}_rows.json"), "bitmap": str(out / f"{stem}.txt")}
    gf2.save_matrix(b.matrix, paths["rows"])
    Path(paths["bitmap"]).write_text(to_text_bitmap(b.matrix), encoding="utf-8")
    if w is None:
        w = max(b.matrix.row_weights(), default=0)
    rep = validate_base(b, w)
    paths["report"] = str(out / f"{stem}_report.json")
    with open(paths["report"], "w", encoding="utf-8") as fh:
        json.dump({"label": b.label, "construction": b.construction, **rep.to_json()}, fh, indent=2)
    return paths


def save_bitmap_image(m: BitMatrix, path: str | Path, scale: int = 8) -> None:
    """Monochrome matrix plot: black for 1, white for 0."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    img = 1 - m.to_dense()
    img = np.kron(img, np.ones((scale, scale), dtype=np.uint8))
    plt.imsave(str(path), img, cmap="gray", vmin=0, vmax=1)
