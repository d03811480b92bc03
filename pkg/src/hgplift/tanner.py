"""Tanner-graph certification: short cycles, girth witnesses, connectivity.

Cycle search runs on the row-overlap multigraph: rows are vertices and each
shared column is a labelled edge.  A closed walk of ``k`` distinct rows is a
Tanner cycle of length ``2k`` only when its ``k`` edge labels are distinct;
triangles whose three labels coincide (three rows through one column) are
degenerate and only counted.
"""

from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Any, Literal

from hgplift.gf2 import BitMatrix

Side = Literal["X", "Z"]


@dataclass
class GirthReport:
    girth: int | None  # None: no cycle up to the searched bound
    witness: dict[str, Any] | None
    degenerate_triangles_seen: int
    row_overlap_multiplicity_histogram: dict[int, int]
    bound: int = 8
    four_cycle_witness: dict[str, Any] | None = None
    simple_six_cycle_witness: dict[str, Any] | None = None
    eight_cycle_witness: dict[str, Any] | None = None
    ten_cycle_witness: dict[str, Any] | None = None
    row_overlap_edge_count: int = 0
    row_overlap_degree_distribution: dict[int, int] = field(default_factory=dict)

    @property
    def acyclic(self) -> bool:
        return self.girth is None


@dataclass(frozen=True)
class ForcedCycle:
    checks: tuple[int, int, int, int]
    variables: tuple[int, int, int, int]
    side: Side


class OverlapGraph:
    """Row-overlap multigraph of a binary matrix.

    ``first_label[a][b]`` keeps the smallest shared column of rows ``a`` and
    ``b`` (the label used for witnesses); ``labels[(a, b)]`` keeps them all.
    """

    def __init__(self, m: BitMatrix) -> None:
        self.n_rows = m.n_rows
        self.col_rows = m.col_supports()
        self.labels: dict[tuple[int, int], list[int]] = {}
        self.first_label: list[dict[int, int]] = [dict() for _ in range(m.n_rows)]
        self.four_cycle_witness: dict[str, Any] | None = None
        for col, rows in enumerate(self.col_rows):
            for a, b in combinations(sorted(rows), 2):
                lab = self.labels.get((a, b))
                if lab is None:
                    self.labels[(a, b)] = [col]
                    self.first_label[a][b] = col
                    self.first_label[b][a] = col
                else:
                    if self.four_cycle_witness is None:
                        self.four_cycle_witness = {
                            "checks": [a, b],
                            "variables": [lab[0], col],
                            "cycle": _cycle_strings([a, b], [lab[0], col]),
                        }
                    lab.append(col)

    def edge_labels(self, a: int, b: int) -> list[int]:
        return self.labels[(a, b) if a < b else (b, a)]

    def multiplicity_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(v) for v in self.labels.values()).items()))

    def degree_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(adj) for adj in self.first_label).items()))


def _cycle_strings(checks: list[int], variables: list[int]) -> list[str]:
    out: list[str] = []
    for c, v in zip(checks, variables):
        out += [f"check_{c}", f"var_{v}"]
    out.append(f"check_{checks[0]}")
    return out


def _witness(checks: list[int], variables: list[int]) -> dict[str, Any]:
    return {"checks": checks, "variables": variables, "cycle": _cycle_strings(checks, variables)}


def _first_simple_triangle(g: OverlapGraph) -> tuple[dict[str, Any] | None, int]:
    adj = g.first_label
    degenerate = 0
    for a, adj_a in enumerate(adj):
        nbrs = sorted(v for v in adj_a if v > a)
        for i, b in enumerate(nbrs):
            for c in nbrs[i + 1:]:
                if c not in adj[b]:
                    continue
                labels = [adj[a][b], adj[b][c], adj[c][a]]
                if len(set(labels)) == 3:
                    return _witness([a, b, c], labels), degenerate
                degenerate += 1
    return None, degenerate


def _first_row_4cycle(g: OverlapGraph) -> dict[str, Any] | None:
    adj = g.first_label
    for r0, adj0 in enumerate(adj):
        nbrs = sorted(adj0)
        for i, r1 in enumerate(nbrs):
            for r3 in nbrs[i + 1:]:
                for r2 in sorted(set(adj[r1]).intersection(adj[r3])):
                    if r2 in (r0, r1, r3):
                        continue
                    labels = [adj[r0][r1], adj[r1][r2], adj[r2][r3], adj[r3][r0]]
                    if len(set(labels)) == 4:
                        return _witness([r0, r1, r2, r3], labels)
    return None


def _first_row_5cycle(g: OverlapGraph) -> dict[str, Any] | None:
    for rows, labels in iter_row_cycles(g, 5):
        return _witness(list(rows), list(labels))
    return None


def iter_row_cycles(g: OverlapGraph, k: int):
    """Yield each simple row ``k``-cycle with distinct labels exactly once.

    Canonical form: the first row is the cycle minimum and the second row is
    smaller than the last.  Yields ``(rows, labels)`` with ``labels[a]`` the
    column shared by ``rows[a]`` and ``rows[a+1]`` (cyclically).  Parallel
    edges expand into one cycle per label choice.
    """
    adj = [sorted(a) for a in g.first_label]
    for r0 in range(g.n_rows):
        higher = [v for v in adj[r0] if v > r0]
        if len(higher) < 2:
            continue
        closing = set(higher)
        path = [r0]
        on_path = {r0}

        def extend(depth: int):
            last = path[-1]
            if depth == k:
                if last in closing and path[1] < last:
                    yield tuple(path)
                return
            for nxt in adj[last]:
                if nxt <= r0 or nxt in on_path:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                yield from extend(depth + 1)
                path.pop()
                on_path.discard(nxt)

        for rows in extend(1):
            choices = [g.edge_labels(rows[a], rows[(a + 1) % k]) for a in range(k)]
            for labels in product(*choices):
                if len(set(labels)) == k:
                    yield rows, labels


def iter_four_cycles(g: OverlapGraph):
    """Yield ``((a, b), (c1, c2))`` for every row pair sharing two columns."""
    for (a, b), cols in sorted(g.labels.items()):
        for c1, c2 in combinations(cols, 2):
            yield (a, b), (c1, c2)


def tanner_girth_upto(m: BitMatrix, lmax: int = 8) -> GirthReport:
    """Smallest Tanner cycle length up to ``lmax`` (8 or 10) with a witness."""
    if lmax not in (8, 10):
        raise ValueError("lmax must be 8 or 10")
    g = OverlapGraph(m)
    rep = GirthReport(
        girth=None,
        witness=None,
        degenerate_triangles_seen=0,
        row_overlap_multiplicity_histogram=g.multiplicity_histogram(),
        bound=lmax,
        row_overlap_edge_count=len(g.labels),
        row_overlap_degree_distribution=g.degree_histogram(),
    )
    rep.four_cycle_witness = g.four_cycle_witness
    six, degenerate = _first_simple_triangle(g)
    rep.simple_six_cycle_witness = six
    rep.degenerate_triangles_seen = degenerate
    if g.four_cycle_witness is not None:
        rep.girth, rep.witness = 4, g.four_cycle_witness
    elif six is not None:
        rep.girth, rep.witness = 6, six
    # 8-cycle witness is reported alongside 4/6 the same way the verify report does
    rep.eight_cycle_witness = _first_row_4cycle(g)
    if rep.girth is None and rep.eight_cycle_witness is not None:
        rep.girth, rep.witness = 8, rep.eight_cycle_witness
    if rep.girth is None and lmax >= 10:
        rep.ten_cycle_witness = _first_row_5cycle(g)
        if rep.ten_cycle_witness is not None:
            rep.girth, rep.witness = 10, rep.ten_cycle_witness
    return rep


def is_tanner_cycle(m: BitMatrix, checks: list[int], variables: list[int]) -> bool:
    """Check an alternating check/variable list is a simple closed Tanner cycle."""
    k = len(checks)
    if k < 2 or len(variables) != k:
        return False
    if len(set(checks)) != k or len(set(variables)) != k:
        return False
    for a in range(k):
        row = m.rows[checks[a]]
        if variables[a] not in row or variables[a - 1] not in row:
            return False
    return True


def connected_components(m: BitMatrix) -> list[int]:
    """Component sizes (checks plus variables) of the Tanner graph, largest first."""
    n_rows = m.n_rows
    total = n_rows + m.n_cols
    col_rows = m.col_supports()
    seen = bytearray(total)
    sizes: list[int] = []
    for start in range(total):
        if seen[start]:
            continue
        seen[start] = 1
        size = 0
        queue = deque([start])
        while queue:
            node = queue.popleft()
            size += 1
            nbrs = [n_rows + c for c in m.rows[node]] if node < n_rows else col_rows[node - n_rows]
            for nxt in nbrs:
                if not seen[nxt]:
                    seen[nxt] = 1
                    queue.append(nxt)
        sizes.append(size)
    return sorted(sizes, reverse=True)


def forced_8cycle_count(s: int, w: int) -> int:
    """Orthogonality-forced 8-cycles per side for an ``s``x``s`` ``w``-regular base."""
    return s * s * comb(w, 2) ** 2


def enumerate_forced_8cycles(b: BitMatrix, side: Side = "X") -> list[ForcedCycle]:
    """One forced 8-cycle per (row pair sharing column u, column pair sharing row v).

    Uses the square-HGP index convention of :mod:`hgplift.hgp`.
    """
    if b.n_rows != b.n_cols:
        raise ValueError("base matrix must be square")
    s = b.n_rows
    base = b if side == "X" else b.transpose()
    rows = [set(r) for r in base.rows]
    cols = [set(c) for c in base.col_supports()]
    row_pairs = [(i, i2, u) for i, i2 in combinations(range(s), 2) for u in sorted(rows[i] & rows[i2])]
    col_pairs = [(j, j2, v) for j, j2 in combinations(range(s), 2) for v in sorted(cols[j] & cols[j2])]
    n1 = s * s
    out = []
    for i, i2, u in row_pairs:
        for j, j2, v in col_pairs:
            # (i,j)-(u,j)-(i',j)-(i',v)*-(i',j')-(u,j')-(i,j')-(i,v)*
            checks = (s * i + j, s * i2 + j, s * i2 + j2, s * i + j2)
            variables = (s * u + j, n1 + s * i2 + v, s * u + j2, n1 + s * i + v)
            if side == "Z":
                # H_Z(B) is H_X(B^T) with the two variable blocks exchanged
                variables = tuple(c + n1 if c < n1 else c - n1 for c in variables)
            out.append(ForcedCycle(checks, variables, side))
    return out


def css_overlap_distribution(hx: BitMatrix, hz: BitMatrix) -> dict[str, Any]:
    """Overlap statistics of all (X-row, Z-row) pairs, in verify-report layout."""
    if hx.n_cols != hz.n_cols:
        raise ValueError("hx and hz must have equal column counts")
    x_cols = hx.col_supports()
    z_cols = hz.col_supports()
    pair_counts: defaultdict[tuple[int, int], int] = defaultdict(int)
    for col in range(hx.n_cols):
        for xr in x_cols[col]:
            for zr in z_cols[col]:
                pair_counts[(xr, zr)] += 1
    dist = Counter(pair_counts.values())
    bad = [
        {"x_check": x, "z_check": z, "common_variables": cnt}
        for (x, z), cnt in pair_counts.items()
        if cnt % 2
    ]
    four = sum(cnt * (cnt - 1) // 2 for cnt in pair_counts.values())
    witness = None
    for (xr, zr), cnt in pair_counts.items():
        if cnt >= 2:
            common = sorted(set(hx.rows[xr]).intersection(hz.rows[zr]))
            witness = {
                "x_check": xr,
                "z_check": zr,
                "common_variables": common,
                "cycle": [f"x_check_{xr}", f"var_{common[0]}", f"z_check_{zr}", f"var_{common[1]}", f"x_check_{xr}"],
            }
            break
    return {
        "orthogonal": not bad,
        "bad_pair_count": len(bad),
        "first_bad_pair": bad[0] if bad else None,
        "nonzero_xz_overlap_pair_count": len(pair_counts),
        "zero_xz_overlap_pair_count": hx.n_rows * hz.n_rows - len(pair_counts),
        "xz_overlap_size_distribution_nonzero_only": dict(sorted(dist.items())),
        "combined_css_tanner_girth": 4 if four else None,
        "combined_css_tanner_4_cycle_count_from_xz_overlaps": four,
        "combined_css_tanner_4_cycle_witness": witness,
    }


def basic_stats(m: BitMatrix) -> dict[str, Any]:
    return {
        "m": m.n_rows,
        "n": m.n_cols,
        "edges": m.nnz,
        "row_weight_distribution": dict(sorted(Counter(m.row_weights()).items())),
        "column_weight_distribution": dict(sorted(Counter(m.col_weights()).items())),
        "rows_with_duplicate_columns": [],
        "rows_with_duplicate_columns_count": 0,
    }


def tanner_graph_section(m: BitMatrix, lmax: int = 8) -> dict[str, Any]:
    rep = tanner_girth_upto(m, lmax)
    sizes = connected_components(m)
    return {
        "girth": rep.girth,
        "no_4_cycles": rep.four_cycle_witness is None,
        "no_simple_6_cycles": rep.simple_six_cycle_witness is None,
        "has_8_cycle": rep.eight_cycle_witness is not None,
        "four_cycle_witness": rep.four_cycle_witness,
        "simple_six_cycle_witness": rep.simple_six_cycle_witness,
        "eight_cycle_witness": rep.eight_cycle_witness,
        "row_overlap_edge_count": rep.row_overlap_edge_count,
        "row_overlap_degree_distribution": rep.row_overlap_degree_distribution,
        "row_pair_overlap_multiplicity_distribution": rep.row_overlap_multiplicity_histogram,
        "degenerate_row_overlap_triangles_seen_before_first_simple_6": rep.degenerate_triangles_seen,
        "connected_component_count": len(sizes),
        "connected_component_sizes": sizes,
    }


def verify_report(hx: BitMatrix, hz: BitMatrix, inputs: dict[str, str] | None = None) -> dict[str, Any]:
    """Full Tanner/CSS verification report with the supplementary field names."""
    n = max(hx.n_cols, hz.n_cols)
    if hx.n_cols != n:
        hx = BitMatrix(hx.n_rows, n, hx.rows)
    if hz.n_cols != n:
        hz = BitMatrix(hz.n_rows, n, hz.rows)
    report: dict[str, Any] = {}
    if inputs:
        report["input_files"] = inputs
    report["hx_basic"] = basic_stats(hx)
    report["hz_basic"] = basic_stats(hz)
    report["css_orthogonality_graph_level"] = css_overlap_distribution(hx, hz)
    report["hx_tanner_graph"] = tanner_graph_section(hx)
    report["hz_tanner_graph"] = tanner_graph_section(hz)
    hxg, hzg = report["hx_tanner_graph"], report["hz_tanner_graph"]
    report["summary"] = {
        "separate_hx_hz_tanner_girth_8": hxg["girth"] == 8 and hzg["girth"] == 8,
        "separate_hx_hz_tanner_graphs_connected": (
            hxg["connected_component_count"] == 1 and hzg["connected_component_count"] == 1
        ),
        "css_orthogonality_ok": report["css_orthogonality_graph_level"]["orthogonal"],
    }
    return report
