"""Lifted matrices, lift audits, and shift-table / solution / audit files."""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from hgplift import gf2, tanner
from hgplift.gf2 import BitMatrix
from hgplift.hgp import CssCode
from hgplift.lift.constraints import DEFAULT_WEIGHTS, ShiftAssignment


class ShiftTableError(ValueError):
    pass


def lift_matrix(m: BitMatrix, shifts: dict[tuple[int, int], int], P: int) -> BitMatrix:
    """Replace entry ``(r, c)`` with shift ``t`` by the block joining row
    ``r*P + u`` to column ``c*P + (u + t) mod P``."""
    if set(shifts) != {(r, c) for r, row in enumerate(m.rows) for c in row}:
        raise ValueError("shift assignment does not cover exactly the nonzero entries")
    rows = []
    for r, row in enumerate(m.rows):
        ts = [(c, shifts[(r, c)]) for c in row]
        for u in range(P):
            rows.append(sorted(c * P + (u + t) % P for c, t in ts))
    return BitMatrix(m.n_rows * P, m.n_cols * P, tuple(tuple(r) for r in rows))


def build_lifted_matrices(code: CssCode, a: ShiftAssignment) -> CssCode:
    hx = lift_matrix(code.hx, a.x_shifts, a.P)
    hz = lift_matrix(code.hz, a.z_shifts, a.P)
    return CssCode(hx, hz, origin=f"lift({code.origin}, P={a.P})")


@dataclass
class LiftAudit:
    n: int
    m_x: int
    m_z: int
    rank_hx: int
    rank_hz: int
    k: int
    row_weight_hx: list[int]
    row_weight_hz: list[int]
    col_weight_hx: list[int]
    col_weight_hz: list[int]
    hx_tanner_girth_up_to_10: int | None
    hz_tanner_girth_up_to_10: int | None
    hx_girth_example: dict[str, Any] | None
    hz_girth_example: dict[str, Any] | None
    hx_components: list[int]
    hz_components: list[int]
    css_orthogonality_bad_pairs: int
    css_overlap_pairs_seen: int
    first_bad_pair: dict[str, Any] | None
    overlap_histogram: dict[int, int]
    combined_4cycle_count: int
    constraint_score: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def css_orthogonality_ok(self) -> bool:
        return self.css_orthogonality_bad_pairs == 0

    @property
    def degree_pair(self) -> str | None:
        if len(self.col_weight_hx) == 1 and len(self.row_weight_hx) == 1:
            return f"({self.col_weight_hx[0]},{self.row_weight_hx[0]})"
        return None

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["overlap_histogram"] = {str(k): v for k, v in self.overlap_histogram.items()}
        return d


def audit_lift(code: CssCode, constraint_score: int | None = None, lmax: int = 10) -> LiftAudit:
    """Ranks, weights, girth up to ``lmax``, components, and CSS overlap census."""
    rank_hx = gf2.rank(code.hx)
    rank_hz = gf2.rank(code.hz)
    k = code.n - rank_hx - rank_hz
    if code.n == code.m_x + code.m_z:
        # square-HGP shape: k is the total row redundancy of both matrices
        assert k == (code.m_x - rank_hx) + (code.m_z - rank_hz)
    gx = tanner.tanner_girth_upto(code.hx, lmax)
    gz = tanner.tanner_girth_upto(code.hz, lmax)
    ov = tanner.css_overlap_distribution(code.hx, code.hz)
    return LiftAudit(
        n=code.n,
        m_x=code.m_x,
        m_z=code.m_z,
        rank_hx=rank_hx,
        rank_hz=rank_hz,
        k=k,
        row_weight_hx=sorted(set(code.hx.row_weights())),
        row_weight_hz=sorted(set(code.hz.row_weights())),
        col_weight_hx=sorted(set(code.hx.col_weights())),
        col_weight_hz=sorted(set(code.hz.col_weights())),
        hx_tanner_girth_up_to_10=gx.girth,
        hz_tanner_girth_up_to_10=gz.girth,
        hx_girth_example=gx.witness,
        hz_girth_example=gz.witness,
        hx_components=tanner.connected_components(code.hx),
        hz_components=tanner.connected_components(code.hz),
        css_orthogonality_bad_pairs=ov["bad_pair_count"],
        css_overlap_pairs_seen=ov["nonzero_xz_overlap_pair_count"],
        first_bad_pair=ov["first_bad_pair"],
        overlap_histogram=ov["xz_overlap_size_distribution_nonzero_only"],
        combined_4cycle_count=ov["combined_css_tanner_4_cycle_count_from_xz_overlaps"],
        constraint_score=constraint_score,
    )


# --- shift tables -----------------------------------------------------------

def _header(P: int) -> list[str]:
    return ["base_check_row", "base_variable_column", "row_color", f"shift_mod_{P}"]


def _read_table(path: str | Path, P: int) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _header(P):
            raise ShiftTableError(f"{path}: expected header {','.join(_header(P))}, got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not x.strip() for x in rec):
                continue
            if len(rec) != 4:
                raise ShiftTableError(f"{path}:{lineno}: expected 4 fields, got {len(rec)}")
            try:
                r, c, _color, t = (int(x) for x in rec)
            except ValueError:
                raise ShiftTableError(f"{path}:{lineno}: non-integer field in {rec}") from None
            if r < 0 or c < 0:
                raise ShiftTableError(f"{path}:{lineno}: negative index")
            if not 0 <= t < P:
                raise ShiftTableError(f"{path}:{lineno}: shift {t} not in [0, {P})")
            if (r, c) in out:
                raise ShiftTableError(f"{path}:{lineno}: duplicate entry ({r}, {c})")
            out[(r, c)] = t
    return out


def load_shift_tables(csv_x: str | Path, csv_z: str | Path, P: int) -> ShiftAssignment:
    return ShiftAssignment(P, _read_table(csv_x, P), _read_table(csv_z, P))


def save_shift_tables(a: ShiftAssignment, out_dir: str | Path) -> tuple[Path, Path]:
    """Write both tables sorted by (row, column); ``row_color`` equals the row."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = (out / "shift_table_HX.csv", out / "shift_table_HZ.csv")
    for path, table in zip(paths, (a.x_shifts, a.z_shifts)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_header(a.P))
            for (r, c), t in sorted(table.items()):
                w.writerow([r, c, r, t])
    return paths


def code_from_shift_tables(a: ShiftAssignment, n: int | None = None) -> CssCode:
    """Base CSS code whose nonzero entries are the table keys."""

    def rows_of(table):
        m = max((r for r, _ in table), default=-1) + 1
        rows: list[list[int]] = [[] for _ in range(m)]
        for r, c in table:
            rows[r].append(c)
        return rows

    xr, zr = rows_of(a.x_shifts), rows_of(a.z_shifts)
    if n is None:
        n = max(c for _, c in list(a.x_shifts) + list(a.z_shifts)) + 1
    return CssCode(BitMatrix.from_rows(xr, n), BitMatrix.from_rows(zr, n), origin="shift-table support")


def packaged_b15_p64() -> ShiftAssignment:
    """The published P=64 assignment for HGP(B15), shipped as package data."""
    root = resources.files("hgplift") / "data" / "b15_p64"
    with resources.as_file(root / "shift_table_HX.csv") as px, resources.as_file(root / "shift_table_HZ.csv") as pz:
        return load_shift_tables(px, pz, 64)


# --- solution / audit documents -----------------------------------------------

def solution_document(
    code: CssCode,
    a: ShiftAssignment,
    search: dict[str, Any],
    stats: dict[str, Any],
    weights: dict[str, int] | None = None,
    score: int = 0,
) -> dict[str, Any]:
    n = code.n

    def by_color(m: BitMatrix, table: dict[tuple[int, int], int]) -> list[list[int]]:
        out = []
        for r in range(m.n_rows):
            row = [0] * n
            for c in m.rows[r]:
                row[c] = table[(r, c)]
            out.append(row)
        return out

    return {
        "P": a.P,
        "tanner_len": 10,
        "color_mode": {"requested": "identity", "hx": "identity", "hz": "identity"},
        "ortho_mode": "paired",
        "ncols": n,
        "hx_m": code.m_x,
        "hz_m": code.m_z,
        "hx_num_colors": code.m_x,
        "hz_num_colors": code.m_z,
        "hx_row_color": list(range(code.m_x)),
        "hz_row_color": list(range(code.m_z)),
        "x_shift_by_color": by_color(code.hx, a.x_shifts),
        "z_shift_by_color": by_color(code.hz, a.z_shifts),
        "weights": dict(weights or DEFAULT_WEIGHTS),
        "search": search,
        "best": {"score": score},
        "stats": stats,
    }


def assignment_from_solution(doc: dict[str, Any], code: CssCode) -> ShiftAssignment:
    P = int(doc["P"])
    xs, zs = doc["x_shift_by_color"], doc["z_shift_by_color"]
    xc, zc = doc.get("hx_row_color", list(range(code.m_x))), doc.get("hz_row_color", list(range(code.m_z)))
    x = {(r, c): int(xs[xc[r]][c]) % P for r, row in enumerate(code.hx.rows) for c in row}
    z = {(r, c): int(zs[zc[r]][c]) % P for r, row in enumerate(code.hz.rows) for c in row}
    return ShiftAssignment(P, x, z)


def audit_document(
    audit: LiftAudit,
    randomization: dict[str, Any],
    files: dict[str, str],
    code_dir: str,
    status: str = "constructed_randomized_and_audited",
) -> dict[str, Any]:
    return {
        "code_dir": code_dir,
        "status": status,
        "target_note": (
            "Random feasible walk over the CSS-orthogonality kernel. The final assignment keeps "
            "all avoidable 8-cycle and all 10-cycle voltage constraints nonzero; unavoidable "
            "8-cycles are allowed."
        ),
        "parameters": {
            "n": audit.n,
            "m_x": audit.m_x,
            "m_z": audit.m_z,
            "rank_hx": audit.rank_hx,
            "rank_hz": audit.rank_hz,
            "k": audit.k,
            "row_weight_hx": audit.row_weight_hx,
            "row_weight_hz": audit.row_weight_hz,
            "col_weight_hx": audit.col_weight_hx,
            "col_weight_hz": audit.col_weight_hz,
            "degree_pair": audit.degree_pair,
        },
        "checks": {
            "constraint_score": audit.constraint_score,
            "css_orthogonality_equations_ok": audit.css_orthogonality_ok,
            "excluded_cycle_lengths_except_unavoidable_8": [4, 6, 8, 10],
            "unavoidable_8cycles_allowed": True,
            "tanner_girth": min(
                (g for g in (audit.hx_tanner_girth_up_to_10, audit.hz_tanner_girth_up_to_10) if g),
                default=None,
            ),
            "css_orthogonality_bad_pairs": audit.css_orthogonality_bad_pairs,
            "css_overlap_pairs_seen": audit.css_overlap_pairs_seen,
            "first_bad_pair": audit.first_bad_pair,
            "css_orthogonality_ok": audit.css_orthogonality_ok,
            "hx_tanner_girth_up_to_10": audit.hx_tanner_girth_up_to_10,
            "hz_tanner_girth_up_to_10": audit.hz_tanner_girth_up_to_10,
            "hx_girth_example": audit.hx_girth_example,
            "hz_girth_example": audit.hz_girth_example,
            "hx_connected_components": len(audit.hx_components),
            "hz_connected_components": len(audit.hz_components),
        },
        "randomization": randomization,
        "files": files,
    }


def write_json(doc: Any, path: str | Path, indent: int | None = 2) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=indent)
    return p


def weight_census(m: BitMatrix) -> dict[str, dict[int, int]]:
    return {
        "rows": dict(sorted(Counter(m.row_weights()).items())),
        "cols": dict(sorted(Counter(m.col_weights()).items())),
    }
