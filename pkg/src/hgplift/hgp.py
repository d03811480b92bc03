"""Square-base hypergraph-product codes and their parameters.

Index convention (shared with the shift tables): check row ``(i, j)`` is
``s*i + j``; block-1 variable ``(a, b)`` is ``s*a + b``; block-2 variable
``(a, b)*`` is ``s*s + s*a + b``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from hgplift import gf2
from hgplift.gf2 import BitMatrix


@dataclass(frozen=True)
class CssCode:
    hx: BitMatrix
    hz: BitMatrix
    origin: str = "external"

    def __post_init__(self) -> None:
        if self.hx.n_cols != self.hz.n_cols:
            raise ValueError("hx and hz must have the same number of columns")

    @property
    def n(self) -> int:
        return self.hx.n_cols

    @property
    def m_x(self) -> int:
        return self.hx.n_rows

    @property
    def m_z(self) -> int:
        return self.hz.n_rows

    def header(self) -> dict[str, Any]:
        return {"n": self.n, "m_x": self.m_x, "m_z": self.m_z, "origin": self.origin}


@dataclass
class CodeParams:
    n: int
    m_x: int
    m_z: int
    rho_x: int
    rho_z: int
    k: int
    k_des: int
    r_des: Fraction
    d: int | None = None
    dv: int | None = None
    dc: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def as_row(self) -> dict[str, Any]:
        out = {
            "n": self.n, "k": self.k, "d": self.d, "m_x": self.m_x, "m_z": self.m_z,
            "rho_x": self.rho_x, "rho_z": self.rho_z, "k_des": self.k_des,
            "r_des": str(self.r_des), "dv": self.dv, "dc": self.dc,
        }
        out.update(self.extra)
        return out


def _base_matrix(b) -> tuple[BitMatrix, str]:
    m = getattr(b, "matrix", b)
    label = getattr(b, "label", "B")
    if m.n_rows != m.n_cols:
        raise ValueError("HGP base matrix must be square")
    return m, label


def build_hgp(b) -> CssCode:
    """``H_X = [B (x) I | I (x) B^T]``, ``H_Z = [I (x) B | B^T (x) I]``."""
    m, label = _base_matrix(b)
    s = m.n_rows
    rows = [set(r) for r in m.rows]
    cols = [set(c) for c in m.col_supports()]
    n1 = s * s
    hx, hz = [], []
    for i in range(s):
        for j in range(s):
            hx.append(sorted([s * a + j for a in rows[i]] + [n1 + s * i + c for c in cols[j]]))
            hz.append(sorted([s * i + c for c in rows[j]] + [n1 + s * a + j for a in cols[i]]))
    return CssCode(
        BitMatrix.from_rows(hx, 2 * n1), BitMatrix.from_rows(hz, 2 * n1), origin=f"hgp({label})"
    )


def check_regularity(code: CssCode) -> dict[str, Any]:
    """Return ``{"regular": True, "dv", "dc"}`` or the offending degree multisets."""
    col_w = Counter(code.hx.col_weights())
    zcol_w = Counter(code.hz.col_weights())
    row_w = Counter(code.hx.row_weights()) + Counter(code.hz.row_weights())
    if len(col_w) == 1 and len(zcol_w) == 1 and col_w.keys() == zcol_w.keys() and len(row_w) == 1:
        dv = next(iter(col_w))
        dc = next(iter(row_w))
        if code.origin.startswith("hgp") and dc != 2 * dv:
            raise AssertionError(f"HGP code with dc={dc} != 2*dv={2 * dv}")
        return {"regular": True, "dv": dv, "dc": dc}
    return {
        "regular": False,
        "hx_col_weights": dict(sorted(col_w.items())),
        "hz_col_weights": dict(sorted(zcol_w.items())),
        "hx_row_weights": dict(sorted(Counter(code.hx.row_weights()).items())),
        "hz_row_weights": dict(sorted(Counter(code.hz.row_weights()).items())),
    }


def code_params(code: CssCode, d: int | None = None) -> CodeParams:
    rho_x = gf2.rank(code.hx)
    rho_z = gf2.rank(code.hz)
    k_des = code.n - code.m_x - code.m_z
    reg = check_regularity(code)
    return CodeParams(
        n=code.n, m_x=code.m_x, m_z=code.m_z, rho_x=rho_x, rho_z=rho_z,
        k=code.n - rho_x - rho_z, k_des=k_des, r_des=Fraction(k_des, code.n) if code.n else Fraction(0),
        d=d, dv=reg.get("dv"), dc=reg.get("dc"),
    )


def hgp_distance(b) -> int | None:
    """``min(d(B), d(B^T))`` from kernel distances; None when both kernels are trivial.

    Raises ValueError when a kernel is too large for exhaustive enumeration.
    """
    m, _ = _base_matrix(b)
    ds = [d for d in (gf2.min_kernel_weight(m), gf2.min_kernel_weight(m.transpose())) if d is not None]
    return min(ds) if ds else None


def hgp_params(b, with_distance: bool = True) -> CodeParams:
    """Closed-form square-HGP parameters, cross-checked against direct ranks."""
    m, _ = _base_matrix(b)
    s = m.n_rows
    corank = s - gf2.rank(m)
    code = build_hgp(b)
    direct = code_params(code)
    expected_rho = s * s - corank * corank
    if direct.rho_x != expected_rho or direct.rho_z != expected_rho:
        raise AssertionError(
            f"rank formula mismatch: direct ({direct.rho_x}, {direct.rho_z}) vs {expected_rho}"
        )
    d = None
    if with_distance:
        try:
            d = hgp_distance(m)
        except ValueError:
            d = None
    direct.d = d
    direct.extra = {"s": s, "rho_b": s - corank, "c_b": corank}
    return direct


def verify_orthogonality(hx: BitMatrix, hz: BitMatrix) -> dict[str, Any]:
    """Count (x-row, z-row) pairs by overlap size; flag odd overlaps."""
    if hx.n_cols != hz.n_cols:
        raise ValueError("hx and hz must have equal column counts")
    from hgplift.tanner import css_overlap_distribution

    rep = css_overlap_distribution(hx, hz)
    return {
        "bad_pairs": rep["bad_pair_count"],
        "first_bad_pair": rep["first_bad_pair"],
        "overlapping_pairs": rep["nonzero_xz_overlap_pair_count"],
        "histogram": rep["xz_overlap_size_distribution_nonzero_only"],
        "orthogonal": rep["orthogonal"],
    }


def save_code(code: CssCode, out_dir: str | Path, prefix: str = "") -> dict[str, str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "hx_rows": str(out / f"{prefix}Hx_rows.json"),
        "hz_rows": str(out / f"{prefix}Hz_rows.json"),
        "header": str(out / f"{prefix}code.json"),
    }
    gf2.save_matrix(code.hx, paths["hx_rows"])
    gf2.save_matrix(code.hz, paths["hz_rows"])
    with open(paths["header"], "w", encoding="utf-8") as fh:
        json.dump(code.header(), fh, indent=2)
    return paths


def load_code(hx_path: str | Path, hz_path: str | Path, origin: str = "external") -> CssCode:
    hx = gf2.load_matrix(hx_path)
    hz = gf2.load_matrix(hz_path)
    n = max(hx.n_cols, hz.n_cols)
    return CssCode(BitMatrix(hx.n_rows, n, hx.rows), BitMatrix(hz.n_rows, n, hz.rows), origin)
