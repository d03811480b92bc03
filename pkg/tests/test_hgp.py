from __future__ import annotations

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgplift import basegen, gf2, hgp
from hgplift.gf2 import BitMatrix


def kron_reference(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = b.shape[0]
    eye = np.eye(s, dtype=np.uint8)
    hx = np.hstack([np.kron(b, eye), np.kron(eye, b.T)])
    hz = np.hstack([np.kron(eye, b), np.kron(b.T, eye)])
    return hx, hz


square = st.integers(1, 6).flatmap(
    lambda s: st.lists(st.lists(st.integers(0, 1), min_size=s, max_size=s), min_size=s, max_size=s)
)


@given(square)
@settings(max_examples=60, deadline=None)
def test_build_matches_kronecker_definition(rows):
    b = np.array(rows, dtype=np.uint8)
    code = hgp.build_hgp(BitMatrix.from_dense(b))
    hx, hz = kron_reference(b)
    assert code.hx.to_dense().tolist() == hx.tolist()
    assert code.hz.to_dense().tolist() == hz.tolist()
    assert not (hx.astype(int) @ hz.T.astype(int) % 2).any()


@given(square)
@settings(max_examples=60, deadline=None)
def test_dimension_is_twice_corank_squared(rows):
    m = BitMatrix.from_dense(np.array(rows, dtype=np.uint8))
    c = m.n_rows - gf2.rank(m)
    assert hgp.code_params(hgp.build_hgp(m)).k == 2 * c * c


def test_small_params():
    p = hgp.hgp_params(basegen.named_base("b7"))
    assert (p.n, p.m_x, p.m_z, p.k, p.d, p.rho_x, p.dv, p.dc) == (98, 49, 49, 18, 4, 40, 3, 6)
    assert p.k_des == 0 and p.r_des == Fraction(0)
    p15 = hgp.hgp_params(basegen.named_base("b15"))
    assert (p15.n, p15.m_x, p15.k, p15.d) == (450, 225, 50, 6)


def test_full_rank_base_encodes_nothing():
    p = hgp.hgp_params(BitMatrix.identity(4))
    assert p.k == 0 and p.d is None


def test_regularity():
    assert hgp.check_regularity(hgp.build_hgp(basegen.named_base("b15"))) == {"regular": True, "dv": 3, "dc": 6}
    assert hgp.check_regularity(hgp.build_hgp(basegen.named_base("b13")))["dc"] == 8


def test_irregular_base_check_weights_are_row_plus_column_weights():
    # one row of weight 2, the rest weight 3
    b = BitMatrix.from_rows([[0, 1], [0, 2, 3], [1, 2, 3], [0, 1, 2]], 4)
    rep = hgp.check_regularity(hgp.build_hgp(b))
    assert not rep["regular"]
    a, c = b.row_weights(), b.col_weights()
    expect = Counter(a[i] + c[j] for i in range(4) for j in range(4))
    assert rep["hx_row_weights"] == dict(sorted(expect.items()))
    # a 4x4 base with row weights (2,3,3,3) has 11 ones, so some column also has weight 2
    assert set(rep["hx_row_weights"]) == {4, 5, 6}


def test_orthogonality_report(code_b15):
    rep = hgp.verify_orthogonality(code_b15.hx, code_b15.hz)
    assert rep["orthogonal"] and rep["histogram"] == {2: 2025}
    rows = [list(r) for r in code_b15.hz.rows]
    rows[0] = sorted(set(rows[0]) ^ {rows[0][0]})
    bad = hgp.verify_orthogonality(code_b15.hx, BitMatrix.from_rows(rows, code_b15.n))
    assert bad["bad_pairs"] >= 1 and bad["first_bad_pair"] is not None


def test_non_square_rejected():
    with pytest.raises(ValueError):
        hgp.build_hgp(BitMatrix.zeros(2, 3))


def test_save_and_load(tmp_path, code_b7):
    paths = hgp.save_code(code_b7, tmp_path)
    back = hgp.load_code(paths["hx_rows"], paths["hz_rows"])
    assert back.hx.rows == code_b7.hx.rows and back.hz.rows == code_b7.hz.rows
