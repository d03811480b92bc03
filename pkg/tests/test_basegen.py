from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from hgplift import basegen, gf2, hgp, tanner
from hgplift.gf2 import BitMatrix

GOLDEN = {
    # name: (s, w, rank, corank, girth)
    "b7": (7, 3, 4, 3, 6),
    "b13": (13, 4, 12, 1, 6),
    "b15": (15, 3, 10, 5, 8),
    "b15t": (15, 3, 10, 5, 8),
    "b30": (30, 3, 21, 9, 8),
    "b40": (40, 4, 25, 15, 8),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_named_bases_validate(name):
    s, w, r, c, g = GOLDEN[name]
    b = basegen.named_base(name)
    rep = basegen.validate_base(b, w)
    assert (rep.s, rep.rank, rep.corank, rep.tanner_girth) == (s, r, c, g)
    assert rep.regular and rep.connected
    assert rep.max_row_pair_overlap == 1 and rep.max_col_pair_overlap == 1
    assert rep.simple_6_cycle_free == (g == 8)
    assert tanner.is_tanner_cycle(b.matrix, rep.girth_witness["checks"], rep.girth_witness["variables"])


def test_table_ordering_is_a_relabelled_w2():
    """Same invariants as the geometric construction and the same HGP parameters."""
    a = hgp.hgp_params(basegen.named_base("b15"))
    b = hgp.hgp_params(basegen.named_base("b15t"))
    assert a.as_row() == b.as_row()


def test_naive_direct_sum_is_disconnected():
    w2 = basegen.named_base("w2")
    rep = basegen.validate_base(basegen.direct_sum(w2, w2), 3)
    assert rep.corank == 10 and not rep.connected
    assert len(tanner.connected_components(basegen.direct_sum(w2, w2).matrix)) == 2


def test_identity_base():
    rep = basegen.validate_base(BitMatrix.identity(5), 1)
    assert rep.regular and rep.tanner_girth is None and rep.corank == 0 and not rep.connected


def test_unknown_name():
    with pytest.raises(KeyError):
        basegen.named_base("b99")


def test_size_four_weight_three_has_no_4cycle_free_permutation_union():
    """Exhaustive: every union of three 4-permutations has a collision or a 4-cycle."""
    perms = list(itertools.permutations(range(4)))
    for trio in itertools.combinations_with_replacement(perms, 3):
        a = np.zeros((4, 4), dtype=np.int64)
        for p in trio:
            a[np.arange(4), p] += 1
        if (a > 1).any():
            continue
        o = a @ a.T
        np.fill_diagonal(o, 0)
        assert o.max() >= 2
    with pytest.raises(basegen.SearchFailure):
        basegen.search_regular_base(4, 3, 0)


def test_search_weight_two_cycle():
    b = basegen.search_regular_base(8, 2, 1, seed=5)
    rep = basegen.validate_base(b, 2)
    assert rep.regular and rep.connected and rep.corank == 1 and rep.tanner_girth is None


def test_search_s17_class_properties():
    b = basegen.search_regular_base(17, 3, 1, seed=1)
    rep = basegen.validate_base(b, 3)
    assert rep.regular and rep.connected and rep.simple_6_cycle_free and rep.corank == 1
    p = hgp.hgp_params(b, with_distance=False)
    assert (p.n, p.m_x, p.k) == (578, 289, 2)


def test_search_budget_exhaustion():
    with pytest.raises(basegen.SearchFailure) as err:
        basegen.search_regular_base(15, 3, 14, seed=0, budget=50, restart_after=10)
    assert err.value.best_score is not None


def test_edge_switch_needs_corner():
    b = basegen.BaseMatrix(BitMatrix.from_rows([[1], [0]], 2), "X", "test")
    with pytest.raises(ValueError):
        basegen.edge_switch_enlarge(b)


def test_save_base(tmp_path):
    b = basegen.named_base("b7")
    paths = basegen.save_base(b, tmp_path, 3)
    assert gf2.load_matrix(paths["rows"]).to_dense().tolist() == b.matrix.to_dense().tolist()
    lines = open(paths["bitmap"]).read().split()
    assert len(lines) == 7 and all(line.count("1") == 3 for line in lines)
    rep = json.load(open(paths["report"]))
    assert rep["corank"] == 3 and rep["label"] == "B7"
    img = tmp_path / "b7.png"
    basegen.save_bitmap_image(b.matrix, img, scale=2)
    assert img.stat().st_size > 0


def test_search_s18_class_properties():
    b = basegen.search_regular_base(18, 3, 2, seed=3)
    rep = basegen.validate_base(b, 3)
    assert rep.regular and rep.connected and rep.simple_6_cycle_free and rep.corank == 2
    p = hgp.hgp_params(b, with_distance=False)
    assert (p.n, p.m_x, p.k) == (648, 324, 8)
