from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hgplift import gf2, hgp, tanner
from hgplift.gf2 import BitMatrix
from hgplift.hgp import CssCode
from hgplift.lift import (
    ConstraintSystem,
    CycleConstraint,
    LiftInfeasible,
    OddOverlapError,
    ShiftAssignment,
    ShiftTableError,
    VarIndex,
    WalkParams,
    assignment_from_solution,
    audit_lift,
    build_lifted_matrices,
    build_zero_equations,
    cycle_voltage,
    enumerate_cycle_constraints,
    equation_residue,
    feasible_random_walk,
    filter_unavoidable_8cycles,
    find_feasible_lift,
    lift_matrix,
    load_shift_tables,
    save_shift_tables,
    solution_document,
)
from hgplift.lift.modular import kernel_sample, mod_rref
from hgplift.lift.search import _parametrize


def random_assignment(code: CssCode, P: int, seed: int) -> ShiftAssignment:
    vi = VarIndex(code)
    return vi.assignment(np.random.default_rng(seed).integers(0, P, vi.n), P)


def kernel_assignment(system: ConstraintSystem, P: int, rng: np.random.Generator) -> ShiftAssignment:
    T, nf = _parametrize(system, P)
    return system.vi.assignment((T @ rng.integers(0, P, nf)) % P, P)


def closes_in_lift(code: CssCode, a: ShiftAssignment, c: CycleConstraint, u0: int = 0) -> bool:
    """Follow the base cycle through the lifted graph from sheet ``u0``."""
    lifted = build_lifted_matrices(code, a)
    m = lifted.hx if c.side == "X" else lifted.hz
    cols = m.col_supports()
    P = a.P
    row = c.rows[0] * P + u0
    k = len(c.rows)
    for i in range(k):
        label = c.labels[i]
        (col,) = [v for v in m.rows[row] if v // P == label]
        nxt = c.rows[(i + 1) % k]
        (row,) = [r for r in cols[col] if r // P == nxt]
    return row == c.rows[0] * P + u0


def toy_all_ones() -> CssCode:
    m = BitMatrix.from_dense([[1, 1], [1, 1]])
    return CssCode(m, m)


# --- modular algebra -----------------------------------------------------

@given(st.integers(2, 6), st.integers(2, 8), st.sampled_from([2, 3, 5, 7, 64]), st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_mod_rref_kernel_samples_solve(r, n, mod, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, mod, size=(r, n))
    red = mod_rref(a, mod)
    assert red.rank <= min(r, n)
    x = kernel_sample(red, n, random.Random(seed))
    assert not ((a @ x) % mod).any()


def test_mod_rref_prime_rank_matches_gf2():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, size=(12, 15))
    assert mod_rref(a, 2).rank == gf2.rank(BitMatrix.from_dense(a.astype(np.uint8)))


# --- equations and constraints -----------------------------------------------

def test_toy_constraints_and_equations():
    code = toy_all_ones()
    cons = enumerate_cycle_constraints(code, up_to=4)
    assert [(c.side, c.length) for c in cons] == [("X", 4), ("Z", 4)]
    assert len(build_zero_equations(code)) == 4


def test_disjoint_supports_have_no_equations():
    code = CssCode(BitMatrix.from_rows([[0, 1]], 4), BitMatrix.from_rows([[2, 3]], 4))
    assert build_zero_equations(code) == []


def test_odd_overlap_raises_with_witness():
    code = CssCode(BitMatrix.from_rows([[0, 1]], 3), BitMatrix.from_rows([[1, 2]], 3))
    with pytest.raises(OddOverlapError) as err:
        build_zero_equations(code)
    assert err.value.witness == {"x_check": 0, "z_check": 0, "common_variables": [1]}


def test_zero_assignment_has_zero_voltages(code_b7):
    a = ShiftAssignment.zeros(code_b7, 9)
    for c in enumerate_cycle_constraints(code_b7, up_to=8):
        assert cycle_voltage(a, c) == 0


@pytest.mark.parametrize("seed", range(3))
def test_voltage_zero_iff_cycle_closes(code_b7, seed):
    a = random_assignment(code_b7, 4, seed)
    cons = enumerate_cycle_constraints(code_b7, up_to=6)
    rng = random.Random(seed)
    for c in rng.sample(cons, 40):
        assert (cycle_voltage(a, c) == 0) == closes_in_lift(code_b7, a, c, rng.randrange(4))


def test_forced_cycles_vanish_on_the_kernel(code_b7, b7):
    eqs = build_zero_equations(code_b7)
    system = ConstraintSystem.from_parts(code_b7, eqs, [])
    forced = [
        CycleConstraint(fc.side, fc.checks, fc.variables)
        for side in ("X", "Z")
        for fc in tanner.enumerate_forced_8cycles(b7.matrix, side)
    ]
    rng = np.random.default_rng(0)
    for P in (5, 12):
        a = kernel_assignment(system, P, rng)
        assert all(equation_residue(a, e) == 0 for e in eqs)
        assert all(cycle_voltage(a, c) == 0 for c in forced)
        lifted = build_lifted_matrices(code_b7, a)
        assert hgp.verify_orthogonality(lifted.hx, lifted.hz)["orthogonal"]


def test_filter_removes_forced_cycles(code_b7):
    cons = enumerate_cycle_constraints(code_b7, up_to=8)
    filt = filter_unavoidable_8cycles(cons, build_zero_equations(code_b7), code_b7)
    assert filt.stats["hx_removed_unavoidable"] >= 441 and filt.stats["hz_removed_unavoidable"] >= 441
    a = kernel_assignment(ConstraintSystem.from_parts(code_b7, build_zero_equations(code_b7), []), 7,
                          np.random.default_rng(5))
    assert all(cycle_voltage(a, c) == 0 for c in filt.removed)


def test_filter_keeps_cycles_without_equations():
    ring = BitMatrix.from_rows([[0, 1], [1, 2], [2, 3], [3, 0]], 4)
    code = CssCode(ring, BitMatrix.zeros(0, 4))
    cons = enumerate_cycle_constraints(code, up_to=8)
    filt = filter_unavoidable_8cycles(cons, [], code)
    assert [c.ctype for c in filt.kept] == ["8Hx"] and filt.removed == []


# --- search and walk ---------------------------------------------------------

def test_search_on_b7_small_system(code_b7):
    system = ConstraintSystem.build(code_b7, up_to=6)
    res = find_feasible_lift(code_b7, 16, seed=2, system=system, budget=50_000)
    w = system.vi.vector(res.assignment)
    assert system.score(w, 16) == 0 and system.equations_ok(w, 16)
    assert all(cycle_voltage(res.assignment, c) != 0 for c in system.constraints)
    lifted = build_lifted_matrices(code_b7, res.assignment)
    assert tanner.tanner_girth_upto(lifted.hx).girth == 8


def test_search_p1_infeasible(code_b7):
    with pytest.raises(LiftInfeasible):
        find_feasible_lift(code_b7, 1, system=ConstraintSystem.build(code_b7, up_to=6))


def test_search_without_constraints_returns_zero():
    code = hgp.build_hgp(BitMatrix.identity(3))
    res = find_feasible_lift(code, 5)
    assert res.score == 0 and set(res.assignment.x_shifts.values()) == {0}


def test_walk_zero_proposals_is_identity(supplementary):
    a, base, _ = supplementary
    system = ConstraintSystem.build(base)
    out = feasible_random_walk(a, system, WalkParams(max_proposals=0))
    assert out.assignment.x_shifts == a.x_shifts and out.stats["accepted_kernel_moves"] == 0


def test_walk_stays_feasible(supplementary):
    a, base, _ = supplementary
    system = ConstraintSystem.build(base)
    out = feasible_random_walk(a, system, WalkParams(radius=2, target_accepts=5, max_proposals=200, seed=7))
    b = out.assignment
    assert out.stats["accepted_kernel_moves"] == 5
    assert out.stats["hamming_distance_from_start_solution"] > 0
    assert all(equation_residue(b, e) == 0 for e in system.zero_eqs)
    assert all(cycle_voltage(b, c) != 0 for c in system.constraints)


def test_walk_rejects_infeasible_start(code_b7):
    system = ConstraintSystem.build(code_b7, up_to=6)
    with pytest.raises(LiftInfeasible):
        feasible_random_walk(ShiftAssignment.zeros(code_b7, 8), system, WalkParams(max_proposals=1))


# --- lifting and audit -----------------------------------------------------

def test_lift_p1_unchanged(code_b7):
    a = ShiftAssignment.zeros(code_b7, 1)
    lifted = build_lifted_matrices(code_b7, a)
    assert lifted.hx.rows == code_b7.hx.rows and lifted.hz.rows == code_b7.hz.rows


def test_lift_convention():
    m = BitMatrix.from_rows([[0]], 1)
    lifted = lift_matrix(m, {(0, 0): 1}, 3)
    # row u holds column (u + t) mod P
    assert [list(r) for r in lifted.rows] == [[1], [2], [0]]


def test_identity_lift_is_disjoint_copies(code_b7):
    for P in (2, 3):
        lifted = build_lifted_matrices(code_b7, ShiftAssignment.zeros(code_b7, P))
        audit = audit_lift(lifted, lmax=8)
        assert audit.k == P * 18
        assert len(audit.hx_components) == P and len(set(audit.hx_components)) == 1


@pytest.mark.parametrize("seed", range(3))
def test_random_feasible_lift_keeps_dimension(code_b7, seed):
    system = ConstraintSystem.from_parts(code_b7, build_zero_equations(code_b7), [])
    a = kernel_assignment(system, 5, np.random.default_rng(seed))
    assert audit_lift(build_lifted_matrices(code_b7, a), lmax=8).k >= 18


# --- tables and documents -----------------------------------------------------

def test_packaged_tables(supplementary):
    a, base, _ = supplementary
    assert len(a.x_shifts) == 1350 and len(a.z_shifts) == 1350 and a.P == 64
    assert a.covers(base)


def test_shift_table_round_trip(tmp_path, supplementary):
    a, _, _ = supplementary
    px, pz = save_shift_tables(a, tmp_path)
    b = load_shift_tables(px, pz, 64)
    assert b.x_shifts == a.x_shifts and b.z_shifts == a.z_shifts


def test_shift_table_errors(tmp_path, supplementary):
    a, _, _ = supplementary
    px, pz = save_shift_tables(a, tmp_path)
    with pytest.raises(ShiftTableError):
        load_shift_tables(px, pz, 32)
    bad = tmp_path / "bad.csv"
    bad.write_text("base_check_row,base_variable_column,row_color,shift_mod_64\n0,1,0,99\n")
    with pytest.raises(ShiftTableError):
        load_shift_tables(bad, pz, 64)


def test_solution_document_round_trip(supplementary):
    a, base, _ = supplementary
    doc = solution_document(base, a, {"seed": 0}, {})
    b = assignment_from_solution(doc, base)
    assert b.x_shifts == a.x_shifts and b.z_shifts == a.z_shifts
