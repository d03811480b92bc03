"""Circulant-permutation lifts of CSS codes."""

from __future__ import annotations

from hgplift.lift.build import (
    LiftAudit,
    ShiftTableError,
    assignment_from_solution,
    audit_document,
    audit_lift,
    build_lifted_matrices,
    code_from_shift_tables,
    lift_matrix,
    load_shift_tables,
    packaged_b15_p64,
    save_shift_tables,
    solution_document,
    write_json,
)
from hgplift.lift.constraints import (
    DEFAULT_PRIME,
    DEFAULT_WEIGHTS,
    CycleConstraint,
    MissingShiftError,
    OddOverlapError,
    ShiftAssignment,
    UnavoidableFilter,
    VarIndex,
    ZeroEquation,
    build_zero_equations,
    counts_by_type,
    cycle_voltage,
    enumerate_cycle_constraints,
    equation_residue,
    filter_unavoidable_8cycles,
)
from hgplift.lift.search import (
    BudgetExhausted,
    ConstraintSystem,
    LiftInfeasible,
    SearchResult,
    WalkParams,
    WalkResult,
    feasible_random_walk,
    find_feasible_lift,
    local_kernel_move,
)

__all__ = [name for name in dir() if not name.startswith("_")]
