"""Feasible shift search and the constrained random walk.

Both work inside the solution set of the zero congruences, so CSS
orthogonality of the lift is never broken.  The search parametrizes that set
by the free columns of a unit-pivot reduction mod P; the walk proposes local
kernel moves around random seed variables.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import sparse

from hgplift.hgp import CssCode
from hgplift.lift.constraints import (
    DEFAULT_PRIME,
    DEFAULT_WEIGHTS,
    CycleConstraint,
    ShiftAssignment,
    VarIndex,
    ZeroEquation,
    build_zero_equations,
    enumerate_cycle_constraints,
    filter_unavoidable_8cycles,
)
from hgplift.lift.modular import kernel_sample, mod_rref


class LiftInfeasible(RuntimeError):
    def __init__(self, message: str, best_score: int | None = None) -> None:
        super().__init__(message)
        self.best_score = best_score


class BudgetExhausted(LiftInfeasible):
    pass


@dataclass
class ConstraintSystem:
    """Zero congruences plus the kept nonzero cycle constraints of one code."""

    code: CssCode
    vi: VarIndex
    zero_eqs: list[ZeroEquation]
    constraints: list[CycleConstraint]
    eq_matrix: sparse.csr_matrix
    con_matrix: sparse.csr_matrix
    weights: np.ndarray
    unavoidable: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        code: CssCode,
        up_to: int = 10,
        weights: dict[str, int] | None = None,
        prime: int = DEFAULT_PRIME,
    ) -> ConstraintSystem:
        vi = VarIndex(code)
        eqs = build_zero_equations(code)
        cons = enumerate_cycle_constraints(code, up_to, weights)
        filt = filter_unavoidable_8cycles(cons, eqs, code, prime)
        return cls.from_parts(code, eqs, filt.kept, filt.stats, vi)

    @classmethod
    def from_parts(cls, code, zero_eqs, constraints, unavoidable=None, vi=None) -> ConstraintSystem:
        vi = vi or VarIndex(code)
        return cls(
            code=code,
            vi=vi,
            zero_eqs=list(zero_eqs),
            constraints=list(constraints),
            eq_matrix=vi.matrix(zero_eqs),
            con_matrix=vi.matrix(constraints),
            weights=np.array([c.weight for c in constraints], dtype=np.int64),
            unavoidable=dict(unavoidable or {}),
        )

    def score(self, w: np.ndarray, P: int) -> int:
        """Total weight of constraints whose voltage vanishes mod P."""
        if not self.constraints:
            return 0
        vals = (self.con_matrix @ w) % P
        return int(self.weights[vals == 0].sum())

    def equations_ok(self, w: np.ndarray, P: int) -> bool:
        return not self.zero_eqs or not ((self.eq_matrix @ w) % P).any()


@dataclass
class SearchResult:
    assignment: ShiftAssignment
    score: int
    steps: int
    seconds: float
    free_dim: int
    history: list[tuple[int, int]] = field(default_factory=list)


def _parametrize(sys_: ConstraintSystem, P: int) -> tuple[sparse.csr_matrix, int]:
    """Matrix ``T`` with ``w = T x mod P`` solving every zero congruence."""
    n = sys_.vi.n
    if not sys_.zero_eqs:
        return sparse.identity(n, dtype=np.int64, format="csr"), n
    red = mod_rref(sys_.eq_matrix.toarray(), P)
    free = red.free_columns(n)
    if red.stuck.size:
        free = free[~red.stuck.any(axis=0)[free]]
    nf = free.size
    t = sparse.lil_matrix((n, nf), dtype=np.int64)
    for k, f in enumerate(free):
        t[f, k] = 1
    if red.rank and nf:
        dep = (-red.rows[:, free]) % P
        r_idx, k_idx = np.nonzero(dep)
        t = t.tocsr() + sparse.csr_matrix(
            (dep[r_idx, k_idx], (red.pivots[r_idx], k_idx)), shape=(n, nf)
        )
    return sparse.csr_matrix(t), nf


def find_feasible_lift(
    code: CssCode,
    P: int,
    seed: int = 0,
    weights: dict[str, int] | None = None,
    budget: int = 200_000,
    system: ConstraintSystem | None = None,
    noise: float = 0.05,
    candidates: int = 4,
    log_every: int = 0,
) -> SearchResult:
    """Min-conflicts search over the free parameters of the zero congruences.

    Each step picks a violated constraint, tries every nonzero increment on a
    few of the free parameters it depends on, and applies the best one (a
    random one with probability ``noise``).  Raises BudgetExhausted with the
    best score seen when ``budget`` steps pass without reaching score 0.
    """
    if P < 1:
        raise ValueError("P must be positive")
    t0 = time.perf_counter()
    sys_ = system or ConstraintSystem.build(code, weights=weights)
    vi = sys_.vi
    if not sys_.constraints:
        return SearchResult(ShiftAssignment.zeros(code, P), 0, 0, 0.0, 0)
    if P == 1:
        raise LiftInfeasible("P=1 makes every voltage vanish", best_score=int(sys_.weights.sum()))
    T, nf = _parametrize(sys_, P)
    G = sparse.csr_matrix(sys_.con_matrix @ T)
    G.data %= P
    G.eliminate_zeros()
    dead = np.flatnonzero(G.getnnz(axis=1) == 0)
    if dead.size:
        raise LiftInfeasible(
            f"{dead.size} constraints vanish identically on the solution set of the zero congruences",
            best_score=int(sys_.weights[dead].sum()),
        )
    Gc = G.tocsc()
    wts = sys_.weights
    rng = np.random.default_rng(seed)
    x = rng.integers(0, P, size=nf, dtype=np.int64)
    vals = (G @ x) % P
    deltas = np.arange(1, P, dtype=np.int64)
    score = int(wts[vals == 0].sum())
    best = score
    history = [(0, score)]
    step = 0
    while score > 0 and step < budget:
        step += 1
        viol = np.flatnonzero(vals == 0)
        j = int(viol[rng.integers(viol.size)])
        lo, hi = G.indptr[j], G.indptr[j + 1]
        pool = G.indices[lo:hi]
        if pool.size > candidates:
            pool = rng.choice(pool, size=candidates, replace=False)
        best_move = None
        best_gain = None
        moves = []
        for f in pool:
            a, b = Gc.indptr[f], Gc.indptr[f + 1]
            rows = Gc.indices[a:b]
            coef = Gc.data[a:b]
            new = (vals[rows, None] + coef[:, None] * deltas[None, :]) % P
            before = int(wts[rows][vals[rows] == 0].sum())
            after = ((new == 0) * wts[rows, None]).sum(axis=0)
            gain = before - after
            jloc = int(np.searchsorted(rows, j))
            ok = new[jloc] != 0  # the move must repair the chosen constraint
            if not ok.any():
                continue
            gain = np.where(ok, gain, np.iinfo(np.int64).min)
            k = int(np.argmax(gain + rng.random(gain.size)))
            moves.append((f, int(deltas[rng.choice(np.flatnonzero(ok))]), rows, coef))
            if best_gain is None or gain[k] > best_gain:
                best_gain = int(gain[k])
                best_move = (f, int(deltas[k]), rows, coef)
        if best_move is None:
            continue
        if moves and rng.random() < noise:
            best_move = moves[rng.integers(len(moves))]
        f, d, rows, coef = best_move
        x[f] = (x[f] + d) % P
        vals[rows] = (vals[rows] + coef * d) % P
        score = int(wts[vals == 0].sum())
        if score < best:
            best = score
            history.append((step, score))
        if log_every and step % log_every == 0:
            print(f"[search] step={step} score={score} best={best}", flush=True)
    if score > 0:
        raise BudgetExhausted(f"budget of {budget} steps exhausted (best score {best})", best_score=best)
    w = (T @ x) % P
    if not sys_.equations_ok(w, P) or sys_.score(w, P) != 0:
        raise AssertionError("search produced an assignment failing direct re-verification")
    return SearchResult(vi.assignment(w, P), 0, step, time.perf_counter() - t0, nf, history)


@dataclass
class WalkParams:
    seed_vars: int = 24
    radius: int = 10
    target_accepts: int = 250
    max_proposals: int = 10_000
    seed: int = 642001


@dataclass
class WalkResult:
    assignment: ShiftAssignment
    stats: dict[str, Any]


class _Incidence:
    def __init__(self, eq_matrix: sparse.csr_matrix) -> None:
        self.eq2var = eq_matrix
        self.var2eq = eq_matrix.tocsc()
        self._full: dict[int, object] = {}

    def full_reduction(self, P: int):
        """Reduction of the whole system, reused whenever a block covers every variable."""
        if P not in self._full:
            self._full[P] = mod_rref(self.eq2var.toarray(), P)
        return self._full[P]

    def eqs_of(self, v: int) -> np.ndarray:
        return self.var2eq.indices[self.var2eq.indptr[v]:self.var2eq.indptr[v + 1]]

    def vars_of(self, e: int) -> np.ndarray:
        return self.eq2var.indices[self.eq2var.indptr[e]:self.eq2var.indptr[e + 1]]


def local_kernel_move(
    inc: _Incidence, seeds: list[int], P: int, radius: int, rng: random.Random
) -> dict[int, int] | None:
    """Random nonzero solution of the zero system supported near ``seeds``.

    Grows a variable set by ``radius`` variable-equation-variable hops, keeps
    every other variable fixed, and samples the kernel of the equations that
    touch the set.  Returns None when that kernel is trivial.
    """
    seen = set(seeds)
    frontier = deque((v, 0) for v in seeds)
    while frontier:
        v, d = frontier.popleft()
        if d >= radius:
            continue
        for e in inc.eqs_of(v):
            for u in inc.vars_of(e):
                u = int(u)
                if u not in seen:
                    seen.add(u)
                    frontier.append((u, d + 1))
    vars_ = np.array(sorted(seen), dtype=np.int64)
    eqs = np.unique(np.concatenate([inc.eqs_of(v) for v in vars_])) if vars_.size else np.zeros(0, np.int64)
    if vars_.size == inc.eq2var.shape[1] and eqs.size:
        x = kernel_sample(inc.full_reduction(P), vars_.size, rng)
    elif eqs.size:
        # variables outside the block stay fixed, so every touched equation constrains it
        local = inc.eq2var[eqs][:, vars_].toarray()
        red = mod_rref(local, P)
        x = kernel_sample(red, vars_.size, rng)
    else:
        x = np.array([rng.randrange(P) for _ in vars_], dtype=np.int64)
    nz = np.flatnonzero(x)
    if nz.size == 0:
        return None
    return {int(vars_[i]): int(x[i]) for i in nz}


def feasible_random_walk(
    start: ShiftAssignment,
    system: ConstraintSystem,
    params: WalkParams | None = None,
    log_every: int = 0,
) -> WalkResult:
    """Random walk through score-0 assignments by scaled local kernel moves."""
    params = params or WalkParams()
    P = start.P
    vi = system.vi
    w = vi.vector(start)
    if not system.equations_ok(w, P):
        raise LiftInfeasible("start assignment violates the zero congruences")
    if system.score(w, P) != 0:
        raise LiftInfeasible("start assignment has nonzero violation score", best_score=system.score(w, P))
    w_start = w.copy()
    rng = random.Random(params.seed)
    inc = _Incidence(system.eq_matrix)
    n = vi.n
    accepts = rejected_score = rejected_nomove = changed = 0
    for _ in range(params.max_proposals):
        if accepts >= params.target_accepts:
            break
        seeds = rng.sample(range(n), min(params.seed_vars, n))
        mv = local_kernel_move(inc, seeds, P, params.radius, rng)
        if mv is None:
            rejected_nomove += 1
            continue
        scale = rng.randrange(1, P) if P > 1 else 0
        idx = np.fromiter(mv.keys(), dtype=np.int64)
        step = np.fromiter(mv.values(), dtype=np.int64) * scale % P
        trial = w.copy()
        trial[idx] = (trial[idx] + step) % P
        if system.score(trial, P) == 0:
            w = trial
            accepts += 1
            changed += len(mv)
            if log_every and accepts % log_every == 0:
                print(f"[walk] accepts={accepts} dist_start={int((w != w_start).sum())}", flush=True)
        else:
            rejected_score += 1
    if not system.equations_ok(w, P) or system.score(w, P) != 0:
        raise AssertionError("walk left the feasible set")
    total = accepts + rejected_score + rejected_nomove
    stats = {
        "zero_eqs": len(system.zero_eqs),
        "unavoidable_8cycles": system.unavoidable,
        "constraints_total": len(system.constraints),
        "counts_by_type": _counts(system.constraints),
        "accepted_kernel_moves": accepts,
        "rejected_score_moves": rejected_score,
        "rejected_no_kernel_move": rejected_nomove,
        "accepted_fraction": accepts / max(1, total),
        "hamming_distance_from_start_solution": int((w != w_start).sum()),
        "mean_changed_vars_per_accepted_move": changed / max(1, accepts),
    }
    return WalkResult(vi.assignment(w, P), stats)


def _counts(cons: list[CycleConstraint]) -> dict[str, int]:
    out: dict[str, int] = {}
    for c in cons:
        out[c.ctype] = out.get(c.ctype, 0) + 1
    return out


__all__ = [
    "BudgetExhausted",
    "ConstraintSystem",
    "DEFAULT_WEIGHTS",
    "LiftInfeasible",
    "SearchResult",
    "WalkParams",
    "WalkResult",
    "feasible_random_walk",
    "find_feasible_lift",
    "local_kernel_move",
]
