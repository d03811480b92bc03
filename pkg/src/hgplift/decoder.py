"""Depolarizing noise, four-state BP, OSD-lite repair, and outcome classification.

H_X rows constrain the z component of an error and H_Z rows the x component.
BP keeps binary messages on both Tanner graphs and fuses them at each qubit
through the joint I/X/Z/Y prior; OSD-lite then repairs whichever side still
has an unsatisfied syndrome.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

import numpy as np

from hgplift import gf2
from hgplift._backend import kernels
from hgplift.gf2 import BitMatrix, BitVec, RowSpace
from hgplift.hgp import CssCode

Status = Literal["exact", "degenerate", "logical_failure", "syndrome_mismatch"]
STATUSES: tuple[Status, ...] = ("exact", "degenerate", "logical_failure", "syndrome_mismatch")

MESSAGE_CLIP = 25.0


@dataclass(frozen=True)
class PauliVec:
    n: int
    x_bits: BitVec
    z_bits: BitVec

    def __post_init__(self) -> None:
        if self.x_bits.length != self.n or self.z_bits.length != self.n:
            raise ValueError("x_bits and z_bits must both have length n")

    @classmethod
    def identity(cls, n: int) -> PauliVec:
        return cls(n, BitVec.zeros(n), BitVec.zeros(n))

    @classmethod
    def from_arrays(cls, x: np.ndarray, z: np.ndarray) -> PauliVec:
        x = np.asarray(x)
        z = np.asarray(z)
        if x.shape != z.shape:
            raise ValueError("x and z arrays differ in length")
        return cls(int(x.size), BitVec.from_dense(x), BitVec.from_dense(z))

    @classmethod
    def single(cls, n: int, q: int, pauli: str) -> PauliVec:
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        if pauli in ("X", "Y"):
            x[q] = 1
        if pauli in ("Z", "Y"):
            z[q] = 1
        return cls.from_arrays(x, z)

    def x_dense(self) -> np.ndarray:
        return self.x_bits.to_dense()

    def z_dense(self) -> np.ndarray:
        return self.z_bits.to_dense()

    @property
    def weight(self) -> int:
        return len(set(self.x_bits.support) | set(self.z_bits.support))

    def __xor__(self, other: PauliVec) -> PauliVec:
        return PauliVec(self.n, self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)


@dataclass(frozen=True)
class OsdConfig:
    unique_weight_cap: int = 30
    fallback_dof_cap: int = 5
    fallback_weight_cap: int = 20
    prefix_start: int = 32
    prefix_limit: int = 4096
    local_pool: int = 2048
    pool_caps: tuple[tuple[int, int], ...] = ((6, 160), (12, 128), (24, 96))
    two_hop_unsat_cap: int = 32
    joint_var_cap: int = 128
    joint_dof_cap: int = 20
    ets_enabled: bool = False

    def __post_init__(self) -> None:
        caps = [
            self.unique_weight_cap, self.fallback_dof_cap, self.fallback_weight_cap, self.prefix_start,
            self.prefix_limit, self.local_pool, self.two_hop_unsat_cap, self.joint_var_cap, self.joint_dof_cap,
        ]
        if any(c <= 0 for c in caps) or any(t <= 0 or c <= 0 for t, c in self.pool_caps):
            raise ValueError("all OSD-lite caps must be positive")
        if self.ets_enabled:
            raise ValueError("ETS lookup tables are not supported")


@dataclass(frozen=True)
class DecoderConfig:
    p_channel: float
    max_iterations: int = 100
    osd: OsdConfig = field(default_factory=OsdConfig)
    osd_enabled: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.p_channel < 1.0:
            raise ValueError("p_channel must lie in (0, 1)")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["osd"]["pool_caps"] = [list(pc) for pc in self.osd.pool_caps]
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> DecoderConfig:
        osd = dict(d.get("osd", {}))
        if "pool_caps" in osd:
            osd["pool_caps"] = tuple(tuple(pc) for pc in osd["pool_caps"])
        return cls(
            p_channel=float(d["p_channel"]),
            max_iterations=int(d.get("max_iterations", 100)),
            osd=OsdConfig(**osd),
            osd_enabled=bool(d.get("osd_enabled", True)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass
class DecodeOutcome:
    status: Status
    iterations_used: int
    osd_invoked: bool
    estimate: PauliVec
    osd_stage: str | None = None  # None, "prefix", "local", or "none" when OSD found nothing

    def trace(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "iterations": self.iterations_used,
            "osd_invoked": self.osd_invoked,
            "osd_stage": self.osd_stage,
        }


@dataclass
class BpResult:
    x: np.ndarray
    z: np.ndarray
    posterior: np.ndarray
    converged: bool
    iterations: int

    @property
    def estimate(self) -> PauliVec:
        return PauliVec.from_arrays(self.x, self.z)


# --- channel and syndromes -------------------------------------------------

def sample_depolarizing_arrays(n: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One uniform draw per qubit: ``[0,p/3)`` X, ``[p/3,2p/3)`` Z, ``[2p/3,p)`` Y."""
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    u = rng.random(n)
    x = ((u < p / 3) | ((u >= 2 * p / 3) & (u < p))).astype(np.uint8)
    z = ((u >= p / 3) & (u < p)).astype(np.uint8)
    return x, z


def sample_depolarizing(n: int, p: float, rng: np.random.Generator) -> PauliVec:
    return PauliVec.from_arrays(*sample_depolarizing_arrays(n, p, rng))


class _Csr:
    """Check-major and variable-major edge arrays of one parity-check matrix."""

    def __init__(self, m: BitMatrix) -> None:
        lens = np.array(m.row_weights(), dtype=np.int64)
        self.ptr = np.zeros(m.n_rows + 1, dtype=np.int64)
        np.cumsum(lens, out=self.ptr[1:])
        self.var = np.fromiter((c for r in m.rows for c in r), dtype=np.int64, count=int(lens.sum()))
        self.owner = np.repeat(np.arange(m.n_rows, dtype=np.int64), lens)
        order = np.argsort(self.var, kind="stable")
        self.vedge = order.astype(np.int64)
        self.vptr = np.zeros(m.n_cols + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.var, minlength=m.n_cols), out=self.vptr[1:])
        self.m = m
        self.n_rows = m.n_rows

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        acc = np.bincount(self.owner, weights=bits[self.var], minlength=self.n_rows)
        return (acc.astype(np.int64) & 1).astype(np.uint8)

    def checks_of(self, q: int) -> np.ndarray:
        return self.owner[self.vedge[self.vptr[q]:self.vptr[q + 1]]]

    def vars_of(self, c: int) -> np.ndarray:
        return self.var[self.ptr[c]:self.ptr[c + 1]]


def compute_syndromes(code: CssCode, e: PauliVec) -> tuple[BitVec, BitVec]:
    """``s_x = H_X z`` and ``s_z = H_Z x``."""
    if e.n != code.n:
        raise ValueError(f"error length {e.n} != code length {code.n}")
    return gf2.mul_vec(code.hx, e.z_bits), gf2.mul_vec(code.hz, e.x_bits)


# --- reliability and OSD-lite ----------------------------------------------------

def flip_costs(posteriors: np.ndarray) -> np.ndarray:
    """``|log(P_best / P_second)|`` per qubit over the four Pauli posteriors."""
    post = np.asarray(posteriors, dtype=float)
    top2 = -np.sort(-post, axis=1)[:, :2]
    with np.errstate(divide="ignore"):
        c = np.abs(np.log(top2[:, 0]) - np.log(top2[:, 1]))
    return np.where(np.isfinite(c), c, np.inf)


def reliability_order(costs: np.ndarray) -> np.ndarray:
    """Ascending cost, ties by index."""
    return np.lexsort((np.arange(costs.size), costs))


def min_weight_in_coset(particular: np.ndarray, null_basis: list[np.ndarray]) -> np.ndarray:
    """Lightest vector of ``particular + span(null_basis)`` (first in enumeration order on ties)."""
    nv = particular.size
    if not null_basis:
        return particular.copy()
    words = (nv + 63) // 64
    cur = gf2.pack_rows([np.flatnonzero(particular).tolist()], nv)
    for b in null_basis:
        bw = gf2.pack_rows([np.flatnonzero(b).tolist()], nv)
        cur = np.concatenate([cur, cur ^ bw])
    wts = np.bitwise_count(cur).sum(axis=1) if words else np.zeros(cur.shape[0], int)
    best = int(np.argmin(wts))
    return gf2.unpack_row(cur[best], nv).astype(np.uint8)


@dataclass
class PrefixDecision:
    solution: np.ndarray | None
    reason: str  # unique | coset | unique_over_cap | dof_over_cap | coset_over_cap
    dof: int
    weight: int | None


def decide_prefix_solution(particular: np.ndarray, null_basis: list[np.ndarray], cfg: OsdConfig) -> PrefixDecision:
    """Apply the unique-solution and small-coset caps to a solvable prefix system."""
    dof = len(null_basis)
    if dof == 0:
        w = int(particular.sum())
        if w <= cfg.unique_weight_cap:
            return PrefixDecision(particular, "unique", 0, w)
        return PrefixDecision(None, "unique_over_cap", 0, w)
    if dof > cfg.fallback_dof_cap:
        return PrefixDecision(None, "dof_over_cap", dof, None)
    best = min_weight_in_coset(particular, null_basis)
    w = int(best.sum())
    if w <= cfg.fallback_weight_cap:
        return PrefixDecision(best, "coset", dof, w)
    return PrefixDecision(None, "coset_over_cap", dof, w)


def _solve_restricted(csr: _Csr, residual: np.ndarray, cols: np.ndarray):
    """Solve ``H[:, cols] y = residual``; None when inconsistent or uncovered."""
    unsat = np.flatnonzero(residual)
    touched = np.unique(np.concatenate([csr.checks_of(int(q)) for q in cols])) if cols.size else np.zeros(0, np.int64)
    if np.setdiff1d(unsat, touched, assume_unique=True).size:
        return None
    local = {int(q): i for i, q in enumerate(cols)}
    rows = []
    for c in touched:
        r = [local[int(v)] for v in csr.vars_of(int(c)) if int(v) in local]
        if residual[c]:
            r.append(cols.size)
        rows.append(r)
    a = gf2.pack_rows(rows, cols.size + 1)
    return gf2.solve_packed(a, cols.size)


class Decoder:
    """BP plus OSD-lite for one CSS code; caches edge arrays and row spaces."""

    def __init__(self, code: CssCode, config: DecoderConfig) -> None:
        self.code = code
        self.config = config
        self.n = code.n
        self.cx = _Csr(code.hx)
        self.cz = _Csr(code.hz)
        self._rs_x: RowSpace | None = None
        self._rs_z: RowSpace | None = None

    # -- BP --
    def bp(self, sx: np.ndarray, sz: np.ndarray) -> BpResult:
        n = self.n
        sx = np.ascontiguousarray(sx, dtype=np.uint8)
        sz = np.ascontiguousarray(sz, dtype=np.uint8)
        if not sx.any() and not sz.any():
            post = np.zeros((n, 4))
            post[:, 0] = 1.0
            return BpResult(np.zeros(n, np.uint8), np.zeros(n, np.uint8), post, True, 0)
        cx, cz = self.cx, self.cz
        x, z, post, ok, it = kernels.bp_flood(
            cx.ptr, cx.var, cz.ptr, cz.var, cx.vptr, cx.vedge, cz.vptr, cz.vedge,
            sx, sz, n, float(self.config.p_channel), int(self.config.max_iterations), MESSAGE_CLIP,
        )
        return BpResult(np.asarray(x, np.uint8), np.asarray(z, np.uint8), np.asarray(post), bool(ok), int(it))

    # -- OSD-lite --
    def _prefix_stage(self, csr: _Csr, residual: np.ndarray, order: np.ndarray) -> tuple[np.ndarray | None, str]:
        cfg = self.config.osd
        limit = min(self.n, cfg.prefix_limit)
        size = min(cfg.prefix_start, limit)
        while True:
            cols = order[:size]
            sol = _solve_restricted(csr, residual, cols)
            if sol is not None:
                dec = decide_prefix_solution(sol[0], sol[1], cfg)
                if dec.solution is None:
                    return None, dec.reason
                flip = np.zeros(self.n, np.uint8)
                flip[cols[dec.solution.astype(bool)]] = 1
                return flip, dec.reason
            if size >= limit:
                return None, "unsolvable"
            size = min(2 * size, limit)

    def local_pool(self, csr: _Csr, residual: np.ndarray, rank: np.ndarray) -> np.ndarray:
        """Candidate variables near unsatisfied checks, most unreliable first."""
        cfg = self.config.osd
        unsat = np.flatnonzero(residual)
        pool = np.unique(np.concatenate([csr.vars_of(int(c)) for c in unsat]))
        if unsat.size <= cfg.two_hop_unsat_cap:
            checks = np.unique(np.concatenate([csr.checks_of(int(q)) for q in pool]))
            pool = np.unique(np.concatenate([pool] + [csr.vars_of(int(c)) for c in checks]))
        pool = pool[np.lexsort((pool, rank[pool]))][: cfg.local_pool]
        cap = None
        for threshold, c in cfg.pool_caps:
            if unsat.size > threshold:
                cap = c if cap is None else min(cap, c)
        if cap is not None:
            pool = pool[:cap]
        return pool

    def _local_stage(self, csr: _Csr, residual: np.ndarray, rank: np.ndarray) -> np.ndarray | None:
        cfg = self.config.osd
        pool = self.local_pool(csr, residual, rank)[: cfg.joint_var_cap]
        sol = _solve_restricted(csr, residual, pool)
        if sol is None or len(sol[1]) > cfg.joint_dof_cap:
            return None
        best = min_weight_in_coset(sol[0], sol[1])
        flip = np.zeros(self.n, np.uint8)
        flip[pool[best.astype(bool)]] = 1
        return flip

    def repair(self, sx, sz, x, z, costs) -> tuple[np.ndarray, np.ndarray, list[str]]:
        """OSD-lite on each side whose residual syndrome is nonzero."""
        order = reliability_order(costs)
        rank = np.empty(self.n, dtype=np.int64)
        rank[order] = np.arange(self.n)
        x, z = x.copy(), z.copy()
        stages = []
        for csr, syn, bits in ((self.cx, sx, z), (self.cz, sz, x)):
            residual = csr.syndrome(bits) ^ syn
            if not residual.any():
                continue
            flip, reason = self._prefix_stage(csr, residual, order)
            stage = "prefix"
            if flip is None:
                flip = self._local_stage(csr, residual, rank)
                stage = "local" if flip is not None else "none"
            if flip is not None:
                bits ^= flip
            stages.append(stage)
        return x, z, stages

    # -- classification --
    @property
    def rowspace_x(self) -> RowSpace:
        if self._rs_x is None:
            self._rs_x = RowSpace(self.code.hx)
        return self._rs_x

    @property
    def rowspace_z(self) -> RowSpace:
        if self._rs_z is None:
            self._rs_z = RowSpace(self.code.hz)
        return self._rs_z

    def classify_arrays(self, xt, zt, xe, ze, sx=None, sz=None) -> Status:
        if sx is None:
            sx = self.cx.syndrome(zt)
        if sz is None:
            sz = self.cz.syndrome(xt)
        if (self.cx.syndrome(ze) ^ sx).any() or (self.cz.syndrome(xe) ^ sz).any():
            return "syndrome_mismatch"
        dx = xt ^ xe
        dz = zt ^ ze
        if not dx.any() and not dz.any():
            return "exact"
        if self.rowspace_x.contains(dx) and self.rowspace_z.contains(dz):
            return "degenerate"
        return "logical_failure"

    def classify(self, e_true: PauliVec, e_est: PauliVec) -> Status:
        if e_true.n != self.n or e_est.n != self.n:
            raise ValueError("length mismatch")
        return self.classify_arrays(e_true.x_dense(), e_true.z_dense(), e_est.x_dense(), e_est.z_dense())

    # -- full pipeline --
    def decode_arrays(self, sx: np.ndarray, sz: np.ndarray):
        """Returns ``(x, z, iterations, osd_invoked, osd_stage)``."""
        bp = self.bp(sx, sz)
        x, z = bp.x, bp.z
        if bp.converged or not self.config.osd_enabled:
            return x, z, bp.iterations, False, None
        x, z, stages = self.repair(sx, sz, x, z, flip_costs(bp.posterior))
        stage = "none" if "none" in stages else ("local" if "local" in stages else "prefix")
        return x, z, bp.iterations, True, stage

    def run_trial(self, xt: np.ndarray, zt: np.ndarray) -> tuple[Status, int, bool, str | None]:
        sx = self.cx.syndrome(zt)
        sz = self.cz.syndrome(xt)
        x, z, it, osd, stage = self.decode_arrays(sx, sz)
        return self.classify_arrays(xt, zt, x, z, sx, sz), it, osd, stage

    def decode_error(self, e: PauliVec) -> DecodeOutcome:
        xt, zt = e.x_dense(), e.z_dense()
        sx = self.cx.syndrome(zt)
        sz = self.cz.syndrome(xt)
        x, z, it, osd, stage = self.decode_arrays(sx, sz)
        status = self.classify_arrays(xt, zt, x, z, sx, sz)
        return DecodeOutcome(status, it, osd, PauliVec.from_arrays(x, z), stage)


# --- functional surface ----------------------------------------------------------

def _syn_arrays(code: CssCode, syndromes: tuple[BitVec, BitVec]) -> tuple[np.ndarray, np.ndarray]:
    sx, sz = syndromes
    if sx.length != code.m_x or sz.length != code.m_z:
        raise ValueError("syndrome lengths do not match the code")
    return sx.to_dense(), sz.to_dense()


def bp_decode(code: CssCode, syndromes: tuple[BitVec, BitVec], config: DecoderConfig):
    """Returns ``(estimate, posteriors, converged, iterations)``."""
    r = Decoder(code, config).bp(*_syn_arrays(code, syndromes))
    return r.estimate, r.posterior, r.converged, r.iterations


def osd_lite_repair(
    code: CssCode,
    syndromes: tuple[BitVec, BitVec],
    bp_estimate: PauliVec,
    costs: np.ndarray,
    config: DecoderConfig,
) -> PauliVec:
    dec = Decoder(code, config)
    sx, sz = _syn_arrays(code, syndromes)
    x, z, _ = dec.repair(sx, sz, bp_estimate.x_dense(), bp_estimate.z_dense(), np.asarray(costs, float))
    return PauliVec.from_arrays(x, z)


def classify_outcome(code: CssCode, e_true: PauliVec, e_est: PauliVec) -> Status:
    return Decoder(code, DecoderConfig(0.1)).classify(e_true, e_est)
