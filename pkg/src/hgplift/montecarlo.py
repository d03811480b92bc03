"""Frame-error-rate trials, Wilson intervals, and FER reports."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import bisect

from hgplift.decoder import Decoder, DecoderConfig, sample_depolarizing_arrays
from hgplift.hgp import CssCode

Z95 = 1.959964
P_DE = 0.1529  # population-dynamics reference value, stored not computed
CSV_COLUMNS = (
    "p", "N", "f", "fer", "wilson_lo", "wilson_hi", "mean_iters",
    "exact", "degenerate", "logical_failure", "syndrome_mismatch", "iters_total", "osd_invoked",
)


def wilson_interval(f: int, N: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``f`` failures in ``N`` trials."""
    if N <= 0:
        raise ValueError("N must be positive")
    if not 0 <= f <= N:
        raise ValueError("need 0 <= f <= N")
    z2 = z * z
    denom = N + z2
    center = (f + z2 / 2) / denom
    half = z / denom * math.sqrt(f * (N - f) / N + z2 / 4)
    lo = 0.0 if f == 0 else max(0.0, center - half)
    hi = 1.0 if f == N else min(1.0, center + half)
    return lo, hi


def hashing_objective(p: float) -> float:
    """``1 - H2(p) - p*log2(3)``."""
    if p <= 0.0:
        return 1.0
    h2 = -p * math.log2(p) - (1 - p) * math.log2(1 - p)
    return 1.0 - h2 - p * math.log2(3)


def hashing_limit() -> float:
    return float(bisect(hashing_objective, 1e-12, 0.25, xtol=1e-13))


P_HASH = 0.18929


@dataclass
class FerPoint:
    p: float
    trials: int
    exact_successes: int
    degenerate_successes: int
    logical_failures: int
    syndrome_mismatches: int
    bp_iterations_total: int
    osd_invocations: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be positive")
        total = self.exact_successes + self.degenerate_successes + self.failures
        if total != self.trials:
            raise ValueError(f"status counts sum to {total}, not {self.trials}")

    @property
    def failures(self) -> int:
        return self.logical_failures + self.syndrome_mismatches

    @property
    def fer(self) -> Fraction:
        return Fraction(self.failures, self.trials)

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    @property
    def wilson_lo(self) -> float:
        return self.wilson[0]

    @property
    def wilson_hi(self) -> float:
        return self.wilson[1]

    @property
    def mean_bp_iterations(self) -> Fraction:
        return Fraction(self.bp_iterations_total, self.trials)

    def csv_row(self) -> list[str]:
        lo, hi = self.wilson
        return [
            repr(self.p), str(self.trials), str(self.failures), repr(float(self.fer)), repr(lo), repr(hi),
            repr(float(self.mean_bp_iterations)), str(self.exact_successes), str(self.degenerate_successes),
            str(self.logical_failures), str(self.syndrome_mismatches), str(self.bp_iterations_total),
            str(self.osd_invocations),
        ]

    def to_json(self) -> dict[str, Any]:
        lo, hi = self.wilson
        return {
            "p": self.p, "N": self.trials, "f": self.failures, "fer": float(self.fer),
            "wilson_lo": lo, "wilson_hi": hi, "mean_bp_iterations": float(self.mean_bp_iterations),
            "exact_successes": self.exact_successes, "degenerate_successes": self.degenerate_successes,
            "logical_failures": self.logical_failures, "syndrome_mismatches": self.syndrome_mismatches,
            "osd_invocations": self.osd_invocations,
        }


@dataclass
class RunConfig:
    code_id: str
    p_values: Sequence[float]
    trials: int
    seed: int = 0
    workers: int = 1
    max_failures: int | None = None
    batch_size: int = 50
    decoder: dict[str, Any] = field(default_factory=dict)  # DecoderConfig fields minus p_channel

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1 or self.batch_size < 1:
            raise ValueError("workers and batch_size must be positive")

    def decoder_config(self, p: float) -> DecoderConfig:
        return DecoderConfig.from_json({**self.decoder, "p_channel": p if p > 0 else 1e-9})

    def digest(self) -> str:
        payload = json.dumps(
            {
                "code_id": self.code_id, "p_values": list(self.p_values), "trials": self.trials,
                "seed": self.seed, "workers": self.workers, "max_failures": self.max_failures,
                "batch_size": self.batch_size, "decoder": self.decoder_config(0.1).to_json(),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    """Counter-based substream keyed by (seed, point index, trial index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, trial])))


# worker-process state
_DECODER: Decoder | None = None


def _init_worker(code: CssCode, config: DecoderConfig) -> None:
    global _DECODER
    _DECODER = Decoder(code, config)


def _run_batch(args: tuple[float, int, int, int, int]) -> list[tuple[str, int, bool, str | None]]:
    p, seed, point, start, stop = args
    dec = _DECODER
    assert dec is not None
    out = []
    for t in range(start, stop):
        x, z = sample_depolarizing_arrays(dec.n, p, trial_rng(seed, point, t))
        out.append(dec.run_trial(x, z))
    return out


def _batches(N: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, N)) for s in range(0, N, size)]


def _ordered_results(code, config, p, seed, point, N, workers, batch_size) -> Iterator[list]:
    jobs = [(p, seed, point, a, b) for a, b in _batches(N, batch_size)]
    if workers == 1:
        _init_worker(code, config)
        for job in jobs:
            yield _run_batch(job)
        return
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(code, config)) as pool:
        # map yields in submission order, so early stopping is worker-independent
        yield from pool.map(_run_batch, jobs)


def run_trials(
    code: CssCode,
    p: float,
    N: int,
    config: DecoderConfig | None = None,
    seed: int = 0,
    workers: int = 1,
    point_index: int = 0,
    max_failures: int | None = None,
    batch_size: int = 50,
    trace: list[dict[str, Any]] | None = None,
) -> FerPoint:
    """Sample, decode, and classify ``N`` trials (fewer if ``max_failures`` is hit).

    Early stopping happens only at batch boundaries, so results depend on
    ``(seed, point_index, batch_size)`` and not on ``workers``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if config is None:
        config = DecoderConfig(p if p > 0 else 1e-9)
    counts = {"exact": 0, "degenerate": 0, "logical_failure": 0, "syndrome_mismatch": 0}
    iters = osd = done = 0
    for batch in _ordered_results(code, config, p, seed, point_index, N, workers, batch_size):
        for status, it, osd_used, stage in batch:
            counts[status] += 1
            iters += it
            osd += int(osd_used)
            if trace is not None:
                trace.append({"trial": done, "status": status, "iterations": it, "osd_invoked": osd_used, "osd_stage": stage})
            done += 1
        if max_failures is not None and counts["logical_failure"] + counts["syndrome_mismatch"] >= max_failures:
            break
    return FerPoint(
        p=p,
        trials=done,
        exact_successes=counts["exact"],
        degenerate_successes=counts["degenerate"],
        logical_failures=counts["logical_failure"],
        syndrome_mismatches=counts["syndrome_mismatch"],
        bp_iterations_total=iters,
        osd_invocations=osd,
    )


def run_config(code: CssCode, cfg: RunConfig) -> list[FerPoint]:
    return [
        run_trials(
            code, p, cfg.trials, cfg.decoder_config(p), cfg.seed, cfg.workers, i, cfg.max_failures, cfg.batch_size
        )
        for i, p in enumerate(cfg.p_values)
    ]


# --- reports -------------------------------------------------------------------

def write_csv(points: Sequence[FerPoint], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for pt in points:
            w.writerow(pt.csv_row())
    return path


def read_csv(path: str | Path) -> list[FerPoint]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns {reader.fieldnames}")
        for row in reader:
            pt = FerPoint(
                p=float(row["p"]),
                trials=int(row["N"]),
                exact_successes=int(row["exact"]),
                degenerate_successes=int(row["degenerate"]),
                logical_failures=int(row["logical_failure"]),
                syndrome_mismatches=int(row["syndrome_mismatch"]),
                bp_iterations_total=int(row["iters_total"]),
                osd_invocations=int(row["osd_invoked"]),
            )
            if pt.failures != int(row["f"]):
                raise ValueError("failure column disagrees with status counts")
            out.append(pt)
    return out


def marker_positions(points: Sequence[FerPoint]) -> list[tuple[float, float, bool]]:
    """``(p, y, zero_failure)`` per point; zero-failure points sit at ``wilson_hi``."""
    return [
        (q.p, q.wilson_hi if q.failures == 0 else float(q.fer), q.failures == 0)
        for q in sorted(points, key=lambda q: q.p)
    ]


def plot_fer(points: Sequence[FerPoint], path: str | Path, title: str | None = None) -> Path:
    """Log-scale FER with Wilson bands; zero-failure points sit at the upper bound."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "hgplift", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        pts = sorted(points, key=lambda q: q.p)
        pos = marker_positions(pts)
        hit = [(q, y) for q, (_, y, z) in zip(pts, pos) if not z]
        zero = [(q, y) for q, (_, y, z) in zip(pts, pos) if z]
        if hit:
            ax.errorbar(
                [q.p for q, _ in hit], [y for _, y in hit],
                yerr=[[y - q.wilson_lo for q, y in hit], [q.wilson_hi - y for q, y in hit]],
                fmt="o-", color="black", capsize=3, label="FER (Wilson 95%)",
            )
        if zero:
            ax.plot([q.p for q, _ in zero], [y for _, y in zero], "v", color="black",
                    markerfacecolor="white", label="0 failures (upper bound)")
        ax.axvline(P_DE, linestyle="--", color="tab:blue", label=f"p_DE = {P_DE}")
        ax.axvline(P_HASH, linestyle=":", color="tab:red", label=f"p_hash = {P_HASH}")
        ax.set_yscale("log")
        ax.set_xlabel("depolarizing probability p")
        ax.set_ylabel("frame error rate")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def emit_report(
    points: Sequence[FerPoint],
    out_dir: str | Path,
    config: RunConfig | None = None,
    title: str | None = None,
) -> dict[str, Path]:
    if not points:
        raise ValueError("need at least one point")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": write_csv(points, out / "results.csv"),
        "svg": plot_fer(points, out / "fer.svg", title),
    }
    from hgplift import __version__

    manifest = {
        "code_id": config.code_id if config else None,
        "config_sha256": config.digest() if config else None,
        "provenance": f"hgplift {__version__}",
        "seed": config.seed if config else None,
        "workers": config.workers if config else None,
        "reference_lines": {"p_DE": P_DE, "p_hash": P_HASH},
        "points": [pt.to_json() for pt in points],
        "files": {"csv": "results.csv", "svg": "fer.svg"},
    }
    paths["json"] = out / "results.json"
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return paths


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
