"""Time the compiled kernels against the pure numpy fallback."""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from hgplift import _backend, _pykernels
from hgplift.decoder import MESSAGE_CLIP, Decoder, DecoderConfig, sample_depolarizing_arrays
from hgplift.gf2 import BitMatrix
from hgplift.lift import build_lifted_matrices, code_from_shift_tables, packaged_b15_p64


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_echelon(kernels, m: BitMatrix, repeats: int) -> float:
    def go():
        kernels.echelon_inplace(m.packed(), m.n_cols, False)

    return best_of(go, repeats)


def bench_bp(kernels, dec: Decoder, p: float, iters: int, repeats: int, seed: int) -> float:
    x, z = sample_depolarizing_arrays(dec.n, p, np.random.default_rng(seed))
    cx, cz = dec.cx, dec.cz
    sx, sz = cx.syndrome(z), cz.syndrome(x)

    def go():
        kernels.bp_flood(cx.ptr, cx.var, cz.ptr, cz.var, cx.vptr, cx.vedge, cz.vptr, cz.vedge,
                         sx, sz, dec.n, p, iters, MESSAGE_CLIP)

    return best_of(go, repeats)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--bp-iterations", type=int, default=20)
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print one JSON record instead of a table")
    args = ap.parse_args()

    if _backend.compiled is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . --no-build-isolation")
    a = packaged_b15_p64()
    lifted = build_lifted_matrices(code_from_shift_tables(a), a)
    rng = np.random.default_rng(args.seed)
    dense = BitMatrix.from_dense((rng.random((1500, 3000)) < 0.01).astype(np.uint8))
    dec = Decoder(lifted, DecoderConfig(args.p, args.bp_iterations))

    rows = []
    for name, fn in (
        ("echelon 1500x3000 random", lambda k: bench_echelon(k, dense, args.repeats)),
        ("echelon lifted H_X 14400x28800", lambda k: bench_echelon(k, lifted.hx, 1)),
        (f"bp_flood lifted, {args.bp_iterations} iterations",
         lambda k: bench_bp(k, dec, args.p, args.bp_iterations, args.repeats, args.seed)),
    ):
        t_py = fn(_pykernels)
        t_c = fn(_backend.compiled)
        rows.append({"kernel": name, "python_s": t_py, "compiled_s": t_c, "speedup": t_py / t_c})

    if args.json:
        print(json.dumps(rows))
        return
    print(f"{'kernel':40s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for r in rows:
        print(f"{r['kernel']:40s} {r['python_s']:11.4f} {r['compiled_s']:13.4f} {r['speedup']:7.1f}x")


if __name__ == "__main__":
    main()
