#!/usr/bin/env python3
"""Benchmark the three hot kernels under both backends.

Runs each workload in a subprocess with CAUSALGEN_BACKEND forced to numba
and then numpy, and prints a comparison table.  The workloads mirror the
heavy parts of a full 6-node build: canonical codes for all 32,768
upper-triangular graphs, separating-set tables for the 5-node enumeration,
and orientation filtering across the 4- and 5-node equivalence classes.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, time
import numpy as np
from causalgen import _kernels
from causalgen.dags import enumerate_dags, _perm_gathers, _bit_weights
from causalgen.independence import cluster_mecs, independence_structure, mec_members

timings = {"backend": _kernels.BACKEND}

# warm-up (trigger JIT compilation outside the timed region)
_kernels.min_perm_codes(np.zeros((1, 36), dtype=np.uint8), _perm_gathers(6), _bit_weights(6))
_kernels.dsep_sepset_masks(np.zeros((4, 4), dtype=np.uint8))
_kernels.matching_orientations(3, np.array([[0, 1]]), np.eye(3, dtype=np.uint8), np.zeros((0, 3)))

n = 6
pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
count = 1 << len(pairs)
flats = np.zeros((count, n * n), dtype=np.uint8)
for k, (i, j) in enumerate(pairs):
    sel = (np.arange(count) & (1 << k)).astype(bool)
    flats[sel, i * n + j] = 1
t0 = time.perf_counter()
codes = _kernels.min_perm_codes(flats, _perm_gathers(n), _bit_weights(n))
timings["canonical_codes_n6"] = time.perf_counter() - t0
assert len(set(codes.tolist())) == 5984

dags5 = enumerate_dags(5)
t0 = time.perf_counter()
for d in dags5:
    _kernels.dsep_sepset_masks(d.adjacency())
timings["dsep_tables_n5"] = time.perf_counter() - t0

mecs = cluster_mecs(enumerate_dags(4)) + cluster_mecs(dags5)
t0 = time.perf_counter()
total_members = 0
for mec in mecs:
    mec_members.cache_clear()
    total_members += len(mec_members(mec.structure))
timings["orientation_filter_n45"] = time.perf_counter() - t0

print(json.dumps(timings))
"""


def run_backend(backend: str, repeat: int) -> dict:
    env = dict(os.environ, CAUSALGEN_BACKEND=backend)
    best: dict[str, float] = {}
    for _ in range(repeat):
        out = subprocess.run(
            [sys.executable, "-c", WORKER], env=env, capture_output=True, text=True
        )
        if out.returncode != 0:
            raise RuntimeError(f"{backend} worker failed:\n{out.stderr}")
        timings = json.loads(out.stdout.strip().splitlines()[-1])
        for key, value in timings.items():
            if key == "backend":
                continue
            best[key] = min(best.get(key, float("inf")), value)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=2, help="runs per backend (best kept)")
    args = parser.parse_args()

    results = {}
    for backend in ("numba", "numpy"):
        try:
            results[backend] = run_backend(backend, args.repeat)
        except (RuntimeError, ImportError) as exc:
            print(f"skipping {backend}: {exc}", file=sys.stderr)

    if not results:
        return 1
    keys = sorted(next(iter(results.values())))
    header = f"{'workload':<28}" + "".join(f"{b:>12}" for b in results) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for key in keys:
        row = f"{key:<28}"
        for backend in results:
            row += f"{results[backend][key]:>11.3f}s"
        if len(results) == 2:
            numba_t = results.get("numba", {}).get(key)
            numpy_t = results.get("numpy", {}).get(key)
            if numba_t and numpy_t:
                row += f"{numpy_t / numba_t:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
