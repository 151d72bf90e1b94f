"""Throughput of the compiled Euler kernels against the numpy fallback.

Reports nanoseconds per point-update (one path, one starting point, one
Euler step) for each preset, and checks that the two backends agree.

    python benchmarks/bench_kernels.py --paths 20000 --steps 64
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from cylstable import StableSpec, simulate
from cylstable import _backend
from cylstable.models import from_preset

PRESETS = ("identity", "diag-sine", "holder-drift", "rotation-mix")


def time_one(model, spec, x0, n_paths, m, backend, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = simulate(model, spec, 0.0, 1.0, x0, m=m, n_paths=n_paths, seed=1,
                       backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out.values


def bench(n_paths=20_000, m=64, dim=1, alpha=1.5, repeat=3, presets=PRESETS):
    spec = StableSpec(alpha, dim)
    x0 = np.zeros((4, dim))
    updates = n_paths * m * len(x0)
    rows = []
    backends = ["python"] + (["compiled"] if _backend.compiled() is not None else [])
    for name in presets:
        if name == "rotation-mix" and dim < 2:
            continue
        model = from_preset(name, dim)
        res = {}
        for be in backends:
            sec, vals = time_one(model, spec, x0, n_paths, m, be, repeat)
            res[be] = (sec, vals)
        row = {"preset": name, "dim": dim, "alpha": alpha, "paths": n_paths, "steps": m}
        for be, (sec, _) in res.items():
            row[f"{be}_ns"] = 1e9 * sec / updates
        if "compiled" in res:
            a, b = res["compiled"][1], res["python"][1]
            row["speedup"] = res["python"][0] / res["compiled"][0]
            row["max_abs_diff"] = float(np.max(np.abs(a - b))) if a.size else 0.0
        rows.append(row)
    return rows


def _cell(row, key, spec):
    return format(row[key], spec) if key in row else "n/a"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=64)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)
    rows = bench(args.paths, args.steps, args.dim, args.alpha, args.repeat)
    if args.json:
        json.dump(rows, sys.stdout, indent=1)
        print()
        return rows
    print(f"backend in use by default: {_backend.NAME}")
    print(f"{'preset':<14}{'python ns':>12}{'compiled ns':>13}{'speedup':>9}{'max diff':>11}")
    for r in rows:
        print(f"{r['preset']:<14}{_cell(r, 'python_ns', '.1f'):>12}"
              f"{_cell(r, 'compiled_ns', '.1f'):>13}{_cell(r, 'speedup', '.1f'):>9}"
              f"{_cell(r, 'max_abs_diff', '.1e'):>11}")
    return rows


if __name__ == "__main__":
    main()
