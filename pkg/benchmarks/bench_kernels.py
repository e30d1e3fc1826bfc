"""Time the hot kernels with numba compilation on and off.

Each backend runs in its own interpreter because ``SURFMATCH_NO_JIT`` is read
at import time. Compilation is excluded by a warm-up call. Results are printed
as JSON; ``--output`` also writes them to a file.

    python benchmarks/bench_kernels.py --repeat 3
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
import surfmatch
from surfmatch.analytics import census_no_odd_y_chain
from surfmatch.engine import build_problem, run_trials
from surfmatch.matching import mwpm

scale = float(sys.argv[1])
repeat = int(sys.argv[2])


def best(fn, units):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times) / units


rng = np.random.default_rng(0)
mats = []
for _ in range(max(1, int(50 * scale))):
    w = np.triu(rng.random((12, 12)), 1)
    mats.append(w + w.T)
p2 = build_problem("perfect2d", 5, 0.03)
p3 = build_problem("fault_tolerant3d", 3, 0.003, 3)
n2 = max(1, int(20000 * scale))
n3 = max(1, int(2000 * scale))
out = {
    "jit": surfmatch.JIT_ENABLED,
    "blossom_12_nodes_s": best(lambda: [mwpm(m) for m in mats], len(mats)),
    "trial_2d_d5_correlated_s": best(lambda: run_trials(p2, 1, 0, n2, "correlated"), n2),
    "trial_ft_d3_correlated_s": best(lambda: run_trials(p3, 1, 0, n3, "correlated"), n3),
    "census_n14_k7_s": best(lambda: census_no_odd_y_chain(14, 7), 1),
}
print(json.dumps(out))
"""


def measure(no_jit: bool, scale: float, repeat: int) -> dict:
    env = dict(os.environ, SURFMATCH_NO_JIT="1" if no_jit else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(scale), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="workload multiplier for the compiled run")
    ap.add_argument("--python-scale", type=float, default=0.05,
                    help="workload multiplier for the pure-Python run")
    ap.add_argument("--output", default=None)
    args = ap.parse_args(argv)

    fast = measure(False, args.scale, args.repeat)
    slow = measure(True, args.python_scale, args.repeat)
    report = {"numba": fast, "python": slow, "speedup": {}}
    for key, value in fast.items():
        if key.endswith("_s") and value > 0:
            report["speedup"][key[:-2]] = slow[key] / value
    text = json.dumps(report, indent=2)
    print(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
