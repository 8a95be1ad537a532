"""Benchmark the compiled kernels against the pure-Python fallback.

The fallback is selected with MOONMOD_NO_NUMBA=1 in a child process, since
the dispatch decision is made at import time.  Usage:

    python benchmarks/bench_kernels.py [c_max] [grades]
"""

import json
import os
import subprocess
import sys
import time

WORKLOAD = r"""
import json, sys, time
import numpy as np
from moonmod import kernels

c_max = int(sys.argv[1])
ncols = int(sys.argv[2])
cs = np.arange(2, c_max + 1, 2, dtype=np.int64)
out_re = np.empty((len(cs), ncols))
out_im = np.empty_like(out_re)
# Warm-up triggers compilation on the numba path.
kernels.kloosterman_grades(1, ncols, cs[:4], 2, 1, 0, out_re[:4], out_im[:4])
t0 = time.perf_counter()
kernels.kloosterman_grades(1, ncols, cs, 2, 1, 0, out_re, out_im)
dt = time.perf_counter() - t0
print(json.dumps({
    "numba": kernels.USE_NUMBA,
    "seconds": dt,
    "terms": int(cs.sum()),  # inner loop work is ~sum of c
    "checksum": float(out_re.sum()),
}))
"""


def run(env_extra, c_max, grades):
    env = dict(os.environ, **env_extra)
    proc = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(c_max), str(grades)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(proc.stdout)


def main():
    c_max = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    grades = int(sys.argv[2]) if len(sys.argv) > 2 else 25
    fast = run({}, c_max, grades)
    slow = run({"MOONMOD_NO_NUMBA": "1"}, c_max, grades)
    if abs(fast["checksum"] - slow["checksum"]) > 1e-6 * max(1.0, abs(fast["checksum"])):
        print("WARNING: path checksums disagree", fast["checksum"], slow["checksum"])
    print(f"workload: c up to {c_max} (step 2), {grades} grades")
    print(f"numba path:  {fast['seconds']:.3f} s (compiled={fast['numba']})")
    print(f"python path: {slow['seconds']:.3f} s (compiled={slow['numba']})")
    if fast["seconds"] > 0:
        print(f"speedup: {slow['seconds'] / fast['seconds']:.1f}x")


if __name__ == "__main__":
    main()
