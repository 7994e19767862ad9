"""
Benchmark the hot kernels: numba backend vs pure-numpy fallback.

Run from a checkout with the package installed. The first section times
the two kernels in-process (both implementations are importable side by
side); the second section launches subprocesses with POSITIVITY_BACKEND
set to each value and times a full tree build end to end.
"""

import os
import subprocess
import sys
import time

import numpy as np

from positivity._kernels import (
    _HAVE_NUMBA,
    histogram_counts_numba,
    histogram_counts_numpy,
    scan_sorted_feature_numba,
    scan_sorted_feature_numpy,
)

REPEATS = 200
SIZES = (1_000, 10_000, 100_000, 1_000_000)


def bench(fn, *args, repeats=REPEATS):
    fn(*args)  # warmup (and JIT compile for the numba variants)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append((time.perf_counter() - start) * 1000)
    return float(np.mean(times)), float(np.std(times))


def scan_inputs(n, rng):
    values = np.sort(rng.random(n))
    values[n // 3 : n // 2] = values[n // 3]  # a run of duplicates
    labels = (rng.random(n) < 0.4).astype(np.int64)
    return np.ascontiguousarray(values), np.ascontiguousarray(labels)


print("=" * 72)
print("KERNEL BENCHMARK: numba vs numpy fallback")
print(f"numba available: {_HAVE_NUMBA}")
print("=" * 72)

rng = np.random.default_rng(0)

print("\nsplit scan (sorted feature column)")
print(f"{'n':>10} {'numpy ms':>12} {'numba ms':>12} {'speedup':>9}")
for n in SIZES:
    values, labels = scan_inputs(n, rng)
    np_mean, _ = bench(scan_sorted_feature_numpy, values, labels)
    if _HAVE_NUMBA:
        nb_mean, _ = bench(scan_sorted_feature_numba, values, labels)
        ratio = f"{np_mean / nb_mean:>8.2f}x"
        nb_cell = f"{nb_mean:>12.4f}"
    else:
        ratio, nb_cell = f"{'n/a':>9}", f"{'n/a':>12}"
    print(f"{n:>10,} {np_mean:>12.4f} {nb_cell} {ratio}")

print("\nhistogram binning (100 bins)")
print(f"{'n':>10} {'numpy ms':>12} {'numba ms':>12} {'speedup':>9}")
for n in SIZES:
    scores = rng.random(n)
    np_mean, _ = bench(histogram_counts_numpy, scores, 100)
    if _HAVE_NUMBA:
        nb_mean, _ = bench(histogram_counts_numba, scores, 100)
        ratio = f"{np_mean / nb_mean:>8.2f}x"
        nb_cell = f"{nb_mean:>12.4f}"
    else:
        ratio, nb_cell = f"{'n/a':>9}", f"{'n/a':>12}"
    print(f"{n:>10,} {np_mean:>12.4f} {nb_cell} {ratio}")

TREE_SNIPPET = """
import time
import numpy as np
from positivity import Config, build_tree
from positivity._kernels import active_backend

rng = np.random.default_rng(3)
n = 40_000
features = rng.random((n, 6))
labels = (
    (features[:, 0] > 0.5) & (features[:, 1] < 0.3) | (rng.random(n) < 0.05)
).astype(np.int64)
config = Config(max_depth=8)
build_tree(features, labels, config)  # warmup
start = time.perf_counter()
for _ in range(3):
    build_tree(features, labels, config)
elapsed = (time.perf_counter() - start) / 3
print(f"{active_backend()} {elapsed*1000:.1f}")
"""

print("\nend-to-end tree build (n=40,000, d=6, depth 8), per backend")
backends = ("numpy", "numba") if _HAVE_NUMBA else ("numpy",)
for backend in backends:
    env = dict(os.environ, POSITIVITY_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", TREE_SNIPPET],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    name, ms = proc.stdout.split()
    print(f"  backend={name:<6} build time {float(ms):>8.1f} ms")

print("\n" + "=" * 72)
