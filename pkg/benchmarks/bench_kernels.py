"""Time the compiled and numpy kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--size 270] [--patterns 64] [--repeat 3]

Also checks that both backends return bit-identical results.
"""

import argparse
import time

import numpy as np

from geneo_recon import _backend, geneo
from geneo_recon.grid import GridSignal
from geneo_recon.patterns import PatternLibrary, extract_patterns, tile_circles
from geneo_recon.sampling import SamplingSpec, observe
from geneo_recon.tda import sublevel_persistence


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=int, default=270)
    ap.add_argument("--radius", type=int, default=22)
    ap.add_argument("--patterns", type=int, default=64)
    ap.add_argument("--m", type=float, default=3.0)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    gt = GridSignal(rng.random((args.size, args.size)))
    lib = extract_patterns(gt, tile_circles(args.size, args.size, args.radius), args.radius)
    while len(lib) < args.patterns:
        lib = lib.concat(lib)
    lib = PatternLibrary(lib.radius, lib.patterns[: args.patterns])
    obs = observe(gt, SamplingSpec(args.m, 15, args.seed))

    backends = _backend.available()
    print(f"grid {args.size}x{args.size}, radius {args.radius}, {len(lib)} patterns, {len(obs)} samples")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    results = {}
    for name, job in (
        ("reconstruct", lambda k: geneo.reconstruct_sampling(obs, lib, kernels=k)),
        ("persistence", lambda k: sublevel_persistence(gt, k)),
    ):
        row = {}
        for b in backends:
            row[b], results[(name, b)] = best_of(lambda: job(_backend.get(b)), args.repeat)
        line = f"{name:<16}" + "".join(f"{row[b] * 1000:>10.1f}ms" for b in backends)
        if "cython" in row:
            line += f"  {row['python'] / row['cython']:>9.1f}x"
        print(line)

    if len(backends) > 1:
        a, b = results[("reconstruct", "python")], results[("reconstruct", "cython")]
        same = a.phi_rec == b.phi_rec and np.array_equal(a.best_pattern, b.best_pattern)
        pa, pb = results[("persistence", "python")], results[("persistence", "cython")]
        same = same and [d.as_pairs() for d in pa] == [d.as_pairs() for d in pb]
        print("backends bit-identical:", same)
        return 0 if same else 1
    print("compiled kernels not built; only the numpy fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
