"""Compare the compiled and pure-numpy projection kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are timed
on the same inputs after a warmup pass, and their outputs are checked to
agree before any number is reported.
"""

import time

import numpy as np

from gnepkit._kernels import IMPLEMENTATIONS


def _time(fn, args, repeats):
    fn(*args)  # warmup / jit compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_simplex(rng):
    print("project_simplex (per-call mean, seconds)")
    print(f"  {'dim':>6} " + " ".join(f"{k:>12}" for k in IMPLEMENTATIONS))
    for dim in (4, 32, 256, 2048):
        y = rng.standard_normal(dim)
        outs = {k: fns[0](y, 1.0) for k, fns in IMPLEMENTATIONS.items()}
        ref = outs["numpy"]
        for k, o in outs.items():
            assert np.allclose(o, ref, atol=1e-12), f"{k} disagrees at dim {dim}"
        times = {k: _time(fns[0], (y, 1.0), 2000)
                 for k, fns in IMPLEMENTATIONS.items()}
        print(f"  {dim:>6} " + " ".join(f"{times[k]:>12.2e}" for k in IMPLEMENTATIONS))


def bench_dykstra(rng):
    print("dykstra_halfspaces (per-call mean, seconds)")
    print(f"  {'m x n':>8} " + " ".join(f"{k:>12}" for k in IMPLEMENTATIONS))
    for m, n in ((6, 2), (20, 4), (60, 8), (200, 16)):
        A = rng.standard_normal((m, n))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        c = rng.standard_normal(n) * 0.1
        b = A @ c + rng.uniform(0.2, 1.0, m)      # nonempty by construction
        y = c + rng.standard_normal(n) * 3.0
        outs = {k: fns[1](A, b, y, 10_000, 1e-10)
                for k, fns in IMPLEMENTATIONS.items()}
        ref = outs["numpy"]
        for k, o in outs.items():
            assert np.allclose(o, ref, atol=1e-8), f"{k} disagrees at {m}x{n}"
        times = {k: _time(fns[1], (A, b, y, 10_000, 1e-10), 200)
                 for k, fns in IMPLEMENTATIONS.items()}
        print(f"  {m:>4}x{n:<3} " + " ".join(f"{times[k]:>12.2e}" for k in IMPLEMENTATIONS))


def main():
    rng = np.random.default_rng(0)
    print(f"backends available: {', '.join(IMPLEMENTATIONS)}")
    bench_simplex(rng)
    print()
    bench_dykstra(rng)


if __name__ == "__main__":
    main()
