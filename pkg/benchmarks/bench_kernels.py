"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the optimizer objective (batched E[T]/BLER), the Monte-Carlo
replay and the exhaustive enumerator on fixed random inputs, after one
warm-up call so JIT compilation is excluded.
"""
import argparse
import time

import numpy as np

from harqpred import kernels
from harqpred import _kernels_numpy as numpy_backend


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    n = 14
    eps = rng.random(n)
    fp, fn = rng.random((64, n)), rng.random((64, n))
    u = rng.random((1 << 15, 2 * n))
    e_eps, e_fp, e_fn = rng.random(10), rng.random(10), rng.random(10)
    return {
        "batch_burst 64x14": lambda k: k.batch_burst(eps, fp, fn, 3),
        "replay_burst 32768x14": lambda k: k.replay_burst(eps, fp[0], fn[0], 3, u[:, :n], u[:, n:], True),
        "enumerate_burst n=10": lambda k: k.enumerate_burst(e_eps, e_fp, e_fn, 2, True),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = {"numpy": numpy_backend}
    if kernels.numba_backend is not None:
        backends["numba"] = kernels.numba_backend
    rng = np.random.default_rng(0)
    work = cases(rng)
    print(f"{'kernel':<24}" + "".join(f"{name:>12}" for name in backends) + "     speedup")
    for label, call in work.items():
        t = {name: _best(lambda: call(mod), args.repeat) for name, mod in backends.items()}
        speed = f"{t['numpy'] / t['numba']:10.1f}x" if "numba" in t else ""
        print(f"{label:<24}" + "".join(f"{v * 1e3:10.3f}ms" for v in t.values()) + speed)


if __name__ == "__main__":
    main()
