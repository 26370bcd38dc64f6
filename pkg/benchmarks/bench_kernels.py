"""Head-to-head timing of the two kernel backends.

Imports both implementations directly, so one process can compare them on
identical inputs.  The numba functions are called once before timing:
compilation time would otherwise dominate and it is not what we ship.
Outputs are cross-checked while we are at it; a mismatch is a bug, not a
benchmark result.

Run:  python benchmarks/bench_kernels.py [--repeats N] [--seed S]

The installed package picks one backend at import time via the
LDPC_AUDIT_BACKEND environment variable (auto/numba/numpy); this script
exists to show what that choice costs.
"""

import argparse
import time

import numpy as np

from ldpc_audit.experiments import sample_regular
from ldpc_audit.gf2 import BitMatrix
from ldpc_audit.kernels import numpy_impl

try:
    from ldpc_audit.kernels import numba_impl
except ImportError:
    numba_impl = None


def best_of(repeats, fn, fresh_args):
    """Minimum wall time over ``repeats`` calls on fresh inputs."""
    best = float("inf")
    out = None
    for _ in range(repeats):
        args = fresh_args()
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_case(name, size_label, repeats, fresh_args):
    t_np, out_np = best_of(repeats, getattr(numpy_impl, name), fresh_args)
    row = f"{name:15s} {size_label:12s} {t_np * 1e3:10.3f}"
    if numba_impl is None:
        print(row + "        n/a      n/a")
        return
    t_nb, out_nb = best_of(repeats, getattr(numba_impl, name), fresh_args)
    flat = lambda o: np.concatenate([np.ravel(x) for x in np.atleast_1d(o)])
    if not np.array_equal(flat(out_np), flat(out_nb)):
        raise AssertionError(f"{name} backends disagree on {size_label}")
    print(row + f" {t_nb * 1e3:10.3f} {t_np / t_nb:7.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    if numba_impl is not None:
        # force compilation outside the timed region
        warm = np.array([[1, 1], [0, 1]], dtype=np.uint8)
        numba_impl.gauss_jordan(BitMatrix.from_dense(warm).words_copy(), 2)
        numba_impl.strip_fixpoint(warm)
    else:
        print("numba backend unavailable; timing numpy only")

    print(f"{'kernel':15s} {'size':12s} {'numpy ms':>10s} {'numba ms':>10s} "
          f"{'speedup':>8s}")
    for rows, cols in ((60, 120), (150, 300), (400, 800), (800, 1600)):
        dense = (rng.random((rows, cols)) < 0.5).astype(np.uint8)
        words = BitMatrix.from_dense(dense).words_copy()
        bench_case(
            "gauss_jordan", f"{rows}x{cols}", args.repeats,
            lambda w=words, c=cols: (w.copy(), c),  # mutated in place
        )
    for n in (300, 1200, 4800):
        dense = sample_regular(n, 3, 6, rng).to_dense()
        bench_case(
            "strip_fixpoint", f"{n // 2}x{n}", args.repeats,
            lambda d=dense: (d,),
        )


if __name__ == "__main__":
    main()
