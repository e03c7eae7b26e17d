"""Compiled vs pure-Python subtree walker on the same starts and grid.

    python3 benchmarks/bench_kernels.py [--tmax 100000] [--repeat 3]

Both kernels must return identical bins; the script exits nonzero otherwise.
"""
import argparse
import sys
import time

from apollonian import _walk
from apollonian.descartes import as_root
from apollonian.orbit import WalkNode, _children, root_slots
from apollonian.primes import sieve
from apollonian.series import geometric_grid

try:
    from apollonian import _walk_ext
except ImportError:
    _walk_ext = None


def starts_for(root):
    root = as_root(root)
    return [(*c.quad, c.last, c.depth) for c in _children(WalkNode(root.quad, 0, 0), root_slots(root))]


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default="-1,2,2,3")
    ap.add_argument("--tmax", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    root = [int(x) for x in args.root.split(",")]
    grid = geometric_grid(100, 10**0.125, args.tmax)
    starts = starts_for(root)

    t_py, r_py = best_of(lambda: _walk.walk_counts(starts, grid), args.repeat)
    print(f"python   T={args.tmax:>10}  nodes={r_py[3]:>10}  {t_py:8.3f}s  {r_py[3] / t_py / 1e6:6.2f} Mnode/s")
    if _walk_ext is None:
        print("compiled kernel not built; nothing to compare")
        return 0
    flags = sieve(args.tmax).tobytes()
    t_c, r_c = best_of(lambda: _walk_ext.walk_counts(starts, grid, prime_flags=flags), args.repeat)
    print(f"cython   T={args.tmax:>10}  nodes={r_c[3]:>10}  {t_c:8.3f}s  {r_c[3] / t_c / 1e6:6.2f} Mnode/s")
    print(f"speedup  {t_py / t_c:.1f}x")
    if r_py != r_c:
        print("MISMATCH between kernels", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
