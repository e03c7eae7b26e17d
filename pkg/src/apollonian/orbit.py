"""Apollonian-group orbit enumeration and the counting engine.

Circles beyond the four root circles correspond one-to-one with non-returning
flip words applied to the root; along any such word the entry just inserted
is the largest entry of the quadruple.  Counting below a bound ``T`` is a
depth-first walk over that tree which prunes any branch whose new entry is
``>= T``.

The hot walk runs in a compiled kernel (``_walk_ext``) when it is importable
and the values fit in int64; otherwise the pure-Python walker in ``_walk``
is used.  Set ``APOLLONIAN_PURE=1`` to force the Python walker.
"""
from __future__ import annotations

import logging
import os
import time
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _walk
from .descartes import (
    PackingKind,
    Quadruple,
    RootQuadruple,
    as_root,
    checked,
    flip,
)
from .errors import InternalInvariantError, InvalidInputError
from .primes import SIEVE_LIMIT, U64_LIMIT, prime_test_for, sieve
from .series import CountSeries

log = logging.getLogger(__name__)

try:
    from . import _walk_ext
except ImportError:  # pragma: no cover - depends on build
    _walk_ext = None

if os.environ.get("APOLLONIAN_PURE"):
    _walk_ext = None

BACKEND = "cython" if _walk_ext is not None else "python"

DEFAULT_DEPTH_CAP = _walk.DEFAULT_DEPTH_CAP
DEFAULT_SPLIT_DEPTH = 4
WORKERS_ENV = "APOLLONIAN_WORKERS"

# compiled walker is used only when every live value stays far inside int64
_COMPILED_LIMIT = 1 << 60

GENERATORS = tuple(
    np.array(m, dtype=np.int64)
    for m in (
        [[-1, 2, 2, 2], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        [[1, 0, 0, 0], [2, -1, 2, 2], [0, 0, 1, 0], [0, 0, 0, 1]],
        [[1, 0, 0, 0], [0, 1, 0, 0], [2, 2, -1, 2], [0, 0, 0, 1]],
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [2, 2, 2, -1]],
    )
)
for _g in GENERATORS:
    _g.setflags(write=False)


def generator_matrix(i: int) -> np.ndarray:
    if i not in (1, 2, 3, 4):
        raise InvalidInputError(f"generator index must be 1..4, got {i}")
    return GENERATORS[i - 1]


def apply_generator(q: Sequence[int], i: int, matrices=GENERATORS) -> Quadruple:
    """Row-vector action ``q · S_iᵗ`` computed from the matrix entries, exactly."""
    m = matrices[i - 1]
    out = []
    for r in range(4):
        acc = 0
        for c in range(4):
            acc = checked(acc + checked(int(m[r, c]) * q[c]))
        out.append(acc)
    return Quadruple(*out)


@dataclass(frozen=True)
class WalkNode:
    quad: Quadruple
    last: int  # 0 at the root
    depth: int

    @property
    def new_entry(self):
        return None if self.last == 0 else self.quad[self.last - 1]


@dataclass(frozen=True)
class CircleEvent:
    curvature: int
    parents: tuple  # other three entries of the creating quadruple
    depth: int
    slot: int = 0

    def csv_row(self):
        p = list(self.parents) + [""] * (3 - len(self.parents))
        return [self.curvature, self.depth, *p]


@dataclass(frozen=True)
class EnumerationSummary:
    """Returned once a walk has exhausted every branch below the bound."""

    bound: int
    events: int
    nodes: int
    max_depth: int
    duplicates_skipped: int = 0


def root_slots(root: RootQuadruple) -> tuple[int, ...]:
    """Slots that leave the root; for strips the stabilizer flips are dropped."""
    if root.kind is PackingKind.STRIP:
        return tuple(i for i in (1, 2, 3, 4) if flip(root.quad, i) != root.quad)
    return (1, 2, 3, 4)


def stabilizer_order(root: RootQuadruple):
    """Order of Stab(ξ) in the Apollonian group; ``None`` when infinite (strips)."""
    fixers = [i for i in (1, 2, 3, 4) if flip(root.quad, i) == root.quad]
    if len(fixers) >= 2:
        return None
    return 2 if fixers else 1


def _children(node: WalkNode, slots) -> Iterator[WalkNode]:
    for i in slots:
        if i == node.last:
            continue
        q = flip(node.quad, i)
        if node.last:
            prev = node.quad[node.last - 1]
            if q[i - 1] < prev:
                raise InternalInvariantError(
                    f"new entry {q[i - 1]} below previous maximum {prev} at {tuple(q)}"
                )
        if q[i - 1] < max(q):
            raise InternalInvariantError(f"new entry of {tuple(q)} (slot {i}) is not maximal")
        yield WalkNode(q, i, node.depth + 1)


def enumerate_circles(
    root,
    bound: int,
    visitor: Callable[[CircleEvent], None] | None = None,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> EnumerationSummary:
    """Call ``visitor`` once per circle of curvature ``< bound``.

    Root entries below the bound come first as depth-0 events, then the
    non-returning tree is walked depth first.  Strip roots skip stabilizer
    flips at the root and additionally keep a visited set of quadruples.
    """
    root = as_root(root)
    visit = visitor or (lambda ev: None)
    q0 = root.quad
    events = 0
    for k, v in enumerate(q0):
        if v < bound:
            visit(CircleEvent(v, tuple(q0[j] for j in range(4) if j != k), 0, 0))
            events += 1

    strip = root.kind is PackingKind.STRIP
    seen = {q0} if strip else None
    dups = 0
    nodes = 1
    max_depth = 0
    stack = [WalkNode(q0, 0, 0)]
    slots0 = root_slots(root)
    while stack:
        node = stack.pop()
        if node.depth >= depth_cap:
            raise InternalInvariantError(f"depth cap {depth_cap} reached at {tuple(node.quad)}")
        kids = list(_children(node, slots0 if node.last == 0 else (1, 2, 3, 4)))
        for child in reversed(kids):
            new = child.quad[child.last - 1]
            if new >= bound:
                continue
            if seen is not None:
                if child.quad in seen:
                    dups += 1
                    continue
                seen.add(child.quad)
            nodes += 1
            events += 1
            max_depth = max(max_depth, child.depth)
            visit(
                CircleEvent(
                    new,
                    tuple(child.quad[j] for j in range(4) if j != child.last - 1),
                    child.depth,
                    child.last,
                )
            )
            stack.append(child)
    return EnumerationSummary(bound, events, nodes, max_depth, dups)


def circle_curvatures(root, bound: int) -> list[int]:
    out: list[int] = []
    enumerate_circles(root, bound, lambda ev: out.append(ev.curvature))
    return out


# --- kernel-backed counting -------------------------------------------------


def _uses_compiled(starts, bound, backend=None) -> bool:
    return (
        (backend or BACKEND) == "cython"
        and _walk_ext is not None
        and bound <= _COMPILED_LIMIT
        and all(abs(x) < _COMPILED_LIMIT for s in starts for x in s[:4])
    )


def _run_walker(starts, thresholds, depth_cap, backend=None, primes=True):
    bound = thresholds[-1]
    if _uses_compiled(starts, bound, backend):
        # below 2**60 primality is always available; unwanted bins are dropped by the caller
        flags = sieve(int(bound)).tobytes() if bound <= SIEVE_LIMIT else None
        return _walk_ext.walk_counts(starts, thresholds, depth_cap, flags)
    return _walk.walk_counts(starts, thresholds, depth_cap, primes=primes)


def _worker(args):
    return _run_walker(*args)


def _split_frontier(root: RootQuadruple, bound: int, split_depth: int):
    """Expand the tree to ``split_depth``; returns (shallow event nodes, start nodes)."""
    shallow: list[WalkNode] = []
    frontier = [
        c for c in _children(WalkNode(root.quad, 0, 0), root_slots(root)) if c.quad[c.last - 1] < bound
    ]
    while frontier and frontier[0].depth < split_depth:
        nxt = []
        for node in frontier:
            shallow.append(node)
            nxt.extend(c for c in _children(node, (1, 2, 3, 4)) if c.quad[c.last - 1] < bound)
        frontier = nxt
    starts = [(*n.quad, n.last, n.depth) for n in frontier]
    return shallow, starts


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def count_series(
    root,
    thresholds: Sequence[int],
    workers: int | None = None,
    split_depth: int = DEFAULT_SPLIT_DEPTH,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    backend: str | None = None,
    primes: bool | None = None,
) -> CountSeries:
    """One traversal, cumulative N, N2, pi, pi2 at every threshold.

    ``N2`` is the direct pair count (six root pairs plus three per later
    circle); it is checked against ``3N - 6`` at every threshold above the
    root maximum.  Prime columns are filled when ``primes`` is true, left
    empty when false, and by default filled only for bounds within the
    64-bit primality range.
    """
    root = as_root(root)
    ths = sorted({int(t) for t in thresholds})
    if not ths:
        raise InvalidInputError("empty threshold grid")
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise InvalidInputError("worker count must be >= 1")
    bound = ths[-1]
    m = len(ths)
    want_primes = bound <= U64_LIMIT if primes is None else bool(primes)
    t_start = time.perf_counter()

    n_bins = [0] * m
    pi_bins = [0] * m
    pi2_bins = [0] * m
    pair_bins = [0] * m  # root pairs, binned by their larger curvature
    root_bins = [0] * m
    isp = prime_test_for(bound) if want_primes else (lambda k: False)
    q0 = root.quad
    for v in q0:
        if v < bound:
            j = bisect_right(ths, v)
            n_bins[j] += 1
            root_bins[j] += 1
            if isp(v):
                pi_bins[j] += 1
    for x, y in combinations(q0, 2):
        top = max(x, y)
        if top < bound:
            j = bisect_right(ths, top)
            pair_bins[j] += 1
            if isp(x) and isp(y):
                pi2_bins[j] += 1

    nodes = 0
    max_depth = 0
    used = "python"
    if root.kind is PackingKind.STRIP:
        # visited-set mode is single-worker by construction
        def visit(ev: CircleEvent):
            if ev.depth == 0:
                return
            j = bisect_right(ths, ev.curvature)
            n_bins[j] += 1
            if isp(ev.curvature):
                pi_bins[j] += 1
                pi2_bins[j] += sum(1 for p in ev.parents if isp(p))

        summary = enumerate_circles(root, bound, visit, depth_cap)
        nodes, max_depth = summary.nodes, summary.max_depth
        workers_used = 1
    else:
        if workers == 1:
            shallow = []
            starts = [
                (*c.quad, c.last, c.depth)
                for c in _children(WalkNode(q0, 0, 0), root_slots(root))
            ]
        else:
            shallow, starts = _split_frontier(root, bound, split_depth)
        for node in shallow:
            new = node.quad[node.last - 1]
            j = bisect_right(ths, new)
            n_bins[j] += 1
            nodes += 1
            max_depth = max(max_depth, node.depth)
            if isp(new):
                pi_bins[j] += 1
                pi2_bins[j] += sum(1 for k in range(4) if k != node.last - 1 and isp(node.quad[k]))
        chunks = [starts[k::workers] for k in range(workers)] if workers > 1 else [starts]
        chunks = [c for c in chunks if c]
        jobs = [(c, ths, depth_cap, backend, want_primes) for c in chunks]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_worker, jobs))
        else:
            results = [_worker(j) for j in jobs]
        for nb, pb, p2b, nn, md in results:
            for j in range(m):
                n_bins[j] += nb[j]
                pi_bins[j] += pb[j]
                pi2_bins[j] += p2b[j]
            nodes += nn
            max_depth = max(max_depth, md)
        workers_used = max(1, len(jobs))
        used = "cython" if _uses_compiled(starts, bound, backend) else "python"

    N, N2, PI, PI2 = [], [], [], []
    n = pairs = rc = p1 = p2 = 0
    for j in range(m):
        n += n_bins[j]
        rc += root_bins[j]
        pairs += pair_bins[j]
        p1 += pi_bins[j]
        p2 += pi2_bins[j]
        later = n - rc
        direct = pairs + 3 * later
        N.append(n)
        N2.append(direct)
        PI.append(p1)
        PI2.append(p2)
        if ths[j] > max(q0) and direct != 3 * n - 6:
            raise InternalInvariantError(
                f"N2 direct count {direct} != 3N-6 = {3 * n - 6} at T={ths[j]}"
            )
    meta = {
        "root": list(q0),
        "kind": root.kind.value,
        "workers": workers_used,
        "backend": used,
        "nodes": nodes,
        "max_depth": max_depth,
        "wall_time": time.perf_counter() - t_start,
    }
    if not want_primes:
        PI, PI2 = [], []
    return CountSeries(ths, N, N2, PI, PI2, meta)


def count_circles(root, bound: int, **kw) -> int:
    return count_series(root, [bound], **kw).N[-1]


@dataclass(frozen=True)
class TangentPairCount:
    direct: int
    formula: int


def count_tangent_pairs(root, bound: int, **kw) -> TangentPairCount:
    """Direct tangent-pair count and ``3N - 6``; raises if they disagree."""
    root = as_root(root)
    if bound <= max(root.quad):
        raise InvalidInputError(f"bound {bound} must exceed the root maximum {max(root.quad)}")
    s = count_series(root, [bound], **kw)
    direct, formula = s.N2[-1], 3 * s.N[-1] - 6
    if direct != formula:
        raise InternalInvariantError(f"direct pair count {direct} != 3N-6 = {formula}")
    return TangentPairCount(direct, formula)


def orbit_points(root, bound: int, norm: str = "max") -> set[Quadruple]:
    """Distinct orbit vectors ``ξγᵗ`` with norm ``< bound``.

    Breadth-first over all four generators; a flip that raises the max
    entry to ``>= bound`` is never followed, which is sound for both norms
    because every reduction path to the root has decreasing max entry.
    """
    if norm not in ("max", "euclidean"):
        raise InvalidInputError(f"unsupported norm {norm!r}")
    if bound <= 0:
        raise InvalidInputError("bound must be positive")
    root = as_root(root)
    q0 = root.quad
    if max(abs(x) for x in q0) >= bound:
        return set()
    seen = {q0}
    frontier = [q0]
    while frontier:
        nxt = []
        for q in frontier:
            for i in (1, 2, 3, 4):
                c = flip(q, i)
                if max(abs(x) for x in c) >= bound or c in seen:
                    continue
                seen.add(c)
                nxt.append(c)
        frontier = nxt
    if norm == "euclidean":
        b2 = bound * bound
        seen = {q for q in seen if sum(x * x for x in q) < b2}
    return seen


def count_orbit_points(root, bound: int, norm: str = "max") -> int:
    return len(orbit_points(root, bound, norm))
