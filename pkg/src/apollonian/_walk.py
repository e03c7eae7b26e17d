"""Pure-Python subtree walker; reference implementation of the counting kernel.

``walk_counts`` takes a list of start nodes ``(a, b, c, d, last, depth)``
where ``last`` is the 1-based slot that produced the node.  Each start node
and every node of its non-returning subtree whose new entry lies below
``thresholds[-1]`` is one circle event.  Events are binned by
``bisect_right(thresholds, curvature)`` so cumulative sums of the returned
arrays give counts below each threshold.
"""
from __future__ import annotations

from bisect import bisect_right

from .descartes import INT128_MAX, checked
from .errors import InternalInvariantError, InvalidInputError
from .primes import prime_test_for

DEFAULT_DEPTH_CAP = 10_000

# With every live entry below 2**124 in magnitude, 2*(x+y+z) - w cannot leave
# the signed 128-bit range, so per-operation checks can be skipped.
_FAST_LIMIT = 1 << 124

BACKEND = "python"


def _needs_checks(starts, bound) -> bool:
    if bound > _FAST_LIMIT:
        return True
    return any(abs(x) >= _FAST_LIMIT for s in starts for x in s[:4])


def walk_counts(starts, thresholds, depth_cap=DEFAULT_DEPTH_CAP, primes=True):
    """Count circle events in the subtrees below ``starts``.

    Returns ``(n_bins, pi_bins, pi2_bins, nodes, max_depth)``.  With
    ``primes=False`` the prime bins stay zero (needed above the 64-bit
    primality range).
    """
    thresholds = [int(t) for t in thresholds]
    if not thresholds:
        raise InvalidInputError("empty threshold grid")
    bound = thresholds[-1]
    m = len(thresholds)
    n_bins = [0] * m
    pi_bins = [0] * m
    pi2_bins = [0] * m
    isp = prime_test_for(min(bound, INT128_MAX)) if primes else (lambda k: False)
    wide = _needs_checks(starts, bound)
    nodes = 0
    max_depth = 0

    stack = []
    for a, b, c, d, last, depth in starts:
        q = (a, b, c, d)
        new = q[last - 1]
        if new < max(q):
            raise InternalInvariantError(f"start node {q} has non-maximal slot {last}")
        if new < bound:
            stack.append((a, b, c, d, last, depth))

    while stack:
        a, b, c, d, last, depth = stack.pop()
        q = (a, b, c, d)
        new = q[last - 1]
        nodes += 1
        if depth > max_depth:
            max_depth = depth
        j = bisect_right(thresholds, new)
        n_bins[j] += 1
        if new >= 2 and isp(new):
            pi_bins[j] += 1
            pp = 0
            for k in range(4):
                if k != last - 1 and q[k] >= 2 and isp(q[k]):
                    pp += 1
            pi2_bins[j] += pp
        if depth >= depth_cap:
            raise InternalInvariantError(f"depth cap {depth_cap} reached at {q}")
        if wide:
            s = checked(checked(a + b) + checked(c + d))
        else:
            s = a + b + c + d
        for slot in (1, 2, 3, 4):
            if slot == last:
                continue
            old = q[slot - 1]
            if wide:
                nv = checked(checked(2 * checked(s - old)) - old)
            else:
                nv = 2 * (s - old) - old
            if nv < new:
                raise InternalInvariantError(
                    f"new entry {nv} from {q} (slot {slot}) is not maximal"
                )
            if nv >= bound:
                continue
            if slot == 1:
                stack.append((nv, b, c, d, 1, depth + 1))
            elif slot == 2:
                stack.append((a, nv, c, d, 2, depth + 1))
            elif slot == 3:
                stack.append((a, b, nv, d, 3, depth + 1))
            else:
                stack.append((a, b, c, nv, 4, depth + 1))
    return n_bins, pi_bins, pi2_bins, nodes, max_depth
