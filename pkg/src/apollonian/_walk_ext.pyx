# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subtree walker; same contract as ``apollonian._walk.walk_counts``.

Curvatures are held in int64 and every add/sub/mul is overflow-checked.
"""
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, realloc, free

import array

from .errors import ArithmeticOverflowError, InternalInvariantError, InvalidInputError

cdef extern from *:
    """
    #include <stdint.h>
    static inline int ap_add(int64_t a, int64_t b, int64_t *r) { return __builtin_add_overflow(a, b, r); }
    static inline int ap_sub(int64_t a, int64_t b, int64_t *r) { return __builtin_sub_overflow(a, b, r); }
    static inline int ap_mul(int64_t a, int64_t b, int64_t *r) { return __builtin_mul_overflow(a, b, r); }
    static inline uint64_t ap_mulmod(uint64_t a, uint64_t b, uint64_t m) {
        return (uint64_t)(((unsigned __int128)a * b) % m);
    }
    """
    bint ap_add(int64_t a, int64_t b, int64_t *r) nogil
    bint ap_sub(int64_t a, int64_t b, int64_t *r) nogil
    bint ap_mul(int64_t a, int64_t b, int64_t *r) nogil
    uint64_t ap_mulmod(uint64_t a, uint64_t b, uint64_t m) nogil

BACKEND = "cython"

INT64_MAX = (1 << 63) - 1
INT64_MIN = -(1 << 63)

cdef uint64_t[12] _WITNESSES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


cdef uint64_t _powmod(uint64_t a, uint64_t e, uint64_t m) nogil:
    cdef uint64_t r = 1
    a %= m
    while e:
        if e & 1:
            r = ap_mulmod(r, a, m)
        a = ap_mulmod(a, a, m)
        e >>= 1
    return r


cdef bint _miller_rabin(int64_t sn) nogil:
    cdef uint64_t n, d, x, a
    cdef int s, i, r
    cdef bint composite
    if sn < 2:
        return False
    n = <uint64_t>sn
    for i in range(12):
        if n % _WITNESSES[i] == 0:
            return n == _WITNESSES[i]
    d = n - 1
    s = 0
    while (d & 1) == 0:
        d >>= 1
        s += 1
    for i in range(12):
        a = _WITNESSES[i]
        x = _powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        composite = True
        for r in range(s - 1):
            x = ap_mulmod(x, x, n)
            if x == n - 1:
                composite = False
                break
        if composite:
            return False
    return True


def is_prime_u63(int64_t n):
    return _miller_rabin(n)


cdef inline bint _isp(int64_t k, const unsigned char* flags, int64_t nflags) nogil:
    if k < 2:
        return False
    if nflags > 0:
        return k < nflags and flags[k] != 0
    return _miller_rabin(k)


cdef inline Py_ssize_t _bin(const int64_t* th, Py_ssize_t m, int64_t v) nogil:
    # bisect_right
    cdef Py_ssize_t lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if v < th[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def walk_counts(starts, thresholds, depth_cap=10_000, prime_flags=None):
    """Count circle events in the subtrees below ``starts``.

    Returns ``(n_bins, pi_bins, pi2_bins, nodes, max_depth)``.  ``prime_flags``
    is an optional bytes sieve covering every curvature below the bound.
    """
    cdef Py_ssize_t m = len(thresholds)
    if m == 0:
        raise InvalidInputError("empty threshold grid")
    for t in thresholds:
        if t > INT64_MAX or t < INT64_MIN:
            raise ArithmeticOverflowError(f"threshold {t} outside int64 range")
    for st in starts:
        for x in st[:4]:
            if x > INT64_MAX or x < INT64_MIN:
                raise ArithmeticOverflowError(f"start entry {x} outside int64 range")

    cdef int64_t[::1] th
    th_arr = array.array("q", [int(t) for t in thresholds])
    th = th_arr
    cdef int64_t bound = th[m - 1]
    n_arr = array.array("q", [0]) * m
    pi_arr = array.array("q", [0]) * m
    pi2_arr = array.array("q", [0]) * m
    cdef int64_t[::1] nb = n_arr
    cdef int64_t[::1] pb = pi_arr
    cdef int64_t[::1] p2b = pi2_arr

    cdef const unsigned char* flags = NULL
    cdef int64_t nflags = 0
    cdef bytes flag_bytes
    if prime_flags is not None:
        flag_bytes = bytes(prime_flags)
        flags = flag_bytes
        nflags = len(flag_bytes)
        if nflags < bound:
            raise InvalidInputError("prime sieve shorter than the bound")

    cdef int64_t cap = depth_cap
    cdef Py_ssize_t capacity = 1024, sp = 0
    # one frame: a, b, c, d, last, depth
    cdef int64_t* stack = <int64_t*>malloc(capacity * 6 * sizeof(int64_t))
    cdef int64_t* grown
    if stack == NULL:
        raise MemoryError()

    cdef int64_t q[4]
    cdef int64_t a, b, c, d, last, depth, new, s, t1, t2, nv, mx
    cdef int64_t nodes = 0, max_depth = 0
    cdef Py_ssize_t j
    cdef int k, slot, pp
    cdef int err = 0  # 1 overflow, 2 non-maximal, 3 depth cap
    cdef int64_t bad0 = 0, bad1 = 0, bad2 = 0, bad3 = 0

    try:
        for st in starts:
            a, b, c, d, last, depth = st
            q[0] = a; q[1] = b; q[2] = c; q[3] = d
            mx = max(a, b, c, d)
            if q[last - 1] < mx:
                raise InternalInvariantError(
                    f"start node {(a, b, c, d)} has non-maximal slot {last}")
            if q[last - 1] >= bound:
                continue
            if sp == capacity:
                capacity *= 2
                grown = <int64_t*>realloc(stack, capacity * 6 * sizeof(int64_t))
                if grown == NULL:
                    raise MemoryError()
                stack = grown
            stack[6 * sp + 0] = a
            stack[6 * sp + 1] = b
            stack[6 * sp + 2] = c
            stack[6 * sp + 3] = d
            stack[6 * sp + 4] = last
            stack[6 * sp + 5] = depth
            sp += 1

        with nogil:
            while sp > 0:
                sp -= 1
                q[0] = stack[6 * sp + 0]
                q[1] = stack[6 * sp + 1]
                q[2] = stack[6 * sp + 2]
                q[3] = stack[6 * sp + 3]
                last = stack[6 * sp + 4]
                depth = stack[6 * sp + 5]
                new = q[last - 1]
                nodes += 1
                if depth > max_depth:
                    max_depth = depth
                j = _bin(&th[0], m, new)
                nb[j] += 1
                if _isp(new, flags, nflags):
                    pb[j] += 1
                    pp = 0
                    for k in range(4):
                        if k != last - 1 and _isp(q[k], flags, nflags):
                            pp += 1
                    p2b[j] += pp
                if depth >= cap:
                    err = 3
                    bad0 = q[0]; bad1 = q[1]; bad2 = q[2]; bad3 = q[3]
                    break
                if ap_add(q[0], q[1], &t1) or ap_add(q[2], q[3], &t2) or ap_add(t1, t2, &s):
                    err = 1
                    break
                for slot in range(1, 5):
                    if slot == last:
                        continue
                    if ap_sub(s, q[slot - 1], &t1) or ap_mul(t1, 2, &t2) or ap_sub(t2, q[slot - 1], &nv):
                        err = 1
                        break
                    if nv < new:
                        err = 2
                        bad0 = q[0]; bad1 = q[1]; bad2 = q[2]; bad3 = q[3]
                        break
                    if nv >= bound:
                        continue
                    if sp + 1 > capacity:
                        grown = <int64_t*>realloc(stack, 2 * capacity * 6 * sizeof(int64_t))
                        if grown == NULL:
                            err = 4
                            break
                        stack = grown
                        capacity *= 2
                    stack[6 * sp + 0] = q[0]
                    stack[6 * sp + 1] = q[1]
                    stack[6 * sp + 2] = q[2]
                    stack[6 * sp + 3] = q[3]
                    stack[6 * sp + slot - 1] = nv
                    stack[6 * sp + 4] = slot
                    stack[6 * sp + 5] = depth + 1
                    sp += 1
                if err:
                    break
    finally:
        free(stack)

    if err == 1:
        raise ArithmeticOverflowError("curvature arithmetic overflowed int64 in compiled walker")
    if err == 2:
        raise InternalInvariantError(
            f"new entry from {(bad0, bad1, bad2, bad3)} is not maximal")
    if err == 3:
        raise InternalInvariantError(
            f"depth cap {depth_cap} reached at {(bad0, bad1, bad2, bad3)}")
    if err == 4:
        raise MemoryError()
    return list(n_arr), list(pi_arr), list(pi2_arr), nodes, max_depth
