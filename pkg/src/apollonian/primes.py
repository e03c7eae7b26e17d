"""Deterministic primality for the unsigned 64-bit range, plus a cached sieve."""
from __future__ import annotations

import functools

import numpy as np

from .errors import UnsupportedError

U64_LIMIT = 1 << 64

# First 12 primes: a complete Miller-Rabin witness set below 3.3e24 > 2^64.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Bounds below which the walkers use a sieve lookup instead of Miller-Rabin.
SIEVE_LIMIT = 1 << 25


def is_prime(n: int) -> bool:
    """Deterministic primality test for ``n < 2**64``; negative ``n`` is never prime."""
    if n >= U64_LIMIT:
        raise UnsupportedError(f"{n} exceeds the 64-bit primality range")
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@functools.lru_cache(maxsize=4)
def sieve(limit: int) -> np.ndarray:
    """Boolean array ``flags`` with ``flags[k]`` true iff ``k`` is prime, for ``k < limit``."""
    flags = np.ones(max(limit, 2), dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    flags.setflags(write=False)
    return flags


def prime_test_for(bound: int):
    """Fastest exact primality predicate valid for all integers below ``bound``."""
    if bound <= SIEVE_LIMIT:
        flags = sieve(int(bound)).tobytes()
        n = len(flags)
        return lambda k: 0 <= k < n and flags[k] == 1
    return is_prime
