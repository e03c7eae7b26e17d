import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apollonian.arithmetic import (
    composite_density,
    cone_points_mod_p,
    crt_projection_ok,
    is_prime,
    local_density,
    mod_p_summary,
    orbit_mod,
    orbit_mod_p,
    prime_counts,
    sieve_ratio_report,
)
from apollonian.descartes import flip
from apollonian.errors import InternalInvariantError, InvalidInputError, ResourceError, UnsupportedError
from apollonian.primes import prime_test_for, sieve
from apollonian.series import CountSeries, geometric_grid
from apollonian.orbit import count_series

from oracles import cone_brute, orbit_brute, trial_division

ROOT = (-1, 2, 2, 3)


def test_is_prime_examples():
    assert is_prime(2) and not is_prime(1) and is_prime(1000003)
    assert not is_prime(0) and not is_prime(-7)
    assert is_prime((1 << 61) - 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7
    assert not is_prime(3825123056546413051)  # strong pseudoprime to the first nine prime bases
    with pytest.raises(UnsupportedError):
        is_prime(1 << 64)


def test_is_prime_vs_trial_division():
    for n in range(0, 5000):
        assert is_prime(n) == trial_division(n)
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randrange(10**9, 10**9 + 10**6)
        assert is_prime(n) == trial_division(n)


def test_sieve_and_predicate():
    flags = sieve(1000)
    assert [k for k in range(1000) if flags[k]] == [k for k in range(1000) if trial_division(k)]
    isp = prime_test_for(100)
    assert isp(97) and not isp(-3) and not isp(1)


def test_prime_counts_examples():
    pc = prime_counts(ROOT, 10)
    assert (pc.pi, pc.pi2) == (4, 5)
    assert prime_counts(ROOT, 2).pi == 0
    assert prime_counts(ROOT, 1).pi == 0
    with pytest.raises(InvalidInputError):
        prime_counts((-2, 4, 4, 6), 100)


def test_prime_pairs_by_explicit_enumeration():
    # root pairs (2,2), (2,3), (2,3) plus the depth-1 circle 3 touching -1, 2, 2
    assert prime_counts(ROOT, 4).pi2 == 3 + 2


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_cone_vs_plain_brute_force(p):
    pts = cone_brute(p)
    cone = cone_points_mod_p(p, with_points=True)
    assert cone.count == len(pts)
    a, b, c, d = np.unravel_index(cone.codes, (p,) * 4)
    assert set(zip(a.tolist(), b.tolist(), c.tolist(), d.tolist())) == pts


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17, 19, 23])
def test_cone_count_bounds(p):
    cone = cone_points_mod_p(p)
    assert abs(cone.count - p**3) <= 4 * p**2.5
    assert abs(cone.slice_x1 - p**2) <= 4 * p**1.5


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_orbit_vs_set_bfs(p):
    orb = orbit_mod_p(ROOT, p)
    assert orb.points == orbit_brute(ROOT, p)
    assert orb.is_closed()
    assert (0, 0, 0, 0) not in orb


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17])
def test_good_primes_fill_the_cone(p):
    s = mod_p_summary(ROOT, p)
    assert s["good"] and s["orbit_size"] == s["cone_size"]
    assert s["g1_scaled_error"] <= 10 and s["g2_scaled_error"] <= 10


def test_bad_primes_reported():
    assert not mod_p_summary(ROOT, 2)["good"]
    assert not mod_p_summary(ROOT, 3)["good"]
    assert orbit_mod_p(ROOT, 2).size == 1


def test_points_lie_on_the_cone():
    for p in (7, 13):
        for q in orbit_mod_p(ROOT, p).points:
            assert (2 * sum(x * x for x in q) - sum(q) ** 2) % p == 0


@settings(max_examples=50)
@given(st.lists(st.integers(1, 4), max_size=6), st.sampled_from([5, 7, 11, 13]))
def test_exact_points_reduce_into_orbit(word, p):
    q = ROOT
    for i in word:
        q = flip(q, i)
    assert tuple(x % p for x in q) in orbit_mod_p(ROOT, p)


def test_local_density_values():
    g = local_density(ROOT, 11)
    assert isinstance(g, Fraction) and g == Fraction(6, 61)
    assert abs(g - Fraction(1, 11)) <= 10 * 11**-1.5
    assert local_density(ROOT, 7, "x1x2") == Fraction(3, 10)
    with pytest.raises(InvalidInputError):
        local_density(ROOT, 7, "x3")


def test_crt_multiplicativity():
    direct = orbit_mod(ROOT, 77)
    o7, o11 = orbit_mod_p(ROOT, 7), orbit_mod_p(ROOT, 11)
    assert crt_projection_ok(direct, [o7, o11])
    for f, attr in (("x1", "slice_x1"), ("x1x2", "slice_x1x2")):
        assert Fraction(getattr(direct, attr), direct.size) == composite_density(ROOT, [7, 11], f)


def test_orbit_mod_direct_vs_set():
    assert orbit_mod(ROOT, 35).points == orbit_brute(ROOT, 35)


def test_modp_guards():
    with pytest.raises(InvalidInputError):
        orbit_mod_p(ROOT, 9)
    with pytest.raises(ResourceError):
        orbit_mod_p(ROOT, 103)
    with pytest.raises(ResourceError):
        orbit_mod(ROOT, 211)
    with pytest.raises(ResourceError):
        cone_points_mod_p(103)
    assert orbit_mod_p(ROOT, 103, max_p=103).size > 0


def test_sieve_ratios():
    grid = geometric_grid(100, 10**0.25, 10**5)
    s = count_series(ROOT, grid)
    rep = sieve_ratio_report(s, 1.3057)
    assert all(a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b) for _, a, b in rep.rows)
    assert all(b <= 3 * a * math.log(t) for t, a, b in rep.rows)
    assert rep.bounded
    with pytest.raises(InvalidInputError):
        sieve_ratio_report(CountSeries([10], [9], [21]), 1.3)
    assert rep.to_csv().startswith("T,pi_ratio,pi2_ratio\n")
