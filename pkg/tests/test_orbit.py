import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apollonian.descartes import as_root, flip
from apollonian.errors import ArithmeticOverflowError, InternalInvariantError, InvalidInputError
from apollonian.geometry import packing_shapes
from apollonian.orbit import (
    GENERATORS,
    WalkNode,
    _children,
    apply_generator,
    circle_curvatures,
    count_circles,
    count_orbit_points,
    count_series,
    count_tangent_pairs,
    enumerate_circles,
    generator_matrix,
    orbit_points,
    stabilizer_order,
)
from apollonian.series import geometric_grid

from conftest import ROOTS
from oracles import tangency_graph, trial_division, word_curvatures, word_points

BOUNDED = [r for r in ROOTS if r[0] < 0]


def test_generator_matrices():
    for i, s in enumerate(GENERATORS, start=1):
        assert np.array_equal(s @ s, np.eye(4, dtype=np.int64))
        assert s[i - 1, i - 1] == -1
        assert all(s[i - 1, j] == 2 for j in range(4) if j != i - 1)
        assert not s.flags.writeable
    assert generator_matrix(1).tolist() == [[-1, 2, 2, 2], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]


def test_apply_generator_examples():
    assert apply_generator((-1, 2, 2, 3), 1) == (15, 2, 2, 3)
    assert apply_generator((0, 0, 1, 1), 3) == (0, 0, 1, 1)
    q = (-1, 2, 2, 3)
    assert apply_generator(apply_generator(q, 2), 2) == q


def test_matrix_flip_agreement_random():
    rng = random.Random(7)
    for root in ((-1, 2, 2, 3), (0, 0, 1, 1)):
        q = root
        for _ in range(10_000):
            i = rng.randint(1, 4)
            nq = apply_generator(q, i)
            assert nq == flip(q, i)
            q = nq if max(nq) < 1 << 40 else root


def test_enumeration_examples():
    assert sorted(circle_curvatures((-1, 2, 2, 3), 10)) == [-1, 2, 2, 3, 3, 6, 6, 6, 6]
    assert sorted(circle_curvatures((-1, 2, 2, 3), 3)) == [-1, 2, 2]
    assert sorted(circle_curvatures((0, 0, 1, 1), 2)) == [0, 0, 1, 1]
    ev = []
    enumerate_circles((-1, 2, 2, 3), 10, ev.append)
    by_depth = Counter((e.depth, e.curvature) for e in ev)
    assert by_depth == Counter({(0, -1): 1, (0, 2): 2, (0, 3): 1, (1, 3): 1, (1, 6): 2, (2, 6): 2})
    assert [e.depth for e in ev[:4]] == [0, 0, 0, 0]


@pytest.mark.parametrize("root", BOUNDED)
@pytest.mark.parametrize("T", [4, 10, 30, 100])
def test_pruned_walk_matches_word_oracle(root, T):
    ev = []
    enumerate_circles(root, T, ev.append)
    if not ev or max(e.depth for e in ev) >= 8:
        depth = 10
    else:
        depth = 8
    # every circle below T sits at depth < 10 for these roots and bounds
    assert max(e.depth for e in ev) < depth
    assert sorted(e.curvature for e in ev) == word_curvatures(root, T, depth)


@pytest.mark.parametrize("T", [4, 10, 100])
def test_depth8_slice_matches_oracle(T):
    ev = []
    enumerate_circles((-1, 2, 2, 3), T, ev.append)
    shallow = sorted(e.curvature for e in ev if e.depth <= 8)
    assert shallow == word_curvatures((-1, 2, 2, 3), T, 8)


def test_counts_known_values():
    assert count_circles((-1, 2, 2, 3), 4) == 5
    assert count_circles((-1, 2, 2, 3), 10) == 9
    assert count_circles((-1, 2, 2, 3), 100) == 169
    assert count_circles((0, 0, 1, 1), 2) == 4
    assert count_circles((0, 0, 1, 1), 10) == 10


def test_tangent_pairs():
    assert count_tangent_pairs((-1, 2, 2, 3), 10).direct == 21
    assert count_tangent_pairs((-1, 2, 2, 3), 4).formula == 9
    for r in BOUNDED:
        # a root with a + b + c = d has a second circle of curvature d
        expect = 6 if r[0] + r[1] + r[2] > r[3] else 9
        assert count_tangent_pairs(r, max(r) + 1).direct == expect
    with pytest.raises(InvalidInputError):
        count_tangent_pairs((-1, 2, 2, 3), 3)


@pytest.mark.parametrize("root,T", [((-1, 2, 2, 3), 10), ((-1, 2, 2, 3), 300), ((-2, 3, 6, 7), 300), ((-3, 5, 8, 8), 200)])
def test_pairs_against_tangency_graph(root, T):
    shapes = packing_shapes(root, bound=T)
    pairs = tangency_graph(shapes)
    s = count_series(root, [T])
    assert len(shapes) == s.N[-1]
    assert len(pairs) == s.N2[-1] == 3 * s.N[-1] - 6
    prime_pairs = sum(1 for i, j in pairs if trial_division(shapes[i][0]) and trial_division(shapes[j][0]))
    assert prime_pairs == s.pi2[-1]
    assert sum(1 for c, _ in shapes if trial_division(c)) == s.pi[-1]


def test_series_is_cumulative_and_consistent():
    grid = geometric_grid(10, 2, 5000)
    s = count_series((-1, 2, 2, 3), grid)
    assert s.is_monotone()
    for T, n in zip(grid, s.N):
        assert n == count_circles((-1, 2, 2, 3), T)
    assert all(b <= 3 * a for a, b in zip(s.pi, s.pi2))
    assert all(a <= n for a, n in zip(s.pi, s.N))


def test_small_T_counts_root_entries_only():
    s = count_series((-1, 2, 2, 3), [1, 2, 3])
    assert s.N == [1, 1, 3]


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_parallel_counts_identical(workers):
    grid = geometric_grid(100, 10**0.25, 200_000)
    one = count_series((-1, 2, 2, 3), grid, workers=1)
    many = count_series((-1, 2, 2, 3), grid, workers=workers)
    assert one.rows() == many.rows()


def test_parallel_counts_small_bound():
    # fewer frontier nodes than workers
    assert count_series((-1, 2, 2, 3), [10], workers=8).rows() == count_series((-1, 2, 2, 3), [10]).rows()


def test_strip_walk_dedups():
    ev = []
    summ = enumerate_circles((0, 0, 1, 1), 200, ev.append)
    assert summ.events == len(ev)
    assert count_series((0, 0, 1, 1), [200], workers=4).N[-1] == len(ev)


def test_orbit_points_against_words():
    assert count_orbit_points((-1, 2, 2, 3), 4) == 1
    assert count_orbit_points((-1, 2, 2, 3), 10) == 3
    assert count_orbit_points((-1, 2, 2, 3), 1) == 0
    for root in ((-1, 2, 2, 3), (-3, 5, 8, 8)):
        for T in (10, 40, 100):
            ref = word_points(root, T, 10)
            assert ref == word_points(root, T, 9)  # oracle has saturated
            assert orbit_points(root, T) == ref


@pytest.mark.parametrize("root", [(-1, 2, 2, 3), (-3, 5, 8, 8), (-2, 3, 6, 7)])
def test_points_vs_circles(root):
    # N = |Stab|·points + 3 once T is above every root entry
    k = stabilizer_order(as_root(root))
    for T in (50, 200, 1000):
        assert count_circles(root, T) == k * count_orbit_points(root, T) + 3


def test_euclidean_points_subset():
    mx = orbit_points((-1, 2, 2, 3), 60)
    eu = orbit_points((-1, 2, 2, 3), 60, norm="euclidean")
    assert eu <= mx and all(sum(x * x for x in q) < 3600 for q in eu)
    with pytest.raises(InvalidInputError):
        orbit_points((-1, 2, 2, 3), 60, norm="l1")


def test_scaled_root_counts_scale():
    for k in (1 << 40, 1 << 70, 1 << 100):
        big = tuple(k * x for x in (-1, 2, 2, 3))
        assert count_series(big, [k * 10, k * 100]).N == [9, 169]


def test_overflow_on_deep_branch():
    # first few levels fit; some branch must cross 2**127 and raise
    big = tuple(x << 120 for x in (-1, 2, 2, 3))
    with pytest.raises(ArithmeticOverflowError):
        count_series(big, [(1 << 127) - 1])


def test_overflow_reported_near_ceiling():
    big = tuple(x << 124 for x in (-1, 2, 2, 3))
    with pytest.raises(ArithmeticOverflowError):
        count_series(big, [(1 << 127) - 1])


def test_non_maximal_child_is_caught():
    # a node whose recorded last slot is not the maximum breaks the tree premise
    node = WalkNode((15, 2, 2, 3), 2, 1)
    with pytest.raises(InternalInvariantError):
        list(_children(node, (1, 2, 3, 4)))


def test_depth_cap():
    with pytest.raises(InternalInvariantError):
        count_series((-1, 2, 2, 3), [10_000], depth_cap=5)
    with pytest.raises(InternalInvariantError):
        enumerate_circles((-1, 2, 2, 3), 10_000, depth_cap=5)


@settings(max_examples=40)
@given(st.sampled_from(BOUNDED), st.integers(2, 400))
def test_event_count_matches_series(root, T):
    assert len(circle_curvatures(root, T)) == count_series(root, [T]).N[-1]


@settings(max_examples=30)
@given(st.sampled_from(BOUNDED), st.integers(10, 3000), st.integers(10, 3000))
def test_counts_monotone(root, t1, t2):
    lo, hi = sorted((t1, t2))
    a, b = count_series(root, [lo]), count_series(root, [hi])
    assert a.N[-1] <= b.N[-1] and a.pi[-1] <= b.pi[-1] and a.pi2[-1] <= b.pi2[-1]
