import json
import random

import pytest
from hypothesis import given, strategies as st

from apollonian.descartes import (
    INT128_MAX,
    PackingKind,
    Quadruple,
    RootQuadruple,
    descartes_form,
    flip,
    is_descartes,
    is_primitive,
    is_root,
    parse_quadruple,
    primitive_content,
    reduce_to_root,
)
from apollonian.errors import ArithmeticOverflowError, InvalidInputError, ReductionError

from conftest import ROOTS


def form_by_hand(q):
    # the halved form, doubled back; independent of the integer shortcut
    s = sum(q)
    return 2 * sum(x * x for x in q) - s * s


@pytest.mark.parametrize("q,expected", [((-1, 2, 2, 3), 0), ((0, 0, 0, 0), 0), ((1, 1, 1, 1), -8)])
def test_form_values(q, expected):
    assert descartes_form(q) == expected


def test_known_roots_are_descartes():
    for r in ROOTS:
        assert is_descartes(r) and is_root(r)


@pytest.mark.parametrize(
    "q,i,out",
    [((-1, 2, 2, 3), 1, (15, 2, 2, 3)), ((-1, 2, 2, 3), 4, (-1, 2, 2, 3)), ((0, 0, 1, 1), 3, (0, 0, 1, 1))],
)
def test_flip_examples(q, i, out):
    assert flip(q, i) == out


def test_flip_rejects_bad_slot():
    with pytest.raises(InvalidInputError):
        flip((-1, 2, 2, 3), 0)
    with pytest.raises(InvalidInputError):
        flip((-1, 2, 2, 3), 5)


@pytest.mark.parametrize("q,ok", [((-1, 2, 2, 3), True), ((0, 0, 1, 1), True), ((15, 2, 2, 3), False), ((-1, 2, 2, 4), False)])
def test_is_root(q, ok):
    assert is_root(q) is ok


def test_root_quadruple_sorts_and_classifies():
    r = RootQuadruple(Quadruple(3, 2, -1, 2))
    assert r.quad == (-1, 2, 2, 3)
    assert r.kind is PackingKind.BOUNDED
    assert RootQuadruple(Quadruple(1, 0, 1, 0)).kind is PackingKind.STRIP


def test_root_quadruple_rejects_non_descartes():
    with pytest.raises(InvalidInputError, match=r"not a Descartes quadruple \(form = -8\)"):
        RootQuadruple(Quadruple(1, 1, 1, 1))


@pytest.mark.parametrize(
    "q,root,word",
    [((15, 2, 2, 3), (-1, 2, 2, 3), (1,)), ((-1, 2, 2, 3), (-1, 2, 2, 3), ()), ((0, 0, 1, 1), (0, 0, 1, 1), ())],
)
def test_reduction_examples(q, root, word):
    red = reduce_to_root(q)
    assert red.root.quad == root
    assert red.flips == word


def test_reduction_replays():
    q = (-1, 2, 2, 3)
    for i in (1, 2, 3, 1, 4, 2):
        q = flip(q, i)
    red = reduce_to_root(q)
    cur = q
    for s in red.flips:
        cur = flip(cur, s)
    assert tuple(sorted(cur)) == red.root.quad == (-1, 2, 2, 3)


def test_reduction_errors():
    with pytest.raises(InvalidInputError):
        reduce_to_root((1, 1, 1, 1))
    with pytest.raises(InvalidInputError):
        reduce_to_root((1, -2, -2, -3))  # negated orbit point, sum < 0
    with pytest.raises(ReductionError):
        reduce_to_root((2, 3, 6, 23), max_iter=1)


def test_primitive_content():
    assert primitive_content((-1, 2, 2, 3)) == 1
    assert primitive_content((-2, 4, 4, 6)) == 2
    assert primitive_content((0, 0, 1, 1)) == 1
    assert not is_primitive((0, 0, 3, 3))
    with pytest.raises(InvalidInputError):
        primitive_content((0, 0, 0, 0))


def test_overflow_is_checked():
    big = INT128_MAX // 4
    with pytest.raises(ArithmeticOverflowError):
        flip((big, big, big, 1), 4)
    with pytest.raises(ArithmeticOverflowError):
        Quadruple.of((INT128_MAX + 1, 0, 0, 0))


def test_serialization_round_trip():
    q = Quadruple(-1, 2, 2, 3)
    assert parse_quadruple(q.to_csv()) == q
    assert parse_quadruple(q.to_json()) == q
    assert json.loads(q.to_json()) == [-1, 2, 2, 3]
    with pytest.raises(InvalidInputError):
        parse_quadruple("1,2,3")
    with pytest.raises(InvalidInputError):
        parse_quadruple("a,b,c,d")
    with pytest.raises(InvalidInputError):
        Quadruple.of((1.5, 0, 0, 0))


# --- properties ------------------------------------------------------------------

roots = st.sampled_from(ROOTS)
words = st.lists(st.integers(1, 4), max_size=25)


def apply_word(q, word):
    for i in word:
        q = flip(q, i)
    return q


@given(roots, words, st.integers(1, 4))
def test_form_conserved_and_involution(root, word, i):
    q = apply_word(root, word)
    assert descartes_form(q) == 0 == form_by_hand(q)
    assert flip(flip(q, i), i) == q
    assert sum(q) > 0


@given(roots, words)
def test_reduction_finds_the_root(root, word):
    q = apply_word(root, word)
    red = reduce_to_root(q)
    assert red.root.quad == tuple(sorted(root))
    again = reduce_to_root(red.root.quad)
    assert again.root == red.root and again.flips == ()


@given(st.lists(st.integers(-50, 50), min_size=4, max_size=4))
def test_form_matches_hand_formula(q):
    assert descartes_form(q) == form_by_hand(q)


def test_random_walk_ten_thousand_steps():
    rng = random.Random(1)
    for root in ((-1, 2, 2, 3), (0, 0, 1, 1)):
        q = root
        for _ in range(10_000):
            q = flip(q, rng.randint(1, 4))
            assert descartes_form(q) == 0
            if max(q) > 1 << 50:
                q = root  # restart before the squares leave 128 bits
