"""Exact algebra of Descartes quadruples.

All arithmetic is done on Python integers but confined to the signed
128-bit range: any intermediate value outside ``[INT128_MIN, INT128_MAX]``
raises :class:`ArithmeticOverflowError` instead of silently continuing.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import (
    ArithmeticOverflowError,
    InvalidInputError,
    ReductionError,
)

INT128_MAX = (1 << 127) - 1
INT128_MIN = -(1 << 127)

DEFAULT_REDUCTION_CAP = 10**6


def checked(value: int) -> int:
    if value > INT128_MAX or value < INT128_MIN:
        raise ArithmeticOverflowError(f"value {value} outside signed 128-bit range")
    return value


class Quadruple(NamedTuple):
    """Signed integer curvatures of four mutually tangent circles."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, values: Iterable[int]) -> "Quadruple":
        vals = tuple(values)
        if len(vals) != 4:
            raise InvalidInputError(f"a quadruple needs 4 entries, got {len(vals)}")
        out = []
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, int):
                if isinstance(v, float) and v.is_integer():
                    v = int(v)
                else:
                    raise InvalidInputError(f"curvature {v!r} is not an integer")
            out.append(checked(int(v)))
        return cls(*out)

    def to_json(self) -> str:
        return json.dumps(list(self))

    def to_csv(self) -> str:
        return ",".join(str(v) for v in self)


def parse_quadruple(text: str) -> Quadruple:
    """Parse ``"-1,2,2,3"`` or ``"[-1, 2, 2, 3]"``."""
    s = text.strip()
    if s.startswith("["):
        try:
            return Quadruple.of(json.loads(s))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"bad quadruple {text!r}") from exc
    try:
        return Quadruple.of(int(p) for p in s.split(","))
    except ValueError as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"bad quadruple {text!r}") from exc


def descartes_form(q: Sequence[int]) -> int:
    """Return ``2(a²+b²+c²+d²) - (a+b+c+d)²``; zero exactly on Descartes quadruples.

    Entries must lie in the 128-bit range.  The squares are formed exactly
    (they can need ~256 bits) and only the result is range-checked, so a
    valid quadruple near the ceiling still evaluates to 0.
    """
    for x in q:
        checked(x)
    s = sum(q)
    return checked(2 * sum(x * x for x in q) - s * s)


def is_descartes(q: Sequence[int]) -> bool:
    return descartes_form(q) == 0


def flip(q: Sequence[int], i: int) -> Quadruple:
    """Replace slot ``i`` (1..4) by the other root of the Descartes equation."""
    if i not in (1, 2, 3, 4):
        raise InvalidInputError(f"slot index must be 1..4, got {i}")
    k = i - 1
    others = checked(checked(q[0] + q[1]) + checked(q[2] + q[3])) - q[k]
    others = checked(others)
    new = checked(checked(2 * others) - q[k])
    out = list(q)
    out[k] = new
    return Quadruple(*out)


def is_root(q: Sequence[int]) -> bool:
    a, b, c, d = sorted(q)
    return a <= 0 <= b <= c <= d and a + b + c >= d and a + b + c + d > 0


class PackingKind(enum.Enum):
    BOUNDED = "bounded"
    STRIP = "strip"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class RootQuadruple:
    """A root quadruple, stored sorted ascending."""

    quad: Quadruple

    def __post_init__(self):
        q = Quadruple.of(sorted(self.quad))
        if not is_descartes(q):
            raise InvalidInputError(
                f"{tuple(q)} is not a Descartes quadruple (form = {descartes_form(q)})"
            )
        if not is_root(q):
            raise InvalidInputError(f"{tuple(q)} is not a root quadruple")
        object.__setattr__(self, "quad", q)

    @property
    def kind(self) -> PackingKind:
        a, b, c, d = self.quad
        if a < 0:
            return PackingKind.BOUNDED
        if a == 0 and b == 0 and c == d:
            return PackingKind.STRIP
        return PackingKind.DEGENERATE

    def __iter__(self):
        return iter(self.quad)

    def __getitem__(self, k):
        return self.quad[k]


def as_root(root) -> RootQuadruple:
    return root if isinstance(root, RootQuadruple) else RootQuadruple(Quadruple.of(root))


@dataclass(frozen=True)
class Reduction:
    root: RootQuadruple
    flips: tuple[int, ...]


def reduce_to_root(q: Sequence[int], max_iter: int = DEFAULT_REDUCTION_CAP) -> Reduction:
    """Walk ``q`` down to the root of its packing.

    The largest entry (lowest slot on ties) is flipped for as long as that
    strictly shrinks it.  ``flips`` lists the 1-based slots in the order applied.
    """
    cur = Quadruple.of(q)
    form = descartes_form(cur)
    if form != 0:
        raise InvalidInputError(f"{tuple(cur)} is not a Descartes quadruple (form = {form})")
    if sum(cur) <= 0:
        raise InvalidInputError(f"{tuple(cur)} has non-positive curvature sum")
    seq: list[int] = []
    for _ in range(max_iter):
        big = max(cur)
        slot = cur.index(big) + 1
        nxt = flip(cur, slot)
        if nxt[slot - 1] >= big:
            break
        seq.append(slot)
        cur = nxt
    else:
        raise ReductionError(f"no root reached within {max_iter} flips")
    if not is_root(cur):
        raise InvalidInputError(f"fixed point {tuple(cur)} is not a root quadruple")
    return Reduction(RootQuadruple(cur), tuple(seq))


def primitive_content(q: Sequence[int]) -> int:
    if not any(q):
        raise InvalidInputError("the zero quadruple has no content")
    return math.gcd(*(abs(x) for x in q))


def is_primitive(q: Sequence[int]) -> bool:
    return primitive_content(q) == 1
