"""Prime curvatures and the orbit of a root quadruple modulo p.

Mod-p orbits are closed by breadth-first search over the four generators,
with quadruples packed into integer codes ``((a*m + b)*m + c)*m + d`` and a
dense visited table of ``m**4`` flags.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .descartes import as_root, primitive_content
from .errors import InternalInvariantError, InvalidInputError, ResourceError
from .orbit import count_series
from .primes import is_prime
from .series import CountSeries

__all__ = [
    "is_prime",
    "PrimeCounts",
    "prime_counts",
    "ModPOrbit",
    "orbit_mod",
    "orbit_mod_p",
    "cone_points_mod_p",
    "local_density",
    "composite_density",
    "crt_projection_ok",
    "mod_p_summary",
    "SieveRatioReport",
    "sieve_ratio_report",
]

DEFAULT_MAX_P = 101
# visited-table entries; 101**4 fits, larger moduli need an explicit raise
DEFAULT_MAX_STATES = 101**4 + 1


@dataclass(frozen=True)
class PrimeCounts:
    T: int
    pi: int
    pi2: int


def prime_counts(root, T: int, **kw) -> PrimeCounts:
    """Prime circles and tangent prime pairs with curvature ``< T``.

    Small ``T`` (at or below the root maximum) is allowed and counts only the
    root circles that fall below it.
    """
    root = as_root(root)
    if primitive_content(root.quad) != 1:
        raise InvalidInputError(f"root {tuple(root.quad)} is not primitive")
    if T < 1:
        raise InvalidInputError(f"T must be positive, got {T}")
    s = count_series(root, [T], **kw)
    return PrimeCounts(T, s.pi[-1], s.pi2[-1])


# --- mod-p orbits ---------------------------------------------------------------


def _encode(q, m: int) -> int:
    a, b, c, d = (int(x) % m for x in q)
    return ((a * m + b) * m + c) * m + d


def _decode(codes: np.ndarray, m: int):
    d = codes % m
    rest = codes // m
    c = rest % m
    rest //= m
    b = rest % m
    a = rest // m
    return a, b, c, d


@dataclass
class ModPOrbit:
    """Orbit of a root quadruple in ``(Z/mZ)^4``; ``m`` is prime unless built by ``orbit_mod``."""

    p: int
    codes: np.ndarray  # sorted packed quadruples
    slice_x1: int
    slice_x1x2: int
    root: tuple = field(default=())

    @property
    def size(self) -> int:
        return int(self.codes.size)

    @cached_property
    def points(self) -> set[tuple[int, int, int, int]]:
        a, b, c, d = _decode(self.codes, self.p)
        return set(zip(a.tolist(), b.tolist(), c.tolist(), d.tolist()))

    def __contains__(self, q) -> bool:
        code = _encode(q, self.p)
        k = int(np.searchsorted(self.codes, code))
        return k < self.codes.size and int(self.codes[k]) == code

    def is_closed(self) -> bool:
        """Every generator maps the point set into itself."""
        a, b, c, d = _decode(self.codes, self.p)
        for img in _generator_images(a, b, c, d, self.p):
            if not np.all(np.isin(img, self.codes, assume_unique=False)):
                return False
        return True


def _generator_images(a, b, c, d, m):
    s = a + b + c + d
    m2 = m * m
    m3 = m2 * m
    yield ((2 * (s - a) - a) % m) * m3 + b * m2 + c * m + d
    yield a * m3 + ((2 * (s - b) - b) % m) * m2 + c * m + d
    yield a * m3 + b * m2 + ((2 * (s - c) - c) % m) * m + d
    yield a * m3 + b * m2 + c * m + (2 * (s - d) - d) % m


def orbit_mod(root: Sequence[int], m: int, max_states: int = DEFAULT_MAX_STATES) -> ModPOrbit:
    """Closure of ``root mod m`` under the four generators, for any modulus ``m >= 2``."""
    if m < 2:
        raise InvalidInputError(f"modulus must be >= 2, got {m}")
    if m**4 > max_states:
        raise ResourceError(f"modulus {m} needs {m**4} states (cap {max_states})")
    q0 = tuple(int(x) for x in root)
    seen = np.zeros(m**4, dtype=bool)
    start = _encode(q0, m)
    seen[start] = True
    frontier = np.array([start], dtype=np.int64)
    while frontier.size:
        a, b, c, d = _decode(frontier, m)
        new = np.unique(np.concatenate(list(_generator_images(a, b, c, d, m))))
        new = new[~seen[new]]
        seen[new] = True
        frontier = new
    codes = np.flatnonzero(seen).astype(np.int64)
    a, b, _, _ = _decode(codes, m)
    return ModPOrbit(
        p=m,
        codes=codes,
        slice_x1=int(np.count_nonzero(a == 0)),
        slice_x1x2=int(np.count_nonzero((a * b) % m == 0)),
        root=q0,
    )


def _check_prime(p: int, max_p: int):
    if not is_prime(p):
        raise InvalidInputError(f"{p} is not prime")
    if p > max_p:
        raise ResourceError(f"p={p} exceeds the configured cap {max_p}")


def orbit_mod_p(root, p: int, max_p: int = DEFAULT_MAX_P) -> ModPOrbit:
    _check_prime(p, max_p)
    root = as_root(root)
    orb = orbit_mod(root.quad, p, max_states=max(DEFAULT_MAX_STATES, p**4))
    if orb.codes.size and orb.codes[0] == 0:
        raise InternalInvariantError("zero vector reached in mod-p orbit")
    return orb


@dataclass(frozen=True)
class ConePoints:
    p: int
    count: int
    slice_x1: int
    codes: np.ndarray | None = None


def cone_points_mod_p(p: int, with_points: bool = False, max_p: int = DEFAULT_MAX_P) -> ConePoints:
    """Brute-force nonzero solutions of ``2Σx² − (Σx)² ≡ 0 (mod p)``."""
    _check_prime(p, max_p)
    x2, x3, x4 = (g.ravel().astype(np.int64) for g in np.indices((p, p, p)))
    rest_sq = x2 * x2 + x3 * x3 + x4 * x4
    rest_sum = x2 + x3 + x4
    tail = (x2 * p + x3) * p + x4
    count = 0
    slice1 = 0
    chunks = []
    for x1 in range(p):
        s = x1 + rest_sum
        hit = (2 * (x1 * x1 + rest_sq) - s * s) % p == 0
        if x1 == 0:
            hit[0] = False  # origin
        n = int(np.count_nonzero(hit))
        count += n
        if x1 == 0:
            slice1 = n
        if with_points:
            chunks.append(x1 * p**3 + tail[hit])
    codes = np.concatenate(chunks) if with_points else None
    return ConePoints(p, count, slice1, codes)


def local_density(root, p: int, f: str = "x1", orbit: ModPOrbit | None = None) -> Fraction:
    """Fraction of the mod-p orbit on which ``f`` (``"x1"`` or ``"x1x2"``) vanishes."""
    orb = orbit if orbit is not None else orbit_mod_p(root, p)
    if orb.size == 0:
        raise InternalInvariantError("empty orbit")
    if f == "x1":
        return Fraction(orb.slice_x1, orb.size)
    if f == "x1x2":
        return Fraction(orb.slice_x1x2, orb.size)
    raise InvalidInputError(f"unknown polynomial {f!r}")


def composite_density(root, primes: Sequence[int], f: str = "x1") -> Fraction:
    """Density modulo a squarefree product, taken as the product of per-prime densities."""
    if len(set(primes)) != len(primes):
        raise InvalidInputError("primes must be distinct")
    out = Fraction(1)
    for p in primes:
        out *= local_density(root, p, f)
    return out


def crt_projection_ok(composite: ModPOrbit, factors: Sequence[ModPOrbit]) -> bool:
    """Whether the mod-d orbit is exactly the CRT product of the per-prime orbits."""
    d = composite.p
    if math.prod(f.p for f in factors) != d:
        raise InvalidInputError("factor moduli do not multiply to the composite modulus")
    a, b, c, e = _decode(composite.codes, d)
    for f in factors:
        proj = np.unique(_encode_arrays(a % f.p, b % f.p, c % f.p, e % f.p, f.p))
        if not np.array_equal(proj, f.codes):
            return False
    return composite.size == math.prod(f.size for f in factors)


def _encode_arrays(a, b, c, d, m):
    return ((a * m + b) * m + c) * m + d


def mod_p_summary(root, p: int, max_p: int = DEFAULT_MAX_P) -> dict:
    """JSON-ready summary; ``good`` means the orbit is the whole nonzero cone."""
    orb = orbit_mod_p(root, p, max_p)
    cone = cone_points_mod_p(p, with_points=True, max_p=max_p)
    good = bool(np.array_equal(orb.codes, np.sort(cone.codes)))
    g1 = local_density(root, p, "x1", orb)
    g2 = local_density(root, p, "x1x2", orb)
    return {
        "schema": "1",
        "p": p,
        "root": list(orb.root),
        "orbit_size": orb.size,
        "cone_size": cone.count,
        "slice_x1": orb.slice_x1,
        "slice_x1x2": orb.slice_x1x2,
        "good": good,
        "g1": f"{g1.numerator}/{g1.denominator}",
        "g2": f"{g2.numerator}/{g2.denominator}",
        "g1_scaled_error": float(abs(g1 - Fraction(1, p)) * p**1.5),
        "g2_scaled_error": float(abs(g2 - Fraction(2, p)) * p**1.5),
    }


# --- sieve-shape ratios ------------------------------------------------------------


@dataclass(frozen=True)
class SieveRatioReport:
    alpha: float
    rows: list  # (T, pi ratio, pi2 ratio)
    window: tuple
    pi_spread: float
    pi2_spread: float
    factor: float

    @property
    def bounded(self) -> bool:
        return self.pi_spread <= self.factor and self.pi2_spread <= self.factor

    def to_csv(self) -> str:
        lines = ["T,pi_ratio,pi2_ratio"]
        for t, r1, r2 in self.rows:
            lines.append(f"{t},{r1!r},{r2!r}")
        return "\n".join(lines) + "\n"


def sieve_ratio_report(
    series: CountSeries,
    alpha: float,
    tmin: int | None = None,
    tmax: int | None = None,
    factor: float = 3.0,
) -> SieveRatioReport:
    """``π log T / T^α`` and ``π₂ (log T)² / T^α`` on the grid; spreads taken over the window.

    The default window is the top decade of the grid.
    """
    if not series.pi or not series.pi2:
        raise InvalidInputError("series carries no prime counts")
    rows = []
    for t, p1, p2 in zip(series.thresholds, series.pi, series.pi2):
        if t < 2:
            continue
        lt = math.log(t)
        scale = t**alpha
        rows.append((t, p1 * lt / scale, p2 * lt * lt / scale))
    hi = tmax if tmax is not None else series.thresholds[-1]
    lo = tmin if tmin is not None else hi / 10
    win = [r for r in rows if lo <= r[0] <= hi]

    def spread(vals):
        vals = list(vals)
        if not vals or min(vals) <= 0:
            return math.inf
        return max(vals) / min(vals)

    return SieveRatioReport(
        alpha=alpha,
        rows=rows,
        window=(lo, hi),
        pi_spread=spread(r[1] for r in win),
        pi2_spread=spread(r[2] for r in win),
        factor=factor,
    )
