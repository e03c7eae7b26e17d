"""Cumulative count series over a threshold grid, with CSV round-tripping."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import InvalidInputError

CSV_COLUMNS = ("T", "N", "N2", "pi", "pi2")


def geometric_grid(t0: int, ratio: float, tmax: int) -> list[int]:
    """Integer thresholds ``round(t0 * ratio**k)`` up to and always including ``tmax``."""
    if ratio <= 1:
        raise InvalidInputError(f"grid ratio must exceed 1, got {ratio}")
    if t0 <= 0 or tmax < t0:
        raise InvalidInputError(f"need 0 < t0 <= tmax, got t0={t0}, tmax={tmax}")
    grid = []
    k = 0
    while True:
        t = round(t0 * ratio**k)
        if t >= tmax:
            break
        if not grid or t > grid[-1]:
            grid.append(int(t))
        k += 1
    grid.append(int(tmax))
    return grid


@dataclass
class CountSeries:
    thresholds: list[int]
    N: list[int]
    N2: list[int]
    pi: list[int] = field(default_factory=list)
    pi2: list[int] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.thresholds)

    def rows(self):
        pis = self.pi or [None] * len(self)
        pi2s = self.pi2 or [None] * len(self)
        return list(zip(self.thresholds, self.N, self.N2, pis, pi2s))

    def window(self, tmin=None, tmax=None) -> list[int]:
        """Indices of thresholds inside ``[tmin, tmax]``."""
        lo = -math.inf if tmin is None else tmin
        hi = math.inf if tmax is None else tmax
        return [i for i, t in enumerate(self.thresholds) if lo <= t <= hi]

    def is_monotone(self) -> bool:
        cols = [self.thresholds, self.N, self.N2, self.pi, self.pi2]
        return all(all(x <= y for x, y in zip(c, c[1:])) for c in cols if c)

    def to_csv(self, fh: TextIO | None = None) -> str:
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows():
            w.writerow(["" if v is None else v for v in row])
        return out.getvalue() if fh is None else ""

    @classmethod
    def from_csv(cls, text: str | Iterable[str]) -> "CountSeries":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        lines = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or "T" not in reader.fieldnames or "N" not in reader.fieldnames:
            raise InvalidInputError("series CSV needs at least T and N columns")
        ts, ns, n2s, pis, pi2s = [], [], [], [], []
        for row in reader:
            ts.append(int(row["T"]))
            ns.append(int(row["N"]))
            if row.get("N2"):
                n2s.append(int(row["N2"]))
            if row.get("pi"):
                pis.append(int(row["pi"]))
            if row.get("pi2"):
                pi2s.append(int(row["pi2"]))
        if any(len(c) not in (0, len(ts)) for c in (n2s, pis, pi2s)):
            raise InvalidInputError("ragged series CSV")
        return cls(ts, ns, n2s, pis, pi2s)
