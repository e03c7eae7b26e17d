"""Power-law fits of circle counts and the JSON run report."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError
from .series import CountSeries

# reference exponent for the deviation field of the report
ALPHA_REF = 1.30568


@dataclass(frozen=True)
class FitResult:
    alpha_hat: float
    c_hat: float
    rms: float
    window: tuple  # (first T, last T) actually used
    points: int

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def default_window(series: CountSeries, decades: float = 2.0) -> list[int]:
    """Indices covering the top ``decades`` of the grid."""
    if not series.thresholds:
        return []
    top = series.thresholds[-1]
    return series.window(top / 10**decades, top)


def fit_exponent(series: CountSeries, window=None) -> FitResult:
    """OLS of log N on log T.  ``window`` is an index list, a ``(tmin, tmax)`` pair, or None.

    Plain unweighted least squares; alpha is the slope, c is exp(intercept).
    """
    if window is None:
        idx = default_window(series)
    elif isinstance(window, tuple) and len(window) == 2:
        idx = series.window(*window)
    else:
        idx = list(window)
    idx = [i for i in idx if series.N[i] > 0 and series.thresholds[i] > 0]
    if len(idx) < 3:
        raise InvalidInputError(f"need at least 3 window points with N > 0, got {len(idx)}")
    x = np.log(np.array([series.thresholds[i] for i in idx], dtype=float))
    y = np.log(np.array([series.N[i] for i in idx], dtype=float))
    if np.ptp(x) == 0:
        raise InvalidInputError("degenerate fit window: all thresholds equal")
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, icpt])
    return FitResult(
        alpha_hat=float(slope),
        c_hat=float(math.exp(icpt)),
        rms=float(np.sqrt(np.mean(resid**2))),
        window=(series.thresholds[idx[0]], series.thresholds[idx[-1]]),
        points=len(idx),
    )


def n2_verdicts(series: CountSeries) -> list[dict]:
    """Per-threshold check of ``N2 = 3N - 6``; thresholds at or below the root maximum are skipped."""
    out = []
    if not series.N2:
        return out
    root_max = None
    root = series.metadata.get("root")
    if root:
        root_max = max(root)
    for t, n, n2 in zip(series.thresholds, series.N, series.N2):
        if root_max is not None and t <= root_max:
            out.append({"T": t, "N2": n2, "expected": None, "ok": None})
            continue
        out.append({"T": t, "N2": n2, "expected": 3 * n - 6, "ok": n2 == 3 * n - 6})
    return out


def report(series: CountSeries | None, fit: FitResult | None = None, ratios=None, densities=None) -> dict:
    """Bundle counts, fit, prime ratios and invariant verdicts into one JSON-ready dict."""
    rep = {"schema": "1", "counts": [], "fit": None, "prime_ratios": None, "densities": densities or [], "checks": {}}
    if series is None or len(series) == 0:
        rep["checks"] = {"n2_identity": None, "monotone": None}
        return rep
    rep["metadata"] = {k: v for k, v in series.metadata.items() if k != "root"}
    if "root" in series.metadata:
        rep["root"] = list(series.metadata["root"])
    rep["counts"] = [
        {"T": t, "N": n, "N2": n2, "pi": p1, "pi2": p2} for t, n, n2, p1, p2 in series.rows()
    ]
    verdicts = n2_verdicts(series)
    rep["n2_verdicts"] = verdicts
    decided = [v["ok"] for v in verdicts if v["ok"] is not None]
    rep["checks"]["n2_identity"] = all(decided) if decided else None
    rep["checks"]["monotone"] = series.is_monotone()
    if series.pi and series.pi2:
        rep["checks"]["pi2_le_3pi"] = all(b <= 3 * a for a, b in zip(series.pi, series.pi2))
        rep["checks"]["pi_le_N"] = all(a <= n for a, n in zip(series.pi, series.N))
    if fit is not None:
        rep["fit"] = fit.to_dict()
        rep["fit"]["alpha_ref"] = ALPHA_REF
        rep["fit"]["deviation"] = fit.alpha_hat - ALPHA_REF
    if ratios is not None:
        rep["prime_ratios"] = {
            "alpha": ratios.alpha,
            "window": list(ratios.window),
            "pi_spread": ratios.pi_spread,
            "pi2_spread": ratios.pi2_spread,
            "factor": ratios.factor,
            "bounded": ratios.bounded,
            "rows": [{"T": t, "pi_ratio": a, "pi2_ratio": b} for t, a, b in ratios.rows],
        }
        rep["checks"]["ratios_bounded"] = ratios.bounded
    return rep
