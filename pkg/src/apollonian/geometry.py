"""Floating-point inversive geometry of Descartes configurations.

A configuration is stored as its augmented curvature-center matrix, one row
``(cocurv, curv, curv*x, curv*y)`` per oriented circle.  Flipping slot ``i``
is the left multiplication ``S_i W``; the generator matrices therefore move
the whole configuration, not just its curvatures.

Line rows carry ``curv = 0``, the unit normal pointing away from the packing
in ``(cx, cy)``, and ``cocurv = 2h`` for the line ``{p : n·p = h}``.  With that
convention ``Wᵀ (I - ½𝟙𝟙ᵀ) W`` equals the Wilker form for strips as well as
for bounded packings, and the line offset survives propagation.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .descartes import PackingKind, as_root
from .errors import InvalidConfigurationError, NumericError, ResourceError
from .orbit import WalkNode, _children, root_slots

WILKER_FORM = np.array(
    [[0.0, -4.0, 0.0, 0.0], [-4.0, 0.0, 0.0, 0.0], [0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 2.0]]
)
DESCARTES_MATRIX = np.eye(4) - 0.5 * np.ones((4, 4))

TOL = 1e-9
DEEP_TOL = 1e-6
DEFAULT_ELEMENT_CAP = 10**5

_S = [np.eye(4) for _ in range(4)]
for _i in range(4):
    _S[_i][_i, :] = 2.0
    _S[_i][_i, _i] = -1.0


def tolerance_for_depth(depth: int) -> float:
    return TOL if depth <= 6 else DEEP_TOL


# --- plain shapes ------------------------------------------------------------


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    r: float

    @property
    def center(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class Line:
    """The line ``{p : nx*px + ny*py = offset}`` with unit normal ``(nx, ny)``."""

    nx: float
    ny: float
    offset: float


Shape = Union[Circle, Line]


# --- oriented rows -----------------------------------------------------------


@dataclass(frozen=True)
class OrientedCircle:
    cocurv: float
    curv: float
    cx: float
    cy: float

    @classmethod
    def circle(cls, x: float, y: float, curv: float) -> "OrientedCircle":
        if curv == 0:
            raise InvalidConfigurationError("use OrientedCircle.line for zero curvature")
        return cls(curv * (x * x + y * y) - 1.0 / curv, curv, curv * x, curv * y)

    @classmethod
    def line(cls, nx: float, ny: float, offset: float) -> "OrientedCircle":
        n = math.hypot(nx, ny)
        return cls(2.0 * offset, 0.0, nx / n, ny / n)

    @property
    def is_line(self) -> bool:
        return self.curv == 0

    def as_array(self):
        return np.array([self.cocurv, self.curv, self.cx, self.cy], dtype=float)


def cocurvature_residual(row: OrientedCircle) -> float:
    """Relative violation of ``b̄ = b|z|² - 1/b`` (or of ``|n| = 1`` for lines)."""
    if row.is_line:
        return abs(math.hypot(row.cx, row.cy) - 1.0)
    b = row.curv
    x, y = row.cx / b, row.cy / b
    expect = b * (x * x + y * y) - 1.0 / b
    return abs(row.cocurv - expect) / max(1.0, abs(row.cocurv), abs(expect))


def circle_from_row(row: OrientedCircle, tol: float = TOL) -> Shape:
    if not all(math.isfinite(v) for v in (row.cocurv, row.curv, row.cx, row.cy)):
        raise NumericError(f"non-finite row {row}")
    if cocurvature_residual(row) > tol:
        raise InvalidConfigurationError(f"row {row} violates the cocurvature identity")
    if row.is_line:
        return Line(row.cx, row.cy, row.cocurv / 2.0)
    return Circle(row.cx / row.curv, row.cy / row.curv, 1.0 / abs(row.curv))


# --- configurations ----------------------------------------------------------


class ConfigMatrix:
    """Four oriented circles as the 4×4 matrix ``W``; immutable."""

    def __init__(self, rows):
        w = np.array(
            [r.as_array() if isinstance(r, OrientedCircle) else r for r in rows], dtype=float
        )
        if w.shape != (4, 4):
            raise InvalidConfigurationError(f"configuration must be 4x4, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise NumericError("non-finite configuration entries")
        w.setflags(write=False)
        self.W = w

    def row(self, i: int) -> OrientedCircle:
        return OrientedCircle(*(float(v) for v in self.W[i - 1]))

    @property
    def rows(self) -> list[OrientedCircle]:
        return [self.row(i) for i in (1, 2, 3, 4)]

    @property
    def curvatures(self):
        return tuple(float(v) for v in self.W[:, 1])

    def shapes(self, tol: float = TOL) -> list[Shape]:
        return [circle_from_row(r, tol) for r in self.rows]

    def to_csv(self) -> str:
        lines = ["cocurv,curv,cx,cy"]
        for r in self.W:
            lines.append(",".join(repr(float(v)) for v in r))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"ConfigMatrix({self.W.tolist()})"


def _on_two_circles(ra: Fraction, xb: Fraction, rb: Fraction):
    """Points at distance ``ra`` from the origin and ``rb`` from ``(xb, 0)``, upper first."""
    along = (ra * ra - rb * rb + xb * xb) / (2 * xb)
    h2 = ra * ra - along * along
    h = math.sqrt(h2) if h2 > 0 else 0.0
    return [(float(along), h), (float(along), -h)]


def standard_embedding(root) -> ConfigMatrix:
    """Canonical placement of a root configuration, rows in sorted-root order.

    Bounded roots: bounding circle at the origin, second circle centred on
    the positive x axis, the rest above or on the axis.  For ``(-1,2,2,3)``
    this gives the curvature-2 circles at ``(±1/2, 0)`` and the curvature-3
    circle at ``(0, 2/3)``.  Strip roots ``(0,0,c,c)``: lines ``y = 0`` and
    ``y = 2/c``, circles of radius ``1/c`` at ``(1/c, 1/c)`` and ``(3/c, 1/c)``.
    """
    root = as_root(root)
    if root.kind is PackingKind.STRIP:
        c = float(root.quad[3])
        r = 1.0 / c
        return ConfigMatrix(
            [
                OrientedCircle.line(0.0, -1.0, 0.0),
                OrientedCircle.line(0.0, 1.0, 2 * r),
                OrientedCircle.circle(r, r, c),
                OrientedCircle.circle(3 * r, r, c),
            ]
        )
    if root.kind is not PackingKind.BOUNDED:
        raise InvalidConfigurationError(f"no embedding for degenerate root {tuple(root.quad)}")
    # exact rationals keep the square roots away from cancellation
    fa, fb, fc, fd = (Fraction(v) for v in root.quad)
    R = -1 / fa
    rb, rc, rd = 1 / fb, 1 / fc, 1 / fd
    xb = R - rb
    zb = (float(xb), 0.0)
    zc = _on_two_circles(R - rc, xb, rb + rc)[0]
    if zc[1] == 0.0:
        zd = _on_two_circles(R - rd, xb, rb + rd)[0]
    else:
        # |z|² = (R-rd)², |z-zb|² = (rb+rd)², |z-zc|² = (rc+rd)² minus the first
        k0 = float((R - rd) ** 2)
        m = np.array([[2 * zb[0], 0.0], [2 * zc[0], 2 * zc[1]]])
        rhs = np.array(
            [
                k0 + zb[0] ** 2 - float((rb + rd) ** 2),
                k0 + zc[0] ** 2 + zc[1] ** 2 - float((rc + rd) ** 2),
            ]
        )
        zd = tuple(float(v) for v in np.linalg.solve(m, rhs))
    a, b, c, d = (float(v) for v in root.quad)
    return ConfigMatrix(
        [
            OrientedCircle.circle(0.0, 0.0, a),
            OrientedCircle.circle(*zb, b),
            OrientedCircle.circle(*zc, c),
            OrientedCircle.circle(*zd, d),
        ]
    )


def propagate(W: ConfigMatrix, i: int) -> ConfigMatrix:
    """``S_i · W``: row ``i`` becomes twice the sum of the others minus itself."""
    out = _S[i - 1] @ W.W
    if not np.all(np.isfinite(out)):
        raise NumericError("propagation produced non-finite entries")
    return ConfigMatrix(out)


def generator_matrices_float():
    return [s.copy() for s in _S]


def conjugation_check(W: ConfigMatrix, generators=None, relative: bool = True) -> float:
    """Max over generators of ``‖Mᵀ Q_W M − Q_W‖_max`` with ``M = W⁻¹ S_i W``.

    ``M`` has entries that grow roughly like the square of the largest
    curvature, so the raw residual is dominated by rounding beyond a few
    flips.  By default each residual is divided by ``max(1, ‖M‖_max²)``;
    pass ``relative=False`` for the raw value.
    """
    w = W.W
    scale = max(1.0, float(np.abs(w).max()))
    det = float(np.linalg.det(w))
    # a genuine configuration has |det W| = 8, whatever its size
    if not math.isfinite(det) or abs(det) <= 1e-9 * scale:
        raise InvalidConfigurationError(f"configuration matrix is singular (det={det:g})")
    winv = np.linalg.inv(w)
    gens = _S if generators is None else [np.asarray(g, dtype=float) for g in generators]
    worst = 0.0
    for s in gens:
        m = winv @ s @ w
        r = float(np.abs(m.T @ WILKER_FORM @ m - WILKER_FORM).max())
        if relative:
            r /= max(1.0, float(np.abs(m).max()) ** 2)
        worst = max(worst, r)
    return worst


def wilker_residual(W: ConfigMatrix) -> float:
    """``‖Wᵀ (I − ½𝟙𝟙ᵀ) W − Q_W‖_max``; zero for a genuine oriented configuration."""
    return float(np.abs(W.W.T @ DESCARTES_MATRIX @ W.W - WILKER_FORM).max())


# --- tangency ----------------------------------------------------------------


def tangency_check(r1: OrientedCircle, r2: OrientedCircle, tol: float = TOL) -> bool:
    """Whether two oriented rows touch with compatible orientation."""
    if r1.is_line and r2.is_line:
        return abs(r1.cx + r2.cx) < tol and abs(r1.cy + r2.cy) < tol
    if r1.is_line or r2.is_line:
        ln, cr = (r1, r2) if r1.is_line else (r2, r1)
        h = ln.cocurv / 2.0
        x, y, rad = cr.cx / cr.curv, cr.cy / cr.curv, 1.0 / cr.curv
        gap = h - (ln.cx * x + ln.cy * y)
        return abs(gap - rad) < tol * max(1.0, math.hypot(x, y), abs(h))
    x1, y1 = r1.cx / r1.curv, r1.cy / r1.curv
    x2, y2 = r2.cx / r2.curv, r2.cy / r2.curv
    dist = math.hypot(x1 - x2, y1 - y2)
    # signed radii: internal tangency when one curvature is negative
    target = abs(1.0 / r1.curv + 1.0 / r2.curv)
    return abs(dist - target) < tol * max(1.0, math.hypot(x1, y1), math.hypot(x2, y2))


def all_pairs_tangent(W: ConfigMatrix, tol: float = TOL) -> bool:
    rows = W.rows
    return all(tangency_check(rows[i], rows[j], tol) for i in range(4) for j in range(i + 1, 4))


def config_is_valid(W: ConfigMatrix, tol: float = TOL) -> bool:
    return all(cocurvature_residual(r) <= tol for r in W.rows) and all_pairs_tangent(W, tol)


def tangency_point(r1: OrientedCircle, r2: OrientedCircle):
    """Touching point of two rows, or ``None`` for two lines (they meet at infinity)."""
    if r1.is_line and r2.is_line:
        return None
    if r1.is_line or r2.is_line:
        ln, cr = (r1, r2) if r1.is_line else (r2, r1)
        x, y = cr.cx / cr.curv, cr.cy / cr.curv
        gap = ln.cocurv / 2.0 - (ln.cx * x + ln.cy * y)
        return (x + gap * ln.cx, y + gap * ln.cy)
    s = r1.curv + r2.curv
    # (b1 z1 + b2 z2) / (b1 + b2) in curvature-center coordinates
    return ((r1.cx + r2.cx) / s, (r1.cy + r2.cy) / s)


def circle_through(p1, p2, p3, eps: float = 1e-12) -> Shape:
    """Circle through three points; a line when they are collinear or one is at infinity."""
    pts = [p for p in (p1, p2, p3) if p is not None]
    if len(pts) < 2:
        raise InvalidConfigurationError("need at least two finite points")
    if len(pts) == 2 or _collinear(*pts, eps=eps):
        (ax, ay), (bx, by) = pts[0], pts[1]
        if math.hypot(bx - ax, by - ay) < eps:
            raise InvalidConfigurationError("coincident tangency points")
        nx, ny = -(by - ay), bx - ax
        n = math.hypot(nx, ny)
        nx, ny = nx / n, ny / n
        return Line(nx, ny, nx * ax + ny * ay)
    (ax, ay), (bx, by), (cx, cy) = pts
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    return Circle(ux, uy, math.hypot(ax - ux, ay - uy))


def _collinear(a, b, c, eps):
    (ax, ay), (bx, by), (cx, cy) = a, b, c
    for p, q in ((a, b), (a, c), (b, c)):
        if math.hypot(p[0] - q[0], p[1] - q[1]) < eps:
            raise InvalidConfigurationError("coincident tangency points")
    cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    scale = max(math.hypot(bx - ax, by - ay), math.hypot(cx - ax, cy - ay)) ** 2
    return abs(cross) <= eps * max(scale, 1e-300)


def dual_circle(W: ConfigMatrix, i: int) -> Shape:
    """The circle through the three touching points of the circles other than ``i``."""
    rows = W.rows
    others = [rows[k] for k in range(4) if k != i - 1]
    pts = [
        tangency_point(others[0], others[1]),
        tangency_point(others[0], others[2]),
        tangency_point(others[1], others[2]),
    ]
    return circle_through(*pts)


def invert_circle(c: Shape, mirror: Shape, eps: float = 1e-12) -> Shape:
    """Image of ``c`` under inversion in ``mirror`` (reflection when it is a line)."""
    if isinstance(mirror, Line):
        nx, ny, h = mirror.nx, mirror.ny, mirror.offset
        if isinstance(c, Circle):
            k = nx * c.x + ny * c.y - h
            return Circle(c.x - 2 * k * nx, c.y - 2 * k * ny, c.r)
        px, py = c.offset * c.nx, c.offset * c.ny
        k = nx * px + ny * py - h
        qx, qy = px - 2 * k * nx, py - 2 * k * ny
        dot = nx * c.nx + ny * c.ny
        mx_, my_ = c.nx - 2 * dot * nx, c.ny - 2 * dot * ny
        return Line(mx_, my_, mx_ * qx + my_ * qy)

    mx, my, R = mirror.x, mirror.y, mirror.r
    R2 = R * R
    if isinstance(c, Line):
        delta = c.offset - (c.nx * mx + c.ny * my)
        if abs(delta) < eps * max(1.0, R):
            return c
        rad = R2 / (2 * abs(delta))
        sgn = 1.0 if delta > 0 else -1.0
        return Circle(mx + sgn * rad * c.nx, my + sgn * rad * c.ny, rad)
    dx, dy = c.x - mx, c.y - my
    dist2 = dx * dx + dy * dy
    D = dist2 - c.r * c.r
    if abs(D) <= eps * max(dist2, c.r * c.r, 1.0):
        dist = math.sqrt(dist2)
        ux, uy = dx / dist, dy / dist
        return Line(ux, uy, ux * mx + uy * my + R2 / (2 * c.r))
    s = R2 / D
    return Circle(mx + s * dx, my + s * dy, abs(s) * c.r)


def shapes_close(s1: Shape, s2: Shape, tol: float) -> bool:
    if isinstance(s1, Circle) and isinstance(s2, Circle):
        scale = max(1.0, abs(s1.x), abs(s1.y), s1.r)
        return (
            abs(s1.x - s2.x) <= tol * scale
            and abs(s1.y - s2.y) <= tol * scale
            and abs(s1.r - s2.r) <= tol * scale
        )
    if isinstance(s1, Line) and isinstance(s2, Line):
        same = abs(s1.nx - s2.nx) + abs(s1.ny - s2.ny) + abs(s1.offset - s2.offset)
        flipped = abs(s1.nx + s2.nx) + abs(s1.ny + s2.ny) + abs(s1.offset + s2.offset)
        return min(same, flipped) <= tol * max(1.0, abs(s1.offset))
    return False


# --- traversal and rendering --------------------------------------------------


@dataclass(frozen=True)
class ConfigNode:
    node: WalkNode
    W: ConfigMatrix


def walk_configurations(root, bound=None, max_depth=None) -> Iterator[ConfigNode]:
    """Root configuration, then each child configuration whose new curvature is
    below ``bound`` and whose depth is at most ``max_depth`` (pre-order)."""
    root = as_root(root)
    W0 = standard_embedding(root)
    start = ConfigNode(WalkNode(root.quad, 0, 0), W0)
    yield start
    strip = root.kind is PackingKind.STRIP
    seen = {root.quad} if strip else None
    slots0 = root_slots(root)
    stack = [start]
    while stack:
        cur = stack.pop()
        if max_depth is not None and cur.node.depth >= max_depth:
            continue
        kids = list(_children(cur.node, slots0 if cur.node.last == 0 else (1, 2, 3, 4)))
        for child in reversed(kids):
            new = child.quad[child.last - 1]
            if bound is not None and new >= bound:
                continue
            if seen is not None:
                if child.quad in seen:
                    continue
                seen.add(child.quad)
            nxt = ConfigNode(child, propagate(cur.W, child.last))
            yield nxt
            stack.append(nxt)


def packing_shapes(root, bound=None, max_depth=None, cap: int = DEFAULT_ELEMENT_CAP):
    """``(curvature, shape)`` for every circle the stop rule admits."""
    if bound is None and max_depth is None:
        raise InvalidConfigurationError("need a curvature bound or a depth limit")
    root = as_root(root)
    out = []
    for cn in walk_configurations(root, bound, max_depth):
        if cn.node.last == 0:
            items = [(v, cn.W.row(k + 1)) for k, v in enumerate(root.quad)]
            items = [(v, r) for v, r in items if bound is None or v < bound]
        else:
            items = [(cn.node.new_entry, cn.W.row(cn.node.last))]
        for v, r in items:
            out.append((v, circle_from_row(r, tolerance_for_depth(cn.node.depth))))
            if len(out) > cap:
                raise ResourceError(f"render would exceed {cap} elements")
    return out


def _fmt(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(
    root,
    bound=None,
    max_depth=None,
    labels: bool = False,
    size: int = 800,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> str:
    """Deterministic SVG 1.1 drawing: one element per circle (lines for strips)."""
    root = as_root(root)
    shapes = packing_shapes(root, bound, max_depth, cap)
    if root.kind is PackingKind.STRIP:
        c = float(root.quad[3])
        x0, y0, w, h = 1.0 / c, 0.0, 2.0 / c, 2.0 / c
    else:
        R = -1.0 / float(root.quad[0])
        x0, y0, w, h = -R, -R, 2 * R, 2 * R
    k = size / max(w, h)
    width, height = int(round(w * k)), int(round(h * k))

    def px(x):
        return (x - x0) * k

    def py(y):
        return height - (y - y0) * k

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        '<g fill="none" stroke="black" stroke-width="0.5">',
    ]
    text = []
    for curv, s in shapes:
        if isinstance(s, Line):
            # lines are horizontal in the strip embedding
            yv = s.offset * s.ny
            out.append(
                f'<line x1="0" y1="{_fmt(py(yv))}" x2="{width}" y2="{_fmt(py(yv))}" data-curvature="{curv}"/>'
            )
            continue
        out.append(
            f'<circle cx="{_fmt(px(s.x))}" cy="{_fmt(py(s.y))}" r="{_fmt(s.r * k)}" data-curvature="{curv}"/>'
        )
        if labels and s.r * k >= 4:
            fs = min(s.r * k * 0.6, 48)
            cy = py(s.y) if curv > 0 else py(s.y + 0.9 * s.r)
            text.append(
                f'<text x="{_fmt(px(s.x))}" y="{_fmt(cy + fs / 3)}" font-size="{_fmt(fs)}" '
                f'text-anchor="middle">{curv}</text>'
            )
    out.append("</g>")
    if text:
        out.append('<g fill="black" font-family="sans-serif">')
        out.extend(text)
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def count_svg_elements(svg: str) -> int:
    return svg.count("<circle ") + svg.count("<line ")
