"""Zero sets of planar fields: marching squares, lengths and weighted integrals.

Fields are either :class:`~arwaves.field.FieldRealization` objects (evaluated
on tensor grids in one matrix product, with exact gradients) or plain
vectorised callables ``f(x, y)``, for which gradients fall back to central
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .errors import DegenerateGrid

__all__ = [
    "Rectangle",
    "Disk",
    "parse_window",
    "NodalCurveSet",
    "NodalObservable",
    "extract_nodal",
    "nodal_length",
    "weighted_gamma",
    "coarea_gamma",
    "observe",
    "low_margin_threshold",
    "field_gradient",
]

ZERO_NUDGE = 1e-12
_FD_STEP = 1e-6


@dataclass(frozen=True)
class Rectangle:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("empty rectangle")

    @property
    def bbox(self):
        return self.x0, self.y0, self.x1, self.y1

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, x, y):
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def shifted(self, v) -> "Rectangle":
        return Rectangle(self.x0 + v[0], self.y0 + v[1], self.x1 + v[0], self.y1 + v[1])

    def __str__(self):
        return f"{self.x0!r},{self.y0!r},{self.x1!r},{self.y1!r}"


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("radius must be positive")

    @property
    def bbox(self):
        return self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r

    @property
    def area(self) -> float:
        return math.pi * self.r**2

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r**2

    def shifted(self, v) -> "Disk":
        return Disk(self.cx + v[0], self.cy + v[1], self.r)

    def __str__(self):
        return f"disk:{self.cx!r},{self.cy!r},{self.r!r}"


Window = Union[Rectangle, Disk]


def parse_window(text: str) -> Window:
    """``"x0,y0,x1,y1"`` or ``"disk:cx,cy,r"``."""
    text = text.strip()
    if text.startswith("disk:"):
        vals = [float(v) for v in text[5:].split(",")]
        if len(vals) != 3:
            raise ValueError(f"bad disk window {text!r}")
        return Disk(*vals)
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise ValueError(f"bad rectangle window {text!r}")
    return Rectangle(*vals)


def _grid_axes(window: Window, h: float):
    if h <= 0:
        raise ValueError("h must be positive")
    x0, y0, x1, y1 = window.bbox
    nx = max(1, math.ceil((x1 - x0) / h - 1e-9))
    ny = max(1, math.ceil((y1 - y0) / h - 1e-9))
    return np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1)


def _grid_values(f, xs, ys, alpha=(0, 0)) -> np.ndarray:
    if hasattr(f, "grid"):
        return f.grid(xs, ys, alpha)
    if alpha != (0, 0):
        raise ValueError("derivatives of plain callables are not available on grids")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.asarray(f(X, Y), dtype=float) * np.ones_like(X)


def _point_values(f, x, y) -> np.ndarray:
    if hasattr(f, "grid"):
        return f(np.column_stack([x, y]))
    return np.asarray(f(x, y), dtype=float) * np.ones_like(x)


def field_gradient(f, x, y) -> np.ndarray:
    """Gradient at points; exact for realizations, central differences otherwise."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if hasattr(f, "gradient"):
        return f.gradient(np.column_stack([x, y]))
    s = _FD_STEP * max(1.0, float(np.max(np.abs(np.concatenate([x, y])), initial=1.0)))
    gx = (_point_values(f, x + s, y) - _point_values(f, x - s, y)) / (2 * s)
    gy = (_point_values(f, x, y + s) - _point_values(f, x, y - s)) / (2 * s)
    return np.column_stack([gx, gy])


def _hessian_norm(f, x, y) -> np.ndarray:
    if hasattr(f, "hessian"):
        H = f.hessian(np.column_stack([x, y]))
        return np.linalg.norm(H, ord=2, axis=(-2, -1))
    s = 1e-4
    g1 = field_gradient(f, x + s, y)
    g0 = field_gradient(f, x - s, y)
    g3 = field_gradient(f, x, y + s)
    g2 = field_gradient(f, x, y - s)
    H = np.stack([(g1 - g0) / (2 * s), (g3 - g2) / (2 * s)], axis=-2)
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    return np.linalg.norm(H, ord=2, axis=(-2, -1))


@dataclass(frozen=True)
class NodalCurveSet:
    """Segments of a polyline approximation of ``{f = 0}`` inside a window.

    ``cells`` holds the ``(i, j)`` grid cell of each segment, ``edges`` the
    two cell edges (0 bottom, 1 right, 2 top, 3 left) it joins and
    ``params`` the linear-interpolation parameters along those edges.
    ``clipped`` marks segments cut by a disk boundary.
    """

    segments: np.ndarray  # (K, 2, 2)
    cells: np.ndarray
    edges: np.ndarray
    params: np.ndarray
    clipped: np.ndarray
    window: Window
    spacing: Tuple[float, float]
    grid_shape: Tuple[int, int]

    @property
    def h(self) -> float:
        return max(self.spacing)

    @property
    def lengths(self) -> np.ndarray:
        d = self.segments[:, 1] - self.segments[:, 0]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def midpoints(self) -> np.ndarray:
        return self.segments.mean(axis=1)

    @property
    def length(self) -> float:
        return float(self.lengths.sum())

    def __len__(self):
        return len(self.segments)

    def weighted(self, phi: Optional[Callable] = None) -> float:
        """Midpoint rule for ``int phi dH_1`` over the polyline."""
        if phi is None:
            return self.length
        mid = self.midpoints
        w = np.asarray(phi(mid[:, 0], mid[:, 1]), dtype=float) * np.ones(len(mid))
        return float(np.sum(w * self.lengths))

    def boundary_fraction(self) -> float:
        """Share of segments lying in cells that touch the window boundary."""
        if len(self) == 0:
            return 0.0
        nx, ny = self.grid_shape
        if isinstance(self.window, Disk):
            return float(np.mean(self.clipped))
        i, j = self.cells[:, 0], self.cells[:, 1]
        edge = (i == 0) | (j == 0) | (i == nx - 1) | (j == ny - 1)
        return float(np.mean(edge))

    def to_rows(self):
        """``(x1, y1, x2, y2, len)`` per segment."""
        L = self.lengths
        for (p, q), l in zip(self.segments, L):
            yield float(p[0]), float(p[1]), float(q[0]), float(q[1]), float(l)


def _clip_to_disk(P, Q, disk: Disk):
    """Clip segments ``P -> Q`` to the closed disk; returns new endpoints, keep mask, clipped mask."""
    c = np.array([disk.cx, disk.cy])
    d = Q - P
    f = P - c
    a = np.sum(d * d, axis=1)
    b = 2 * np.sum(f * d, axis=1)
    cc = np.sum(f * f, axis=1) - disk.r**2
    disc = b * b - 4 * a * cc
    ok = (disc > 0) & (a > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    a_safe = np.where(a > 0, a, 1.0)
    lo = np.clip((-b - sq) / (2 * a_safe), 0.0, 1.0)
    hi = np.clip((-b + sq) / (2 * a_safe), 0.0, 1.0)
    keep = ok & (hi > lo)
    clipped = keep & ((lo > 0) | (hi < 1))
    newP = P + lo[:, None] * d
    newQ = P + hi[:, None] * d
    return newP, newQ, keep, clipped


def extract_nodal(f, window: Window, h: float) -> NodalCurveSet:
    """Marching squares on an ``h``-grid with linear interpolation along edges.

    Grid values that are exactly zero are nudged to ``1e-12 * max|f|``
    before sign classification.  Cells with four sign changes are resolved
    by the sign of ``f`` at the cell centre.
    """
    xs, ys = _grid_axes(window, h)
    V = _grid_values(f, xs, ys).copy()
    amp = float(np.max(np.abs(V)))
    zero = V == 0
    if zero.any():
        if amp == 0:
            raise DegenerateGrid("field vanishes at every grid vertex")
        V[zero] = ZERO_NUDGE * amp
    pos = V > 0
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    v = [V[:-1, :-1], V[1:, :-1], V[1:, 1:], V[:-1, 1:]]
    s = [pos[:-1, :-1], pos[1:, :-1], pos[1:, 1:], pos[:-1, 1:]]
    cross = np.stack([s[0] != s[1], s[1] != s[2], s[2] != s[3], s[3] != s[0]], axis=-1)
    ncross = cross.sum(axis=-1)

    def _t(a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(a != b, a / (a - b), 0.5)

    # edge parameters measured in +x / +y direction from the lower/left corner
    T = np.stack([_t(v[0], v[1]), _t(v[1], v[2]), _t(v[3], v[2]), _t(v[0], v[3])], axis=-1)

    def edge_point(i, j, e, t):
        x = xs[i]
        y = ys[j]
        px = np.select([e == 0, e == 1, e == 2, e == 3], [x + t * hx, x + hx, x + t * hx, x])
        py = np.select([e == 0, e == 1, e == 2, e == 3], [y, y + t * hy, y + hy, y + t * hy])
        return np.column_stack([px, py])

    ii, jj, ea, eb = [], [], [], []
    # ordinary cells: the two crossed edges
    ci, cj = np.nonzero(ncross == 2)
    cr = cross[ci, cj]
    first = np.argmax(cr, axis=1)
    second = 3 - np.argmax(cr[:, ::-1], axis=1)
    ii.append(ci); jj.append(cj); ea.append(first); eb.append(second)
    # saddle cells
    si, sj = np.nonzero(ncross == 4)
    if len(si):
        cx = xs[si] + hx / 2
        cy = ys[sj] + hy / 2
        cv = _point_values(f, cx, cy)
        cv = np.where(cv == 0, ZERO_NUDGE * amp, cv)
        joined = (cv > 0) == pos[si, sj]  # corner 0 and 2 connect through the centre
        e1a = np.where(joined, 0, 3)
        e1b = np.where(joined, 1, 0)
        e2a = np.where(joined, 2, 1)
        e2b = np.where(joined, 3, 2)
        ii += [si, si]; jj += [sj, sj]; ea += [e1a, e2a]; eb += [e1b, e2b]
    I = np.concatenate(ii).astype(np.int64)
    J = np.concatenate(jj).astype(np.int64)
    EA = np.concatenate(ea).astype(np.int8)
    EB = np.concatenate(eb).astype(np.int8)
    order = np.lexsort((EA, J, I))
    I, J, EA, EB = I[order], J[order], EA[order], EB[order]
    TA = T[I, J, EA]
    TB = T[I, J, EB]
    P = edge_point(I, J, EA, TA)
    Q = edge_point(I, J, EB, TB)
    clipped = np.zeros(len(I), dtype=bool)
    if isinstance(window, Disk):
        P, Q, keep, clipped = _clip_to_disk(P, Q, window)
        I, J, EA, EB, TA, TB, P, Q, clipped = (
            a[keep] for a in (I, J, EA, EB, TA, TB, P, Q, clipped)
        )
    return NodalCurveSet(
        segments=np.stack([P, Q], axis=1),
        cells=np.column_stack([I, J]),
        edges=np.column_stack([EA, EB]),
        params=np.column_stack([TA, TB]),
        clipped=clipped,
        window=window,
        spacing=(float(hx), float(hy)),
        grid_shape=(len(xs) - 1, len(ys) - 1),
    )


def nodal_length(f, window: Window, h: float) -> float:
    return extract_nodal(f, window, h).length


def weighted_gamma(f, phi: Optional[Callable], window: Window, h: float) -> float:
    """``int_{Z_f} phi dH_1`` from the extracted polyline (phi evaluated at midpoints)."""
    return extract_nodal(f, window, h).weighted(phi)


def coarea_gamma(f, phi: Optional[Callable], window: Window, h: float, eps: Optional[float] = None) -> float:
    """Co-area estimate ``(1/2 eps) int 1(|f| <= eps) phi |grad f|`` by a cell-centre Riemann sum.

    ``eps`` defaults to ``5 h max|grad f|`` so the band is several cells wide.
    """
    xs, ys = _grid_axes(window, h)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    cx = xs[:-1] + hx / 2
    cy = ys[:-1] + hy / 2
    X, Y = np.meshgrid(cx, cy, indexing="ij")
    if hasattr(f, "grid"):
        V = f.grid(cx, cy)
        G = np.hypot(f.grid(cx, cy, (1, 0)), f.grid(cx, cy, (0, 1)))
    else:
        V = _grid_values(f, cx, cy)
        g = field_gradient(f, X.ravel(), Y.ravel())
        G = np.hypot(g[:, 0], g[:, 1]).reshape(X.shape)
    inside = window.contains(X, Y)
    if eps is None:
        eps = 5 * h * float(np.max(G[inside]))
    band = inside & (np.abs(V) <= eps)
    w = np.ones_like(V) if phi is None else np.asarray(phi(X, Y), float) * np.ones_like(V)
    return float(np.sum((w * G)[band]) * hx * hy / (2 * eps))


@dataclass(frozen=True)
class NodalObservable:
    length: float
    weighted_integral: float
    regular_margin: float
    boundary_fraction: float = 0.0


def observe(f, curves: NodalCurveSet, phi: Optional[Callable] = None) -> NodalObservable:
    """Length, weighted integral and regularity margin ``min |grad f|`` at segment midpoints."""
    if len(curves):
        mid = curves.midpoints
        g = field_gradient(f, mid[:, 0], mid[:, 1])
        margin = float(np.min(np.hypot(g[:, 0], g[:, 1])))
    else:
        margin = math.inf
    return NodalObservable(
        length=curves.length,
        weighted_integral=curves.weighted(phi),
        regular_margin=margin,
        boundary_fraction=curves.boundary_fraction(),
    )


def low_margin_threshold(f, curves: NodalCurveSet, factor: float = 10.0):
    """``(margin, threshold)`` with ``threshold = factor * h * |Hess f|`` at the worst midpoint.

    The Hessian is taken where the gradient is smallest: there the level
    curve bends fastest relative to the grid.
    """
    if len(curves) == 0:
        return math.inf, 0.0
    mid = curves.midpoints
    g = field_gradient(f, mid[:, 0], mid[:, 1])
    gn = np.hypot(g[:, 0], g[:, 1])
    i = int(np.argmin(gn))
    H = float(_hessian_norm(f, mid[i:i + 1, 0], mid[i:i + 1, 1])[0])
    return float(gn[i]), factor * curves.h * H
