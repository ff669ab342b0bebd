"""Constructive almost periods of trigonometric kernels.

The central routine is :func:`dirichlet_pigeonhole`, a literal
implementation of the pigeonhole proof of simultaneous Dirichlet
approximation: integer points are visited shell by shell, the fractional
parts of ``<mu_k, x>`` are bucketed into an ``m``-grid on the unit cube, and
either a point whose fractional parts are all within ``1/m`` of an integer is
found directly, or two points share a bucket and their difference works.

Any such integer ``x`` is an almost period of ``K(t) = mean cos(2 pi <g_k, t>)``
with ``sup_t |K(t+x) - K(t)| <= mean_k |exp(2 pi i <g_k, x>) - 1| <= 2 pi / m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from .bessel import bessel_j
from .covariance import CovarianceKernel, LinearisedKernel, rescaled_kernel
from .errors import NotFoundWithinBox
from .lattice import FrequencySet

__all__ = [
    "AlmostPeriod",
    "SupCertificate",
    "PigeonholeInfo",
    "dist_to_integers",
    "dirichlet_pigeonhole",
    "phase_bound",
    "derivative_phase_bound",
    "almost_period_of_kernel",
    "certified_sup_difference",
    "smallest_almost_period_scan",
    "smallest_linearised_scan",
    "lower_bound_witness",
    "linearised_almost_period",
    "m_for_epsilon",
    "dirichlet_bound",
    "linearised_bound",
]

_BATCH = 4096
_CHUNK = 1 << 15


def dist_to_integers(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.round(x))


@dataclass(frozen=True)
class SupCertificate:
    """Rigorous upper bound on ``sup |D(t)|`` over a region from a grid sweep.

    ``lipschitz_bound`` is a Lipschitz constant of ``D`` itself, and every
    point of the region lies within ``h sqrt(d) / 2`` of a grid node.
    """

    grid_spacing: float
    grid_sup: float
    lipschitz_bound: float
    certified_sup: float
    dim: int
    region: str
    alpha: Tuple[int, ...] = ()


@dataclass(frozen=True)
class AlmostPeriod:
    tau: np.ndarray
    epsilon_certified: float
    epsilon_target: float
    norm: float
    method: str  # "pigeonhole" | "exhaustive" | "linearised"
    m: Optional[int] = None
    sub_unit: bool = False
    correlation: Optional[float] = None
    max_phase_distance: Optional[float] = None
    certificate: Optional[SupCertificate] = None
    derivative_bounds: Dict[Tuple[int, ...], float] = field(default_factory=dict)
    provenance: Dict[str, object] = field(default_factory=dict)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.tau)))

    def to_dict(self) -> dict:
        out = {
            "tau": [float(v) for v in np.atleast_1d(self.tau)],
            "norm": self.norm,
            "sup_norm": self.sup_norm,
            "epsilon_certified": self.epsilon_certified,
            "epsilon_target": self.epsilon_target,
            "method": self.method,
            "m": self.m,
            "sub_unit": self.sub_unit,
            "correlation": self.correlation,
            "max_phase_distance": self.max_phase_distance,
            "derivative_bounds": {
                ",".join(map(str, a)): v for a, v in self.derivative_bounds.items()
            },
            "provenance": dict(self.provenance),
        }
        if self.certificate is not None:
            c = self.certificate
            out["certificate"] = {
                "grid_spacing": c.grid_spacing,
                "grid_sup": c.grid_sup,
                "lipschitz_bound": c.lipschitz_bound,
                "certified_sup": c.certified_sup,
                "region": c.region,
            }
        return out


@dataclass(frozen=True)
class PigeonholeInfo:
    x: np.ndarray
    kind: str  # "direct" | "collision"
    shell: int
    points_visited: int
    constraints: int
    max_distance: float


def _shell(R: int, d: int) -> np.ndarray:
    """Integer points with sup-norm ``R``, one from each pair ``{x, -x}``.

    The kept representative has its last nonzero coordinate positive.  Points
    are ordered by Euclidean norm, ties broken lexicographically from the
    last coordinate.
    """
    if R == 0:
        return np.zeros((0, d), dtype=np.int64)
    if d == 1:
        return np.array([[R]], dtype=np.int64)
    parts = []
    inner = np.arange(-(R - 1), R)
    full = np.arange(-R, R + 1)
    for k in range(d):
        axes = [inner] * k + [np.array([-R, R])] + [full] * (d - k - 1)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        parts.append(grid)
    pts = np.concatenate(parts).astype(np.int64)
    nz = pts != 0
    last = np.where(nz.any(axis=1), d - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
    pts = pts[pts[np.arange(len(pts)), last] > 0]
    keys = [pts[:, i] for i in range(d)] + [np.sum(pts * pts, axis=1)]
    return pts[np.lexsort(keys)]


def _reduce_constraints(mus: np.ndarray) -> np.ndarray:
    """Drop zero vectors, duplicates and negatives: they impose the same constraint."""
    keep, seen = [], set()
    for v in mus:
        if not np.any(v):
            continue
        key = tuple(np.round(v, 12))
        neg = tuple(np.round(-v, 12))
        if key in seen or neg in seen:
            continue
        seen.add(key)
        keep.append(v)
    if not keep:
        return np.zeros((0, mus.shape[1]))
    return np.array(keep)


def dirichlet_pigeonhole(
    mus,
    m: int,
    max_box: Optional[int] = None,
    max_points: int = 5_000_000,
    full_output: bool = False,
):
    """Nonzero ``x in Z^d`` with ``dist(<mu_k, x>, Z) <= 1/m`` for every ``k``.

    Parameters
    ----------
    mus : array_like, shape (N, d) or (N,)
        The vectors ``mu_k``; a 1-d input means ``d = 1``.
    m : int
        Grid parameter, ``m >= 2``.
    max_box : int, optional
        Largest sup-norm shell to visit.  Defaults to the theorem's bound
        ``m^(N'/d)``, where ``N'`` counts constraints after dropping
        duplicates and ``+-`` pairs.
    max_points : int
        Budget on visited points (memory guard for the bucket table).
    full_output : bool
        Also return a :class:`PigeonholeInfo`.

    Raises
    ------
    NotFoundWithinBox
        If ``max_box`` or the point budget is exhausted first.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    mus = np.asarray(mus, dtype=float)
    if mus.ndim == 1:
        mus = mus[:, None]
    if mus.ndim != 2 or len(mus) == 0:
        raise ValueError("need at least one vector")
    d = mus.shape[1]
    cons = _reduce_constraints(mus)
    n_cons = len(cons)
    theorem_box = math.ceil(m ** (n_cons / d) - 1e-9) if n_cons else 1
    if max_box is None:
        max_box = theorem_box
    tol = 1.0 / m
    seen: Dict[bytes, np.ndarray] = {}
    visited = 0
    hit = None
    R = 0
    while hit is None:
        if R >= max_box or visited >= max_points:
            raise NotFoundWithinBox(
                f"no solution with |x|_inf <= {R} after {visited} points "
                f"(theorem guarantees |x|_inf <= {theorem_box})"
            )
        # batch consecutive shells so that tiny 1-d shells do not dominate
        batch, shells = [], []
        count = 0
        if d == 1:
            hi = min(R + _BATCH, max_box)
            batch.append(np.arange(R + 1, hi + 1, dtype=np.int64)[:, None])
            shells.append(np.arange(R + 1, hi + 1))
            count, R = hi - R, hi
        while count < _BATCH and R < max_box:
            R += 1
            pts = _shell(R, d)
            batch.append(pts)
            shells.append(np.full(len(pts), R))
            count += len(pts)
        pts = np.concatenate(batch)
        shell_of = np.concatenate(shells)
        if n_cons == 0:
            hit = (pts[0], "direct", int(shell_of[0]))
            visited += 1
            break
        phase = pts @ cons.T
        frac = phase - np.floor(phase)
        direct = np.all(np.minimum(frac, 1 - frac) <= tol, axis=1)
        cells = np.ascontiguousarray(np.minimum(np.floor(frac * m), m - 1).astype(np.uint16))
        for i in range(len(pts)):
            visited += 1
            if direct[i]:
                hit = (pts[i], "direct", int(shell_of[i]))
                break
            key = cells[i].tobytes()
            prev = seen.get(key)
            if prev is not None:
                cand = pts[i] - prev
                if np.all(dist_to_integers(cons @ cand) <= tol):
                    hit = (cand, "collision", int(shell_of[i]))
                    break
                continue  # rounding at a cell edge; keep searching
            seen[key] = pts[i]
    x, kind, R = hit
    # canonical sign: last nonzero coordinate positive
    nz = np.flatnonzero(x)
    if len(nz) and x[nz[-1]] < 0:
        x = -x
    x = np.asarray(x, dtype=np.int64)
    maxd = float(np.max(dist_to_integers(mus @ x))) if n_cons else 0.0
    if maxd > tol:
        raise AssertionError(f"pigeonhole output failed re-verification: {maxd} > {tol}")
    if full_output:
        return x, PigeonholeInfo(x, kind, R, visited, n_cons, maxd)
    return x


def phase_bound(k: CovarianceKernel, tau) -> float:
    """``mean_k |exp(2 pi i <g_k, tau>) - 1|``: a global bound on ``sup |K(.+tau) - K|``."""
    ph = k.wave_vectors @ np.atleast_1d(np.asarray(tau, float))
    return float(np.mean(2 * np.abs(np.sin(np.pi * ph))))


def derivative_phase_bound(k: CovarianceKernel, tau, alpha: Sequence[int]) -> float:
    """Global bound on ``sup |d^alpha K(.+tau) - d^alpha K|``."""
    g = k.wave_vectors
    ph = g @ np.atleast_1d(np.asarray(tau, float))
    weight = np.prod(np.abs(2 * np.pi * g) ** np.array(alpha), axis=1)
    return float(np.mean(weight * 2 * np.abs(np.sin(np.pi * ph))))


def _ball_grid(radius: float, h: float, d: int, center=None) -> Iterator[np.ndarray]:
    """Chunks of grid nodes ``h Z^d`` whose cells cover the closed ball."""
    reach = radius + h * math.sqrt(d) / 2
    M = int(math.ceil(reach / h))
    ax = np.arange(-M, M + 1) * h
    c = np.zeros(d) if center is None else np.asarray(center, float)
    if d == 1:
        yield (ax[np.abs(ax) <= reach] + c[0])[:, None]
        return
    lead = np.stack(np.meshgrid(*([ax] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1)
    lead = lead[np.sum(lead**2, axis=1) <= reach**2]
    step = max(1, _CHUNK // len(ax))
    for s in range(0, len(lead), step):
        blk = lead[s:s + step]
        pts = np.concatenate(
            [np.repeat(blk, len(ax), axis=0), np.tile(ax, len(blk))[:, None]], axis=1
        )
        pts = pts[np.sum(pts**2, axis=1) <= reach**2]
        yield pts + c


def _cube_grid(h: float, d: int) -> Iterator[np.ndarray]:
    M = int(math.ceil(1.0 / h))
    ax = np.arange(M + 1) * (1.0 / M)
    grid = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), -1).reshape(-1, d)
    for s in range(0, len(grid), _CHUNK):
        yield grid[s:s + _CHUNK]


def certified_sup_difference(
    k: CovarianceKernel,
    tau,
    domain_radius: Optional[float] = None,
    h: float = 0.01,
    alpha: Optional[Sequence[int]] = None,
) -> SupCertificate:
    """Certified upper bound on ``sup |d^alpha K(t+tau) - d^alpha K(t)|``.

    The region is the ball of radius ``domain_radius`` about the origin, or
    the unit cube ``[0, 1]^d`` (the torus fundamental domain) when
    ``domain_radius`` is None.  The difference is ``2 L``-Lipschitz with
    ``L = (2 pi)^(|alpha|+1) max_k |g_k^alpha| |g_k|``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    d = k.dim
    alpha = tuple(alpha) if alpha is not None else (0,) * d
    tau = np.atleast_1d(np.asarray(tau, float))
    g = k.wave_vectors
    L = (2 * np.pi) ** (sum(alpha) + 1) * float(
        np.max(np.prod(np.abs(g) ** np.array(alpha), axis=1) * np.linalg.norm(g, axis=1))
    )
    if domain_radius is None:
        chunks, region = _cube_grid(h, d), "unit-cube"
        h_eff = 1.0 / math.ceil(1.0 / h)
    else:
        chunks, region = _ball_grid(domain_radius, h, d), f"ball:{domain_radius}"
        h_eff = h
    sup = 0.0
    for pts in chunks:
        diff = k.partial(alpha, pts + tau) - k.partial(alpha, pts)
        sup = max(sup, float(np.max(np.abs(diff))))
    lip = 2 * L
    return SupCertificate(
        grid_spacing=h_eff,
        grid_sup=sup,
        lipschitz_bound=lip,
        certified_sup=sup + lip * h_eff * math.sqrt(d) / 2,
        dim=d,
        region=region,
        alpha=alpha,
    )


def _multi_indices(d: int, order: int):
    if d == 1:
        yield (order,)
        return
    for i in range(order + 1):
        for rest in _multi_indices(d - 1, order - i):
            yield (i,) + rest


def almost_period_of_kernel(
    k: CovarianceKernel,
    m: int,
    max_box: Optional[int] = None,
    certify_radius: Optional[float] = None,
    certify_h: float = 0.01,
) -> AlmostPeriod:
    """Pigeonhole almost period ``tau in Z^d`` of ``k`` at precision ``1/m``.

    ``epsilon_certified`` is the global phase bound, which never exceeds
    ``2 pi / m``.  For unit wave vectors the derivative bounds up to order 2
    are recorded as well.  With ``certify_radius`` a grid certificate over
    that ball is attached.
    """
    x, info = dirichlet_pigeonhole(k.wave_vectors, m, max_box=max_box, full_output=True)
    eps = phase_bound(k, x)
    if eps > 2 * np.pi / m + 1e-12:
        raise AssertionError(f"phase bound {eps} exceeds 2pi/m")
    derivs = {}
    for order in (1, 2):
        for a in _multi_indices(k.dim, order):
            derivs[a] = derivative_phase_bound(k, x, a)
    cert = None
    if certify_radius is not None:
        cert = certified_sup_difference(k, x, certify_radius, certify_h)
    return AlmostPeriod(
        tau=x.astype(float),
        epsilon_certified=eps,
        epsilon_target=1.0 / m,
        norm=float(np.linalg.norm(x)),
        method="pigeonhole",
        m=m,
        sub_unit=bool(np.linalg.norm(x) < 1),
        correlation=float(k(x.astype(float))),
        max_phase_distance=info.max_distance,
        certificate=cert,
        derivative_bounds=derivs,
        provenance={
            "kind": info.kind,
            "shell": info.shell,
            "points_visited": info.points_visited,
            "constraints": info.constraints,
        },
    )


def _annulus_points(r0: float, r1: float, h: float) -> np.ndarray:
    """Grid nodes ``h Z^2`` with ``r0 <= |t| < r1`` in the half-plane ``y > 0 or (y = 0, x > 0)``."""
    M = int(math.floor(r1 / h))
    ix = np.arange(-M, M + 1)
    x = ix * h
    rem1 = r1 * r1 - x * x
    ok = rem1 > 0
    ix, x, rem1 = ix[ok], x[ok], rem1[ok]
    jmax = np.floor(np.sqrt(rem1) / h - 1e-12).astype(np.int64)
    jmin = np.ceil(np.sqrt(np.maximum(r0 * r0 - x * x, 0.0)) / h - 1e-12).astype(np.int64)
    jmin = np.where(ix > 0, np.maximum(jmin, 0), np.maximum(jmin, 1))
    counts = np.maximum(jmax - jmin + 1, 0)
    if counts.sum() == 0:
        return np.zeros((0, 2))
    rows = np.repeat(np.arange(len(ix)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = jmin[rows] + offs
    pts = np.column_stack([ix[rows] * h, jj * h])
    r = np.hypot(pts[:, 0], pts[:, 1])
    return pts[(r >= r0) & (r < r1)]


def smallest_almost_period_scan(
    k: CovarianceKernel,
    epsilon: float,
    radius: float,
    h: float,
    r_min: float = 1.0,
    band: float = 1.0,
) -> Optional[AlmostPeriod]:
    """Smallest grid ``tau`` with ``r_min <= |tau| <= radius`` and ``K(tau) > 1 - epsilon``.

    Annuli of width ``band`` are swept outward and the scan stops at the
    first annulus containing a qualifying node, so the returned node has
    minimal norm among all grid nodes in range.  Returns None when nothing
    qualifies.  A grid can step over a narrow peak; ``K`` varies by at most
    ``lipschitz * h / sqrt(2)`` between a node and any point of its cell.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if k.dim != 2:
        raise ValueError("exhaustive scan is implemented for d = 2")
    thresh = 1 - epsilon
    r0 = r_min
    while r0 <= radius:
        last = r0 + band >= radius
        r1 = radius * (1 + 1e-12) if last else r0 + band
        pts = _annulus_points(r0, r1, h)
        if len(pts):
            vals = np.concatenate([k(pts[s:s + _CHUNK]) for s in range(0, len(pts), _CHUNK)])
            good = vals > thresh
            if good.any():
                cand, cv = pts[good], vals[good]
                norms = np.hypot(cand[:, 0], cand[:, 1])
                i = int(np.lexsort((-cv, norms))[0])
                tau = cand[i]
                return AlmostPeriod(
                    tau=tau,
                    epsilon_certified=phase_bound(k, tau),
                    epsilon_target=epsilon,
                    norm=float(norms[i]),
                    method="exhaustive",
                    sub_unit=bool(norms[i] < 1),
                    correlation=float(cv[i]),
                    provenance={
                        "h": h,
                        "radius": radius,
                        "slack": k.lipschitz * h / math.sqrt(2),
                    },
                )
        if last:
            break
        r0 = r1
    return None


def smallest_linearised_scan(
    k: LinearisedKernel, epsilon: float, radius: float, h: float = 1e-3, t_min: float = 1.0
) -> Optional[float]:
    """Smallest grid ``t`` in ``[t_min, radius]`` with ``s(t) > 1 - epsilon``, or None."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    start = math.ceil(t_min / h - 1e-9)
    stop = math.floor(radius / h + 1e-9)
    step = 1 << 16
    for a in range(start, stop + 1, step):
        t = np.arange(a, min(a + step, stop + 1)) * h
        hit = np.nonzero(k(t) > 1 - epsilon)[0]
        if len(hit):
            return float(t[hit[0]])
    return None


def lower_bound_witness(fs: FrequencySet, tau) -> float:
    """``|1 - J_0(2 pi |tau|)| - |r~_n(tau) - J_0(2 pi |tau|)|`` for a rescaled lag ``tau``.

    By the triangle inequality this is a lower bound on ``1 - r~_n(tau)``;
    a value near 1 rules ``tau`` out as a useful almost period.
    """
    tau = np.asarray(tau, dtype=float)
    j0 = bessel_j(0, 2 * np.pi * float(np.linalg.norm(tau)))
    r = rescaled_kernel(fs)(tau)
    return abs(1 - j0) - abs(r - j0)


def linearised_almost_period(k: LinearisedKernel, epsilon: float, max_box: Optional[int] = None) -> AlmostPeriod:
    """Integer ``tau`` with ``sup_t |s(t+tau) - s(t)| <= epsilon``.

    Applies the pigeonhole search to the ``omega`` base angles alone with
    ``m = ceil(2 pi omega / epsilon)``; every ``theta_eta`` is a signed sum
    of them, so ``dist(theta_eta tau, Z) <= epsilon / (2 pi)``.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    w = max(k.omega, 1)
    m = math.ceil(2 * np.pi * w / epsilon)
    if k.omega == 0:
        x, info = np.array([1]), None
    else:
        x, info = dirichlet_pigeonhole(k.base_angles, m, max_box=max_box, full_output=True)
    tau = float(x[0])
    ph = k.eta_frequencies * tau
    eps = float(np.mean(2 * np.abs(np.sin(np.pi * ph))))
    return AlmostPeriod(
        tau=np.array([tau]),
        epsilon_certified=eps,
        epsilon_target=epsilon,
        norm=abs(tau),
        method="linearised",
        m=m,
        sub_unit=abs(tau) < 1,
        correlation=float(k(tau)),
        max_phase_distance=float(np.max(dist_to_integers(ph))),
        provenance={
            "bound": linearised_bound(k.omega, epsilon),
            "kind": info.kind if info else "trivial",
            "points_visited": info.points_visited if info else 0,
        },
    )


def m_for_epsilon(epsilon: float) -> int:
    """Pigeonhole precision ``m = ceil(1/epsilon)`` for a target ``epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return max(2, math.ceil(1 / epsilon - 1e-12))


def dirichlet_bound(N: int, epsilon: float, d: int = 2) -> float:
    """Almost-period size guaranteed by Dirichlet for ``N`` generic frequencies: ``(2 pi / eps)^(N/d)``."""
    return (2 * np.pi / epsilon) ** (N / d)


def linearised_bound(omega: int, epsilon: float) -> float:
    """``(2 pi omega / eps)^omega``."""
    return (2 * np.pi * omega / epsilon) ** omega
