"""Monte Carlo experiments on nodal sets of arithmetic random waves.

Every experiment takes an integer seed and derives one child seed per trial,
so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import spearmanr

from .almost_period import (
    AlmostPeriod,
    almost_period_of_kernel,
    dirichlet_bound,
    linearised_almost_period,
    linearised_bound,
    smallest_almost_period_scan,
    smallest_linearised_scan,
)
from .covariance import linearised_kernel, rescaled_kernel
from .errors import OmegaInvalid, SkippedLowMargin
from .field import FieldRealization, derive_seed, make_rng, sample_arw, translated_field
from .lattice import enumerate_lattice
from .nodal import (
    Disk,
    NodalCurveSet,
    Rectangle,
    Window,
    _clip_to_disk,
    extract_nodal,
    low_margin_threshold,
)

__all__ = [
    "PHI_BANK",
    "phi_bank",
    "ReplicationReport",
    "replication_experiment",
    "replication_sweep",
    "field_replication_check",
    "expected_length_target",
    "expected_length_check",
    "correlation_experiment",
    "variance_trend",
    "compare_models",
]

PHI_BANK = ("const", "coordx", "bump")
HEADLINE_PHI = "bump"


def _window_geometry(window: Window):
    x0, y0, x1, y1 = window.bbox
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    r = window.r if isinstance(window, Disk) else 0.5 * math.hypot(x1 - x0, y1 - y0)
    return cx, cy, r


def phi_bank(window: Window, names: Sequence[str] = PHI_BANK) -> Dict[str, Callable]:
    """Test weights adapted to a window.

    ``const`` is 1, ``coordx`` is ``(x - cx) / r`` and ``bump`` is the smooth
    bump ``exp(1 - 1/(1 - s^2))`` with ``s = |t - c| / r``, which vanishes to
    all orders on the circumscribed circle.
    """
    cx, cy, r = _window_geometry(window)

    def const(x, y):
        return np.ones_like(np.asarray(x, float))

    def coordx(x, y):
        return (np.asarray(x, float) - cx) / r

    def bump(x, y):
        s2 = ((np.asarray(x, float) - cx) ** 2 + (np.asarray(y, float) - cy) ** 2) / r**2
        out = np.zeros_like(s2)
        inside = s2 < 1
        out[inside] = np.exp(1 - 1 / (1 - s2[inside]))
        return out

    table = {"const": const, "coordx": coordx, "bump": bump}
    unknown = set(names) - set(table)
    if unknown:
        raise ValueError(f"unknown test weights {sorted(unknown)}")
    return {k: table[k] for k in names}


@lru_cache(maxsize=64)
def _cached_period(n: int, m: int) -> AlmostPeriod:
    return almost_period_of_kernel(rescaled_kernel(enumerate_lattice(n)), m)


@dataclass
class ReplicationReport:
    n: int
    seed: int
    m: int
    tau: List[float]
    epsilon_certified: float
    correlation: float
    window: str
    h: float
    gamma: Dict[str, float]
    gamma_shifted: Dict[str, float]
    abs_diff: Dict[str, float]
    rel_diff: Dict[str, float]
    hausdorff: float
    margin: float
    margin_threshold: float
    boundary_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 and len(b) == 0:
        return 0.0
    if len(a) == 0 or len(b) == 0:
        return math.inf
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))


def _check_margin(f, curves: NodalCurveSet, label: str):
    margin, thr = low_margin_threshold(f, curves)
    if margin < thr:
        raise SkippedLowMargin(
            f"{label}: regular margin {margin:.3g} below 10 h |Hess| = {thr:.3g}",
            margin=margin,
            threshold=thr,
        )
    return margin, thr


def replication_experiment(
    n: int,
    seed: int,
    m: int,
    window: Optional[Window] = None,
    h: float = 0.005,
    phis: Sequence[str] = PHI_BANK,
    tau=None,
) -> ReplicationReport:
    """Compare nodal functionals of ``T~_n`` and its shift by a pigeonhole almost period.

    Both fields share their coefficients, so the comparison is pathwise.
    ``rel_diff`` divides ``|Gamma(T) - Gamma(T')|`` by ``Gamma_|phi|(T)``.
    Pass ``tau`` to override the almost period (e.g. an exact period).
    """
    fs = enumerate_lattice(n)
    window = window if window is not None else Disk(0.0, 0.0, 2.0)
    if tau is None:
        ap = _cached_period(n, m)
        tau, eps, corr = ap.tau, ap.epsilon_certified, ap.correlation
    else:
        tau = np.asarray(tau, float)
        k = rescaled_kernel(fs)
        eps, corr = float("nan"), float(k(tau))
    f = sample_arw(fs, seed, rescaled=True)
    g = translated_field(f, tau)
    cf = extract_nodal(f, window, h)
    cg = extract_nodal(g, window, h)
    margin, thr = _check_margin(f, cf, "field")
    margin_g, thr_g = _check_margin(g, cg, "shifted field")
    bank = phi_bank(window, phis)
    gam, gam_s, ad, rd = {}, {}, {}, {}
    for name, phi in bank.items():
        a, b = cf.weighted(phi), cg.weighted(phi)
        scale = cf.weighted(lambda x, y, phi=phi: np.abs(phi(x, y)))
        gam[name], gam_s[name] = a, b
        ad[name] = abs(a - b)
        rd[name] = abs(a - b) / scale if scale > 0 else 0.0
    return ReplicationReport(
        n=n,
        seed=int(seed),
        m=m,
        tau=[float(v) for v in tau],
        epsilon_certified=float(eps),
        correlation=float(corr),
        window=str(window),
        h=h,
        gamma=gam,
        gamma_shifted=gam_s,
        abs_diff=ad,
        rel_diff=rd,
        hausdorff=_hausdorff(cf.midpoints, cg.midpoints),
        margin=min(margin, margin_g),
        margin_threshold=max(thr, thr_g),
        boundary_fraction=cf.boundary_fraction(),
    )


def replication_sweep(
    n: int,
    ms: Sequence[int],
    count: int,
    seed: int = 0,
    window: Optional[Window] = None,
    h: float = 0.005,
    phi: str = HEADLINE_PHI,
    max_attempts: Optional[int] = None,
) -> dict:
    """Mean relative ``|Gamma difference|`` per ``m`` over ``count`` coupled seeds.

    Seeds ``seed, seed + 1, ...`` are tried in order; a seed is used only
    when no ``m`` triggers :class:`SkippedLowMargin`, so every ``m`` is
    averaged over the same realizations.  Skipped seeds are listed.
    """
    ms = list(ms)
    max_attempts = max_attempts if max_attempts is not None else 5 * count
    used, skipped = [], []
    per_m = {m: [] for m in ms}
    haus = {m: [] for m in ms}
    s = seed
    while len(used) < count and s < seed + max_attempts:
        try:
            reps = [replication_experiment(n, s, m, window, h) for m in ms]
        except SkippedLowMargin:
            skipped.append(s)
        else:
            used.append(s)
            for m, rep in zip(ms, reps):
                per_m[m].append(rep.rel_diff[phi])
                haus[m].append(rep.hausdorff)
        s += 1
    rows = []
    for m in ms:
        ap = _cached_period(n, m)
        rows.append({
            "m": m,
            "tau_norm": ap.norm,
            "epsilon_certified": ap.epsilon_certified,
            "one_minus_r": 1 - ap.correlation,
            "mean_rel_diff": float(np.mean(per_m[m])) if used else math.nan,
            "median_hausdorff": float(np.median(haus[m])) if used else math.nan,
        })
    return {"n": n, "phi": phi, "h": h, "used_seeds": used, "skipped_seeds": skipped, "rows": rows}


def field_replication_check(
    n: int, m: int, seeds: Sequence[int], radius: float = 3.0, h: float = 0.01
) -> List[dict]:
    """Grid sup of ``|T~(t + tau) - T~(t)|`` on a disk against ``5 sqrt(2 eps_c)``.

    The difference of the shifted and original realization is itself a
    trigonometric sum, evaluated on the grid in one product.
    """
    fs = enumerate_lattice(n)
    ap = _cached_period(n, m)
    bound = 5 * math.sqrt(2 * ap.epsilon_certified)
    M = int(math.floor(radius / h))
    ax = np.arange(-M, M + 1) * h
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    inside = X**2 + Y**2 <= radius**2
    rows = []
    for s in seeds:
        f = sample_arw(fs, s, rescaled=True)
        g = translated_field(f, ap.tau)
        diff = FieldRealization(
            f.wave_vectors, g.cos_coeffs - f.cos_coeffs, g.sin_coeffs - f.sin_coeffs
        )
        sup = float(np.max(np.abs(diff.grid(ax, ax))[inside]))
        rows.append({
            "seed": int(s),
            "sup": sup,
            "bound": bound,
            "ok": sup <= bound,
            "points": int(inside.sum()),
        })
    return rows


def expected_length_target(n: int) -> float:
    """``|Omega| sqrt(E_n) / (2 sqrt 2)`` with ``|Omega| = 1``, ``E_n = 4 pi^2 n``."""
    return math.pi * math.sqrt(n / 2)


def expected_length_check(n: int, trials: int, seed: int, h: Optional[float] = None) -> dict:
    """Monte Carlo mean full-torus nodal length of ``T_n`` against the closed form."""
    fs = enumerate_lattice(n)
    h = h if h is not None else 1 / (40 * math.sqrt(n))
    if h > 1 / (20 * math.sqrt(n)):
        raise ValueError("grid spacing must be at most 1/(20 sqrt n)")
    win = Rectangle(0.0, 0.0, 1.0, 1.0)
    L = np.array([
        extract_nodal(sample_arw(fs, derive_seed(seed, i)), win, h).length for i in range(trials)
    ])
    target = expected_length_target(n)
    mean = float(L.mean())
    return {
        "n": n,
        "N": fs.cardinality,
        "trials": trials,
        "h": h,
        "target": target,
        "mean": mean,
        "stderr": float(L.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan,
        "rel_error": abs(mean - target) / target,
    }


def _torus_lengths(n: int, trials: int, seed: int, h: float, radius: Optional[float]):
    fs = enumerate_lattice(n)
    win = Rectangle(-0.5, -0.5, 0.5, 0.5)
    full, ball = np.empty(trials), np.empty(trials)
    disk = None if radius is None else Disk(0.0, 0.0, radius)
    for i in range(trials):
        c = extract_nodal(sample_arw(fs, derive_seed(seed, i)), win, h)
        full[i] = c.length
        if disk is None:
            ball[i] = full[i]
        else:
            P, Q, keep, _ = _clip_to_disk(c.segments[:, 0], c.segments[:, 1], disk)
            ball[i] = float(np.sum(np.hypot(*(Q - P)[keep].T)))
    return fs, full, ball


def correlation_experiment(
    n: int,
    eps: Optional[float],
    trials: int,
    seed: int,
    h: Optional[float] = None,
    n_boot: int = 2000,
) -> dict:
    """Correlation between full-torus nodal length and the length inside ``B(n^(-1/2 + eps))``.

    The ball is taken in the torus metric around the origin, i.e. the planar
    disk intersected with ``[-1/2, 1/2]^2``.  ``eps=None`` uses the full torus.
    The confidence interval is a percentile bootstrap over trials.
    """
    if n > 5000:
        raise ValueError("n must be at most 5000")
    h = h if h is not None else 1 / (20 * math.sqrt(n))
    radius = None if eps is None else n ** (-0.5 + eps)
    fs, full, ball = _torus_lengths(n, trials, seed, h, radius)
    corr = float(np.corrcoef(full, ball)[0, 1]) if np.std(ball) > 0 else math.nan
    rng = make_rng(seed, 0xB007)
    idx = rng.integers(0, trials, size=(n_boot, trials))
    boots = []
    for row in idx:
        a, b = full[row], ball[row]
        if np.std(a) > 0 and np.std(b) > 0:
            boots.append(np.corrcoef(a, b)[0, 1])
    lo, hi = np.percentile(boots, [2.5, 97.5]) if boots else (math.nan, math.nan)
    E = 4 * math.pi**2 * n
    return {
        "n": n,
        "N": fs.cardinality,
        "eps": eps,
        "radius": radius,
        "trials": trials,
        "h": h,
        "correlation": corr,
        "ci_low": float(lo),
        "ci_high": float(hi),
        "mean_length": float(full.mean()),
        "var_length": float(full.var(ddof=1)),
        "var_reference": E / (512 * fs.cardinality**2),
    }


def variance_trend(ns: Sequence[int], trials: int, seed: int) -> dict:
    """Sample variance of full-torus length for several ``n``; Spearman rank against ``N_n``."""
    rows = []
    for n in ns:
        h = 1 / (20 * math.sqrt(n))
        fs, full, _ = _torus_lengths(n, trials, seed, h, None)
        rows.append({
            "n": n,
            "N": fs.cardinality,
            "var_length": float(full.var(ddof=1)),
            "var_reference": 4 * math.pi**2 * n / (512 * fs.cardinality**2),
        })
    rho = spearmanr([r["N"] for r in rows], [r["var_length"] for r in rows]).correlation
    return {"rows": rows, "spearman": float(rho)}


def compare_models(
    n: int, epsilon: float, scan_radius: float = 50.0, h: float = 0.01, line_radius: float = 1e4
) -> List[dict]:
    """Almost-period bounds and measured scan results for the full and linearised kernels.

    A model whose input is invalid gets a row with ``flag`` set instead of
    raising.
    """
    fs = enumerate_lattice(n)
    k = rescaled_kernel(fs)
    full = smallest_almost_period_scan(k, epsilon, scan_radius, h)
    rows = [{
        "model": "full",
        "n": n,
        "epsilon": epsilon,
        "size": fs.cardinality,
        "bound": dirichlet_bound(fs.cardinality, epsilon),
        "measured": None if full is None else full.norm,
        "pigeonhole_tau": None,
        "flag": "",
    }]
    try:
        lk = linearised_kernel(fs)
    except OmegaInvalid:
        rows.append({
            "model": "linearised",
            "n": n,
            "epsilon": epsilon,
            "size": None,
            "bound": None,
            "measured": None,
            "pigeonhole_tau": None,
            "flag": "OmegaInvalid",
        })
        return rows
    ap = linearised_almost_period(lk, epsilon)
    t = smallest_linearised_scan(lk, epsilon, line_radius, 1e-3)
    rows.append({
        "model": "linearised",
        "n": n,
        "epsilon": epsilon,
        "size": lk.omega,
        "bound": linearised_bound(lk.omega, epsilon),
        "measured": t,
        "pigeonhole_tau": float(ap.tau[0]),
        "flag": "",
    })
    return rows
