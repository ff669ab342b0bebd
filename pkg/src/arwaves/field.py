"""Gaussian random waves with finite spectrum.

A realization is stored in real form over one representative ``k`` of each
pair ``{lam, -lam}``::

    T(t) = sum_k A_k cos(2 pi <k, t>) + B_k sin(2 pi <k, t>)

with ``A_k, B_k`` i.i.d. ``N(0, 2/N)``.  This is the same field as
``N^-1/2 sum_lam a_lam e_lam(t)`` with ``a_lam`` standard complex normal and
``a_{-lam} = conj(a_lam)``; the pointwise variance is exactly 1 and the
covariance is ``r_n``.

Random numbers come from numpy's Philox4x64 counter-based generator keyed by
``SeedSequence(seed)``, so substreams (``SeedSequence([seed, i])``) are
reproducible independently of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .covariance import CovarianceKernel
from .errors import UnsupportedOrder
from .lattice import FrequencySet

__all__ = [
    "RNG_ALGORITHM",
    "make_rng",
    "derive_seed",
    "FieldRealization",
    "DirectionSample",
    "sample_arw",
    "eval_field",
    "eval_gradient",
    "translated_field",
    "sample_directions",
    "empirical_kernel",
    "optimality_experiment",
]

RNG_ALGORITHM = "numpy.random.Philox (Philox4x64-10) keyed by SeedSequence"
_CHUNK = 1 << 15


def make_rng(seed, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional substream path."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, stream)])
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *stream: int) -> int:
    """64-bit child seed for a substream, e.g. one Monte Carlo trial."""
    a, b = np.random.SeedSequence([int(seed) & (2**64 - 1), *map(int, stream)]).generate_state(2)
    return (int(a) << 32) | int(b)


@dataclass(frozen=True)
class FieldRealization:
    """One sampled wave ``sum_k A_k cos(2 pi <k,t>) + B_k sin(2 pi <k,t>)``."""

    wave_vectors: np.ndarray  # (M, 2), one per +- pair
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    seed: Optional[int] = None
    rescaled: bool = False
    n: Optional[int] = None
    shift: Optional[np.ndarray] = None

    def __post_init__(self):
        for a in (self.wave_vectors, self.cos_coeffs, self.sin_coeffs):
            a.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.wave_vectors.shape[1]

    @property
    def amplitude(self) -> float:
        """``sum |A_k| + |B_k|``, an upper bound on ``sup |T|``."""
        return float(np.sum(np.abs(self.cos_coeffs) + np.abs(self.sin_coeffs)))

    def complex_coefficients(self) -> dict:
        """``{lam: a_lam}`` in the normalisation ``T = N^-1/2 sum a_lam e_lam``.

        Satisfies ``a_{-lam} = conj(a_lam)``.
        """
        N = 2 * len(self.wave_vectors)
        out = {}
        for k, A, B in zip(self.wave_vectors, self.cos_coeffs, self.sin_coeffs):
            c = math.sqrt(N) * complex(A, -B) / 2
            key = tuple(float(v) for v in k)
            out[key] = c
            out[tuple(-v for v in key)] = c.conjugate()
        return out

    def partial(self, alpha: Sequence[int], t) -> np.ndarray:
        """``d^alpha T(t)`` for points ``t`` of shape ``(..., 2)``."""
        alpha = tuple(int(a) for a in alpha)
        order = sum(alpha)
        if order > 4:
            raise UnsupportedOrder(f"|alpha| = {order} exceeds 4")
        t = np.asarray(t, dtype=float)
        shape = t.shape[:-1]
        flat = t.reshape(-1, self.dim)
        w = 2 * np.pi * self.wave_vectors
        fac = np.prod(w ** np.array(alpha), axis=1)
        # d^a of A cos + B sin  is  Re((A - iB) (i)^|a| w^a e^{i theta})
        c = (self.cos_coeffs - 1j * self.sin_coeffs) * fac * (1j) ** order
        out = np.empty(len(flat))
        for s in range(0, len(flat), _CHUNK):
            theta = flat[s:s + _CHUNK] @ w.T
            out[s:s + _CHUNK] = np.cos(theta) @ c.real - np.sin(theta) @ c.imag
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    def __call__(self, t):
        return self.partial((0, 0), t)

    def gradient(self, t) -> np.ndarray:
        return np.stack([self.partial((1, 0), t), self.partial((0, 1), t)], axis=-1)

    def hessian(self, t) -> np.ndarray:
        a = self.partial((2, 0), t)
        b = self.partial((1, 1), t)
        c = self.partial((0, 2), t)
        return np.stack([np.stack([a, b], -1), np.stack([b, c], -1)], -2)

    def grid(self, xs, ys, alpha=(0, 0)) -> np.ndarray:
        """``d^alpha T`` on the tensor grid ``xs x ys`` (shape ``(len(xs), len(ys))``).

        Separable: one complex matrix product over the spectrum.
        """
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        w = 2 * np.pi * self.wave_vectors
        order = sum(alpha)
        fac = np.prod(w ** np.array(alpha), axis=1)
        c = (self.cos_coeffs - 1j * self.sin_coeffs) * fac * (1j) ** order
        ex = np.exp(1j * np.outer(w[:, 0], xs))  # (M, nx)
        ey = np.exp(1j * np.outer(w[:, 1], ys))  # (M, ny)
        return ((c[:, None] * ex).T @ ey).real


def sample_arw(fs: FrequencySet, seed: int, rescaled: bool = False) -> FieldRealization:
    """Arithmetic random wave ``T_n`` (or ``T~_n`` when ``rescaled``)."""
    half = fs.half().astype(float)
    if rescaled:
        half = half / math.sqrt(fs.n)
    rng = make_rng(seed)
    N = fs.cardinality
    z = rng.standard_normal((len(half), 2)) * math.sqrt(2.0 / N)
    return FieldRealization(
        wave_vectors=half,
        cos_coeffs=z[:, 0].copy(),
        sin_coeffs=z[:, 1].copy(),
        seed=int(seed),
        rescaled=rescaled,
        n=fs.n,
    )


def eval_field(f: FieldRealization, t):
    return f(t)


def eval_gradient(f: FieldRealization, t):
    return f.gradient(t)


def translated_field(f: FieldRealization, tau) -> FieldRealization:
    """Realization of ``t -> f(t + tau)``, by rotating each coefficient pair."""
    tau = np.asarray(tau, dtype=float)
    phi = 2 * np.pi * (f.wave_vectors @ tau)
    cp, sp = np.cos(phi), np.sin(phi)
    A, B = f.cos_coeffs, f.sin_coeffs
    shift = tau if f.shift is None else f.shift + tau
    return replace(
        f,
        cos_coeffs=A * cp + B * sp,
        sin_coeffs=B * cp - A * sp,
        shift=shift,
    )


@dataclass(frozen=True)
class DirectionSample:
    dim: int
    directions: np.ndarray
    seed: Optional[int] = None


def sample_directions(d: int, N: int, seed) -> DirectionSample:
    """``N`` i.i.d. uniform unit vectors in ``R^d`` (normalised Gaussians)."""
    if d < 2 or N < 1:
        raise ValueError("need d >= 2 and N >= 1")
    g = make_rng(seed).standard_normal((N, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    g.setflags(write=False)
    return DirectionSample(dim=d, directions=g, seed=int(seed))


def empirical_kernel(ds: DirectionSample) -> CovarianceKernel:
    return CovarianceKernel(ds.directions, label=f"R_{len(ds.directions)}")


def _scan_sup(k: CovarianceKernel, r_min: float, r_max: float, h: float) -> float:
    """Max of ``k`` over grid nodes ``h Z^d`` in ``r_min <= |t| <= r_max`` (half-space by evenness)."""
    d = k.dim
    M = int(math.floor(r_max / h))
    ax = np.arange(-M, M + 1) * h
    best = -np.inf
    if d == 2:
        for j in range(0, M + 1):
            y = j * h
            xs = ax if j > 0 else ax[ax > 0]
            r2 = xs * xs + y * y
            xs = xs[(r2 >= r_min * r_min) & (r2 <= r_max * r_max)]
            if len(xs) == 0:
                continue
            pts = np.column_stack([xs, np.full(len(xs), y)])
            best = max(best, float(np.max(k(pts))))
        return best
    lead = np.stack(np.meshgrid(*([ax] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1)
    for row in lead:
        pts = np.column_stack([np.repeat(row[None], len(ax), 0), ax])
        r2 = np.sum(pts**2, axis=1)
        pts = pts[(r2 >= r_min**2) & (r2 <= r_max**2)]
        if len(pts):
            best = max(best, float(np.max(k(pts))))
    return best


def optimality_experiment(
    d: int,
    N_range: Sequence[int],
    a: float,
    epsilon: float,
    trials: int,
    seed: int,
    spacing: Optional[float] = None,
) -> list:
    """Monte Carlo probability that ``R_N`` has no ``epsilon``-almost period in ``1 <= |t| <= e^(aN)``.

    For each ``N`` and trial, directions are drawn afresh and ``R_N`` is
    scanned on a grid of spacing ``1/N``, the covering scale of the
    probabilistic argument.  A trial counts as "no almost period" when the scanned
    maximum is at most ``1 - epsilon``.  Returns one dict per ``N``.
    """
    rows = []
    for N in N_range:
        R = math.exp(a * N)
        h = spacing if spacing is not None else 1.0 / N
        per_axis = 2 * R / h
        if per_axis > 1e4:
            raise ValueError(f"N={N}: {per_axis:.0f} grid points per axis exceeds the desk guard 1e4")
        sups = []
        for i in range(trials):
            ds = sample_directions(d, N, derive_seed(seed, N, i))
            sups.append(_scan_sup(empirical_kernel(ds), 1.0, R, h))
        sups = np.array(sups)
        rows.append({
            "N": int(N),
            "radius": R,
            "spacing": h,
            "trials": int(trials),
            "prob_no_almost_period": float(np.mean(sups <= 1 - epsilon)),
            "mean_sup": float(np.mean(sups)),
            "max_sup": float(np.max(sups)),
        })
    return rows
