"""Trigonometric covariance kernels.

A :class:`CovarianceKernel` is ``K(t) = (1/N) sum_k cos(2 pi <g_k, t>)`` for a
finite list of wave vectors ``g_k``.  The arithmetic random wave covariance
``r_n`` uses ``Lambda_n``; its Planck rescaling ``r~_n(t) = r_n(t/sqrt(n))``
uses ``Lambda_n / sqrt(n)``.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .bessel import bessel_j
from .errors import UnsupportedOrder
from .lattice import FrequencySet, omega_or_raise

__all__ = [
    "MAX_ORDER",
    "CovarianceKernel",
    "LinearisedKernel",
    "arw_kernel",
    "rescaled_kernel",
    "eval_kernel",
    "eval_partial",
    "mean_covariance",
    "linearised_kernel",
    "eval_linearised",
    "berry_sup_difference",
]

MAX_ORDER = 4
_CHUNK = 1 << 16


def _trig_phase(order: int, theta: np.ndarray) -> np.ndarray:
    """``Re(i^order * exp(i theta))``."""
    r = order % 4
    if r == 0:
        return np.cos(theta)
    if r == 1:
        return -np.sin(theta)
    if r == 2:
        return -np.cos(theta)
    return np.sin(theta)


class CovarianceKernel:
    """Uniform-weight cosine sum over a set of wave vectors.

    Points are passed as arrays whose last axis has length ``dim``; any
    leading shape is preserved in the output.
    """

    def __init__(self, wave_vectors, label: str = ""):
        g = np.array(wave_vectors, dtype=float)
        if g.ndim == 1:
            g = g[:, None]
        if g.ndim != 2 or len(g) == 0:
            raise ValueError("wave_vectors must be a nonempty (N, d) array")
        g.setflags(write=False)
        self.wave_vectors = g
        self.label = label
        self._freq = 2 * np.pi * g  # precomputed 2 pi g_k

    @property
    def dim(self) -> int:
        return self.wave_vectors.shape[1]

    @property
    def size(self) -> int:
        return self.wave_vectors.shape[0]

    @property
    def weight(self) -> float:
        return 1.0 / self.size

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.wave_vectors, axis=1)))

    @property
    def lipschitz(self) -> float:
        """Global Lipschitz constant ``2 pi max|g_k|``."""
        return 2 * np.pi * self.max_norm

    def _points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.dim == 1 and (t.ndim == 0 or t.shape[-1] != 1):
            t = t[..., None]
        if t.shape[-1] != self.dim:
            raise ValueError(f"points must have last axis {self.dim}, got {t.shape}")
        return t

    def partial(self, alpha: Sequence[int], t) -> np.ndarray:
        """``d^alpha K(t)`` by exact differentiation of every cosine."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or min(alpha) < 0:
            raise ValueError(f"alpha must be {self.dim} nonnegative integers")
        order = sum(alpha)
        if order > MAX_ORDER:
            raise UnsupportedOrder(f"|alpha| = {order} exceeds {MAX_ORDER}")
        t = self._points(t)
        shape = t.shape[:-1]
        flat = t.reshape(-1, self.dim)
        factor = np.prod(self._freq ** np.array(alpha), axis=1) / self.size
        out = np.empty(len(flat))
        for s in range(0, len(flat), _CHUNK):
            theta = flat[s:s + _CHUNK] @ self._freq.T
            out[s:s + _CHUNK] = _trig_phase(order, theta) @ factor
        out = out.reshape(shape)
        return float(out) if out.ndim == 0 else out

    def __call__(self, t):
        return self.partial((0,) * self.dim, t)

    def gradient(self, t) -> np.ndarray:
        return np.stack(
            [self.partial(tuple(int(i == j) for j in range(self.dim)), t)
             for i in range(self.dim)],
            axis=-1,
        )

    def __repr__(self):
        return f"CovarianceKernel(N={self.size}, d={self.dim}{', ' + self.label if self.label else ''})"


def arw_kernel(fs: FrequencySet) -> CovarianceKernel:
    """``r_n(t) = (1/N_n) sum_{lam in Lambda_n} cos(2 pi <lam, t>)``; 1-periodic in each axis."""
    return CovarianceKernel(fs.array, label=f"r_{fs.n}")


def rescaled_kernel(fs: FrequencySet) -> CovarianceKernel:
    """``r~_n(t) = r_n(t / sqrt(n))``: wave vectors on the unit circle."""
    return CovarianceKernel(fs.array / math.sqrt(fs.n), label=f"r~_{fs.n}")


def eval_kernel(k: CovarianceKernel, t):
    return k(t)


def eval_partial(k: CovarianceKernel, alpha, t):
    return k.partial(alpha, t)


def mean_covariance(d: int, t):
    """Isotropic mean covariance ``R(t) = Gamma(nu+1) (pi|t|)^-nu J_nu(2 pi |t|)``, ``nu = d/2 - 1``.

    This is the Fourier transform of the uniform probability on the unit
    sphere of ``R^d``, normalised so that ``R(0) = 1``.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    t = np.asarray(t, dtype=float)
    r = np.linalg.norm(t, axis=-1) if t.ndim else np.abs(t)
    nu = d / 2 - 1
    x = 2 * np.pi * np.asarray(r, float)
    if nu == 0:
        out = bessel_j(0, x)
    else:
        xs = np.where(x > 0, x, 1.0)
        out = np.where(
            x > 0, math.gamma(nu + 1) * (2 / xs) ** nu * bessel_j(nu, xs), 1.0
        )
    return float(out) if np.ndim(out) == 0 else out


class LinearisedKernel:
    """``s_n(t) = (4/N_n) sum_eta cos(2 pi theta_eta t)`` on the real line.

    ``theta_eta = sum_j eta_j theta_j (mod 1)`` over all sign vectors
    ``eta in {-1, 1}^omega``.  Since ``N_n = 2^(omega+2)`` the weight is
    ``2^-omega``.
    """

    def __init__(self, base_angles: Sequence[float]):
        th = np.array(base_angles, dtype=float)
        th.setflags(write=False)
        self.base_angles = th
        signs = np.array(list(itertools.product((1, -1), repeat=len(th))), dtype=float)
        self.signs = signs.reshape(-1, len(th))
        freqs = np.mod(self.signs @ th, 1.0) if len(th) else np.zeros(1)
        freqs.setflags(write=False)
        self.eta_frequencies = freqs

    @property
    def omega(self) -> int:
        return len(self.base_angles)

    @property
    def weight(self) -> float:
        return 1.0 / len(self.eta_frequencies)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty(len(flat))
        w = 2 * np.pi * self.eta_frequencies
        for s in range(0, len(flat), _CHUNK):
            out[s:s + _CHUNK] = np.cos(np.outer(flat[s:s + _CHUNK], w)).mean(axis=1)
        out = out.reshape(t.shape)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"LinearisedKernel(omega={self.omega})"


def linearised_kernel(fs: FrequencySet) -> LinearisedKernel:
    omega_or_raise(fs)
    return LinearisedKernel(fs.split_angles)


def eval_linearised(k: LinearisedKernel, t):
    return k(t)


def berry_sup_difference(k: CovarianceKernel, radius: float = 1.0, h: float = 1e-3):
    """Max of ``|k(t) - J_0(2 pi |t|)|`` over grid points with ``|t| <= radius``.

    Returns ``(sup, argmax)``.  Only the upper half-plane is scanned, using
    evenness of both functions.
    """
    if k.dim != 2:
        raise ValueError("Berry comparison is two-dimensional")
    m = int(math.floor(radius / h + 1e-9))
    xs = np.arange(-m, m + 1) * h
    best, where = -1.0, None
    for j in range(0, m + 1):
        y = j * h
        xr = xs[xs * xs + y * y <= radius * radius + 1e-12]
        if len(xr) == 0:
            continue
        pts = np.column_stack([xr, np.full(len(xr), y)])
        diff = np.abs(k(pts) - bessel_j(0, 2 * np.pi * np.hypot(xr, y)))
        i = int(np.argmax(diff))
        if diff[i] > best:
            best, where = float(diff[i]), pts[i]
    return best, where
