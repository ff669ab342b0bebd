"""Lattice points on circles and the Gaussian-integer structure behind them.

For n a sum of two squares, ``Lambda_n = {lam in Z^2 : lam_1^2 + lam_2^2 = n}``
is the frequency set of the Laplace eigenspace on the flat torus with
eigenvalue ``4 pi^2 n``.  Its size is ``4 * prod(1 + alpha_i)`` where the
product runs over primes ``p = 1 (mod 4)`` dividing ``n`` with exponent
``alpha_i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import NotRepresentable, OmegaInvalid

__all__ = [
    "FrequencySet",
    "AngularMeasure",
    "factorize",
    "is_sum_of_two_squares",
    "representation_count",
    "enumerate_lattice",
    "gaussian_prime",
    "gaussian_prime_angles",
    "angular_measure",
    "reconstruct_angles",
    "kolmogorov_distance",
    "admissible_sequence",
]

# desk-scale cap; trial division is all we need below it
MAX_N = 10**8


def factorize(n: int) -> Dict[int, int]:
    """Prime factorization of ``n`` by trial division, as ``{p: exponent}``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    out: Dict[int, int] = {}
    while n % 2 == 0:
        out[2] = out.get(2, 0) + 1
        n //= 2
    p = 3
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_sum_of_two_squares(n: int) -> bool:
    """True iff every prime ``q = 3 (mod 4)`` divides ``n`` to an even power."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return all(e % 2 == 0 for p, e in factorize(n).items() if p % 4 == 3)


def representation_count(n: int) -> int:
    """``4 * prod(1 + alpha_i)`` over split primes; 0 when ``n`` is not representable."""
    fac = factorize(n)
    if any(e % 2 for p, e in fac.items() if p % 4 == 3):
        return 0
    return 4 * math.prod(1 + e for p, e in fac.items() if p % 4 == 1)


def gaussian_prime(p: int) -> Tuple[int, int]:
    """Canonical Gaussian prime ``a + bi`` above a prime ``p = 1 (mod 4)``.

    Found by exhaustive scan over ``a <= sqrt(p)``; the representative with
    ``0 < b < a`` is returned, so its argument lies in ``(0, pi/4)``.
    """
    if p % 4 != 1:
        raise ValueError(f"{p} is not congruent to 1 mod 4")
    for a in range(1, math.isqrt(p) + 1):
        b2 = p - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            return (max(a, b), min(a, b))
    raise ValueError(f"{p} is not a prime of the form a^2 + b^2")


@dataclass(frozen=True)
class FrequencySet:
    """The lattice points on the circle of radius ``sqrt(n)``.

    ``omega`` is ``None`` when some split prime has exponent above one;
    ``split_angles`` holds one canonical Gaussian-prime argument per split
    prime (with multiplicity ignored), sorted by prime.
    """

    n: int
    points: Tuple[Tuple[int, int], ...]
    cardinality: int
    omega: Optional[int]
    split_angles: Tuple[float, ...]
    base_angle: float
    factorization: Dict[int, int] = field(default_factory=dict, compare=False)

    @property
    def array(self) -> np.ndarray:
        """Points as an ``(N, 2)`` float array."""
        return np.array(self.points, dtype=float)

    @property
    def split_primes(self) -> Tuple[int, ...]:
        return tuple(sorted(p for p in self.factorization if p % 4 == 1))

    def half(self) -> np.ndarray:
        """One representative from each pair ``{lam, -lam}`` (``(N/2, 2)`` int array)."""
        pts = [p for p in self.points if p[1] > 0 or (p[1] == 0 and p[0] > 0)]
        return np.array(pts, dtype=np.int64)


def _points_by_scan(n: int) -> List[Tuple[int, int]]:
    pts = set()
    for a in range(math.isqrt(n) + 1):
        b2 = n - a * a
        b = math.isqrt(b2)
        if b * b != b2:
            continue
        for x, y in ((a, b), (b, a)):
            for sx, sy in itertools.product((1, -1), repeat=2):
                pts.add((sx * x, sy * y))
    # angular order starting at the positive first axis
    return sorted(pts, key=lambda p: math.atan2(p[1], p[0]) % (2 * math.pi))


def gaussian_prime_angles(n: int) -> Tuple[Tuple[float, ...], float]:
    """Split-prime angles and the base angle of ``n``.

    ``n = 2^a prod p_j^{alpha_j} prod q_j^{2 beta_j}`` factors in ``Z[i]`` as
    ``(1+i)^{2a}``-type contributions times ``P_j conj(P_j)``.  The base angle
    is ``arg((1+i)^a prod q_j^{beta_j}) = a*pi/4`` reduced modulo ``pi/2``
    (rotations by units are accounted for separately).
    """
    if not is_sum_of_two_squares(n):
        raise NotRepresentable(f"{n} is not a sum of two squares")
    fac = factorize(n)
    angles = []
    for p in sorted(fac):
        if p % 4 == 1:
            a, b = gaussian_prime(p)
            angles.append(math.atan2(b, a))
    base = (fac.get(2, 0) * math.pi / 4) % (math.pi / 2)
    return tuple(angles), base


def enumerate_lattice(n: int) -> FrequencySet:
    """All ``lam in Z^2`` with ``|lam|^2 = n``, plus arithmetic metadata."""
    if n < 1 or n > MAX_N:
        raise ValueError(f"n must lie in [1, {MAX_N}], got {n}")
    if not is_sum_of_two_squares(n):
        raise NotRepresentable(f"{n} is not a sum of two squares")
    fac = factorize(n)
    pts = _points_by_scan(n)
    split_exps = [e for p, e in fac.items() if p % 4 == 1]
    omega = len(split_exps) if all(e == 1 for e in split_exps) else None
    angles, base = gaussian_prime_angles(n)
    return FrequencySet(
        n=n,
        points=tuple(pts),
        cardinality=len(pts),
        omega=omega,
        split_angles=angles,
        base_angle=base,
        factorization=fac,
    )


@dataclass(frozen=True)
class AngularMeasure:
    """Uniform probability on the directions ``lam / sqrt(n)``."""

    atoms: np.ndarray  # angles in [0, 2 pi)
    weights: np.ndarray

    def __post_init__(self):
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def unit_vectors(self) -> np.ndarray:
        return np.column_stack([np.cos(self.atoms), np.sin(self.atoms)])


def angular_measure(fs: FrequencySet) -> AngularMeasure:
    pts = fs.array / math.sqrt(fs.n)
    ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
    w = np.full(len(ang), 1.0 / len(ang))
    return AngularMeasure(atoms=ang, weights=w)


def reconstruct_angles(fs: FrequencySet) -> np.ndarray:
    """Directions of ``Lambda_n`` rebuilt from the Gaussian-prime decomposition.

    Every ``lam_1 + i lam_2`` equals a unit times ``(1+i)^a`` times
    ``prod P_j^{g_j} conj(P_j)^{alpha_j - g_j}`` times a rational integer, so its
    argument is ``pi*nu/2 + sum_j (2 g_j - alpha_j) theta_j + theta``.
    Returns sorted angles in ``[0, 2 pi)``; with all ``alpha_j = 1`` the
    coefficients ``2 g_j - 1`` are exactly the signs ``eta_j``.
    """
    exps = [fs.factorization[p] for p in fs.split_primes]
    thetas = np.array(fs.split_angles)
    out = []
    for gs in itertools.product(*[range(e + 1) for e in exps]):
        coef = np.array([2 * g - e for g, e in zip(gs, exps)], dtype=float)
        phase = float(coef @ thetas) if len(thetas) else 0.0
        for nu in range(4):
            out.append(math.pi * nu / 2 + phase + fs.base_angle)
    return np.sort(np.mod(out, 2 * np.pi))


def kolmogorov_distance(m: AngularMeasure) -> float:
    """Exact sup over arcs of ``|mu(arc) - length(arc) / 2pi|``.

    For an atomic measure the supremum is approached by closed arcs whose
    endpoints are atoms (excess mass) or open arcs between atoms (excess
    length), so an O(K^2) scan over atom pairs is exact.
    """
    if len(m.atoms) == 0:
        raise ValueError("empty measure")
    two_pi = 2 * np.pi
    ang = np.mod(np.asarray(m.atoms, float), two_pi)
    order = np.argsort(ang)
    ang, w = ang[order], np.asarray(m.weights, float)[order]
    # merge coincident atoms
    uniq, inv = np.unique(np.round(ang, 13), return_inverse=True)
    ang = np.array([ang[inv == k][0] for k in range(len(uniq))])
    w = np.bincount(inv, weights=w)
    K = len(ang)
    cum = np.concatenate([[0.0], np.cumsum(np.concatenate([w, w]))])
    best = 0.0
    for i in range(K):
        j = np.arange(i, i + K)
        L = np.mod(ang[j % K] - ang[i], two_pi) / two_pi
        closed = cum[j + 1] - cum[i]
        best = max(best, float(np.max(closed - L)))
        # open arcs strictly between atom i and atom j (j > i)
        if K > 1:
            opened = closed[1:] - w[i] - w[j[1:] % K]
            best = max(best, float(np.max(L[1:] - opened)))
        # full circle minus the single point ang[i]
        best = max(best, float(w[i]))
    return min(best, 1.0)


def admissible_sequence(limit: int, kappa: float) -> List[int]:
    """All ``2 <= n <= limit`` that are sums of two squares with ``N_n >= log(n)^kappa``."""
    if not 0 < kappa < math.log(2) / 2:
        raise ValueError(f"kappa must lie in (0, log(2)/2), got {kappa}")
    out = []
    for n in range(2, limit + 1):
        N = representation_count(n)
        if N and N >= math.log(n) ** kappa:
            out.append(n)
    return out


def omega_or_raise(fs: FrequencySet) -> int:
    if fs.omega is None:
        raise OmegaInvalid(
            f"n={fs.n}: a split prime has exponent > 1 ({fs.factorization})"
        )
    return fs.omega
