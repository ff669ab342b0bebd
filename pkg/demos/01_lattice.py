"""Lattice points on circles and how evenly they spread in angle."""

# %%
import numpy as np

from arwaves.lattice import (
    admissible_sequence,
    angular_measure,
    enumerate_lattice,
    gaussian_prime_angles,
    kolmogorov_distance,
)

# %% [markdown]
# Points of Z^2 on the circle of radius sqrt(n).  The count follows from the
# prime factorization: only primes 1 mod 4 contribute.

# %%
for n in (5, 25, 65, 1105):
    fs = enumerate_lattice(n)
    print(f"n={n:5d}  N_n={fs.cardinality:3d}  omega={fs.omega}")

# %%
fs = enumerate_lattice(25)
print("points of 25:", sorted(fs.points))

# %% [markdown]
# Angles of the Gaussian primes above the split primes generate every
# lattice angle by signed sums.

# %%
angles, _ = gaussian_prime_angles(1105)
print("base angles for 1105:", np.round(angles, 6))

# %% [markdown]
# The Kolmogorov distance to the uniform law on the circle shrinks slowly as
# the number of points grows.

# %%
for n in (25, 65, 1105, 5 * 13 * 17 * 29 * 37):
    d = kolmogorov_distance(angular_measure(enumerate_lattice(n)))
    print(f"n={n:8d}  D={d:.4f}")

# %%
seq = admissible_sequence(200, 0.3)
print(f"{len(seq)} admissible n <= 200, first ten: {seq[:10]}")
