"""Almost periods of covariance kernels by the pigeonhole principle."""

# %%
import numpy as np

from arwaves.almost_period import (
    almost_period_of_kernel,
    certified_sup_difference,
    linearised_almost_period,
    lower_bound_witness,
    smallest_almost_period_scan,
)
from arwaves.covariance import linearised_kernel, rescaled_kernel
from arwaves.lattice import enumerate_lattice

# %% [markdown]
# For n=1105 the 32 wave vectors reduce to 8 independent constraints, and a
# finer grid m forces a longer shift.

# %%
k = rescaled_kernel(enumerate_lattice(1105))
for m in (2, 4, 8):
    ap = almost_period_of_kernel(k, m)
    cert = certified_sup_difference(k, ap.tau, 3.0, 0.01)
    print(
        f"m={m}: tau={ap.tau}  eps_c={ap.epsilon_certified:.4f}  "
        f"r(tau)={ap.correlation:.4f}  grid-certified sup on |t|<=3: {cert.certified_sup:.4f}"
    )

# %% [markdown]
# A brute scan finds the first near-return of the kernel itself.

# %%
hit = smallest_almost_period_scan(rescaled_kernel(enumerate_lattice(5)), 0.5, 10.0, 0.01)
print("first |t| >= 1 with r~_5(t) > 0.5:", hit.tau, f"|t|={hit.norm:.4f}")

# %% [markdown]
# Close to the origin the kernel looks like J0, so short shifts cannot be
# almost periods.  The witness is a certified lower bound on 1 - r(tau).

# %%
fs = enumerate_lattice(1105)
for ang in np.linspace(0, np.pi / 4, 4):
    tau = 5 * np.array([np.cos(ang), np.sin(ang)])
    print(f"angle {ang:.3f}: witness {lower_bound_witness(fs, tau):.4f}")

# %% [markdown]
# The one-dimensional linearised model only needs omega constraints.

# %%
for n in (5, 65, 1105):
    lk = linearised_kernel(enumerate_lattice(n))
    ap = linearised_almost_period(lk, 0.25)
    print(f"n={n}: omega={lk.omega}  tau={ap.tau[0]:g}  eps_c={ap.epsilon_certified:.4f}")
