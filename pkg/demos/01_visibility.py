# %% [markdown]
# # HOM visibility of a multi-pair source
#
# A two-mode squeezed vacuum passes through lossy arms, an imperfect mode
# overlap and a balanced splitter onto two threshold detectors. Multi-pair
# emission fills in the dip, so the visibility falls as the mean pair
# number p grows.

# %%
import numpy as np

from spdchom import REFERENCE_N_MAX, REFERENCE_SETUP, SourceParams, TruncationConfig
from spdchom import coincidences, visibility, visibility_curve
from spdchom.tables import NUMERICS_ETA_M, NVSV_P_GRID

print(REFERENCE_SETUP)

# %% [markdown]
# ## Coincidence probabilities at one operating point
#
# `cc_min` is the zero-delay rate, `cc_mean` the rate with the photons made
# distinguishable by a long delay.

# %%
source = SourceParams.from_p(0.01)
pair = coincidences(source, REFERENCE_SETUP)
print(f"lambda = {source.lam:.5f}")
print(f"cc_min = {pair.cc_min:.4e}, cc_mean = {pair.cc_mean:.4e}, V = {pair.visibility:.4f}")

# %% [markdown]
# ## Visibility versus p
#
# The default truncation keeps the V error below 1e-9. With the pair
# number cut at five, the values match the published table; past p ~ 0.5
# the higher pair numbers pull V lower still.

# %%
converged = visibility_curve(NVSV_P_GRID, REFERENCE_SETUP)
cut = visibility_curve(NVSV_P_GRID, REFERENCE_SETUP, n_max=REFERENCE_N_MAX)
print(f"{'p':>7} {'V (n<=5)':>9} {'V':>9}")
for a, b in zip(cut, converged):
    print(f"{a.p:7g} {a.v:9.4f} {b.v:9.4f}")

# %% [markdown]
# ## Sensitivity to the mode overlap
#
# A 0.1 % change in eta_m moves V by about 0.2 %. That is why eta_m is the
# parameter worth fitting.

# %%
grid = np.geomspace(1e-4, 2e-2, 6)
for eta_m in NUMERICS_ETA_M:
    setup = REFERENCE_SETUP.with_eta_m(eta_m)
    vs = [visibility(SourceParams.from_p(p), setup) for p in grid]
    print(f"eta_m={eta_m:.4f}: " + " ".join(f"{v:.4f}" for v in vs))

# %% [markdown]
# ## Truncation
#
# The pair-number distribution is geometric; each extra level adds a
# factor lambda^2 of probability.

# %%
heavy = SourceParams.from_p(2.0)
for n_max in (3, 5, 10, 20, 40, 60):
    v = visibility(heavy, REFERENCE_SETUP, TruncationConfig(n_max=n_max))
    print(f"p=2, n_max={n_max:2d}: V = {v:.6f}")
