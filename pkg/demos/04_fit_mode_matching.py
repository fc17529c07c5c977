# %% [markdown]
# # Fitting the mode-matching efficiency
#
# Visibility is monotone in eta_m, so a one-dimensional golden-section
# search on the squared residuals recovers it from (p, V) points.

# %%
import numpy as np

from spdchom import REFERENCE_SETUP, FitProblem, fit_eta_m
from spdchom.hom import VisibilityPoint, visibility_many
from spdchom.tables import FIT_P_GRID

clean = visibility_many(FIT_P_GRID, REFERENCE_SETUP)

# %%
exact = fit_eta_m(FitProblem([VisibilityPoint(p, v) for p, v in zip(FIT_P_GRID, clean)], REFERENCE_SETUP))
print(exact)

# %% [markdown]
# With 0.004 of Gaussian noise per point the estimate scatters by about
# 5e-4 and mostly lands inside [0.9848, 0.9888].

# %%
fits = []
for seed in range(30):
    noisy = clean + np.random.default_rng(seed).normal(0.0, 0.004, clean.size)
    points = [VisibilityPoint(p, v, 0.004) for p, v in zip(FIT_P_GRID, noisy)]
    fits.append(fit_eta_m(FitProblem(points, REFERENCE_SETUP, weighting="inverse-variance")).eta_m)
fits = np.array(fits)
print(f"mean {fits.mean():.5f}, sd {fits.std(ddof=1):.5f}, "
      f"in band {np.mean((fits >= 0.9848) & (fits <= 0.9888)):.0%}")
