"""Three views of one trend: a weighted line, a smoothing spline and a modal curve.

Run with ``python3 demos/02_trend_shapes.py``.
"""

# %%
import numpy as np

from kintrends.modal import count_local_maxima, modal_regression, weighted_kde_grid
from kintrends.spline import fit_spline, sample_curve
from kintrends.wls import wls_fit

rng = np.random.default_rng(4)
u = np.sort(rng.uniform(5.0, 7.3, 70))
w = rng.integers(20, 400, u.size).astype(float)
truth = 0.55 - 0.06 * (u - 6.0) + 0.03 * np.sin(4.0 * u)
v = truth + rng.normal(0.0, 0.4, u.size) / np.sqrt(w)

# %% [markdown]
# Weighted least squares treats the variance of each point as inversely
# proportional to its weight.

# %%
line = wls_fit(u, v, w)
lo, hi = line.ci95
print(f"slope {line.beta1:+.4f}, 95% CI [{lo:+.4f}, {hi:+.4f}], p={line.p_value:.2g} {line.stars}")

# %% [markdown]
# The spline penalty is picked by generalized cross-validation on a
# log-spaced grid. Effective degrees of freedom sit between 2 (a line) and
# the number of distinct abscissae (interpolation).

# %%
spline = fit_spline(u, v, w)
curve = sample_curve(spline, 9)
print(f"eta={spline.eta:.3g}, effective df={spline.effective_df:.2f}")
print(curve.assign(truth=0.55 - 0.06 * (curve.u - 6.0) + 0.03 * np.sin(4.0 * curve.u)).round(3).to_string(index=False))

# %% [markdown]
# The modal curve follows the most likely value in each column of a
# weighted kernel density. Wider kernels merge local peaks.

# %%
grid = weighted_kde_grid(u, v, w, bandwidth=0.75, n_u=300, n_v=300)
modal = modal_regression(grid)
print(f"Silverman factor for these weights: {grid.silverman:.3f} (n_eff={grid.n_eff:.1f})")
print(modal.iloc[::50].round(3).to_string(index=False))
for bw in (0.1, 0.3, 0.75, 2.0):
    g = weighted_kde_grid(u, v, w, bandwidth=bw, n_u=100, n_v=200)
    peaks = np.mean([count_local_maxima(col) for col in g.conditional])
    print(f"bandwidth {bw:>4}: mean peaks per column {peaks:.2f}")
