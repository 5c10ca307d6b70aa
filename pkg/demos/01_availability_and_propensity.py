"""Availability versus propensity on simulated cities.

Cities are drawn so that the share of people with family nearby falls with
log-population while the propensity to meet family, when available, is the
same everywhere. The observed interaction rate then falls with city size,
and dividing by availability removes the trend.

Run with ``python3 demos/01_availability_and_propensity.py``.
"""

# %%
import numpy as np

from kintrends import ALPHA_O
from kintrends.availability import bin_proportions, fit_binned_nb
from kintrends.estimators import city_estimates
from kintrends.generative import generate_survey, model_availability, model_interaction, synthetic_cities
from kintrends.wls import wls_fit

params = synthetic_cities(n_cities=40, seed=1, stratum_size=400)
interaction = generate_survey(params, seed=1)
availability = generate_survey(params, seed=2)
print(f"{len(params.locations)} cities, {len(interaction)} interaction respondents")

# %% [markdown]
# The availability survey only reports binned counts of nearby relatives.
# A negative binomial fitted to the national bin shares turns each bin into
# a probability of having at least k relatives nearby.

# %%
props = bin_proportions(availability["availability_bin"], availability["weight"])
fit = fit_binned_nb(props)
print("bin shares :", np.round(props, 3))
print("fitted     :", np.round(fit.bin_masses(), 3), f"(r={fit.r:.2f}, q={fit.q:.3f})")

# %%
est = city_estimates(interaction, availability, [ALPHA_O], ks=(1,), fit=fit)
p = {g: loc.log_population for g, loc in params.locations.items()}
est["p"] = est["location_id"].map(p)

for quantity in ("f", "phi", "lambda"):
    rows = est[est["quantity"] == quantity]
    res = wls_fit(rows["p"], rows["value"], rows["weight"])
    print(f"{quantity:>6} vs log10 P: slope {res.beta1:+.4f} (se {res.se1:.4f}) {res.stars}")

# %% [markdown]
# The model values give the same picture without sampling noise. With a
# constant propensity, the interaction rate is just availability times it.

# %%
g_small, g_large = min(p, key=p.get), max(p, key=p.get)
for g in (g_small, g_large):
    f_m, phi_m = model_interaction(params, g, ALPHA_O), model_availability(params, g)
    print(f"city {g} (p={p[g]:.2f}): f={f_m:.3f} phi={phi_m:.3f} lambda={f_m / phi_m:.3f}")
