import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from kintrends.core import ALPHA_CARE, ALPHA_O, ActivityDay, Location, Stratum, ValidationError
from kintrends.generative import (
    ModelParams,
    _positive_nb,
    bin_counts,
    count_distribution_enumerated,
    count_pmf,
    count_pmf_enumerated,
    generate_survey,
    joint_probability,
    model_availability,
    model_interaction,
    model_kappa,
    model_propensity,
    synthetic_cities,
)

probs = st.floats(0.0, 1.0, allow_nan=False)


@given(probs, probs)
def test_joint_probability_normalised(kappa, phi):
    total = sum(joint_probability(a, b, kappa, phi) for a in (0, 1) for b in (0, 1))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert joint_probability(1, 0, kappa, phi) == 0.0


def test_joint_probability_rejects_bad_input():
    with pytest.raises(ValueError):
        joint_probability(2, 0, 0.5, 0.5)
    with pytest.raises(ValueError):
        joint_probability(0, 0, 1.5, 0.5)


@given(st.integers(0, 120), probs, probs)
def test_count_pmf_sums_to_one(s, kappa, phi):
    total = sum(count_pmf(y, s, kappa, phi) for y in range(s + 1))
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("s", [51, 200, 5000])
@pytest.mark.parametrize("rate", [0.0, 1e-3, 0.37, 1.0])
def test_count_pmf_log_branch_matches_scipy_binom(s, rate):
    ys = np.unique(np.linspace(0, s, 25).astype(int))
    mine = np.array([count_pmf(int(y), s, rate, 1.0) for y in ys])
    assert np.allclose(mine, stats.binom.pmf(ys, s, rate), rtol=1e-9, atol=1e-300)


@given(st.integers(0, 6), probs, probs)
def test_enumeration_matches_closed_form(s, kappa, phi):
    brute = count_distribution_enumerated(s, kappa, phi)
    assert brute.sum() == pytest.approx(1.0)
    for y in range(s + 1):
        assert count_pmf_enumerated(y, s, kappa, phi) == pytest.approx(count_pmf(y, s, kappa, phi), abs=1e-12)


def test_count_pmf_bad_y():
    with pytest.raises(ValueError):
        count_pmf(5, 4, 0.5, 0.5)


def _tiny_params(**kw):
    c = Stratum(("x",))
    return ModelParams(
        locations={"g": Location("g", 1000)},
        stratum_names=("s",),
        kappa={("g", c, ActivityDay("04")): 0.2, ("g", c, ActivityDay("12")): 0.5},
        phi={("g", c): 0.6},
        strata_sizes={("g", c): 10},
        weights={("g", c): 100.0},
        **kw,
    )


def test_model_params_validation():
    c = Stratum(("x",))
    base = dict(locations={"g": Location("g", 10)}, stratum_names=("s",), phi={("g", c): 0.5},
                strata_sizes={("g", c): 5}, weights={("g", c): 2.0})
    with pytest.raises(ValidationError):
        ModelParams(kappa={("g", c, ActivityDay("care")): 0.2}, **base)
    with pytest.raises(ValidationError):
        ModelParams(kappa={("g", c, ActivityDay("04", "weekend")): 0.2}, **base)
    with pytest.raises(ValueError):
        ModelParams(kappa={("g", c, ActivityDay("04")): 1.2}, **base)


def test_model_kappa_combines_independent_codes():
    p = _tiny_params()
    cell = ("g", Stratum(("x",)))
    assert model_kappa(p, cell, ALPHA_CARE) == pytest.approx(0.2)
    assert model_kappa(p, cell, ALPHA_O) == pytest.approx(1 - 0.8 * 0.5)
    assert model_kappa(p, cell, ActivityDay("any", "weekend")) == pytest.approx(2 / 7 * 0.6)
    assert model_interaction(p, "g", ALPHA_O) == pytest.approx(0.6 * 0.6)
    assert model_availability(p, "g") == pytest.approx(0.6)
    assert model_propensity(p, "g", ALPHA_O) == pytest.approx(0.6)


def test_model_expectations_are_population_weighted(small_params):
    g = sorted(small_params.locations)[0]
    cells = [c for c in small_params.cells() if c[0] == g]
    q = np.array([small_params.weights[c] * small_params.strata_sizes[c] for c in cells])
    phi = np.array([small_params.phi[c] for c in cells])
    assert model_availability(small_params, g) == pytest.approx(q @ phi / q.sum())


def test_bin_counts():
    labels = bin_counts(np.array([0, 1, 5, 6, 10, 11, 15, 16, 20, 21, 500]))
    assert list(labels) == ["0", "1-5", "1-5", "6-10", "6-10", "11-15", "11-15", "16-20", "16-20", "21+", "21+"]


def test_positive_nb_conditional_mean():
    rng = np.random.default_rng(0)
    x = _positive_nb(rng, 200_000, 2.0, 0.3)
    assert x.min() >= 1
    mean = stats.nbinom.mean(2.0, 0.3) / (1 - stats.nbinom.pmf(0, 2.0, 0.3))
    assert x.mean() == pytest.approx(mean, rel=0.01)


def test_generate_survey_structure(small_params, small_survey):
    s = small_survey
    assert len(s) == sum(small_params.strata_sizes.values())
    assert s.attrs["rng"]["seed"] == 7
    key = s["location_id"] + "|" + s["c_sex"] + "|" + s["c_age"]
    for (g, c) in small_params.cells():
        rows = s[key == f"{g}|{c.label}"]
        assert len(rows) == small_params.strata_sizes[(g, c)]
        assert np.all(rows["weight"] == small_params.weights[(g, c)])
    for code in ("04", "11", "12"):
        assert np.all(s[f"t_{code}"][s[f"a_{code}"] == 0] == 0)
        assert np.all(s[f"a_{code}"][s["available"] == 0] == 0)
    assert np.array_equal(s["availability_bin"] == "0", s["available"] == 0)
    assert set(s["day_type"]) <= {"weekday", "weekend"}


def test_generate_survey_deterministic_and_order_free(small_params):
    a = generate_survey(small_params, 3)
    b = generate_survey(small_params, 3)
    pd.testing.assert_frame_equal(a, b)
    assert not generate_survey(small_params, 4).equals(a)
    # a single city drawn alone gives the same rows as in the full draw
    g = sorted(small_params.locations)[3]
    keep = {k for k in small_params.strata_sizes if k[0] == g}
    sub = ModelParams(
        locations={g: small_params.locations[g]},
        stratum_names=small_params.stratum_names,
        kappa={k: v for k, v in small_params.kappa.items() if k[0] == g},
        phi={k: small_params.phi[k] for k in keep},
        strata_sizes={k: small_params.strata_sizes[k] for k in keep},
        weights={k: small_params.weights[k] for k in keep},
    )
    alone = generate_survey(sub, 3)
    pd.testing.assert_frame_equal(alone, a[a["location_id"] == g].reset_index(drop=True))


def test_synthetic_cities_calibrated_and_linear():
    p = synthetic_cities(n_cities=20, seed=1, phi_at_p6=0.6, phi_slope=-0.08)
    for g, loc in p.locations.items():
        q = sum(p.weights[c] * p.strata_sizes[c] for c in p.cells() if c[0] == g)
        assert q == pytest.approx(loc.population)
        phis = [p.phi[c] for c in p.cells() if c[0] == g]
        assert np.mean(phis) == pytest.approx(0.6 - 0.08 * (loc.log_population - 6), abs=1e-12)
    assert all(len(g) == 5 for g in p.locations)
