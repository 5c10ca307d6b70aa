import warnings

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kintrends.availability import fit_binned_nb
from kintrends.core import ALPHA_O, ALPHA_SOCIAL, ActivityDay
from kintrends.estimators import (
    EstimationError,
    NoInteractorsError,
    PropensityAboveOneWarning,
    UndefinedPropensityError,
    ZeroWeightError,
    availability_rate,
    city_estimates,
    duration,
    effective_propensity,
    family_nonfamily_ratio,
    interaction_rate,
    mle_success_rate,
    national_average_propensity,
)


@pytest.fixture
def toy():
    return pd.DataFrame({
        "respondent_id": ["a", "b", "c", "d"],
        "location_id": ["g1", "g1", "g1", "g2"],
        "weight": [1.0, 2.0, 3.0, 4.0],
        "day_type": ["weekday", "weekend", "weekday", "weekday"],
        "a_12": [1, 0, 0, 1],
        "t_12": [2.0, 0.0, 0.0, 1.0],
        "a_11": [1, 1, 0, 0],
        "t_11": [1.0, 3.0, 0.0, 0.0],
        "a_04": [0, 0, 1, 0],
        "t_04": [0.0, 0.0, 0.5, 0.0],
        "nf_12": [0, 1, 1, 0],
        "nf_11": [0, 0, 0, 1],
        "nf_04": [0, 0, 0, 0],
        "availability_bin": ["0", "1-5", "21+", "6-10"],
    })


@pytest.fixture(scope="module")
def fit():
    return fit_binned_nb([0.30, 0.35, 0.15, 0.10, 0.05, 0.05])


def test_interaction_rate_by_hand(toy):
    g1 = toy[toy.location_id == "g1"]
    assert interaction_rate(g1, ALPHA_SOCIAL) == pytest.approx((1 + 2) / 6)
    assert interaction_rate(g1, ALPHA_O) == pytest.approx(1.0)
    assert interaction_rate(g1, ActivityDay("12", "weekday")) == pytest.approx(1 / 6)
    assert interaction_rate(g1, ActivityDay("social", "weekend")) == pytest.approx(2 / 6)


def test_duration_averages_over_interactors(toy):
    g1 = toy[toy.location_id == "g1"]
    # a: 3 h social (sum of 12 and 11), b: 3 h; weights 1 and 2
    assert duration(g1, ALPHA_SOCIAL) == pytest.approx(3.0)
    assert duration(g1, ActivityDay("12")) == pytest.approx(2.0)
    with pytest.raises(NoInteractorsError):
        duration(g1[g1.respondent_id == "c"], ALPHA_SOCIAL)


def test_family_nonfamily_ratio(toy):
    g1 = toy[toy.location_id == "g1"]
    assert family_nonfamily_ratio(g1, ALPHA_SOCIAL) == pytest.approx((3 / 6) / (5 / 6))


def test_availability_rate_matches_table(toy, fit):
    from kintrends.availability import prob_at_least

    g1 = toy[toy.location_id == "g1"]
    want = (1 * 0 + 2 * prob_at_least("1-5", 2, fit) + 3 * prob_at_least("21+", 2, fit)) / 6
    assert availability_rate(g1, 2, fit) == pytest.approx(want)


def test_effective_propensity():
    assert effective_propensity(0.3, 0.6) == pytest.approx(0.5)
    with pytest.warns(PropensityAboveOneWarning):
        assert effective_propensity(0.7, 0.5) == pytest.approx(1.4)
    with pytest.raises(UndefinedPropensityError):
        effective_propensity(0.1, 0.0)


def test_zero_weight(toy):
    with pytest.raises(ZeroWeightError):
        interaction_rate(toy.assign(weight=0.0), ALPHA_O)


def test_mle_and_national():
    assert mle_success_rate(3, 12) == 0.25
    with pytest.raises(EstimationError):
        mle_success_rate(13, 12)
    assert national_average_propensity([0.2, 0.5], [100, 300]) == pytest.approx(0.425)
    with pytest.raises(EstimationError):
        national_average_propensity([0.2], [0])


@given(st.lists(st.tuples(st.floats(0.01, 100), st.integers(0, 1)), min_size=1, max_size=30),
       st.floats(0.1, 1e3))
def test_rate_scale_invariant_and_bounded(rows, c):
    frame = pd.DataFrame({"weight": [w for w, _ in rows], "day_type": "weekday",
                          "a_12": [a for _, a in rows]})
    f = interaction_rate(frame, ALPHA_SOCIAL)
    assert 0.0 <= f <= 1.0
    assert interaction_rate(frame.assign(weight=frame.weight * c), ALPHA_SOCIAL) == pytest.approx(f, rel=1e-9)


def test_city_estimates_table(toy, fit):
    est = city_estimates(toy, toy, [ALPHA_SOCIAL], (1, 2), fit)
    assert set(est["quantity"]) == {"f", "phi", "lambda", "t", "r"}
    g1 = est[est.location_id == "g1"].set_index(["quantity", "k"])
    f = g1.loc[("f", 0), "value"]
    for k in (1, 2):
        assert g1.loc[("lambda", k), "value"] == pytest.approx(f / g1.loc[("phi", k), "value"])
    assert (est.loc[est.quantity == "f", "weight"].sum()) == pytest.approx(1.0)


def test_city_estimates_flags_gt1(small_survey):
    fit = fit_binned_nb([0.30, 0.35, 0.15, 0.10, 0.05, 0.05])
    frame = small_survey.copy()
    # put everyone in the smallest nonzero bin so phi(3) is small
    frame["availability_bin"] = "1-5"
    with warnings.catch_warnings():
        warnings.simplefilter("error", PropensityAboveOneWarning)
        est = city_estimates(frame, frame, [ALPHA_O], (5,), fit)
    lam = est[est.quantity == "lambda"]
    assert (lam["flag"] == np.where(lam["value"] > 1, "gt1", "")).all()
    assert (lam["flag"] == "gt1").any()


def test_availability_rate_non_increasing_in_k(small_survey, fit):
    g = small_survey[small_survey.location_id == small_survey.location_id.iloc[0]]
    rates = [availability_rate(g, k, fit) for k in range(1, 30)]
    assert np.all(np.diff(rates) <= 1e-15)
    assert rates[0] <= 1.0
