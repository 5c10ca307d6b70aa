import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kintrends.core import ALPHA_SOCIAL, Location
from kintrends.diagnostics import (
    DiagnosticError,
    binned_means,
    call_statistic,
    call_table,
    column_index,
    column_moments,
    coverage_table,
    nonresponse_ratio,
    nonresponse_regressions,
    nonresponse_table,
    ranking_table,
    respondents_per_capita,
    weighted_zscore,
)
from kintrends.modal import weighted_kde_grid


def test_respondents_per_capita():
    assert respondents_per_capita(30, 300_000) == pytest.approx(1e-4)
    with pytest.raises(DiagnosticError):
        respondents_per_capita(3, 0)


def test_flat_coverage_line():
    pops = np.logspace(np.log10(3e5), 7, 25).round().astype(int)
    locations = {f"{i:05d}": Location(f"{i:05d}", int(p)) for i, p in enumerate(pops)}
    ids = np.concatenate([[g] * int(round(1e-4 * loc.population)) for g, loc in locations.items()])
    table = coverage_table(pd.DataFrame({"location_id": ids}), locations)
    assert np.allclose(table["mu"], 1e-4, rtol=2e-2)
    assert (table["respondents"] == np.round(1e-4 * pops)).all()


def test_nonresponse_ratio():
    assert nonresponse_ratio(0.3, 0.4) == pytest.approx(0.75)
    with pytest.raises(DiagnosticError):
        nonresponse_ratio(0.3, 0.0)


def test_nonresponse_table_unweighted_and_skips_zero_h(caplog):
    locations = {"a": Location("a", 100_000), "b": Location("b", 1_000_000)}
    resp = pd.DataFrame({
        "location_id": ["a", "a", "a", "b", "b"],
        "c_sex": ["f", "f", "m", "f", "m"],
        "weight": [100.0, 1.0, 1.0, 1.0, 1.0],
        "day_type": "weekday",
        "a_12": [1, 0, 1, 1, 0],
    })
    units = pd.DataFrame({
        "location_id": ["a"] * 4 + ["b"] * 4,
        "characteristic": ["f", "f", "m", "m", "f", "f", "m", "m"],
        "responded": [1, 1, 1, 0, 1, 0, 0, 0],
    })
    table = nonresponse_table(resp, units, ALPHA_SOCIAL, "c_sex", locations).set_index(["location_id", "characteristic"])
    assert table.loc[("a", "f"), "f_u"] == pytest.approx(0.5)  # weights ignored
    assert table.loc[("a", "m"), "ratio"] == pytest.approx(1.0 / 0.5)
    assert table.loc[("b", "f"), "ratio"] == pytest.approx(1.0 / 0.5)
    assert ("b", "m") not in table.index
    assert "response rate zero" in caplog.text


def test_nonresponse_regressions(rng):
    n = 30
    table = pd.DataFrame({
        "characteristic": ["f"] * n + ["m"] * n,
        "p": np.tile(rng.uniform(5, 7, n), 2),
        "ratio": rng.uniform(0.5, 1.5, 2 * n),
        "respondents": rng.integers(5, 50, 2 * n),
    })
    out = nonresponse_regressions(table)
    assert list(zip(out.characteristic, out.method)) == [("f", "wls"), ("f", "ols"), ("m", "wls"), ("m", "ols")]


def test_call_statistic():
    assert call_statistic([1, 1, 1], [1, 2, 3], [1, 1, 1]) == 1.0
    assert call_statistic([1, 1, 1], [2, 2, 2], [1, 0, 1]) == pytest.approx(2 / 3)
    # psi = sum(w e a) / sum(w e) = (1*1 + 1*3) / (1 + 2 + 3)
    assert call_statistic([1, 1, 1], [1, 2, 3], [1, 0, 1]) == pytest.approx(4 / 6)
    with pytest.raises(DiagnosticError):
        call_statistic([1], [0], [1])


@given(st.lists(st.tuples(st.floats(0.01, 10), st.integers(0, 20), st.integers(0, 1)), min_size=1, max_size=20))
def test_call_statistic_bounds(rows):
    w, e, a = map(list, zip(*rows))
    if sum(wi * ei for wi, ei in zip(w, e)) == 0:
        return
    psi = call_statistic(w, e, a)
    assert 0.0 <= psi <= 1.0
    assert psi + (1.0 - psi) == 1.0


def test_call_table_and_bins(small_survey, small_params):
    table = call_table(small_survey, ALPHA_SOCIAL, small_params.locations)
    assert len(table) == len(small_params.locations)
    assert (table["psi"] + table["one_minus_psi"] == 1.0).all()
    bins = binned_means(table, ["psi"], n_bins=4)
    assert list(bins["count"]) == [3, 3, 3, 3]
    assert bins["p"].is_monotonic_increasing


# -- z-scores ----------------------------------------------------------------------


@pytest.fixture
def grid(rng):
    u = rng.uniform(5, 7, 80)
    v = 0.6 - 0.1 * (u - 6) + rng.normal(0, 0.05, 80)
    return weighted_kde_grid(u, v, n_u=50, n_v=60)


def test_zscore_plug_in(grid):
    _, sigma = column_moments(grid)
    u_g = grid.u_axis[20] + 0.1 * grid.du
    i = column_index(grid, u_g)
    assert i == 20
    v_star = grid.v_axis[grid.mode_index[i]]
    z = weighted_zscore([v_star + 2 * sigma[i]], [u_g], grid, [1.0], w_total=10.0)
    assert z[0] == pytest.approx(0.2)


def test_column_moments_by_hand(grid):
    mean, sigma = column_moments(grid)
    j = 7
    m = np.sum(grid.v_axis * grid.conditional[j]) / grid.v_axis.size
    s = np.sqrt(np.sum((grid.v_axis - m) ** 2) / grid.v_axis.size)
    assert mean[j] == pytest.approx(m) and sigma[j] == pytest.approx(s)


def test_column_index_clips(grid):
    assert column_index(grid, -1e9) == 0
    assert column_index(grid, 1e9) == grid.u_axis.size - 1


@pytest.mark.parametrize("c", [0.5, 3.0, 40.0])
def test_ranking_invariant_to_rescaling(rng, c):
    u = rng.uniform(5, 7, 40)
    v = 0.5 + 0.05 * (u - 6) + rng.normal(0, 0.05, 40)
    w = rng.uniform(0.5, 2, 40)
    g1 = weighted_kde_grid(u, v, w, n_u=80, n_v=80)
    g2 = weighted_kde_grid(u, c * v, w, n_u=80, n_v=80)
    z1 = weighted_zscore(v, u, g1, w)
    z2 = weighted_zscore(c * v, u, g2, w)
    assert np.allclose(z1, z2, rtol=1e-6, atol=1e-12)
    assert np.array_equal(np.argsort(-z1), np.argsort(-z2))


def test_ranking_table():
    locations = {g: Location(g, 10**6, name=g.upper()) for g in "abc"}
    z = pd.DataFrame({
        "location_id": list("abc") * 2,
        "k": [1] * 3 + [2] * 3,
        "value": [0.1, 0.2, 0.3, 0.1, 0.2, 0.3],
        "z": [0.5, 0.1, -0.2, 0.1, 0.3, -0.1],
    })
    out = ranking_table(z, locations)
    assert list(out["location_id"]) == ["a", "b", "c"]
    assert list(out["mean_rank"]) == [1.5, 1.5, 3.0]
    assert list(out["name"]) == ["A", "B", "C"]


def test_zscore_errors(grid):
    with pytest.raises(DiagnosticError):
        weighted_zscore([0.5], [6.0], grid, [0.0])
