import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.interpolate import make_smoothing_spline

from kintrends.spline import (
    ExtrapolationWarning,
    eta_grid,
    evaluate,
    fit_spline,
    gcv_score,
    merge_duplicates,
    sample_curve,
)


@pytest.fixture
def data(rng):
    u = np.sort(rng.uniform(5, 7.3, 40))
    v = 0.5 - 0.1 * (u - 6) + 0.05 * np.sin(3 * u) + rng.normal(0, 0.02, 40)
    w = rng.uniform(0.5, 2.0, 40)
    return u, v, w


@pytest.mark.parametrize("eta", [1e-4, 1e-2, 1.0])
def test_matches_scipy_smoothing_spline(data, eta):
    u, v, w = data
    fit = fit_spline(u, v, w, eta=eta)
    ref = make_smoothing_spline(u, v, w=w, lam=eta)
    grid = np.linspace(u[0], u[-1], 301)
    assert np.allclose(fit(grid), ref(grid), atol=1e-8)
    assert np.allclose(fit(grid, 1), ref.derivative()(grid), atol=1e-6)


def test_edf_and_rss_monotone_in_eta(data):
    u, v, w = data
    fits = [fit_spline(u, v, w, eta=e) for e in eta_grid(u, w)[::5]]
    edf = [f.effective_df for f in fits]
    rss = [f.weighted_rss for f in fits]
    assert np.all(np.diff(edf) <= 1e-9)
    assert np.all(np.diff(rss) >= -1e-12)
    assert edf[0] < u.size + 1e-6 and edf[-1] > 2 - 1e-6


def test_large_eta_tends_to_wls_line(data):
    u, v, w = data
    fit = fit_spline(u, v, w, eta=1e12)
    b1, b0 = np.polyfit(u, v, 1, w=np.sqrt(w))
    assert np.allclose(fit.values, b0 + b1 * u, atol=1e-6)


def test_gcv_chooses_grid_minimum(data):
    u, v, w = data
    fit = fit_spline(u, v, w)
    scores = [fit_spline(u, v, w, eta=e).gcv_score for e in eta_grid(u, w)]
    assert fit.gcv_score == pytest.approx(min(scores))
    assert gcv_score(10, 1.0, 10.0) == np.inf


def test_duplicate_merge():
    x, y, wm = merge_duplicates([1, 2, 2, 3], [1.0, 2.0, 4.0, 3.0], [1, 1, 3, 1])
    assert list(x) == [1, 2, 3]
    assert y[1] == pytest.approx(3.5) and wm[1] == 4
    u = [0, 1, 1, 2, 3, 4]
    v = [0, 1, 3, 2, 1, 0]
    a = fit_spline(u, v, eta=0.1)
    b = fit_spline([0, 1, 2, 3, 4], [0, 2, 2, 1, 0], [1, 2, 1, 1, 1], eta=0.1)
    assert np.allclose(a.values, b.values)


def test_derivatives_by_finite_differences(data):
    u, v, w = data
    fit = fit_spline(u, v, w)
    x = np.linspace(u[1], u[-2], 50)
    h = 1e-5
    assert np.allclose(fit(x, 1), (fit(x + h) - fit(x - h)) / (2 * h), atol=1e-5)
    assert np.allclose(fit(x, 2), (fit(x + h, 1) - fit(x - h, 1)) / (2 * h), atol=1e-4)


def test_continuity_at_knots(data):
    u, v, w = data
    fit = fit_spline(u, v, w, eta=1e-3)
    k = fit.knots[1:-1]
    for nu in (0, 1, 2):
        assert np.allclose(fit(k - 1e-9, nu), fit(k + 1e-9, nu), atol=1e-5)
    assert fit.second_derivs[0] == 0 and fit.second_derivs[-1] == 0


@given(st.floats(-5.0, 5.0), st.floats(0.1, 5.0))
def test_affine_equivariance(a, b):
    u = np.linspace(0, 1, 12)
    v = np.cos(4 * u)
    f1 = fit_spline(u, v, eta=1e-3)
    f2 = fit_spline(u, a + b * v, eta=1e-3)
    assert np.allclose(f2.values, a + b * f1.values, atol=1e-9)


def test_extrapolation_is_linear_and_warns(data):
    u, v, w = data
    fit = fit_spline(u, v, w)
    with pytest.warns(ExtrapolationWarning):
        y = evaluate(fit, [u[-1] + 1, u[-1] + 2])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        slope = evaluate(fit, u[-1] + 1, 1)
    assert y[1] - y[0] == pytest.approx(slope)


def test_errors():
    with pytest.raises(ValueError):
        fit_spline([1, 2, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        fit_spline([1, 2, 3, 4], [1, 2, 3, 4], [1, 0, 1, 1])
    with pytest.raises(ValueError):
        fit_spline([1, 2, 3, 4], [1, 2, 3, 4], eta="aic")


def test_sample_curve(data):
    u, v, w = data
    curve = sample_curve(fit_spline(u, v, w), 11)
    assert list(curve.columns) == ["u", "v"] and len(curve) == 11
