"""City-level sample estimators of interaction, availability, propensity and duration."""

from __future__ import annotations

import warnings
from collections.abc import Iterable, Sequence

import numpy as np
import pandas as pd

from .availability import BinnedFit, at_least_table
from .core import (
    DEFAULT_CATALOG,
    NONFAMILY_PREFIX,
    ActivityCatalog,
    ActivityDay,
    activity_duration,
    activity_indicator,
)


class EstimationError(ValueError):
    pass


class ZeroWeightError(EstimationError):
    pass


class UndefinedPropensityError(EstimationError):
    pass


class NoInteractorsError(EstimationError):
    pass


class PropensityAboveOneWarning(UserWarning):
    pass


def _weighted_mean(w, x):
    w = np.asarray(w, dtype=float)
    total = w.sum()
    if not total > 0:
        raise ZeroWeightError("total weight is zero")
    return float(np.dot(w, x) / total)


def interaction_rate(frame: pd.DataFrame, alpha: ActivityDay, catalog: ActivityCatalog = DEFAULT_CATALOG) -> float:
    """Weighted share of respondents who performed ``alpha`` with family."""
    return _weighted_mean(frame["weight"], activity_indicator(frame, alpha, catalog))


def availability_indicator(frame: pd.DataFrame, k: int, fit: BinnedFit) -> np.ndarray:
    """Per-respondent probability of having at least ``k`` relatives nearby."""
    if "availability_bin" not in frame.columns:
        raise EstimationError("respondents carry no availability_bin")
    bins = frame["availability_bin"]
    if bins.isna().any():
        raise EstimationError("missing availability bins")
    table = at_least_table(fit, k)
    return bins.map(table).to_numpy(dtype=float)


def availability_rate(frame: pd.DataFrame, k: int, fit: BinnedFit) -> float:
    return _weighted_mean(frame["weight"], availability_indicator(frame, k, fit))


def effective_propensity(f: float, phi: float) -> float:
    """``f / phi``; values above 1 are kept and trigger :class:`PropensityAboveOneWarning`."""
    if phi == 0:
        raise UndefinedPropensityError("availability is zero")
    lam = f / phi
    if lam > 1:
        warnings.warn(f"effective propensity {lam:.4g} > 1", PropensityAboveOneWarning, stacklevel=2)
    return lam


def duration(frame: pd.DataFrame, alpha: ActivityDay, catalog: ActivityCatalog = DEFAULT_CATALOG) -> float:
    """Mean hours with family on ``alpha``, averaged over respondents who interacted."""
    a = activity_indicator(frame, alpha, catalog)
    w = frame["weight"].to_numpy(dtype=float) * a
    if not w.sum() > 0:
        raise NoInteractorsError(f"no respondents interacted on {alpha}")
    return float(np.dot(w, activity_duration(frame, alpha, catalog)) / w.sum())


def mle_success_rate(y_hat: int, s: int) -> float:
    if s <= 0:
        raise EstimationError("sample size must be positive")
    if not 0 <= y_hat <= s:
        raise EstimationError(f"count {y_hat} outside [0, {s}]")
    return y_hat / s


def family_nonfamily_ratio(frame: pd.DataFrame, alpha: ActivityDay, catalog: ActivityCatalog = DEFAULT_CATALOG) -> float:
    f_fam = interaction_rate(frame, alpha, catalog)
    nf = activity_indicator(frame, alpha, catalog, prefix=NONFAMILY_PREFIX)
    f_nonfam = _weighted_mean(frame["weight"], nf)
    if f_nonfam == 0:
        raise EstimationError("no non-family interaction")
    return f_fam / f_nonfam


def national_average_propensity(values: Sequence[float], sample_sizes: Sequence[float]) -> float:
    """Sample-size weighted average of city propensities."""
    values = np.asarray(values, dtype=float)
    w = np.asarray(sample_sizes, dtype=float)
    if values.size == 0:
        raise EstimationError("no cities")
    if np.any(w <= 0):
        raise EstimationError("sample sizes must be positive")
    return float(w @ values / w.sum())


# -- per-city tables ---------------------------------------------------------------

ESTIMATE_COLUMNS = ["location_id", "quantity", "alpha", "k", "value", "n", "n_phi", "weight", "flag"]


def city_estimates(
    interaction_frame: pd.DataFrame,
    availability_frame: pd.DataFrame | None,
    alphas: Iterable[ActivityDay],
    ks: Iterable[int] = (1, 2, 3),
    fit: BinnedFit | None = None,
    catalog: ActivityCatalog = DEFAULT_CATALOG,
) -> pd.DataFrame:
    """Long table of ``f``, ``phi``, ``lambda``, ``t`` and ``r`` per city.

    ``n`` is the interaction-survey sample size, ``n_phi`` the availability
    survey sample size. ``weight`` is the WLS weight for the row: the sample
    share for ``f``, ``t``, ``r`` and ``phi``, and the propagation-of-error
    weight for ``lambda`` (see :func:`kintrends.wls.lambda_variance_weight`).
    ``flag`` marks ``lambda > 1``.
    """
    from .wls import lambda_variance_weight

    alphas = list(alphas)
    ks = list(ks)
    has_nonfamily = any(c.startswith(NONFAMILY_PREFIX) for c in interaction_frame.columns)
    groups = dict(tuple(interaction_frame.groupby("location_id", sort=True)))
    avail_groups = {}
    if availability_frame is not None:
        avail_groups = dict(tuple(availability_frame.groupby("location_id", sort=True)))
    cities = sorted(set(groups) & set(avail_groups)) if avail_groups else sorted(groups)
    n_total = sum(len(groups[g]) for g in cities)
    n_phi_total = sum(len(avail_groups[g]) for g in cities) if avail_groups else 0

    rows = []
    for g in cities:
        fr = groups[g]
        n = len(fr)
        af = avail_groups.get(g)
        n_phi = len(af) if af is not None else 0
        phis = {}
        if af is not None and fit is not None:
            for k in ks:
                phis[k] = availability_rate(af, k, fit)
                rows.append((g, "phi", "", k, phis[k], n, n_phi, n_phi / n_phi_total, ""))
        for alpha in alphas:
            f = interaction_rate(fr, alpha, catalog)
            rows.append((g, "f", str(alpha), 0, f, n, n_phi, n / n_total, ""))
            try:
                t = duration(fr, alpha, catalog)
            except NoInteractorsError:
                pass
            else:
                rows.append((g, "t", str(alpha), 0, t, n, n_phi, n / n_total, ""))
            if has_nonfamily:
                try:
                    r = family_nonfamily_ratio(fr, alpha, catalog)
                except EstimationError:
                    pass
                else:
                    rows.append((g, "r", str(alpha), 0, r, n, n_phi, n / n_total, ""))
            for k, phi in phis.items():
                if phi == 0:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", PropensityAboveOneWarning)
                    lam = effective_propensity(f, phi)
                weight = lambda_variance_weight(f, phi, 1.0 / n, 1.0 / n_phi)
                rows.append((g, "lambda", str(alpha), k, lam, n, n_phi, weight, "gt1" if lam > 1 else ""))
    return pd.DataFrame(rows, columns=ESTIMATE_COLUMNS)
