"""Coverage and non-response diagnostics, and weighted z-score city rankings."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

from .core import DEFAULT_CATALOG, ActivityCatalog, ActivityDay, Location, activity_indicator
from .modal import DensityGrid
from .wls import DegenerateRegressionError, wls_fit

log = logging.getLogger(__name__)

DEFAULT_POPULATION_BINS = 8


class DiagnosticError(ValueError):
    pass


# -- coverage ----------------------------------------------------------------------


def respondents_per_capita(count: int, population: float) -> float:
    """``mu(g) = count / P(g)``."""
    if not population > 0:
        raise DiagnosticError("population must be positive")
    return count / population


def coverage_table(frame: pd.DataFrame, locations: Mapping[str, Location]) -> pd.DataFrame:
    counts = frame.groupby("location_id").size()
    rows = []
    for gid in sorted(locations):
        loc = locations[gid]
        n = int(counts.get(gid, 0))
        rows.append((gid, loc.population, loc.log_population, n, respondents_per_capita(n, loc.population)))
    return pd.DataFrame(rows, columns=["location_id", "population", "p", "respondents", "mu"])


# -- non-response ------------------------------------------------------------------


def nonresponse_ratio(f_u: float, h: float) -> float:
    """Unweighted interaction rate among respondents over the response rate."""
    if not h > 0:
        raise DiagnosticError("response rate is zero")
    return f_u / h


def nonresponse_table(
    respondents: pd.DataFrame,
    sampling_units: pd.DataFrame,
    alpha: ActivityDay,
    characteristic: str,
    locations: Mapping[str, Location],
    catalog: ActivityCatalog = DEFAULT_CATALOG,
) -> pd.DataFrame:
    """``f_u / h`` per (location, characteristic value).

    ``sampling_units`` has columns ``location_id``, ``characteristic`` and
    ``responded``; respondents are matched through their ``characteristic``
    column (e.g. ``c_sex``). Pairs with ``h = 0`` or no respondents are
    skipped and logged.
    """
    a = activity_indicator(respondents, alpha, catalog)
    resp = pd.DataFrame({
        "location_id": respondents["location_id"].astype(str).to_numpy(),
        "c": respondents[characteristic].astype(str).to_numpy(),
        "a": a,
    })
    f_u = resp.groupby(["location_id", "c"])["a"].agg(["mean", "size"])
    units = sampling_units.assign(
        location_id=sampling_units["location_id"].astype(str),
        c=sampling_units["characteristic"].astype(str),
    )
    h = units.groupby(["location_id", "c"])["responded"].agg(["mean", "size"])
    rows = []
    for (gid, c), hrow in h.iterrows():
        if gid not in locations:
            continue
        if not hrow["mean"] > 0:
            log.warning("response rate zero for %s/%s; excluded", gid, c)
            continue
        if (gid, c) not in f_u.index:
            log.warning("no respondents for %s/%s; excluded", gid, c)
            continue
        fu = float(f_u.loc[(gid, c), "mean"])
        rows.append((gid, c, locations[gid].log_population, fu, float(hrow["mean"]),
                     nonresponse_ratio(fu, float(hrow["mean"])), int(f_u.loc[(gid, c), "size"]), int(hrow["size"])))
    return pd.DataFrame(rows, columns=["location_id", "characteristic", "p", "f_u", "h", "ratio",
                                       "respondents", "sampling_units"])


def nonresponse_regressions(table: pd.DataFrame) -> pd.DataFrame:
    """WLS (respondent-count weights) and OLS of the ratio on ``p`` per characteristic value."""
    rows = []
    for c, sub in table.groupby("characteristic", sort=True):
        for method, w in (("wls", sub["respondents"].to_numpy(dtype=float)), ("ols", None)):
            try:
                fit = wls_fit(sub["p"], sub["ratio"], w)
            except DegenerateRegressionError as exc:
                log.warning("regression skipped for %s (%s): %s", c, method, exc)
                continue
            rows.append((c, method, fit.beta1, fit.se1, fit.p_value, fit.stars, fit.adj_r2, fit.n))
    return pd.DataFrame(rows, columns=["characteristic", "method", "beta1", "se1", "p_value", "stars",
                                       "adj_r2", "n"])


# -- call statistic ----------------------------------------------------------------


def call_statistic(weights, calls, interacted) -> float:
    """``psi = sum(w e a) / sum(w e)``."""
    w = np.asarray(weights, dtype=float)
    e = np.asarray(calls, dtype=float)
    a = np.asarray(interacted, dtype=float)
    we = w * e
    den = float(we.sum())
    if not den > 0:
        raise DiagnosticError("no calls recorded")
    # numerator and denominator round differently; a proportion stays in [0, 1]
    return float(np.clip((we * a).sum() / den, 0.0, 1.0))


def call_table(
    frame: pd.DataFrame,
    alpha: ActivityDay,
    locations: Mapping[str, Location],
    catalog: ActivityCatalog = DEFAULT_CATALOG,
) -> pd.DataFrame:
    a = activity_indicator(frame, alpha, catalog)
    rows = []
    for gid, idx in frame.groupby("location_id", sort=True).indices.items():
        sub = frame.iloc[idx]
        try:
            psi = call_statistic(sub["weight"], sub["calls"], a[idx])
        except DiagnosticError:
            log.warning("no calls recorded for %s; skipped", gid)
            continue
        rows.append((gid, locations[gid].log_population, psi, 1.0 - psi))
    return pd.DataFrame(rows, columns=["location_id", "p", "psi", "one_minus_psi"])


def binned_means(table: pd.DataFrame, value_columns: Sequence[str], n_bins: int = DEFAULT_POPULATION_BINS,
                 by: str = "p") -> pd.DataFrame:
    """Means within equal-count bins of ``by`` (ties broken by row order)."""
    n_bins = min(n_bins, len(table))
    order = table.sort_values(by, kind="mergesort").reset_index(drop=True)
    order["bin"] = np.arange(len(order)) * n_bins // len(order)
    agg = {by: "mean", **{c: "mean" for c in value_columns}}
    out = order.groupby("bin").agg(agg)
    out["count"] = order.groupby("bin").size()
    return out.reset_index()


# -- weighted z-scores -------------------------------------------------------------


def column_moments(grid: DensityGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per-column ``<v>`` and ``sigma`` from the discretised conditional density.

    ``<v>_i = sum_j v_j rho(v_j|u_i) / n_v`` and
    ``sigma_i = sqrt(sum_j (v_j - <v>_i)**2 / n_v)``, both normalised by
    ``n_v``. NaN for empty columns.
    """
    n_v = grid.v_axis.size
    mean = (grid.conditional @ grid.v_axis) / n_v
    sigma = np.sqrt(((grid.v_axis[None, :] - mean[:, None]) ** 2).sum(axis=1) / n_v)
    return mean, sigma


def column_index(grid: DensityGrid, u) -> np.ndarray:
    """Tile column ``i`` with ``u_i <= u < u_{i+1}``, clipped to the grid."""
    idx = np.searchsorted(grid.u_axis, np.asarray(u, dtype=float), side="right") - 1
    return np.clip(idx, 0, grid.u_axis.size - 1)


def weighted_zscore(v_g, u_g, grid: DensityGrid, w_g, w_total: float | None = None) -> np.ndarray:
    """``z = (w_g / sum w) (v_g - v*(u_g)) / sigma(u_g)`` for one or many cities."""
    v_g = np.asarray(v_g, dtype=float)
    w_g = np.asarray(w_g, dtype=float)
    total = float(np.sum(w_g)) if w_total is None else float(w_total)
    if not total > 0:
        raise DiagnosticError("total weight must be positive")
    i = column_index(grid, u_g)
    mode = grid.mode_index[i]
    if np.any(mode < 0):
        raise DiagnosticError("city falls in an empty grid column")
    _, sigma = column_moments(grid)
    sig = sigma[i]
    if np.any(sig == 0):
        raise DiagnosticError("zero column sigma")
    return (w_g / total) * (v_g - grid.v_axis[mode]) / sig


def ranking_table(zscores: pd.DataFrame, locations: Mapping[str, Location]) -> pd.DataFrame:
    """Average rank over ``k`` of the weighted z-scores.

    ``zscores`` has columns ``location_id``, ``k``, ``value`` and ``z``.
    Rank 1 is the largest ``z``; the output is sorted by mean rank, then id.
    """
    z = zscores.copy()
    z["rank"] = z.groupby("k")["z"].rank(ascending=False, method="min")
    wide = z.pivot(index="location_id", columns="k", values=["value", "z", "rank"])
    wide.columns = [f"{name}_k{k}" for name, k in wide.columns]
    wide = wide.dropna()
    wide["mean_rank"] = wide[[c for c in wide.columns if c.startswith("rank_")]].mean(axis=1)
    wide = wide.reset_index()
    wide.insert(1, "name", [locations[g].name for g in wide["location_id"]])
    return wide.sort_values(["mean_rank", "location_id"], kind="mergesort").reset_index(drop=True)
