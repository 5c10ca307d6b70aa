"""Weighted least squares trend lines and the weights that feed them."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats


class DegenerateRegressionError(ValueError):
    pass


class InfiniteWeightError(ValueError):
    pass


@dataclass(frozen=True)
class WlsFit:
    beta1: float
    beta0: float
    se1: float
    se0: float
    t_value: float
    p_value: float
    r2: float
    adj_r2: float
    ci95: tuple[float, float]
    n: int

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)


def significance_stars(p: float) -> str:
    """``***`` for p < .01, ``**`` for p < .05, ``*`` for p < .10."""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def wls_fit(u: Sequence[float], v: Sequence[float], w: Sequence[float] | None = None) -> WlsFit:
    """Fit ``v = beta1 * u + beta0`` minimising ``sum w (v - beta1 u - beta0)**2``.

    Standard errors assume ``var(eps_g) = sigma**2 / w_g`` with ``sigma**2``
    estimated from the weighted residuals on ``n - 2`` degrees of freedom;
    p-values and the 95% interval use Student's t with the same degrees of
    freedom. ``w=None`` gives ordinary least squares.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.ones_like(u) if w is None else np.asarray(w, dtype=float)
    n = u.size
    if n < 3 or v.size != n or w.size != n:
        raise DegenerateRegressionError("need at least 3 points of matching length")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DegenerateRegressionError("weights must be positive and finite")
    if np.ptp(u) == 0:
        raise DegenerateRegressionError("all u values are equal")

    # centred normal equations; weight scale cancels
    w = w / w.sum()
    ubar = w @ u
    vbar = w @ v
    du = u - ubar
    dv = v - vbar
    sxx = w @ du**2
    beta1 = (w @ (du * dv)) / sxx
    beta0 = vbar - beta1 * ubar
    resid = v - beta0 - beta1 * u
    ssr = w @ resid**2
    sst = w @ dv**2
    df = n - 2
    sigma2 = ssr / df
    se1 = np.sqrt(sigma2 / sxx)
    se0 = np.sqrt(sigma2 * (1.0 + ubar**2 / sxx))
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df
    if se1 > 0:
        t_value = beta1 / se1
        p_value = float(2.0 * stats.t.sf(abs(t_value), df))
    else:
        t_value = np.inf if beta1 != 0 else 0.0
        p_value = 0.0 if beta1 != 0 else 1.0
    half = stats.t.ppf(0.975, df) * se1
    return WlsFit(
        beta1=float(beta1),
        beta0=float(beta0),
        se1=float(se1),
        se0=float(se0),
        t_value=float(t_value),
        p_value=p_value,
        r2=float(r2),
        adj_r2=float(adj_r2),
        ci95=(float(beta1 - half), float(beta1 + half)),
        n=n,
    )


def sample_size_weights(sizes: Sequence[float]) -> np.ndarray:
    s = np.asarray(sizes, dtype=float)
    if np.any(s <= 0):
        raise ValueError("sample sizes must be positive")
    return s / s.sum()


def lambda_variance_weight(f: float, phi: float, var_f: float, var_phi: float) -> float:
    """Inverse first-order variance of ``f / phi`` for independent ``f`` and ``phi``."""
    if phi <= 0:
        raise ValueError("phi must be positive")
    if var_f < 0 or var_phi < 0:
        raise ValueError("variances must be nonnegative")
    var = var_f / phi**2 + (f / phi**2) ** 2 * var_phi
    if var == 0:
        raise InfiniteWeightError("both variances are zero")
    return 1.0 / var
