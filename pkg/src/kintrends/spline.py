"""Weighted natural cubic smoothing splines with a GCV-selected penalty.

The fitted curve minimises::

    sum_g w_g (v_g - s(u_g))**2 + eta * integral s''(x)**2 dx

over natural cubic splines with knots at the distinct abscissae. Following
Reinsch, the second derivatives ``gamma`` at interior knots solve the
pentadiagonal system ``(R + eta Q' W^-1 Q) gamma = Q' v`` and the fitted
knot values are ``v - eta W^-1 Q gamma``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg

N_GRID = 61
GRID_SPAN = (-6.0, 6.0)


class ExtrapolationWarning(UserWarning):
    pass


@dataclass
class SplineFit:
    knots: np.ndarray
    values: np.ndarray
    second_derivs: np.ndarray
    coefficients: np.ndarray  # (n-1, 4): a + b t + c t^2 + d t^3, t = u - knot
    eta: float
    gcv_score: float
    effective_df: float
    weights: np.ndarray
    data: np.ndarray

    def __call__(self, u, nu: int = 0):
        return evaluate(self, u, nu)

    @property
    def weighted_rss(self) -> float:
        return float(self.weights @ (self.data - self.values) ** 2)


def merge_duplicates(u, v, w):
    """Collapse repeated abscissae to their weighted mean with summed weight."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    x, inv = np.unique(u, return_inverse=True)
    wm = np.bincount(inv, weights=w)
    ym = np.bincount(inv, weights=w * v) / wm
    return x, ym, wm


def _penalty_parts(x):
    """Band storage of ``R`` and the three nonzero diagonals of ``Q``."""
    h = np.diff(x)
    q0 = 1.0 / h[:-1]
    q2 = 1.0 / h[1:]
    q1 = -q0 - q2
    r_diag = (h[:-1] + h[1:]) / 3.0
    r_off = h[1:-1] / 6.0
    return h, (q0, q1, q2), r_diag, r_off


def _qtdq(q, d):
    """Diagonals of ``Q' diag(d) Q`` (main, first, second)."""
    q0, q1, q2 = q
    main = q0**2 * d[:-2] + q1**2 * d[1:-1] + q2**2 * d[2:]
    off1 = q1[:-1] * q0[1:] * d[1:-2] + q2[:-1] * q1[1:] * d[2:-1]
    off2 = q2[:-2] * q0[2:] * d[2:-2]
    return main, off1, off2


def _qt_times(q, y):
    q0, q1, q2 = q
    return q0 * y[:-2] + q1 * y[1:-1] + q2 * y[2:]


def _q_times(q, gamma):
    q0, q1, q2 = q
    out = np.zeros(gamma.size + 2)
    out[:-2] += q0 * gamma
    out[1:-1] += q1 * gamma
    out[2:] += q2 * gamma
    return out


def _banded_upper(main, off1, off2):
    m = main.size
    ab = np.zeros((3, m))
    ab[2] = main
    ab[1, 1:] = off1
    ab[0, 2:] = off2
    return ab


def _dense(main, off1, off2):
    return np.diag(main) + np.diag(off1, 1) + np.diag(off1, -1) + np.diag(off2, 2) + np.diag(off2, -2)


def _solve(x, y, w, eta, want_trace):
    _, q, r_diag, r_off = _penalty_parts(x)
    d = 1.0 / w
    b_main, b_off1, b_off2 = _qtdq(q, d)
    m = r_diag.size
    r_off2 = np.zeros(max(m - 2, 0))
    ab = _banded_upper(r_diag + eta * b_main, np.r_[r_off] + eta * b_off1, r_off2 + eta * b_off2)
    gamma = linalg.solveh_banded(ab, _qt_times(q, y))
    fitted = y - eta * d * _q_times(q, gamma)
    trace = np.nan
    if want_trace:
        # tr(I - S) = eta * tr(M^-1 Q' W^-1 Q)
        bmat = _dense(b_main, b_off1, b_off2)
        trace = x.size - eta * np.trace(linalg.solveh_banded(ab, bmat))
    return fitted, gamma, trace


def _coefficients(x, g, gamma_full):
    h = np.diff(x)
    a = g[:-1]
    b = (g[1:] - g[:-1]) / h - h * (2.0 * gamma_full[:-1] + gamma_full[1:]) / 6.0
    c = gamma_full[:-1] / 2.0
    d = (gamma_full[1:] - gamma_full[:-1]) / (6.0 * h)
    return np.column_stack([a, b, c, d])


def eta_grid(x, w, n_grid: int = N_GRID, span: tuple[float, float] = GRID_SPAN) -> np.ndarray:
    """Log-spaced penalties scaled by ``mean(w) * range(u)**3 / n``."""
    scale = np.mean(w) * np.ptp(x) ** 3 / x.size
    return scale * np.logspace(span[0], span[1], n_grid)


def gcv_score(n, rss, trace):
    """``n * RSS_w / (n - tr S)**2``; infinite for an interpolating smoother."""
    resid_df = n - trace
    if resid_df <= 1e-12 * n:
        return np.inf
    return n * rss / resid_df**2


def fit_spline(u, v, w=None, eta: float | str = "gcv") -> SplineFit:
    """Fit a weighted cubic smoothing spline.

    Parameters
    ----------
    u, v : array_like
        Abscissae and observations. Repeated ``u`` are merged by weighted
        averaging before solving.
    w : array_like, optional
        Positive observation weights (default 1).
    eta : float or ``"gcv"``
        Roughness penalty. ``"gcv"`` picks the value minimising
        ``n * RSS_w / (n - tr S)**2`` on the grid from :func:`eta_grid`.
    """
    u = np.asarray(u, dtype=float)
    w = np.ones_like(u) if w is None else np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    x, y, wm = merge_duplicates(u, v, w)
    if x.size < 4:
        raise ValueError("need at least 4 distinct abscissae")
    n = x.size

    if isinstance(eta, str):
        if eta.lower() != "gcv":
            raise ValueError(f"unknown eta {eta!r}")
        best = None
        for e in eta_grid(x, wm):
            fitted, _, tr = _solve(x, y, wm, e, True)
            score = gcv_score(n, wm @ (y - fitted) ** 2, tr)
            if best is None or score < best[0]:
                best = (score, e)
        eta = best[1]
    eta = float(eta)
    if eta < 0:
        raise ValueError("eta must be nonnegative")

    fitted, gamma, tr = _solve(x, y, wm, eta, True)
    gamma_full = np.r_[0.0, gamma, 0.0]
    rss = float(wm @ (y - fitted) ** 2)
    return SplineFit(
        knots=x,
        values=fitted,
        second_derivs=gamma_full,
        coefficients=_coefficients(x, fitted, gamma_full),
        eta=eta,
        gcv_score=float(gcv_score(n, rss, tr)),
        effective_df=float(tr),
        weights=wm,
        data=y,
    )


def evaluate(fit: SplineFit, u0, nu: int = 0):
    """Value (``nu=0``) or derivative (``nu=1, 2``) of the spline at ``u0``.

    Outside the knot range the spline continues linearly and an
    :class:`ExtrapolationWarning` is issued.
    """
    scalar = np.ndim(u0) == 0
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    x = fit.knots
    coef = fit.coefficients
    idx = np.clip(np.searchsorted(x, u0, side="right") - 1, 0, x.size - 2)
    t = u0 - x[idx]
    a, b, c, d = coef[idx].T
    if nu == 0:
        out = a + t * (b + t * (c + t * d))
    elif nu == 1:
        out = b + t * (2 * c + 3 * t * d)
    elif nu == 2:
        out = 2 * c + 6 * t * d
    else:
        raise ValueError("nu must be 0, 1 or 2")

    below = u0 < x[0]
    above = u0 > x[-1]
    if below.any() or above.any():
        warnings.warn("evaluating outside the knot range", ExtrapolationWarning, stacklevel=2)
        h_last = x[-1] - x[-2]
        la, lb = coef[0, 0], coef[0, 1]
        ra = fit.values[-1]
        a_, b_, c_, d_ = coef[-1]
        rb = b_ + 2 * c_ * h_last + 3 * d_ * h_last**2
        if nu == 0:
            out[below] = la + lb * (u0[below] - x[0])
            out[above] = ra + rb * (u0[above] - x[-1])
        elif nu == 1:
            out[below] = lb
            out[above] = rb
        else:
            out[below | above] = 0.0
    return float(out[0]) if scalar else out


def sample_curve(fit: SplineFit, n_points: int = 500) -> pd.DataFrame:
    grid = np.linspace(fit.knots[0], fit.knots[-1], n_points)
    return pd.DataFrame({"u": grid, "v": evaluate(fit, grid)})
