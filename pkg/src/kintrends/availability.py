"""Single-unit resolution for binned family-availability answers.

Survey answers come in the bins ``0, 1-5, 6-10, 11-15, 16-20, 21+``. A
negative binomial ``NB(r, q)`` (``pmf(x) = C(x+r-1, x) q**r (1-q)**x`` on
``x = 0, 1, ...``, the :mod:`scipy.stats` convention) is fitted so that its
mass summed within each bin matches the observed bin proportions in squared
error. Renormalising that pmf inside a bin gives the conditional distribution
of the count for a respondent who answered that bin, from which
``P(count >= k | bin)`` follows for any integer ``k``.

The fit is deterministic: a 41 x 41 grid over ``(log r, logit q)`` picks the
start point for a bounded trust-region least-squares refinement.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit

from .core import AVAILABILITY_BINS

DEFAULT_BINS: tuple[tuple[int, int | None], ...] = ((0, 0), (1, 5), (6, 10), (11, 15), (16, 20), (21, None))
DEFAULT_CAP = 200
PARAMETERIZATION = "scipy.stats.nbinom(n=r, p=q): pmf(x) = C(x+r-1, x) q^r (1-q)^x, x >= 0"

_LOG_R_BOUNDS = (np.log(1e-3), np.log(1e6))
_LOGIT_Q_BOUNDS = (-30.0, 30.0)


class FitUnstableError(ValueError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class BinnedFit:
    bins: tuple[tuple[int, int | None], ...]
    labels: tuple[str, ...]
    bin_proportions: np.ndarray
    r: float
    q: float
    objective: float
    cap: int
    per_bin_conditional: dict[str, tuple[np.ndarray, np.ndarray]]

    def bin_masses(self) -> np.ndarray:
        return _bin_masses(self.bins, np.log(self.r), logit(self.q))

    def to_json(self) -> dict:
        return {
            "parameterization": PARAMETERIZATION,
            "r": self.r,
            "q": self.q,
            "objective": self.objective,
            "cap": self.cap,
            "bins": list(self.labels),
            "observed": [float(x) for x in self.bin_proportions],
            "fitted": [float(x) for x in self.bin_masses()],
        }


def _bin_masses(bins, log_r, logit_q):
    """NB mass per bin; broadcasts over ``log_r``/``logit_q`` arrays."""
    r = np.exp(log_r)
    q = expit(logit_q)
    his = [hi for _, hi in bins[:-1]]
    cdf = [stats.nbinom.cdf(h, r, q) for h in his]
    out, prev = [], 0.0
    for c in cdf:
        out.append(c - prev)
        prev = c
    last_lo = bins[-1][0]
    out.append(stats.nbinom.sf(last_lo - 1, r, q))
    return np.stack(np.broadcast_arrays(*out), axis=0)


def _label(lo, hi):
    if hi is None:
        return f"{lo}+"
    return str(lo) if lo == hi else f"{lo}-{hi}"


def bin_proportions(responses: Sequence[str], weights: Sequence[float] | None = None,
                    labels: Sequence[str] = AVAILABILITY_BINS) -> np.ndarray:
    """Share of responses in each bin, optionally weighted."""
    responses = np.asarray(responses, dtype=object)
    w = np.ones(len(responses)) if weights is None else np.asarray(weights, dtype=float)
    unknown = set(responses) - set(labels)
    if unknown:
        raise ValueError(f"unknown bin labels {sorted(unknown)}")
    totals = np.array([w[responses == lab].sum() for lab in labels])
    return totals / totals.sum()


def fit_binned_nb(
    proportions: Sequence[float],
    bins: Sequence[tuple[int, int | None]] = DEFAULT_BINS,
    cap: int = DEFAULT_CAP,
) -> BinnedFit:
    bins = tuple(tuple(b) for b in bins)
    props = np.asarray(proportions, dtype=float)
    if props.shape != (len(bins),):
        raise ValueError(f"expected {len(bins)} proportions, got {props.shape}")
    if np.any(props < 0) or not np.isclose(props.sum(), 1.0, atol=1e-6):
        raise ValueError("proportions must be nonnegative and sum to 1")
    if bins[-1][1] is not None or cap < bins[-1][0]:
        raise ValueError("last bin must be open and below the cap")
    nonzero = np.flatnonzero(props > 0)
    if len(nonzero) == 1 and nonzero[0] == len(bins) - 1:
        raise FitUnstableError(
            "all mass in the open tail bin; NB parameters are unidentified",
            {"proportions": props.tolist()},
        )

    log_r = np.linspace(np.log(0.05), np.log(200.0), 41)
    logit_q = np.linspace(-8.0, 8.0, 41)
    lr, lq = np.meshgrid(log_r, logit_q, indexing="ij")
    sse = ((_bin_masses(bins, lr, lq) - props[:, None, None]) ** 2).sum(axis=0)
    i, j = np.unravel_index(np.argmin(sse), sse.shape)

    res = optimize.least_squares(
        lambda th: _bin_masses(bins, th[0], th[1]) - props,
        x0=[lr[i, j], lq[i, j]],
        bounds=([_LOG_R_BOUNDS[0], _LOGIT_Q_BOUNDS[0]], [_LOG_R_BOUNDS[1], _LOGIT_Q_BOUNDS[1]]),
        method="trf",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=5000,
    )
    r, q = float(np.exp(res.x[0])), float(expit(res.x[1]))
    objective = float(np.sum(res.fun**2))

    conditional = {}
    for lo, hi in bins:
        support = np.arange(lo, (cap if hi is None else hi) + 1)
        logp = stats.nbinom.logpmf(support, r, q)
        p = np.exp(logp - logp.max())
        conditional[_label(lo, hi)] = (support, p / p.sum())

    return BinnedFit(
        bins=bins,
        labels=tuple(_label(lo, hi) for lo, hi in bins),
        bin_proportions=props,
        r=r,
        q=q,
        objective=objective,
        cap=cap,
        per_bin_conditional=conditional,
    )


def prob_at_least(bin: str | tuple[int, int | None], k: int, fit: BinnedFit) -> float:
    """``P(count >= k)`` for a respondent whose answer fell in ``bin``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not isinstance(bin, str):
        bin = _label(*bin)
    support, probs = fit.per_bin_conditional[bin]
    if k <= support[0]:
        return 1.0
    if k > support[-1]:
        return 0.0
    return float(probs[support >= k].sum())


def at_least_table(fit: BinnedFit, k: int) -> Mapping[str, float]:
    return {label: prob_at_least(label, k, fit) for label in fit.labels}
