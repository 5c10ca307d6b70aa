"""Probabilistic model of availability and interaction, and a synthetic survey generator.

Each respondent carries two Bernoulli variables: ``b`` (family available
locally) with probability ``phi``, and ``a`` (an activity-day performed with
family) which, given ``b = 1``, has probability ``kappa`` and is forced to 0
when ``b = 0``. Counts of ``a = 1`` inside a stratum are binomial with
success rate ``kappa * phi``.

The generator draws every (location, stratum) cell from its own
:class:`numpy.random.SeedSequence`, keyed on the run seed and a CRC32 of the
cell label, so output does not depend on cell iteration order.
"""

from __future__ import annotations

import math
import zlib
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import gammaln

from .core import (
    ANY,
    AVAILABILITY_BINS,
    DEFAULT_CATALOG,
    DURATION_PREFIX,
    FLAG_PREFIX,
    NONFAMILY_PREFIX,
    STRATUM_PREFIX,
    ActivityCatalog,
    ActivityDay,
    Location,
    Stratum,
    ValidationError,
)

RNG_ALGORITHM = "numpy PCG64, SeedSequence(seed, spawn_key=(crc32(location|stratum),))"

Cell = tuple[str, Stratum]


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value!r} outside [0, 1]")


def joint_probability(a: int, b: int, kappa: float, phi: float) -> float:
    """Probability of the response pair ``(a, b)``.

    ``kappa**a (1-kappa)**(1-a) phi [b=1] + [a=0] (1-phi) [b=0]``
    """
    _check_prob("kappa", kappa)
    _check_prob("phi", phi)
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("a and b must be 0 or 1")
    available = kappa**a * (1.0 - kappa) ** (1 - a) * phi if b == 1 else 0.0
    unavailable = (1.0 - phi) if (a == 0 and b == 0) else 0.0
    return available + unavailable


def count_pmf(y: int, s: int, kappa: float, phi: float) -> float:
    """Probability that exactly ``y`` of ``s`` respondents report an interaction.

    Binomial with success rate ``kappa * phi``; evaluated in log space when
    ``s > 50``.
    """
    _check_prob("kappa", kappa)
    _check_prob("phi", phi)
    if not 0 <= y <= s:
        raise ValueError(f"y={y} outside [0, {s}]")
    rate = kappa * phi
    if s <= 50:
        return math.comb(s, y) * rate**y * (1.0 - rate) ** (s - y)
    # boundary rates make one of the log terms -inf * 0
    if rate == 0.0:
        return 1.0 if y == 0 else 0.0
    if rate == 1.0:
        return 1.0 if y == s else 0.0
    log_p = (
        gammaln(s + 1) - gammaln(y + 1) - gammaln(s - y + 1)
        + y * math.log(rate) + (s - y) * math.log1p(-rate)
    )
    return float(math.exp(log_p))


def count_distribution_enumerated(s: int, kappa: float, phi: float) -> np.ndarray:
    """``P(sum(a) = y)`` for ``y = 0..s`` by summing the joint probability over all ``4**s`` configurations.

    Exponential cost; intended as a reference for small ``s``.
    """
    # one entry per (a, b) pair of a single respondent
    pair_a = np.array([0, 0, 1, 1])
    pair_p = np.array([joint_probability(a, b, kappa, phi) for a, b in ((0, 0), (0, 1), (1, 0), (1, 1))])
    prob = np.ones(1)
    n_yes = np.zeros(1, dtype=np.int64)
    for _ in range(s):
        prob = np.multiply.outer(prob, pair_p).ravel()
        n_yes = np.add.outer(n_yes, pair_a).ravel()
    return np.bincount(n_yes, weights=prob, minlength=s + 1)


def count_pmf_enumerated(y: int, s: int, kappa: float, phi: float) -> float:
    """Single entry of :func:`count_distribution_enumerated`."""
    if not 0 <= y <= s:
        raise ValueError(f"y={y} outside [0, {s}]")
    return float(count_distribution_enumerated(s, kappa, phi)[y])


@dataclass
class ModelParams:
    """Parameters of a synthetic survey.

    ``kappa`` is keyed by ``(location_id, stratum, ActivityDay)`` where the
    activity-day must be a base code on any day; aggregate activity-days are
    derived from the independent per-code draws.
    """

    locations: Mapping[str, Location]
    stratum_names: tuple[str, ...]
    kappa: Mapping[tuple[str, Stratum, ActivityDay], float]
    phi: Mapping[Cell, float]
    strata_sizes: Mapping[Cell, int]
    weights: Mapping[Cell, float]
    weekend_share: float = 2.0 / 7.0
    mean_duration: float = 3.0
    availability_nb: tuple[float, float] | None = (2.0, 0.3)
    nonfamily_rate: float | None = None
    mean_calls: float = 2.0
    catalog: ActivityCatalog = field(default_factory=lambda: DEFAULT_CATALOG)

    def __post_init__(self):
        if not self.strata_sizes:
            raise ValidationError("empty strata map")
        for key, value in self.kappa.items():
            _check_prob(f"kappa{key}", value)
            alpha = key[2]
            if alpha.day_type != ANY or self.catalog.is_aggregate(alpha.activity):
                raise ValidationError(f"kappa must be keyed by base codes on any day, got {alpha}")
        for key, value in self.phi.items():
            _check_prob(f"phi{key}", value)
        for key, s in self.strata_sizes.items():
            if int(s) != s or s < 1:
                raise ValidationError(f"stratum size {key}: {s}")
            if key not in self.phi or key not in self.weights:
                raise ValidationError(f"cell {key} lacks phi or weight")
            if not self.weights[key] > 0:
                raise ValidationError(f"weight {key} must be positive")
        _check_prob("weekend_share", self.weekend_share)

    def cells(self) -> list[Cell]:
        return sorted(self.strata_sizes)

    def codes(self) -> list[str]:
        return sorted({k[2].activity for k in self.kappa})

    def cell_kappa(self, cell: Cell) -> dict[str, float]:
        g, c = cell
        return {k[2].activity: v for k, v in self.kappa.items() if k[0] == g and k[1] == c}

    def target_population(self, cell: Cell) -> float:
        return self.weights[cell] * self.strata_sizes[cell]


# -- model expectations ----------------------------------------------------------


def model_kappa(params: ModelParams, cell: Cell, alpha: ActivityDay) -> float:
    """Propensity for ``alpha`` in a cell, combining independent per-code draws."""
    codes = params.catalog.constituents(alpha.activity)
    kap = params.cell_kappa(cell)
    miss = 1.0
    for code in codes:
        miss *= 1.0 - kap.get(code, 0.0)
    day = {ANY: 1.0, "weekend": params.weekend_share, "weekday": 1.0 - params.weekend_share}
    return day[alpha.day_type] * (1.0 - miss)


def _location_cells(params, g):
    cells = [cell for cell in params.cells() if cell[0] == g]
    if not cells:
        raise KeyError(f"no strata for location {g!r}")
    return cells


def model_interaction(params: ModelParams, g: str, alpha: ActivityDay) -> float:
    """Expected interaction rate: ``sum_c Q kappa phi / sum_c Q``."""
    cells = _location_cells(params, g)
    q = np.array([params.target_population(c) for c in cells])
    kp = np.array([model_kappa(params, c, alpha) * params.phi[c] for c in cells])
    return float(q @ kp / q.sum())


def model_availability(params: ModelParams, g: str) -> float:
    cells = _location_cells(params, g)
    q = np.array([params.target_population(c) for c in cells])
    phi = np.array([params.phi[c] for c in cells])
    return float(q @ phi / q.sum())


def model_propensity(params: ModelParams, g: str, alpha: ActivityDay) -> float:
    """Availability-weighted average of ``kappa`` over the population with family nearby."""
    return model_interaction(params, g, alpha) / model_availability(params, g)


# -- sampling ----------------------------------------------------------------------


def cell_seed(seed: int, cell: Cell) -> np.random.SeedSequence:
    key = zlib.crc32(f"{cell[0]}|{cell[1].label}".encode())
    return np.random.SeedSequence(seed, spawn_key=(key,))


def bin_counts(counts: np.ndarray) -> np.ndarray:
    """Map nonnegative integer counts onto availability bin labels."""
    counts = np.asarray(counts)
    idx = np.where(counts == 0, 0, np.minimum((counts - 1) // 5 + 1, 5))
    return np.asarray(AVAILABILITY_BINS, dtype=object)[idx]


def _positive_nb(rng, n, r, q):
    # inverse CDF of NB(r, q) conditioned on X >= 1
    lo = stats.nbinom.cdf(0, r, q)
    u = lo + (1.0 - lo) * rng.random(n)
    x = stats.nbinom.ppf(u, r, q)
    return np.maximum(x, 1).astype(np.int64)


def _draw_cell(params, cell, seed, codes):
    g, c = cell
    s = int(params.strata_sizes[cell])
    rng = np.random.Generator(np.random.PCG64(cell_seed(seed, cell)))
    b = rng.random(s) < params.phi[cell]
    weekend = rng.random(s) < params.weekend_share
    data = {
        "respondent_id": [f"{g}-{c.label}-{i}" for i in range(s)],
        "location_id": np.full(s, g, dtype=object),
        "weight": np.full(s, float(params.weights[cell])),
        "day_type": np.where(weekend, "weekend", "weekday").astype(object),
    }
    for name, value in zip(params.stratum_names, c.values):
        data[STRATUM_PREFIX + name] = np.full(s, value, dtype=object)
    kap = params.cell_kappa(cell)
    for code in codes:
        a = b & (rng.random(s) < kap.get(code, 0.0))
        hours = rng.exponential(params.mean_duration, s)
        data[FLAG_PREFIX + code] = a.astype(np.int64)
        data[DURATION_PREFIX + code] = np.where(a, hours, 0.0)
    if params.nonfamily_rate is not None:
        for code in codes:
            data[NONFAMILY_PREFIX + code] = (rng.random(s) < params.nonfamily_rate).astype(np.int64)
    data["available"] = b.astype(np.int64)
    if params.availability_nb is not None:
        r, q = params.availability_nb
        counts = np.zeros(s, dtype=np.int64)
        counts[b] = _positive_nb(rng, int(b.sum()), r, q)
        data["availability_bin"] = bin_counts(counts)
    data["calls"] = 1 + rng.poisson(max(params.mean_calls - 1.0, 0.0), s)
    return pd.DataFrame(data)


def generate_survey(params: ModelParams, seed: int) -> pd.DataFrame:
    """Draw a respondent table from the model.

    Every respondent in cell ``(g, c)`` receives weight ``w(g, c)``. The RNG
    algorithm and seed are stored in ``frame.attrs``.
    """
    codes = params.codes()
    frames = [_draw_cell(params, cell, seed, codes) for cell in params.cells()]
    frame = pd.concat(frames, ignore_index=True)
    frame.attrs["rng"] = {"algorithm": RNG_ALGORITHM, "seed": int(seed)}
    return frame


def synthetic_cities(
    n_cities: int = 50,
    strata: Mapping[str, tuple[str, ...]] | None = None,
    seed: int = 0,
    *,
    phi_at_p6: float = 0.7,
    phi_slope: float = -0.1,
    kappa: Mapping[str, float] | None = None,
    respondents_per_capita: float | None = 1e-4,
    stratum_size: int | None = None,
    min_stratum_size: int = 5,
    log_population_range: tuple[float, float] = (5.0, 7.3),
    **kwargs,
) -> ModelParams:
    """Model parameters for a set of cities whose availability is linear in log-population.

    ``phi(g, c) = phi_at_p6 + phi_slope * (p(g) - 6) + offset(c)`` with small
    stratum offsets that average to zero; ``kappa`` is the same in every
    city. Stratum sizes follow ``respondents_per_capita * P(g)`` split
    evenly over strata, unless ``stratum_size`` fixes them.
    """
    strata = strata or {"sex": ("female", "male"), "age": ("<30", "30+")}
    kappa = kappa or {"12": 0.25, "11": 0.15, "04": 0.08}
    names = tuple(strata)
    rng = np.random.default_rng(seed)
    p_lo, p_hi = log_population_range
    logp = np.sort(rng.uniform(p_lo, p_hi, n_cities))
    cells_c = [tuple(v) for v in np.array(np.meshgrid(*strata.values(), indexing="ij")).reshape(len(names), -1).T]
    offsets = np.linspace(-0.05, 0.05, len(cells_c)) if len(cells_c) > 1 else np.zeros(1)
    shares = rng.dirichlet(np.full(len(cells_c), 20.0), n_cities)

    locations, phi, sizes, weights, kap = {}, {}, {}, {}, {}
    for i, p in enumerate(logp):
        gid = f"{10000 + 10 * i:05d}"
        pop = int(round(10**p))
        locations[gid] = Location(gid, pop, name=f"City {i}")
        p = locations[gid].log_population
        for j, cv in enumerate(cells_c):
            c = Stratum(tuple(str(v) for v in cv))
            if stratum_size is not None:
                s = stratum_size
            else:
                s = max(min_stratum_size, int(round(respondents_per_capita * pop / len(cells_c))))
            q_pop = pop * shares[i, j]
            phi[(gid, c)] = float(np.clip(phi_at_p6 + phi_slope * (p - 6.0) + offsets[j], 0.01, 0.99))
            sizes[(gid, c)] = s
            weights[(gid, c)] = q_pop / s
            for code, value in kappa.items():
                kap[(gid, c, ActivityDay(code))] = float(value)
    return ModelParams(
        locations=locations,
        stratum_names=names,
        kappa=kap,
        phi=phi,
        strata_sizes=sizes,
        weights=weights,
        **kwargs,
    )
