"""Domain types for respondent microdata.

A respondent reports, for one diary day, whether they performed each ATUS
major activity category with non-coresident local family, for how long, and
(in availability-style surveys) a binned count of family living nearby.
Activity-days pair an activity code with a day type; aggregate codes such as
``"social"`` or ``"care"`` are unions of base codes.

Respondent tables are handled column-wise as :class:`pandas.DataFrame`
objects. The column conventions are:

``respondent_id``, ``location_id``, ``weight``, ``day_type``
    identifiers, sampling weight (persons) and ``"weekday"``/``"weekend"``.
``a_<code>``, ``t_<code>``, ``nf_<code>``
    interaction flag, duration in hours and non-family interaction flag for
    base activity ``<code>``.
``c_<name>``
    stratification characteristics.
``availability_bin``, ``available``, ``calls``
    optional availability response, latent availability indicator
    (synthetic data only) and number of interviewer calls.
"""

from __future__ import annotations

import datetime as _dt
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

FLAG_PREFIX = "a_"
DURATION_PREFIX = "t_"
NONFAMILY_PREFIX = "nf_"
STRATUM_PREFIX = "c_"

DAY_TYPES = ("weekday", "weekend")
ANY = "any"

# ATUS 2-digit major categories (there is no 17)
BASE_CODES = tuple(f"{c:02d}" for c in range(1, 17)) + ("18",)

DEFAULT_SOCIAL_CODES = frozenset({"11", "12", "13"})
DEFAULT_CARE_CODES = frozenset({"03", "04"})

AVAILABILITY_BINS = ("0", "1-5", "6-10", "11-15", "16-20", "21+")


class UnknownActivityError(KeyError):
    pass


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class ActivityCatalog:
    """Maps aggregate activity codes onto sets of base codes."""

    aggregates: Mapping[str, frozenset[str]]
    base_codes: tuple[str, ...] = BASE_CODES

    @classmethod
    def default(cls, social: Iterable[str] = DEFAULT_SOCIAL_CODES) -> ActivityCatalog:
        return cls(
            aggregates={
                ANY: frozenset(BASE_CODES),
                "social": frozenset(social),
                "care": DEFAULT_CARE_CODES,
            }
        )

    def constituents(self, activity: str) -> frozenset[str]:
        if activity in self.aggregates:
            return frozenset(self.aggregates[activity])
        if activity in self.base_codes:
            return frozenset({activity})
        raise UnknownActivityError(f"unknown activity code {activity!r}")

    def is_aggregate(self, activity: str) -> bool:
        return activity in self.aggregates


DEFAULT_CATALOG = ActivityCatalog.default()


@dataclass(frozen=True, order=True)
class ActivityDay:
    activity: str
    day_type: str = ANY

    def __post_init__(self):
        if self.day_type not in DAY_TYPES + (ANY,):
            raise ValidationError(f"bad day type {self.day_type!r}")

    @classmethod
    def parse(cls, text: str) -> ActivityDay:
        """Parse ``"12"``, ``"social"`` or ``"12:weekend"``."""
        activity, _, day = text.partition(":")
        return cls(activity.strip(), day.strip() or ANY)

    def __str__(self):
        return self.activity if self.day_type == ANY else f"{self.activity}:{self.day_type}"

    def matches_day(self, day_type: str) -> bool:
        return self.day_type == ANY or self.day_type == day_type


ALPHA_O = ActivityDay(ANY, ANY)
ALPHA_SOCIAL = ActivityDay("social", ANY)
ALPHA_CARE = ActivityDay("care", ANY)


def day_type_from_date(date: _dt.date | str) -> str:
    """Saturday and Sunday are weekend days."""
    if isinstance(date, str):
        date = _dt.date.fromisoformat(date)
    return "weekend" if date.isoweekday() >= 6 else "weekday"


@dataclass(frozen=True)
class Location:
    id: str
    population: int
    name: str = ""
    log_population: float = field(init=False)

    def __post_init__(self):
        if self.population < 1:
            raise ValidationError(f"location {self.id}: population must be >= 1")
        object.__setattr__(self, "log_population", math.log10(self.population))


@dataclass(frozen=True, order=True)
class Stratum:
    values: tuple[str, ...]

    @property
    def label(self) -> str:
        return "|".join(self.values)


@dataclass(frozen=True)
class StratumSchema:
    """Declared characteristic names and their finite category sets."""

    names: tuple[str, ...]
    categories: Mapping[str, tuple[str, ...]]

    def validate(self, stratum: Stratum) -> None:
        if len(stratum.values) != len(self.names):
            raise ValidationError(
                f"stratum has {len(stratum.values)} values, expected {len(self.names)}"
            )
        for name, value in zip(self.names, stratum.values):
            if value not in self.categories[name]:
                raise ValidationError(f"{name}={value!r} not in {self.categories[name]}")

    def cells(self) -> list[Stratum]:
        grids = np.meshgrid(*[np.arange(len(self.categories[n])) for n in self.names], indexing="ij")
        out = []
        for idx in zip(*[g.ravel() for g in grids]):
            out.append(Stratum(tuple(self.categories[n][i] for n, i in zip(self.names, idx))))
        return out


@dataclass(frozen=True)
class StratumCell:
    location_id: str
    stratum: Stratum
    sample_size: int
    weight: float
    target_population: float

    def is_calibrated(self, rtol: float = 1e-9) -> bool:
        return math.isclose(self.weight * self.sample_size, self.target_population, rel_tol=rtol)


def aggregate_activity(
    diary: Mapping[ActivityDay, int],
    target: ActivityDay,
    catalog: ActivityCatalog = DEFAULT_CATALOG,
) -> int:
    """OR of the diary flags whose code belongs to ``target`` and whose day type matches.

    >>> aggregate_activity({ActivityDay("03", "weekday"): 0, ActivityDay("04", "weekday"): 1},
    ...                    ActivityDay("care", "weekday"))
    1
    """
    codes = catalog.constituents(target.activity)
    for alpha, flag in diary.items():
        if flag and alpha.activity in codes and target.matches_day(alpha.day_type):
            return 1
    return 0


@dataclass
class Respondent:
    id: str
    location_id: str
    stratum: Stratum
    weight: float
    day_type: str = "weekday"
    interactions: dict[str, int] = field(default_factory=dict)
    durations: dict[str, float] = field(default_factory=dict)
    nonfamily: dict[str, int] = field(default_factory=dict)
    availability_bin: str | None = None
    available: int | None = None
    calls: int | None = None

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValidationError(f"respondent {self.id}: negative weight")
        if self.day_type not in DAY_TYPES:
            raise ValidationError(f"respondent {self.id}: bad day type {self.day_type!r}")
        for code, hours in self.durations.items():
            if hours < 0:
                raise ValidationError(f"respondent {self.id}: negative duration for {code}")
            if hours > 0 and not self.interactions.get(code, 0):
                raise ValidationError(f"respondent {self.id}: duration without interaction for {code}")
        if self.availability_bin is not None and self.availability_bin not in AVAILABILITY_BINS:
            raise ValidationError(f"respondent {self.id}: unknown availability bin {self.availability_bin!r}")

    def diary(self) -> dict[ActivityDay, int]:
        return {ActivityDay(c, self.day_type): int(f) for c, f in self.interactions.items()}

    def a(self, alpha: ActivityDay, catalog: ActivityCatalog = DEFAULT_CATALOG) -> int:
        return aggregate_activity(self.diary(), alpha, catalog)

    def t(self, alpha: ActivityDay, catalog: ActivityCatalog = DEFAULT_CATALOG) -> float:
        if not alpha.matches_day(self.day_type):
            return 0.0
        codes = catalog.constituents(alpha.activity)
        return float(sum(h for c, h in self.durations.items() if c in codes))


# -- column-wise helpers -------------------------------------------------------


def activity_codes(frame: pd.DataFrame, prefix: str = FLAG_PREFIX) -> list[str]:
    return sorted(c[len(prefix):] for c in frame.columns if c.startswith(prefix))


def stratum_columns(frame: pd.DataFrame) -> list[str]:
    return [c for c in frame.columns if c.startswith(STRATUM_PREFIX)]


def _columns_for(frame, alpha, catalog, prefix):
    codes = catalog.constituents(alpha.activity)
    cols = [prefix + c for c in sorted(codes) if prefix + c in frame.columns]
    if not cols:
        raise UnknownActivityError(f"no {prefix}* columns for activity {alpha.activity!r}")
    return cols


def _day_mask(frame, alpha):
    if alpha.day_type == ANY:
        return np.ones(len(frame), dtype=bool)
    return (frame["day_type"] == alpha.day_type).to_numpy()


def activity_indicator(
    frame: pd.DataFrame,
    alpha: ActivityDay,
    catalog: ActivityCatalog = DEFAULT_CATALOG,
    prefix: str = FLAG_PREFIX,
) -> np.ndarray:
    """Per-respondent 0/1 indicator for ``alpha`` (OR over constituent codes)."""
    cols = _columns_for(frame, alpha, catalog, prefix)
    flags = frame[cols].to_numpy(dtype=np.int64).any(axis=1)
    return (flags & _day_mask(frame, alpha)).astype(np.int64)


def activity_duration(
    frame: pd.DataFrame,
    alpha: ActivityDay,
    catalog: ActivityCatalog = DEFAULT_CATALOG,
) -> np.ndarray:
    """Per-respondent hours spent with family on ``alpha`` (sum over constituent codes)."""
    cols = _columns_for(frame, alpha, catalog, DURATION_PREFIX)
    hours = frame[cols].to_numpy(dtype=float).sum(axis=1)
    return np.where(_day_mask(frame, alpha), hours, 0.0)


def respondents_to_frame(respondents: Iterable[Respondent], stratum_names: Iterable[str]) -> pd.DataFrame:
    names = list(stratum_names)
    rows = []
    for r in respondents:
        row = {
            "respondent_id": r.id,
            "location_id": r.location_id,
            "weight": float(r.weight),
            "day_type": r.day_type,
        }
        for name, value in zip(names, r.stratum.values):
            row[STRATUM_PREFIX + name] = value
        for code, flag in r.interactions.items():
            row[FLAG_PREFIX + code] = int(flag)
            row[DURATION_PREFIX + code] = float(r.durations.get(code, 0.0))
        for code, flag in r.nonfamily.items():
            row[NONFAMILY_PREFIX + code] = int(flag)
        if r.availability_bin is not None:
            row["availability_bin"] = r.availability_bin
        if r.available is not None:
            row["available"] = int(r.available)
        if r.calls is not None:
            row["calls"] = int(r.calls)
        rows.append(row)
    return pd.DataFrame(rows)


def frame_to_respondents(frame: pd.DataFrame) -> list[Respondent]:
    codes = activity_codes(frame)
    nf_codes = activity_codes(frame, NONFAMILY_PREFIX)
    scols = stratum_columns(frame)
    out = []
    for row in frame.itertuples(index=False):
        rec = row._asdict()
        out.append(
            Respondent(
                id=str(rec["respondent_id"]),
                location_id=str(rec["location_id"]),
                stratum=Stratum(tuple(str(rec[c]) for c in scols)),
                weight=float(rec["weight"]),
                day_type=rec["day_type"],
                interactions={c: int(rec[FLAG_PREFIX + c]) for c in codes},
                durations={c: float(rec.get(DURATION_PREFIX + c, 0.0)) for c in codes},
                nonfamily={c: int(rec[NONFAMILY_PREFIX + c]) for c in nf_codes},
                availability_bin=_opt(rec.get("availability_bin"), str),
                available=_opt(rec.get("available"), int),
                calls=_opt(rec.get("calls"), int),
            )
        )
    return out


def _opt(value, cast):
    if value is None or (isinstance(value, float) and math.isnan(value)) or value == "":
        return None
    return cast(value)
