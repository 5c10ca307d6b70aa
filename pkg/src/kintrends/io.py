"""CSV ingestion and export with declared schemas and line-numbered rejects.

See ``docs/schemas.md`` for the column definitions. Every file may start
with a ``#schema=<name>/<version>`` line; when present it must match the
schema the reader expects.
"""

from __future__ import annotations

import io as _io
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .core import (
    AVAILABILITY_BINS,
    DAY_TYPES,
    DURATION_PREFIX,
    FLAG_PREFIX,
    NONFAMILY_PREFIX,
    STRATUM_PREFIX,
    Location,
    day_type_from_date,
)

SCHEMA_VERSION = "1"
RESPONDENT_SCHEMA = f"respondents/{SCHEMA_VERSION}"
LOCATION_SCHEMA = f"locations/{SCHEMA_VERSION}"
CROSSWALK_SCHEMA = f"crosswalk/{SCHEMA_VERSION}"
UNITS_SCHEMA = f"sampling_units/{SCHEMA_VERSION}"

DURATION_UNITS = {"hours": 1.0, "minutes": 1.0 / 60.0}


class SchemaError(ValueError):
    """A whole file is unusable (missing columns, wrong schema tag)."""


@dataclass
class IngestResult:
    frame: pd.DataFrame
    rejects: pd.DataFrame
    n_rows: int
    summary: dict = field(default_factory=dict)

    @property
    def n_accepted(self) -> int:
        return len(self.frame)

    @property
    def n_rejected(self) -> int:
        return len(self.rejects)


def _read(path_or_buffer, schema: str) -> tuple[pd.DataFrame, int]:
    """Read a CSV as strings; returns the frame and the line number of its header."""
    if isinstance(path_or_buffer, (str, Path)):
        text = Path(path_or_buffer).read_text()
    else:
        text = path_or_buffer.read()
    header_line = 1
    if text.startswith("#"):
        first, _, text = text.partition("\n")
        tag = first[1:].strip()
        if not tag.startswith("schema="):
            raise SchemaError(f"unrecognised leading comment {first!r}")
        found = tag.split("=", 1)[1].strip()
        if found != schema:
            raise SchemaError(f"schema {found!r} does not match expected {schema!r}")
        header_line = 2
    frame = pd.read_csv(_io.StringIO(text), dtype=str, keep_default_na=False)
    return frame, header_line


def _write(frame: pd.DataFrame, path, schema: str, float_format: str | None = "%.17g") -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"#schema={schema}\n")
        frame.to_csv(fh, index=False, float_format=float_format, lineterminator="\n")


def _to_float(values: pd.Series) -> pd.Series:
    """Parse strings to float, NaN where invalid.

    ``pd.to_numeric`` uses a fast parser that is not correctly rounded, so
    valid entries go through ``float`` to keep CSV round trips exact.
    """
    probe = pd.to_numeric(values, errors="coerce")
    ok = probe.notna()
    out = pd.Series(np.nan, index=values.index)
    out[ok] = values[ok].map(float)
    return out


def _require(frame: pd.DataFrame, columns, what: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"{what}: missing columns {missing}")


# -- small tables ------------------------------------------------------------------


def read_locations(path) -> dict[str, Location]:
    frame, header = _read(path, LOCATION_SCHEMA)
    _require(frame, ["location_id", "population"], "locations")
    pop = pd.to_numeric(frame["population"], errors="coerce")
    bad = pop.isna() | (pop < 1)
    if bad.any():
        lines = (np.flatnonzero(bad.to_numpy()) + header + 1).tolist()
        raise SchemaError(f"locations: invalid population on lines {lines}")
    names = frame["name"] if "name" in frame.columns else [""] * len(frame)
    return {g: Location(g, int(p), n) for g, p, n in zip(frame["location_id"], pop, names)}


def write_locations(locations: Mapping[str, Location], path) -> None:
    frame = pd.DataFrame(
        [(g, loc.population, loc.name) for g, loc in sorted(locations.items())],
        columns=["location_id", "population", "name"],
    )
    _write(frame, path, LOCATION_SCHEMA)


def read_crosswalk(path) -> dict[str, str]:
    """``county_fips -> location_id``; an empty location marks an unidentified area."""
    frame, _ = _read(path, CROSSWALK_SCHEMA)
    _require(frame, ["county_fips", "location_id"], "crosswalk")
    return dict(zip(frame["county_fips"], frame["location_id"]))


def write_crosswalk(mapping: Mapping[str, str], path) -> None:
    frame = pd.DataFrame(sorted(mapping.items()), columns=["county_fips", "location_id"])
    _write(frame, path, CROSSWALK_SCHEMA)


def read_sampling_units(path) -> pd.DataFrame:
    frame, header = _read(path, UNITS_SCHEMA)
    _require(frame, ["location_id", "characteristic", "responded"], "sampling units")
    responded = pd.to_numeric(frame["responded"], errors="coerce")
    bad = ~responded.isin([0, 1])
    if bad.any():
        lines = (np.flatnonzero(bad.to_numpy()) + header + 1).tolist()
        raise SchemaError(f"sampling units: responded must be 0/1 on lines {lines[:10]}")
    return frame.assign(responded=responded.astype(np.int64))


def write_sampling_units(frame: pd.DataFrame, path) -> None:
    _write(frame, path, UNITS_SCHEMA)


def write_respondents(frame: pd.DataFrame, path) -> None:
    _write(frame, path, RESPONDENT_SCHEMA)


# -- respondents -------------------------------------------------------------------


def ingest_respondents(
    path_or_buffer,
    crosswalk: Mapping[str, str] | None = None,
    locations: Mapping[str, Location] | None = None,
    duration_unit: str = "hours",
    require_interactions: bool = True,
) -> IngestResult:
    """Validate a respondent CSV and return accepted rows plus a reject report.

    Rows are keyed to locations through ``location_id`` or, when that column
    is absent, through ``county_fips`` and ``crosswalk``. Availability-only
    surveys pass ``require_interactions=False``. Each rejected row
    is listed once with its file line number and every failing rule.

    Raises
    ------
    SchemaError
        Missing required columns or a mismatched schema tag.
    """
    if duration_unit not in DURATION_UNITS:
        raise ValueError(f"duration_unit must be one of {sorted(DURATION_UNITS)}")
    raw, header = _read(path_or_buffer, RESPONDENT_SCHEMA)
    n = len(raw)
    _require(raw, ["respondent_id", "weight"], "respondents")
    if "day_type" not in raw.columns and "diary_date" not in raw.columns:
        raise SchemaError("respondents: need day_type or diary_date")
    if "location_id" not in raw.columns:
        if "county_fips" not in raw.columns:
            raise SchemaError("respondents: need location_id or county_fips")
        if crosswalk is None:
            raise SchemaError("respondents: county_fips given but no crosswalk")
    codes = sorted(c[len(FLAG_PREFIX):] for c in raw.columns if c.startswith(FLAG_PREFIX))
    if require_interactions and not codes:
        raise SchemaError(f"respondents: no {FLAG_PREFIX}* interaction columns")

    reasons: list[list[str]] = [[] for _ in range(n)]

    def flag(mask, reason):
        for i in np.flatnonzero(np.asarray(mask)):
            reasons[i].append(reason)

    out = pd.DataFrame({"respondent_id": raw["respondent_id"]})
    if "location_id" in raw.columns:
        loc = raw["location_id"].copy()
        flag(loc == "", "missing location")
    else:
        fips = raw["county_fips"]
        mapped = fips.map(crosswalk)
        flag(mapped.isna(), "unmapped FIPS")
        flag(mapped.fillna("x") == "", "unidentified CBSA")
        loc = mapped.fillna("")
    if locations is not None:
        flag((loc != "") & ~loc.isin(list(locations)), "unknown location")
    out["location_id"] = loc

    weight = _to_float(raw["weight"])
    flag(weight.isna(), "non-numeric weight")
    flag(weight < 0, "negative weight")
    out["weight"] = weight

    if "day_type" in raw.columns:
        day = raw["day_type"]
    else:
        day = raw["diary_date"].map(_safe_day_type)
    flag(~day.isin(DAY_TYPES), "bad day type")
    out["day_type"] = day

    for col in sorted(c for c in raw.columns if c.startswith(STRATUM_PREFIX)):
        flag(raw[col] == "", f"missing {col}")
        out[col] = raw[col]

    scale = DURATION_UNITS[duration_unit]
    for code in codes:
        a = pd.to_numeric(raw[FLAG_PREFIX + code], errors="coerce")
        flag(~a.isin([0, 1]), f"{FLAG_PREFIX}{code} not 0/1")
        out[FLAG_PREFIX + code] = a
        if DURATION_PREFIX + code in raw.columns:
            t = _to_float(raw[DURATION_PREFIX + code].replace("", "0")) * scale
            flag(t.isna(), f"non-numeric {DURATION_PREFIX}{code}")
            flag(t < 0, f"negative {DURATION_PREFIX}{code}")
            flag((t > 0) & (a == 0), f"duration without interaction for {code}")
        else:
            t = pd.Series(0.0, index=raw.index)
        out[DURATION_PREFIX + code] = t
    for col in sorted(c for c in raw.columns if c.startswith(NONFAMILY_PREFIX)):
        nf = pd.to_numeric(raw[col], errors="coerce")
        flag(~nf.isin([0, 1]), f"{col} not 0/1")
        out[col] = nf

    if "availability_bin" in raw.columns:
        b = raw["availability_bin"]
        flag((b != "") & ~b.isin(AVAILABILITY_BINS), "unknown availability bin")
        out["availability_bin"] = b.replace("", np.nan)
    for col in ("available", "calls"):
        if col in raw.columns:
            x = pd.to_numeric(raw[col].replace("", np.nan), errors="coerce")
            flag(raw[col].ne("") & (x.isna() | (x < 0) | (x != np.floor(x))), f"bad {col}")
            out[col] = x

    flag(raw["respondent_id"].duplicated(keep="first"), "duplicate respondent_id")

    bad = np.array([bool(r) for r in reasons], dtype=bool)
    rejects = pd.DataFrame({
        "line": np.flatnonzero(bad) + header + 1,
        "respondent_id": raw["respondent_id"].to_numpy()[bad],
        "reason": ["; ".join(r) for r in reasons if r],
    })
    good = out.loc[~bad].reset_index(drop=True)
    for code in codes:
        good[FLAG_PREFIX + code] = good[FLAG_PREFIX + code].astype(np.int64)
    for col in good.columns:
        if col.startswith(NONFAMILY_PREFIX):
            good[col] = good[col].astype(np.int64)
    for col in ("available", "calls"):
        if col in good.columns and not good[col].isna().any():
            good[col] = good[col].astype(np.int64)

    summary = {
        "rows": n,
        "accepted": int(len(good)),
        "rejected": int(bad.sum()),
        "locations": int(good["location_id"].nunique()),
        "unidentified_cbsa": int(sum("unidentified CBSA" in r for r in reasons)),
    }
    return IngestResult(frame=good, rejects=rejects, n_rows=n, summary=summary)


def _safe_day_type(text: str) -> str:
    try:
        return day_type_from_date(text)
    except ValueError:
        return ""


def filter_min_respondents(frame: pd.DataFrame, minimum: int) -> pd.DataFrame:
    """Drop locations with fewer than ``minimum`` respondents."""
    if minimum <= 0:
        return frame
    counts = frame.groupby("location_id")["location_id"].transform("size")
    return frame.loc[counts >= minimum].reset_index(drop=True)
