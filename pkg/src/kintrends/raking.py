"""Multi-stage raking (iterative proportional fitting) of respondent weights.

A :class:`RakingSpec` is an ordered list of stages. Each stage holds one or
more margins; a margin names one or more respondent columns and a target
total for every combination of their values. Stages run in order; within a
stage, margins are matched in turn until the largest relative marginal error
falls below ``tolerance`` or ``max_iterations`` sweeps have run.

Cell keys are the column values cast to ``str`` and joined by ``"|"``.

JSON layout::

    {"tolerance": 1e-6, "max_iterations": 1000,
     "stages": [{"name": "sex-race",
                 "margins": [{"variables": ["location_id", "c_sex"],
                              "targets": {"10000|female": 5000.0, ...}}]}]}
"""

from __future__ import annotations

import json
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

DEFAULT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERATIONS = 1000
KEY_SEP = "|"


class RakingError(ValueError):
    pass


class StructuralZeroError(RakingError):
    pass


class InconsistentTotalsError(RakingError):
    pass


class UnclassifiedRespondentError(RakingError):
    pass


class StructuralZeroWarning(UserWarning):
    pass


class NonConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Margin:
    variables: tuple[str, ...]
    targets: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "targets", {str(k): float(v) for k, v in self.targets.items()})
        if any(t < 0 or not np.isfinite(t) for t in self.targets.values()):
            raise RakingError(f"margin {self.name}: targets must be finite and nonnegative")

    @property
    def name(self) -> str:
        return "x".join(self.variables)

    @property
    def total(self) -> float:
        return float(sum(self.targets.values()))


@dataclass(frozen=True)
class Stage:
    name: str
    margins: tuple[Margin, ...]

    def __post_init__(self):
        object.__setattr__(self, "margins", tuple(self.margins))
        if not self.margins:
            raise RakingError(f"stage {self.name!r} has no margins")


@dataclass(frozen=True)
class RakingSpec:
    stages: tuple[Stage, ...]
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.tolerance > 0:
            raise RakingError("tolerance must be positive")
        if self.max_iterations < 1:
            raise RakingError("max_iterations must be >= 1")
        for stage in self.stages:
            totals = [m.total for m in stage.margins]
            ref = max(totals)
            if ref > 0 and (ref - min(totals)) / ref > self.tolerance:
                raise InconsistentTotalsError(f"stage {stage.name!r}: margin totals differ: {totals}")

    @property
    def variables(self) -> list[str]:
        seen = []
        for stage in self.stages:
            for m in stage.margins:
                seen.extend(v for v in m.variables if v not in seen)
        return seen

    @classmethod
    def from_dict(cls, data: Mapping) -> RakingSpec:
        stages = [
            Stage(
                name=s.get("name", f"stage{i + 1}"),
                margins=[Margin(tuple(m["variables"]), m["targets"]) for m in s["margins"]],
            )
            for i, s in enumerate(data["stages"])
        ]
        return cls(
            stages=stages,
            tolerance=float(data.get("tolerance", DEFAULT_TOLERANCE)),
            max_iterations=int(data.get("max_iterations", DEFAULT_MAX_ITERATIONS)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> RakingSpec:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "stages": [
                {"name": s.name,
                 "margins": [{"variables": list(m.variables), "targets": dict(m.targets)} for m in s.margins]}
                for s in self.stages
            ],
        }

    def to_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


@dataclass
class StageReport:
    name: str
    iterations: int
    converged: bool
    max_rel_error: float
    dropped_cells: list[str] = field(default_factory=list)


@dataclass
class RakingResult:
    weights: pd.Series
    stages: list[StageReport]

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.stages)

    @property
    def iterations(self) -> int:
        return sum(s.iterations for s in self.stages)


def cell_keys(frame: pd.DataFrame, variables: Sequence[str]) -> pd.Series:
    missing = [v for v in variables if v not in frame.columns]
    if missing:
        raise UnclassifiedRespondentError(f"respondents lack columns {missing}")
    cols = frame[list(variables)]
    if cols.isna().any().any():
        raise UnclassifiedRespondentError(f"missing values in {list(variables)}")
    cols = cols.astype(str)
    key = cols.iloc[:, 0]
    for name in cols.columns[1:]:
        key = key + KEY_SEP + cols[name]
    return key


class _Compiled:
    """Integer cell codes and aligned targets for one margin."""

    def __init__(self, frame: pd.DataFrame, margin: Margin):
        keys = cell_keys(frame, margin.variables)
        unknown = sorted(set(keys) - set(margin.targets))
        if unknown:
            raise UnclassifiedRespondentError(f"margin {margin.name}: no target for cells {unknown[:5]}")
        labels = sorted(margin.targets)
        index = {lab: i for i, lab in enumerate(labels)}
        self.margin = margin
        self.labels = labels
        self.codes = keys.map(index).to_numpy(dtype=np.int64)
        self.targets = np.array([margin.targets[lab] for lab in labels])
        counts = np.bincount(self.codes, minlength=len(labels))
        conflict = (self.targets == 0) & (counts > 0)
        if conflict.any():
            bad = [labels[i] for i in np.flatnonzero(conflict)]
            raise StructuralZeroError(f"margin {margin.name}: zero target but respondents present in {bad}")
        empty = (self.targets > 0) & (counts == 0)
        self.dropped = [labels[i] for i in np.flatnonzero(empty)]
        if self.dropped:
            warnings.warn(
                f"margin {margin.name}: cells {self.dropped} have targets but no respondents; dropped",
                StructuralZeroWarning,
                stacklevel=3,
            )
        self.active = self.targets > 0

    def sums(self, w: np.ndarray) -> np.ndarray:
        return np.bincount(self.codes, weights=w, minlength=len(self.labels))

    def rel_error(self, w: np.ndarray) -> float:
        s = self.sums(w)
        live = self.active & (s > 0)
        if not live.any():
            return 0.0
        return float(np.max(np.abs(s[live] - self.targets[live]) / self.targets[live]))

    def scale(self, w: np.ndarray) -> np.ndarray:
        s = self.sums(w)
        factor = np.ones_like(s)
        live = s > 0
        factor[live] = self.targets[live] / s[live]
        return w * factor[self.codes]


def rake(frame: pd.DataFrame, spec: RakingSpec, weights: Sequence[float] | str = "weight") -> RakingResult:
    """Rake respondent weights through every stage of ``spec`` in order.

    Parameters
    ----------
    frame : DataFrame
        One row per respondent, with a column for every margin variable.
    spec : RakingSpec
    weights : str or array_like
        Initial weights (a column name or values aligned with ``frame``).

    Returns
    -------
    RakingResult
        Final weights indexed like ``frame`` and a report per stage. A stage
        that hits ``max_iterations`` is marked unconverged and a
        :class:`NonConvergenceWarning` is issued.
    """
    w = frame[weights].to_numpy(dtype=float) if isinstance(weights, str) else np.asarray(weights, dtype=float).copy()
    if w.shape != (len(frame),):
        raise RakingError("weights must align with respondents")
    if not np.all(w > 0) or not np.all(np.isfinite(w)):
        raise RakingError("initial weights must be positive and finite")

    reports = []
    for stage in spec.stages:
        compiled = [_Compiled(frame, m) for m in stage.margins]
        err = max(c.rel_error(w) for c in compiled)
        it = 0
        while err >= spec.tolerance and it < spec.max_iterations:
            for c in compiled:
                w = c.scale(w)
            it += 1
            err = max(c.rel_error(w) for c in compiled)
        converged = err < spec.tolerance
        if not converged:
            warnings.warn(
                f"stage {stage.name!r} stopped after {it} iterations with relative error {err:.3g}",
                NonConvergenceWarning,
                stacklevel=2,
            )
        dropped = [f"{c.margin.name}:{lab}" for c in compiled for lab in c.dropped]
        reports.append(StageReport(stage.name, it, converged, err, dropped))
    return RakingResult(weights=pd.Series(w, index=frame.index, name="weight"), stages=reports)


def marginal_report(frame: pd.DataFrame, weights: Sequence[float] | str, spec: RakingSpec) -> pd.DataFrame:
    """Achieved versus target totals for every cell of every margin."""
    w = frame[weights].to_numpy(dtype=float) if isinstance(weights, str) else np.asarray(weights, dtype=float)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StructuralZeroWarning)
        for stage in spec.stages:
            for margin in stage.margins:
                c = _Compiled(frame, margin)
                achieved = c.sums(w)
                for lab, a, t in zip(c.labels, achieved, c.targets):
                    rel = abs(a - t) / t if t > 0 else (0.0 if a == 0 else np.inf)
                    rows.append((stage.name, margin.name, lab, float(a), float(t), float(rel)))
    return pd.DataFrame(rows, columns=["stage", "margin", "cell", "achieved", "target", "rel_error"])


def population_spec(
    frame: pd.DataFrame,
    population: Mapping[str, float],
    stages: Sequence[Sequence[str]],
    shares: Mapping[str, Mapping[str, float]] | None = None,
    weights: Sequence[float] | str = "weight",
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> RakingSpec:
    """Build a per-location spec: each stage rakes ``location_id x variable`` margins.

    Targets for a variable are the location population times its share,
    taken from ``shares[variable]`` when given and otherwise from the current
    weighted shares within the location.
    """
    w = frame[weights].to_numpy(dtype=float) if isinstance(weights, str) else np.asarray(weights, dtype=float)
    built = []
    for i, variables in enumerate(stages):
        margins = []
        for var in variables:
            targets = {}
            for g, sub in frame.assign(_w=w).groupby("location_id", sort=True):
                pop = float(population[str(g)])
                if shares is not None and var in shares:
                    share = dict(shares[var])
                else:
                    tot = sub.groupby(sub[var].astype(str))["_w"].sum()
                    share = (tot / tot.sum()).to_dict()
                for val, sh in share.items():
                    targets[f"{g}{KEY_SEP}{val}"] = pop * float(sh)
            margins.append(Margin(("location_id", var), targets))
        built.append(Stage(f"stage{i + 1}", margins))
    return RakingSpec(tuple(built), tolerance, max_iterations)
