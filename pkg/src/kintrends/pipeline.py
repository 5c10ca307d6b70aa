"""End-to-end batch analysis: ingest, calibrate, estimate, trends, diagnostics, rankings.

Outputs are written into a temporary sibling directory and moved into place
only when every stage has succeeded. ``manifest.json`` lists the sha256 of
every output together with the seed, library versions and the config hash;
it carries no timestamps, so identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import shutil
import tempfile
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from . import __version__
from .availability import BinnedFit, bin_proportions, fit_binned_nb
from .core import ActivityCatalog, ActivityDay, Location, ValidationError
from .diagnostics import (
    binned_means,
    call_table,
    coverage_table,
    nonresponse_regressions,
    nonresponse_table,
    ranking_table,
    weighted_zscore,
)
from .estimators import city_estimates, national_average_propensity
from .io import (
    IngestResult,
    SchemaError,
    filter_min_respondents,
    ingest_respondents,
    read_crosswalk,
    read_locations,
    read_sampling_units,
)
from .modal import (
    DegenerateDataError,
    EmptyColumnWarning,
    grid_to_long,
    modal_regression,
    scaled_collapse,
    weighted_kde_grid,
)
from .raking import RakingError, RakingSpec, marginal_report, rake
from .spline import fit_spline, sample_curve
from .wls import DegenerateRegressionError, wls_fit

log = logging.getLogger(__name__)

STAGES = ("ingest", "calibrate", "estimate", "trends", "diagnostics", "rankings")
FLOAT_FORMAT = "%.12g"
_PATH_FIELDS = ("population_path", "interaction_path", "availability_path", "sampling_units_path",
                "crosswalk_path", "raking_path")


class ConfigError(ValueError):
    pass


class OverwriteError(RuntimeError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


VALIDATION_ERRORS = (ConfigError, OverwriteError, SchemaError, ValidationError, RakingError, FileNotFoundError)


@dataclass
class PipelineConfig:
    """Inputs and settings of one analysis run.

    ``availability_path`` may be omitted when the interaction survey also
    carries ``availability_bin``. Relative paths are resolved against the
    directory of the JSON config they were read from.
    """

    population_path: str
    interaction_path: str
    availability_path: str | None = None
    sampling_units_path: str | None = None
    crosswalk_path: str | None = None
    raking_path: str | None = None
    output_dir: str = "kintrends-out"
    alphas: tuple[str, ...] = ("any:any", "social:any", "care:any")
    ks: tuple[int, ...] = (1, 2, 3)
    filter_min_respondents: bool = False
    min_interaction_respondents: int = 30
    min_availability_respondents: int = 10
    bandwidth: float = 0.75
    n_u: int = 2000
    n_v: int = 2000
    grid_export_points: int = 100
    seed: int = 0
    duration_unit: str = "hours"
    nonresponse_characteristic: str | None = None
    population_bins: int = 8
    social_codes: tuple[str, ...] = ("11", "12", "13")

    def __post_init__(self):
        self.alphas = tuple(self.alphas)
        self.ks = tuple(int(k) for k in self.ks)
        self.social_codes = tuple(self.social_codes)

    def validate(self) -> None:
        if not self.ks or any(k < 1 for k in self.ks):
            raise ConfigError("k values must be >= 1")
        if self.min_interaction_respondents < 0 or self.min_availability_respondents < 0:
            raise ConfigError("respondent thresholds must be >= 0")
        if not self.bandwidth > 0:
            raise ConfigError("bandwidth must be positive")
        if self.n_u < 2 or self.n_v < 2:
            raise ConfigError("grid needs at least 2 tiles per axis")
        if self.population_bins < 1:
            raise ConfigError("population_bins must be >= 1")
        try:
            catalog = self.catalog()
            for alpha in self.activity_days():
                catalog.constituents(alpha.activity)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        for name in _PATH_FIELDS:
            value = getattr(self, name)
            if value is not None and not Path(value).is_file():
                raise ConfigError(f"{name}: no such file {value}")

    def activity_days(self) -> list[ActivityDay]:
        return [ActivityDay.parse(a) for a in self.alphas]

    def catalog(self) -> ActivityCatalog:
        return ActivityCatalog.default(social=self.social_codes)

    @classmethod
    def from_dict(cls, data: Mapping, base: str | Path | None = None) -> PipelineConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        data = dict(data)
        if base is not None:
            for name in _PATH_FIELDS + ("output_dir",):
                if data.get(name) is not None:
                    data[name] = str(Path(base) / data[name])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> PipelineConfig:
        path = Path(path)
        with open(path) as fh:
            return cls.from_dict(json.load(fh), base=path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("alphas", "ks", "social_codes"):
            d[key] = list(d[key])
        return d

    def hash(self) -> str:
        """sha256 over settings and input file contents (not paths or the output directory)."""
        d = self.to_dict()
        d.pop("output_dir")
        for name in _PATH_FIELDS:
            if d[name] is not None:
                d[name] = _file_digest(d[name])
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- stage functions ---------------------------------------------------------------


def calibrate_frame(frame: pd.DataFrame, spec: RakingSpec) -> tuple[pd.DataFrame, pd.DataFrame, list]:
    """Rake the ``weight`` column; returns the new frame, a marginal report and stage reports."""
    result = rake(frame, spec)
    out = frame.copy()
    out["weight"] = result.weights.to_numpy()
    report = marginal_report(out, "weight", spec)
    return out, report, result.stages


def fit_availability(frame: pd.DataFrame) -> BinnedFit:
    bins = frame["availability_bin"]
    if bins.isna().any():
        raise ValidationError("availability survey has respondents without availability_bin")
    return fit_binned_nb(bin_proportions(bins.to_numpy(), frame["weight"].to_numpy()))


def national_table(estimates: pd.DataFrame) -> pd.DataFrame:
    lam = estimates[estimates["quantity"] == "lambda"]
    rows = []
    for (alpha, k), sub in lam.groupby(["alpha", "k"], sort=True):
        rows.append((alpha, int(k), national_average_propensity(sub["value"], sub["n"]), len(sub)))
    return pd.DataFrame(rows, columns=["alpha", "k", "lambda", "cities"])


def series_iter(estimates: pd.DataFrame, locations: Mapping[str, Location]):
    """Yield ``((quantity, alpha, k), u, v, w, ids)`` per trend series in sorted order."""
    for (q, alpha, k), sub in estimates.groupby(["quantity", "alpha", "k"], sort=True):
        sub = sub.sort_values("location_id")
        u = np.array([locations[g].log_population for g in sub["location_id"]])
        yield (q, alpha, int(k)), u, sub["value"].to_numpy(float), sub["weight"].to_numpy(float), sub["location_id"].tolist()


@dataclass
class TrendOutputs:
    wls: pd.DataFrame
    spline_fits: pd.DataFrame
    spline_curves: pd.DataFrame
    modal_curves: pd.DataFrame
    grids: pd.DataFrame
    grid_meta: dict
    collapse: pd.DataFrame
    notes: list[str] = field(default_factory=list)
    density: dict = field(default_factory=dict)


def trend_tables(
    estimates: pd.DataFrame,
    locations: Mapping[str, Location],
    bandwidth: float = 0.75,
    n_u: int = 2000,
    n_v: int = 2000,
    grid_export_points: int = 100,
) -> TrendOutputs:
    wls_rows, fit_rows, curves, modal, grids, notes = [], [], [], [], [], []
    meta, density = {}, {}
    for key, u, v, w, _ in series_iter(estimates, locations):
        q, alpha, k = key
        tag = f"{q}/{alpha or '-'}/k{k}"
        try:
            fit = wls_fit(u, v, w)
            wls_rows.append((q, alpha, k, fit.beta1, fit.se1, fit.beta0, fit.t_value, fit.p_value, fit.stars,
                             fit.r2, fit.adj_r2, fit.ci95[0], fit.ci95[1], fit.n))
        except DegenerateRegressionError as exc:
            notes.append(f"wls skipped {tag}: {exc}")
        try:
            sfit = fit_spline(u, v, w)
            fit_rows.append((q, alpha, k, sfit.eta, sfit.gcv_score, sfit.effective_df, len(u)))
            curve = sample_curve(sfit)
            curves.append(curve.assign(quantity=q, alpha=alpha, k=k))
        except ValueError as exc:
            notes.append(f"spline skipped {tag}: {exc}")
        try:
            grid = weighted_kde_grid(u, v, w, bandwidth=bandwidth, n_u=n_u, n_v=n_v)
        except DegenerateDataError as exc:
            notes.append(f"modal skipped {tag}: {exc}")
            continue
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", EmptyColumnWarning)
            mc = modal_regression(grid)
        notes.extend(f"modal {tag}: {c.message}" for c in caught)
        modal.append(mc.assign(quantity=q, alpha=alpha, k=k))
        density[key] = grid
        meta[tag] = grid.metadata()
        if grid_export_points > 0:
            grids.append(grid_to_long(grid, grid_export_points).assign(quantity=q, alpha=alpha, k=k))

    collapse = []
    modal_by_key = {(m["quantity"].iat[0], m["alpha"].iat[0], int(m["k"].iat[0])): m for m in modal if len(m)}
    for (q, k) in sorted({(q, k) for q, _, k in modal_by_key if q in ("f", "lambda")}):
        group = {a: m for (qq, a, kk), m in modal_by_key.items() if qq == q and kk == k}
        try:
            scaled = scaled_collapse(group)
        except (ValueError, ZeroDivisionError) as exc:
            notes.append(f"collapse skipped {q}/k{k}: {exc}")
            continue
        for a, df in scaled.items():
            collapse.append(df.assign(quantity=q, alpha=a, k=k))

    def cat(parts, cols):
        if not parts:
            return pd.DataFrame(columns=cols)
        return pd.concat(parts, ignore_index=True)[cols]

    return TrendOutputs(
        wls=pd.DataFrame(wls_rows, columns=["quantity", "alpha", "k", "beta1", "se1", "beta0", "t_value",
                                            "p_value", "stars", "r2", "adj_r2", "ci_low", "ci_high", "n"]),
        spline_fits=pd.DataFrame(fit_rows, columns=["quantity", "alpha", "k", "eta", "gcv", "effective_df", "n"]),
        spline_curves=cat(curves, ["quantity", "alpha", "k", "u", "v"]),
        modal_curves=cat(modal, ["quantity", "alpha", "k", "i", "u", "v"]),
        grids=cat(grids, ["quantity", "alpha", "k", "u", "v", "density", "conditional", "normalized"]),
        grid_meta=meta,
        collapse=cat(collapse, ["quantity", "alpha", "k", "u", "v", "scaled"]),
        notes=notes,
        density=density,
    )


def diagnostic_tables(
    frame: pd.DataFrame,
    locations: Mapping[str, Location],
    alpha: ActivityDay,
    catalog: ActivityCatalog,
    units: pd.DataFrame | None = None,
    characteristic: str | None = None,
    n_bins: int = 8,
) -> dict[str, pd.DataFrame]:
    out = {"coverage": coverage_table(frame, {g: locations[g] for g in frame["location_id"].unique()})}
    if "calls" in frame.columns and not frame["calls"].isna().any():
        psi = call_table(frame, alpha, locations, catalog)
        out["psi"] = psi
        if len(psi):
            out["psi_binned"] = binned_means(psi, ["psi", "one_minus_psi"], n_bins)
    if units is not None and characteristic is not None:
        table = nonresponse_table(frame, units, alpha, characteristic, locations, catalog)
        out["nonresponse"] = table
        out["nonresponse_regressions"] = nonresponse_regressions(table)
    return out


def ranking_tables(estimates: pd.DataFrame, locations: Mapping[str, Location],
                   density: Mapping[tuple, object]) -> dict[str, pd.DataFrame]:
    """Weighted z-score rankings per quantity: ``lambda`` averaged over ``k``, and ``t``."""
    out = {}
    for q in ("lambda", "t"):
        parts = []
        sub = estimates[estimates["quantity"] == q]
        for alpha, by_alpha in sub.groupby("alpha", sort=True):
            rows = []
            for k, s in by_alpha.groupby("k", sort=True):
                grid = density.get((q, alpha, int(k)))
                if grid is None:
                    continue
                s = s.sort_values("location_id")
                u = [locations[g].log_population for g in s["location_id"]]
                z = weighted_zscore(s["value"].to_numpy(), u, grid, s["weight"].to_numpy())
                rows.append(pd.DataFrame({"location_id": s["location_id"].to_numpy(), "k": int(k),
                                          "value": s["value"].to_numpy(), "z": z}))
            if rows:
                table = ranking_table(pd.concat(rows, ignore_index=True), locations)
                table.insert(0, "alpha", alpha)
                parts.append(table)
        if parts:
            out[q] = pd.concat(parts, ignore_index=True)
    return out


# -- orchestration -----------------------------------------------------------------


class _Writer:
    def __init__(self, root: Path, config_hash: str):
        self.root = root
        self.config_hash = config_hash
        self.outputs: dict[str, str] = {}

    def csv(self, name: str, frame: pd.DataFrame) -> None:
        frame = frame.copy()
        frame.insert(0, "config_hash", self.config_hash)
        path = self.root / name
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.outputs[name] = _file_digest(path)

    def json(self, name: str, payload) -> None:
        path = self.root / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
        self.outputs[name] = _file_digest(path)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serialisable: {type(obj)}")


def versions() -> dict[str, str]:
    return {
        "kintrends": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def _check_output_dir(out: Path, config_hash: str) -> None:
    if not out.exists():
        return
    manifest = out / "manifest.json"
    if manifest.is_file():
        previous = json.loads(manifest.read_text()).get("config_hash")
        if previous != config_hash:
            raise OverwriteError(f"{out} holds outputs of config {previous}; refusing to overwrite with {config_hash}")
        return
    if any(out.iterdir()):
        raise OverwriteError(f"{out} exists, is not empty and has no manifest")


def _ingest_one(path, crosswalk, locations, unit, label, rejects, require_interactions=True):
    res: IngestResult = ingest_respondents(path, crosswalk, locations, duration_unit=unit,
                                           require_interactions=require_interactions)
    if res.n_accepted == 0:
        raise ValidationError(f"{label} survey: no valid respondents")
    rejects.append(res.rejects.assign(survey=label))
    return res


def run(config: PipelineConfig) -> Path:
    """Execute every stage and return the output directory.

    Raises
    ------
    StageError
        Wrapping the failure of any stage; no partial outputs remain.
    OverwriteError, ConfigError
        Before any work is done.
    """
    config.validate()
    config_hash = config.hash()
    out = Path(config.output_dir)
    _check_output_dir(out, config_hash)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    writer = _Writer(tmp, config_hash)
    catalog = config.catalog()
    alphas = config.activity_days()
    stage_log: dict[str, dict] = {}
    stage = "ingest"
    try:
        locations = read_locations(config.population_path)
        crosswalk = read_crosswalk(config.crosswalk_path) if config.crosswalk_path else None
        rejects = []
        inter = _ingest_one(config.interaction_path, crosswalk, locations, config.duration_unit, "interaction", rejects)
        if config.availability_path:
            avail = _ingest_one(config.availability_path, crosswalk, locations, config.duration_unit,
                                "availability", rejects, require_interactions=False)
        else:
            avail = inter
        iframe, aframe = inter.frame, avail.frame
        if config.filter_min_respondents:
            iframe = filter_min_respondents(iframe, config.min_interaction_respondents)
            aframe = filter_min_respondents(aframe, config.min_availability_respondents)
        writer.csv("rejects.csv", pd.concat(rejects, ignore_index=True)[["survey", "line", "respondent_id", "reason"]])
        stage_log["ingest"] = {
            "interaction": inter.summary,
            "availability": avail.summary,
            "interaction_cities": int(iframe["location_id"].nunique()),
            "availability_cities": int(aframe["location_id"].nunique()),
        }

        stage = "calibrate"
        if config.raking_path:
            spec = RakingSpec.from_json(config.raking_path)
            iframe, report, reports = calibrate_frame(iframe, spec)
            writer.csv("raking_report.csv", report)
            writer.csv("interaction_calibrated.csv", iframe)
            stage_log["calibrate"] = {"stages": [asdict(r) for r in reports]}
        else:
            stage_log["calibrate"] = {"stages": [], "note": "no raking spec; weights used as given"}

        stage = "estimate"
        fit = fit_availability(aframe)
        writer.json("availability_fit.json", fit.to_json())
        estimates = city_estimates(iframe, aframe, alphas, config.ks, fit, catalog)
        if estimates.empty:
            raise ValidationError("no city has both surveys")
        estimates = estimates.assign(p=[locations[g].log_population for g in estimates["location_id"]])
        writer.csv("estimates.csv", estimates)
        writer.csv("national.csv", national_table(estimates))
        stage_log["estimate"] = {"rows": len(estimates), "lambda_gt1": int((estimates["flag"] == "gt1").sum())}

        stage = "trends"
        trends = trend_tables(estimates, locations, config.bandwidth, config.n_u, config.n_v,
                              config.grid_export_points)
        writer.csv("trends_wls.csv", trends.wls)
        writer.csv("spline_fits.csv", trends.spline_fits)
        writer.csv("spline_curves.csv", trends.spline_curves)
        writer.csv("modal_curves.csv", trends.modal_curves)
        writer.csv("collapse.csv", trends.collapse)
        if config.grid_export_points > 0:
            writer.csv("grids.csv", trends.grids)
        writer.json("grids_meta.json", trends.grid_meta)
        stage_log["trends"] = {"series": len(trends.grid_meta), "notes": trends.notes}

        stage = "diagnostics"
        units = read_sampling_units(config.sampling_units_path) if config.sampling_units_path else None
        diag = diagnostic_tables(iframe, locations, alphas[0], catalog, units,
                                 config.nonresponse_characteristic, config.population_bins)
        for name, table in diag.items():
            writer.csv(f"{name}.csv", table)
        stage_log["diagnostics"] = {"tables": sorted(diag)}

        stage = "rankings"
        rankings = ranking_tables(estimates, locations, trends.density)
        for q, table in rankings.items():
            writer.csv(f"rankings_{q}.csv", table)
        stage_log["rankings"] = {"tables": sorted(rankings)}

        stage = "manifest"
        manifest = {
            "config_hash": config_hash,
            "seed": config.seed,
            "versions": versions(),
            "config": _portable_config(config),
            "stages": stage_log,
            "outputs": dict(sorted(writer.outputs.items())),
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    except BaseException as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        raise StageError(stage, exc) from exc

    if out.exists():
        shutil.rmtree(out)
    tmp.rename(out)
    return out


def _portable_config(config: PipelineConfig) -> dict:
    d = config.to_dict()
    d.pop("output_dir")
    for name in _PATH_FIELDS:
        if d[name] is not None:
            d[name] = {"name": Path(d[name]).name, "sha256": _file_digest(d[name])}
    return d


def load_manifest(out: str | Path) -> dict:
    return json.loads((Path(out) / "manifest.json").read_text())


def verify_outputs(out: str | Path) -> list[str]:
    """Names of manifest-listed outputs whose sha256 no longer matches."""
    out = Path(out)
    manifest = load_manifest(out)
    return [name for name, digest in manifest["outputs"].items() if _file_digest(out / name) != digest]


def city_counts(out: str | Path) -> Sequence[int]:
    m = load_manifest(out)["stages"]["ingest"]
    return m["interaction_cities"], m["availability_cities"]


# -- synthetic inputs --------------------------------------------------------------

SIMULATED_FILES = ("locations.csv", "interaction.csv", "availability.csv", "sampling_units.csv",
                   "raking.json", "truth.csv", "config.json")


def simulate_inputs(
    out_dir: str | Path,
    params,
    seed: int = 0,
    response_rate: tuple[float, float] = (0.3, 0.7),
    characteristic: str = "c_sex",
    config_overrides: Mapping | None = None,
) -> PipelineConfig:
    """Write a complete synthetic input set and a matching pipeline config.

    The interaction survey is drawn with ``seed`` and the availability survey
    with ``seed + 1``. Sampling units add non-respondents so that the
    response rate of every (location, characteristic) pair is uniform in
    ``response_rate``. The raking spec rakes ``location x sex``,
    ``location x age`` and ``location x day type`` in three stages.
    """
    from .generative import generate_survey, model_availability, model_interaction
    from .io import write_locations, write_respondents, write_sampling_units
    from .raking import population_spec

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_locations(params.locations, out / "locations.csv")

    inter = generate_survey(params, seed)
    latent = ["available", "availability_bin"]
    write_respondents(inter.drop(columns=latent), out / "interaction.csv")
    avail = generate_survey(params, seed + 1)
    keep = [c for c in avail.columns if not c.startswith(("a_", "t_", "nf_")) and c not in ("available", "calls")]
    write_respondents(avail[keep], out / "availability.csv")

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    units = []
    for (gid, c), sub in inter.groupby(["location_id", characteristic], sort=True):
        h = rng.uniform(*response_rate)
        n_non = int(round(len(sub) * (1.0 / h - 1.0)))
        units.append(pd.DataFrame({"location_id": gid, "characteristic": c,
                                   "responded": np.r_[np.ones(len(sub), int), np.zeros(n_non, int)]}))
    units = pd.concat(units, ignore_index=True)
    units.insert(0, "unit_id", np.arange(len(units)))
    write_sampling_units(units, out / "sampling_units.csv")

    population = {g: loc.population for g, loc in params.locations.items()}
    stage_vars = [[f"c_{n}"] for n in params.stratum_names] + [["day_type"]]
    day_shares = {"day_type": {"weekday": 1.0 - params.weekend_share, "weekend": params.weekend_share}}
    population_spec(inter, population, stage_vars, shares=day_shares).to_json(out / "raking.json")

    rows = []
    for gid in sorted(params.locations):
        phi = model_availability(params, gid)
        for alpha in ("any:any", "social:any", "care:any"):
            f = model_interaction(params, gid, ActivityDay.parse(alpha))
            rows.append((gid, alpha, f, phi, f / phi))
    pd.DataFrame(rows, columns=["location_id", "alpha", "f", "phi", "lambda"]).to_csv(
        out / "truth.csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    cfg = {
        "population_path": "locations.csv",
        "interaction_path": "interaction.csv",
        "availability_path": "availability.csv",
        "sampling_units_path": "sampling_units.csv",
        "raking_path": "raking.json",
        "output_dir": "results",
        "seed": int(seed),
        "nonresponse_characteristic": characteristic,
    }
    cfg.update(config_overrides or {})
    (out / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    return PipelineConfig.from_json(out / "config.json")
