"""Command-line front end: ``python3 -m kintrends <command>``.

Exit status is 0 on success, 2 when inputs or configuration fail
validation, and 1 on any other error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from .core import ActivityCatalog, ActivityDay
from .io import ingest_respondents, read_locations, read_sampling_units, write_respondents
from .pipeline import (
    VALIDATION_ERRORS,
    PipelineConfig,
    StageError,
    _file_digest,
    _Writer,
    calibrate_frame,
    diagnostic_tables,
    fit_availability,
    ranking_tables,
    run,
    simulate_inputs,
    trend_tables,
)
from .raking import RakingSpec

log = logging.getLogger("kintrends")


def _csv_list(text, cast=str):
    return tuple(cast(x) for x in text.split(",") if x)


def _kappa(text):
    out = {}
    for item in _csv_list(text):
        code, _, value = item.partition("=")
        out[code] = float(value)
    return out


def _args_hash(args) -> str:
    d = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        if isinstance(value, str) and Path(value).is_file():
            value = _file_digest(value)
        elif isinstance(value, tuple):
            value = list(value)
        d[key] = value
    return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def read_estimates(path) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"location_id": str, "alpha": str, "flag": str}, keep_default_na=False,
                        na_values={"value": [""], "weight": [""]})
    return frame.drop(columns=["config_hash"], errors="ignore")


# -- commands ----------------------------------------------------------------------


def cmd_simulate(args) -> int:
    from .generative import synthetic_cities

    kwargs = {}
    if args.stratum_size is not None:
        kwargs["stratum_size"] = args.stratum_size
    params = synthetic_cities(
        n_cities=args.n_cities,
        seed=args.seed,
        phi_at_p6=args.phi_at_p6,
        phi_slope=args.phi_slope,
        kappa=_kappa(args.kappa) if args.kappa else None,
        respondents_per_capita=args.respondents_per_capita,
        **kwargs,
    )
    overrides = {"n_u": args.n_u, "n_v": args.n_v}
    simulate_inputs(args.out_dir, params, seed=args.seed, config_overrides=overrides)
    print(f"wrote synthetic inputs to {args.out_dir}")
    return 0


def cmd_calibrate(args) -> int:
    res = ingest_respondents(args.respondents)
    spec = RakingSpec.from_json(args.raking)
    frame, report, stages = calibrate_frame(res.frame, spec)
    write_respondents(frame, args.out)
    if args.report:
        report.assign(config_hash=_args_hash(args)).to_csv(args.report, index=False, lineterminator="\n")
    for s in stages:
        print(f"{s.name}: iterations={s.iterations} converged={s.converged} max_rel_error={s.max_rel_error:.3g}")
    return 0


def cmd_estimate(args) -> int:
    from .estimators import city_estimates

    locations = read_locations(args.locations)
    inter = ingest_respondents(args.interaction, locations=locations).frame
    avail = ingest_respondents(args.availability, locations=locations, require_interactions=False).frame \
        if args.availability else inter
    fit = fit_availability(avail)
    catalog = ActivityCatalog.default(social=_csv_list(args.social_codes))
    alphas = [ActivityDay.parse(a) for a in _csv_list(args.alphas)]
    est = city_estimates(inter, avail, alphas, _csv_list(args.ks, int), fit, catalog)
    est = est.assign(p=[locations[g].log_population for g in est["location_id"]])
    out = _out_dir(args.out_dir)
    w = _Writer(out, _args_hash(args))
    w.csv("estimates.csv", est)
    w.json("availability_fit.json", fit.to_json())
    print(f"{len(est)} estimate rows for {est['location_id'].nunique()} cities")
    return 0


def cmd_trend(args) -> int:
    locations = read_locations(args.locations)
    est = read_estimates(args.estimates)
    t = trend_tables(est, locations, args.bandwidth, args.n_u, args.n_v, args.grid_export_points)
    w = _Writer(_out_dir(args.out_dir), _args_hash(args))
    w.csv("trends_wls.csv", t.wls)
    w.csv("spline_fits.csv", t.spline_fits)
    w.csv("spline_curves.csv", t.spline_curves)
    w.csv("modal_curves.csv", t.modal_curves)
    w.csv("collapse.csv", t.collapse)
    if args.grid_export_points > 0:
        w.csv("grids.csv", t.grids)
    w.json("grids_meta.json", t.grid_meta)
    for note in t.notes:
        log.warning(note)
    print(t.wls[["quantity", "alpha", "k", "beta1", "se1", "p_value", "stars"]].to_string(index=False))
    return 0


def cmd_diagnose(args) -> int:
    locations = read_locations(args.locations)
    frame = ingest_respondents(args.respondents, locations=locations).frame
    units = read_sampling_units(args.units) if args.units else None
    catalog = ActivityCatalog.default(social=_csv_list(args.social_codes))
    tables = diagnostic_tables(frame, locations, ActivityDay.parse(args.alpha), catalog, units,
                               args.characteristic, args.bins)
    w = _Writer(_out_dir(args.out_dir), _args_hash(args))
    for name, table in tables.items():
        w.csv(f"{name}.csv", table)
    print("wrote " + ", ".join(f"{n}.csv" for n in sorted(tables)))
    return 0


def cmd_rank(args) -> int:
    locations = read_locations(args.locations)
    est = read_estimates(args.estimates)
    est = est[est["quantity"].isin(["lambda", "t"])]
    t = trend_tables(est, locations, args.bandwidth, args.n_u, args.n_v, grid_export_points=0)
    tables = ranking_tables(est, locations, t.density)
    w = _Writer(_out_dir(args.out_dir), _args_hash(args))
    for q, table in tables.items():
        w.csv(f"rankings_{q}.csv", table)
        head = table.groupby("alpha").head(args.top)
        print(f"-- {q}")
        print(head[["alpha", "location_id", "name", "mean_rank"]].to_string(index=False))
    return 0


def cmd_run(args) -> int:
    cfg = PipelineConfig.from_json(args.config)
    for key in ("output_dir", "seed", "bandwidth", "n_u", "n_v"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.filter_min_respondents:
        cfg.filter_min_respondents = True
    out = run(cfg)
    print(f"outputs in {out}")
    return 0


# -- parser ------------------------------------------------------------------------


def _grid_flags(p, defaults=True):
    p.add_argument("--bandwidth", type=float, default=0.75 if defaults else None,
                   help="KDE bandwidth factor (default 0.75)")
    p.add_argument("--n-u", type=int, default=2000 if defaults else None)
    p.add_argument("--n-v", type=int, default=2000 if defaults else None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kintrends", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic input set and config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-cities", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi-at-p6", type=float, default=0.7)
    p.add_argument("--phi-slope", type=float, default=-0.1)
    p.add_argument("--kappa", help="per-code propensities, e.g. 12=0.25,11=0.15,04=0.08")
    p.add_argument("--respondents-per-capita", type=float, default=1e-4)
    p.add_argument("--stratum-size", type=int)
    p.add_argument("--n-u", type=int, default=2000)
    p.add_argument("--n-v", type=int, default=2000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="rake respondent weights")
    p.add_argument("--respondents", required=True)
    p.add_argument("--raking", required=True, help="raking spec JSON")
    p.add_argument("--out", required=True, help="respondent CSV with new weights")
    p.add_argument("--report", help="marginal report CSV")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("estimate", help="per-city f, phi, lambda, t, r")
    p.add_argument("--interaction", required=True)
    p.add_argument("--availability")
    p.add_argument("--locations", required=True)
    p.add_argument("--alphas", default="any:any,social:any,care:any")
    p.add_argument("--ks", default="1,2,3")
    p.add_argument("--social-codes", default="11,12,13")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("trend", help="WLS, spline and modal trends from an estimates table")
    p.add_argument("--estimates", required=True)
    p.add_argument("--locations", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--grid-export-points", type=int, default=100)
    _grid_flags(p)
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("diagnose", help="coverage, call statistic and non-response tables")
    p.add_argument("--respondents", required=True)
    p.add_argument("--locations", required=True)
    p.add_argument("--units", help="sampling units CSV")
    p.add_argument("--characteristic", help="respondent column matching the units' characteristic")
    p.add_argument("--alpha", default="any:any")
    p.add_argument("--social-codes", default="11,12,13")
    p.add_argument("--bins", type=int, default=8)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("rank", help="weighted z-score city rankings")
    p.add_argument("--estimates", required=True)
    p.add_argument("--locations", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--top", type=int, default=10)
    _grid_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("run", help="full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--filter-min-respondents", action="store_true")
    _grid_flags(p, defaults=False)
    p.set_defaults(func=cmd_run)
    return parser


def _is_validation(exc: BaseException) -> bool:
    if isinstance(exc, StageError):
        exc = exc.cause
    return isinstance(exc, VALIDATION_ERRORS)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # exit status carries the class of failure
        print(f"kintrends {args.command}: {exc}", file=sys.stderr)
        if args.verbose:
            log.exception("traceback")
        return 2 if _is_validation(exc) else 1


if __name__ == "__main__":
    sys.exit(main())
