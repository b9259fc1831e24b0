from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from .blocks import BlockSummary, DailySeries, partition_years, series_from_yearly_values
from .config import AnalysisSettings, ExperimentSpec, load_config
from .errors import EXIT_IO, EXIT_NON_CONVERGENCE, EXIT_OK, MevError, ValidationError
from .export import EXPORT_FORMAT_CHOICES, export_daily_csv, export_gumbel_plot, write_columns, write_json, write_rows
from .fitting import FIT_METHOD_CHOICES, fit_gev, fit_gumbel, fit_tail
from .homogeneity import envelope_test
from .ingest import parse_daily_csv, select_interval
from .mev import MevModel, build_mev_model, mev_cdf, return_level_table, return_period, window_tail_fits
from .montecarlo import compare_estimators, generate_experiment
from .streams import replicate_rng

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
PRESET_CHOICES = ("experiment1", "experiment2", "experiment3")
FLAG_SETS = """\
flag sets:
  every command        --config --seed --workers -v
  data commands        --input --threshold --interval  (validate, fit-tail, fit-gev, mev-cdf,
                       return-level, homogeneity, trajectory)
  --method             fit-tail, mev-cdf, return-level, compare, homogeneity, trajectory
  --format csv|json    mev-cdf, return-level, compare, homogeneity, trajectory
  --reps               simulate, compare, homogeneity
  --widths             homogeneity, trajectory
  --threshold          also on compare, where it sets the experiment's h0
"""


def _interval(text: str) -> Tuple[int, int]:
    try:
        start, end = (int(part) for part in text.split("-", 1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START-END years, got {text!r}")
    if start > end:
        raise argparse.ArgumentTypeError(f"interval {text!r} ends before it starts")
    return start, end


def _updated(model: M, **updates: Any) -> M:
    """Copy of a settings model with the non-None `updates` applied and re-validated."""
    changes = {k: v for k, v in updates.items() if v is not None}
    if not changes:
        return model
    try:
        return type(model).model_validate({**model.model_dump(), **changes})
    except PydanticValidationError as e:
        raise ValidationError(f"invalid command-line override:\n{e}") from e


def _settings(args: argparse.Namespace) -> AnalysisSettings:
    settings = load_config(args.config) if args.config else AnalysisSettings()
    # --threshold and --method go to the station on data commands, to the experiment otherwise
    on_data = "input" in vars(args)
    station = _updated(
        settings.station,
        input_path=args.__dict__.get("input"),
        threshold_h0=args.__dict__.get("threshold") if on_data else None,
        seed=args.seed,
        replicates=args.__dict__.get("reps"),
        widths=args.__dict__.get("widths"),
        fit_method=args.__dict__.get("method") if on_data else None,
    )
    experiment = settings.experiment
    preset = args.__dict__.get("experiment")
    if preset:
        experiment = ExperimentSpec.preset(preset, **experiment.model_dump(exclude={"name", "regime_length", "parameter_table"}))
    experiment = _updated(
        experiment,
        seed=args.seed,
        replicates=args.__dict__.get("reps"),
        truth_maxima=args.__dict__.get("truth_maxima"),
        cardinality_range=args.__dict__.get("cardinality_range"),
        threshold_h0=None if on_data else args.__dict__.get("threshold"),
        fit_method=None if on_data else args.__dict__.get("method"),
        workers=args.workers,
    )
    return AnalysisSettings(station=station, experiment=experiment)


def _series(settings: AnalysisSettings, interval: Optional[Tuple[int, int]]) -> DailySeries:
    station = settings.station
    if station.input_path is None:
        raise ValidationError("no input series: pass --input or set station.input_path in the config")
    series = parse_daily_csv(station.input_path, station)
    if interval is not None:
        series = select_interval(series, *interval)
    return series


def _blocks(series: DailySeries, settings: AnalysisSettings) -> List[BlockSummary]:
    return partition_years(
        series,
        threshold_h0=settings.station.threshold_h0,
        wet_threshold=settings.station.wet_threshold,
    )


def _interval_label(series: DailySeries) -> str:
    years = series.years
    return f"{int(years.min())}-{int(years.max())}"


def _emit_json(obj: Any, out: Optional[str]) -> None:
    if out:
        print(f"Wrote {write_json(obj, out)}")
    else:
        print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_validate(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    series = _series(settings, args.interval)
    blocks = _blocks(series, settings)
    wet = int(np.sum(series.amounts > settings.station.wet_threshold))
    print(f"Parsed {settings.station.input_path}: records={len(series)}, years={len(blocks)}, wet days={wet}, missing={series.missing.size}")
    print(f"  interval: {_interval_label(series)}")
    degenerate = [b.block_id for b in blocks if b.degenerate]
    if degenerate:
        print(f"  years without wet days: {', '.join(degenerate)}")
    short = [b.block_id for b in blocks if b.n_days < 365]
    if short:
        print(f"  incomplete years: {', '.join(short)}")
    return EXIT_OK


def cmd_fit_tail(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    station = settings.station
    series = _series(settings, args.interval)
    wet = series.amounts[series.amounts > station.wet_threshold]
    report = fit_tail(wet, station.threshold_h0, method=station.fit_method, n_total=int(wet.size))
    _emit_json({"interval": _interval_label(series), "n_wet": int(wet.size), **report.to_dict()}, args.out)
    if not report.converged:
        print(f"error: tail fit did not converge: {report.diagnostics.get('message', '')}", file=sys.stderr)
        return EXIT_NON_CONVERGENCE
    return EXIT_OK


def cmd_fit_gev(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    series = _series(settings, args.interval)
    maxima = [b.annual_max for b in _blocks(series, settings) if not b.degenerate]
    doc = {
        "interval": _interval_label(series),
        "n_maxima": len(maxima),
        "gev": fit_gev(maxima).to_dict(),
        "gumbel": fit_gumbel(maxima).to_dict(),
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _model(args: argparse.Namespace, settings: AnalysisSettings) -> MevModel:
    if args.model:
        return MevModel.from_json(Path(args.model).read_text(encoding="utf-8"))
    station = settings.station
    blocks = _blocks(_series(settings, args.interval), settings)
    return build_mev_model(blocks, args.width, station.fit_method, h0=station.threshold_h0)


def cmd_mev_cdf(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    model = _model(args, settings)
    if args.save_model:
        Path(args.save_model).write_text(model.to_json() + "\n", encoding="utf-8")
        print(f"Wrote {args.save_model}")
    rows = []
    for y in args.y:
        rp = return_period(y, model)
        rows.append({"y_mm": y, "zeta": float(mev_cdf(y, model)), "return_period": rp.years, "saturated": rp.saturated})
    if args.out:
        write_rows(rows, args.out, ["y_mm", "zeta", "return_period", "saturated"], format=args.format)
        print(f"Wrote {args.out}")
    else:
        for row in rows:
            flag = " (saturated)" if row["saturated"] else ""
            print(f"  y={row['y_mm']:g} mm: zeta={row['zeta']:.10g}, T_r={row['return_period']:.6g} years{flag}")
    return EXIT_OK


def cmd_return_level(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    station = settings.station
    periods = args.periods or station.return_periods
    intervals = args.intervals or station.intervals or [args.interval]
    models: Dict[str, MevModel] = {}
    if args.model:
        models[Path(args.model).stem] = _model(args, settings)
    else:
        for interval in intervals:
            series = _series(settings, interval)
            models[_interval_label(series)] = build_mev_model(
                _blocks(series, settings), args.width, station.fit_method, h0=station.threshold_h0
            )
    rows = return_level_table(models, periods)
    if args.out:
        write_rows(rows, args.out, ["label", "return_period", "level_mm"], format=args.format)
        print(f"Wrote {args.out}")
    else:
        for row in rows:
            print(f"  {row['label']}: T_r={row['return_period']:g} years -> {row['level_mm']:.4f} mm")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    spec = settings.experiment
    yearly = generate_experiment(spec, replicate_rng(spec.seed, args.replicate))
    series = series_from_yearly_values(yearly, first_year=args.first_year, station=spec.name)
    out = export_daily_csv(series, args.out)
    print(f"Simulated {spec.name}: years={spec.n_years}, wet days={sum(v.size for v in yearly)}")
    print(f"Wrote {out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    spec = settings.experiment
    result = compare_estimators(spec, workers=spec.workers)
    out = export_gumbel_plot(result.series_list(), args.out, format=args.format)
    summary = write_json(result.summary(), Path(out).with_suffix(".summary.json"))
    print(f"Compared estimators on {spec.name}: replicates={result.replicates}, dropped={result.dropped}")
    print(f"Wrote {out}")
    print(f"Wrote {summary}")
    return EXIT_OK


def cmd_homogeneity(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    station = settings.station
    blocks = _blocks(_series(settings, args.interval), settings)
    result = envelope_test(
        blocks,
        station.widths,
        station.replicates,
        station.seed,
        fit_method=station.fit_method,
        h0=station.threshold_h0,
        workers=args.workers,
    )
    out = write_columns(result.columns(), args.out, format=args.format)
    summary = write_json(result.summary(args.consistent_fraction), Path(out).with_suffix(".summary.json"))
    for width, verdict in result.verdicts(args.consistent_fraction).items():
        print(f"  width {width}: inside={result.inside_fraction[width]:.3f} -> {verdict}")
    print(f"Wrote {out}")
    print(f"Wrote {summary}")
    return EXIT_OK


def cmd_trajectory(args: argparse.Namespace, settings: AnalysisSettings) -> int:
    station = settings.station
    blocks = _blocks(_series(settings, args.interval), settings)
    rows: List[Dict[str, Any]] = []
    for width in dict.fromkeys([*station.widths, len(blocks)]):
        if width > len(blocks):
            logger.warning("width %d skipped: only %d years", width, len(blocks))
            continue
        for wf in window_tail_fits(blocks, width, fit_method=station.fit_method, h0=station.threshold_h0):
            tail = wf.report.params if wf.ok else None
            rows.append(
                {
                    "width": width,
                    "window": wf.block.block_id,
                    "n_wet": wf.block.n_wet,
                    "C": tail.scale_C if tail else None,
                    "w": tail.shape_w if tail else None,
                    "status": "ok" if wf.ok else wf.reason,
                }
            )
    write_rows(rows, args.out, ["width", "window", "n_wet", "C", "w", "status"], format=args.format)
    print(f"Fitted {len(rows)} windows over widths {', '.join(str(w) for w in station.widths)} and the whole interval")
    print(f"Wrote {args.out}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, AnalysisSettings], int]] = {
    "validate": cmd_validate,
    "fit-tail": cmd_fit_tail,
    "fit-gev": cmd_fit_gev,
    "mev-cdf": cmd_mev_cdf,
    "return-level": cmd_return_level,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "homogeneity": cmd_homogeneity,
    "trajectory": cmd_trajectory,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="TOML or JSON settings file")
    common.add_argument("--seed", type=int, default=None, help="Random seed (overrides the config)")
    common.add_argument("--workers", type=int, default=None, help="Worker threads (default: $MEV_WORKERS or CPU count)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=str, default=None, help="Daily precipitation CSV (date, amount columns)")
    data.add_argument("--threshold", type=float, default=None, help="Tail threshold h0 in mm (default 10)")
    data.add_argument("--interval", type=_interval, default=None, help="Restrict to the years START-END")

    method = argparse.ArgumentParser(add_help=False)
    method.add_argument("--method", choices=FIT_METHOD_CHOICES, default=None, help="Weibull tail estimator")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", type=str, default=None, help="Saved MEV model JSON instead of --input")
    model.add_argument("--width", type=int, default=1, help="Years per tail-fit window")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=EXPORT_FORMAT_CHOICES, default="csv", help="Table output format")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--experiment", choices=PRESET_CHOICES, default=None, help="Built-in experiment preset")
    experiment.add_argument("--reps", type=int, default=None, help="Monte Carlo replicates")
    experiment.add_argument(
        "--cardinality-range",
        type=int,
        nargs=2,
        metavar=("LO", "HI"),
        default=None,
        help="Draw each year's wet-day count uniformly from LO..HI",
    )

    parser = argparse.ArgumentParser(
        prog="mev-extremes",
        description="Metastatistical extreme value analysis of daily rainfall",
        epilog=FLAG_SETS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", parents=[common, data], help="Parse and summarise a daily series")

    p = sub.add_parser("fit-tail", parents=[common, data, method], help="Fit the Weibull tail of wet-day amounts")
    p.add_argument("--out", type=str, default=None, help="Write the fit report JSON here instead of stdout")

    p = sub.add_parser("fit-gev", parents=[common, data], help="Fit GEV and Gumbel to the annual maxima")
    p.add_argument("--out", type=str, default=None, help="Write the fit reports JSON here instead of stdout")

    p = sub.add_parser("mev-cdf", parents=[common, data, method, model, output], help="Evaluate the MEV distribution at levels y")
    p.add_argument("y", type=float, nargs="+", help="Daily rainfall levels in mm")
    p.add_argument("--save-model", type=str, default=None, help="Also write the fitted model JSON")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default: print)")

    p = sub.add_parser("return-level", parents=[common, data, method, model, output], help="MEV return levels per interval")
    p.add_argument("--periods", type=float, nargs="+", default=None, help="Return periods in years")
    p.add_argument("--intervals", type=_interval, nargs="+", default=None, help="One table block per START-END interval")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default: print)")

    p = sub.add_parser("simulate", parents=[common, experiment], help="Write one synthetic daily series for an experiment")
    p.add_argument("--replicate", type=int, default=0, help="Replicate stream index")
    p.add_argument("--first-year", type=int, default=2001, help="Calendar year of the first synthetic year")
    p.add_argument("--out", type=str, default="out/simulated.csv", help="Output CSV path")

    p = sub.add_parser("compare", parents=[common, experiment, method, output], help="Median MEV/GEV/Gumbel curves against the truth")
    p.add_argument("--truth-maxima", type=int, default=None, help="Brute-force maxima in the truth curve")
    p.add_argument("--threshold", type=float, default=None, help="Tail threshold h0 in mm for the MEV fits (default 0)")
    p.add_argument("--out", type=str, default="out/compare.csv", help="Gumbel-plot output path")

    p = sub.add_parser("homogeneity", parents=[common, data, method, output], help="Percentile-envelope homogeneity test")
    p.add_argument("--reps", type=int, default=None, help="Synthetic homogeneous replicates")
    p.add_argument("--widths", type=int, nargs="+", default=None, help="Window widths in years")
    p.add_argument("--consistent-fraction", type=float, default=0.9, help="inside_fraction needed for a 'consistent' verdict")
    p.add_argument("--out", type=str, default="out/homogeneity.csv", help="Band/observed CSV output path")

    p = sub.add_parser("trajectory", parents=[common, data, method, output], help="Windowed tail parameters per width")
    p.add_argument("--widths", type=int, nargs="+", default=None, help="Window widths in years")
    p.add_argument("--out", type=str, default="out/trajectory.csv", help="Output CSV path")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    try:
        settings = _settings(args)
        return COMMANDS[args.cmd](args, settings)
    except MevError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
