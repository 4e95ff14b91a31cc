"""Command-line front door: synth, forecast, tune, evaluate.

Exit codes: 0 success, 1 configuration error, 2 data or horizon error,
3 numerical failure. Options may also come from a key=value config file
passed with --config; explicit flags win.
"""
from __future__ import annotations

import argparse
import sys
from datetime import datetime
from pathlib import Path

from . import __version__
from .dataio import (
    ingest_load_csv,
    ingest_temperature_csv,
    read_params,
    read_quantile_csv,
    write_load_csv,
    write_params,
    write_quantile_csv,
    write_temperature_csv,
)
from .errors import (
    BracketFailure,
    EmptyFile,
    EmptyHistory,
    EmptyTasks,
    EmptyWindow,
    GapTooLarge,
    HorizonMismatch,
    IndexOutOfRange,
    Infeasible,
    InsufficientHistory,
    InvalidConfig,
    IoError,
    LoadQuantError,
    MalformedRow,
    MaxEvaluationsExceeded,
    MissingPriorYear,
    NoMatchingPeriod,
    NonFiniteObjective,
    NoTasks,
    RankDeficient,
    Unbounded,
    WeightsMissing,
    WindowOutsideHistory,
    WrongColumnCount,
    ZeroActual,
)
from .evaluation import (
    MethodScore,
    TaskScore,
    benchmark_forecast,
    pinball_score,
    write_plot_data,
    write_score_csv,
)
from .kernels import (
    CKD_T,
    CKD_W,
    KDE_W,
    KernelParams,
    cross_validate_kernel,
    forecast_kernel,
)
from .mixing import (
    DEFAULT_WEIGHT_GRID,
    HybridTask,
    hybrid,
    mix1,
    mix2,
    read_weights,
    train_weights,
    write_weights,
)
from .quantreg import qr_forecast
from .series import mean_temperature
from .synth import SynthConfig, generate_synthetic
from .tempmodel import fit_temperature, forecast_temperature

_CONFIG_ERRORS = (InvalidConfig, WeightsMissing)
_DATA_ERRORS = (
    MalformedRow,
    GapTooLarge,
    EmptyFile,
    WrongColumnCount,
    IndexOutOfRange,
    IoError,
    EmptyHistory,
    NoMatchingPeriod,
    EmptyWindow,
    WindowOutsideHistory,
    InsufficientHistory,
    HorizonMismatch,
    MissingPriorYear,
    NoTasks,
    EmptyTasks,
)
_NUMERIC_ERRORS = (
    MaxEvaluationsExceeded,
    NonFiniteObjective,
    Infeasible,
    Unbounded,
    RankDeficient,
    ZeroActual,
    BracketFailure,
)

FORECAST_METHODS = (KDE_W, CKD_W, CKD_T, "qr", "mix1", "mix2", "hybrid", "benchmark")
TUNE_METHODS = (KDE_W, CKD_W, "ckd-w2", CKD_T, "hybrid-weights")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise InvalidConfig(message)


def _parse_ts(text: str) -> datetime:
    try:
        return datetime.strptime(text, "%Y-%m-%dT%H:%M")
    except ValueError:
        raise InvalidConfig(f"bad timestamp {text!r}, expected YYYY-MM-DDTHH:MM") from None


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(round((hi - lo) / step)) + 1
        return [round(lo + i * step, 10) for i in range(n)]
    return [float(x) for x in text.split(",")]


def _build_parser() -> _Parser:
    parser = _Parser(prog="loadquant", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic load/temperature CSVs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--years", type=int, default=4)
    p.add_argument("--start-year", type=int, default=2008)
    p.add_argument("--load-noise", type=float, default=None)
    p.add_argument("--temp-noise", type=float, default=None)

    p = sub.add_parser("forecast", help="write a quantile forecast CSV")
    p.add_argument("--method", required=True, choices=FORECAST_METHODS)
    p.add_argument("--load", required=True, help="load history CSV")
    p.add_argument("--temps", help="25-station temperature CSV (ckd-t)")
    p.add_argument("--horizon-start", required=True)
    p.add_argument("--horizon-hours", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params", help="kernel params file from `tune`")
    p.add_argument("--window-days", type=int, default=500)
    p.add_argument("--weights", help="hybrid weights file from `tune`")
    p.add_argument("--ckdw-csv", help="component forecast for mixes")
    p.add_argument("--ckdt-csv", help="day-one component forecast for mixes")
    p.add_argument("--qr-csv", help="component forecast for mix2/hybrid")
    p.add_argument("--circular-week", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--config", help="key=value defaults file")

    p = sub.add_parser("tune", help="cross-validate kernel params or hybrid weights")
    p.add_argument("--method", required=True, choices=TUNE_METHODS)
    p.add_argument("--load", help="load history CSV")
    p.add_argument("--temps", help="temperature CSV (ckd-t)")
    p.add_argument("--validation-start")
    p.add_argument("--validation-hours", type=int)
    p.add_argument("--lambda-grid", default="0.92:1.0:0.01")
    p.add_argument("--weight-grid")
    p.add_argument("--task", action="append", default=[],
                   help="ckdw.csv,qr.csv,actuals.csv triple (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="per-grid-point loss log (default <out>.log)")
    p.add_argument("--circular-week", action="store_true")
    p.add_argument("--config", help="key=value defaults file")

    p = sub.add_parser("evaluate", help="score forecast CSVs against actuals")
    p.add_argument("--forecast", action="append", required=True,
                   help="name=path of a forecast CSV (repeatable)")
    p.add_argument("--actuals", required=True, help="realized load CSV for the horizon")
    p.add_argument("--history", required=True, help="load CSV covering the prior year")
    p.add_argument("--out", required=True)
    p.add_argument("--plot-data", help="optional task,method,pinball export")
    p.add_argument("--task-id", type=int, default=1)
    p.add_argument("--config", help="key=value defaults file")
    return parser


def _apply_config_file(parser: _Parser, argv: list[str]) -> None:
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    values = read_params(path)
    mapped = {}
    for key, val in values.items():
        mapped[key.replace("-", "_")] = val
    known = set()
    for action_group in parser._subparsers._group_actions:  # noqa: SLF001
        for sub in action_group.choices.values():
            known.update(a.dest for a in sub._actions)  # noqa: SLF001
    unknown = set(mapped) - known
    if unknown:
        raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
    for sub_action in parser._subparsers._group_actions:  # noqa: SLF001
        for sub in sub_action.choices.values():
            coerced = {}
            for action in sub._actions:  # noqa: SLF001
                if action.dest in mapped:
                    raw = mapped[action.dest]
                    if action.type is not None:
                        raw = action.type(raw)
                    elif not isinstance(raw, str):
                        raw = str(raw)
                    coerced[action.dest] = raw
                    action.required = False
            sub.set_defaults(**coerced)


def _cmd_synth(args) -> int:
    kwargs = dict(years=args.years, start_year=args.start_year)
    if args.load_noise is not None:
        kwargs["load_noise_sd"] = args.load_noise
    if args.temp_noise is not None:
        kwargs["temp_noise_sd"] = args.temp_noise
    data = generate_synthetic(SynthConfig(**kwargs), seed=args.seed)
    out = Path(args.out_dir)
    if not out.is_dir():
        raise IoError(f"output directory {out} does not exist")
    write_load_csv(data.load, out / "synthetic_load.csv")
    write_temperature_csv(data.temps, out / "synthetic_temperature.csv")
    write_params(data.params, out / "synthetic_metadata.txt")
    print(f"wrote {len(data.load)} hours to {out}")
    return 0


def _kernel_params_from_file(path: str | None) -> KernelParams:
    if not path:
        raise InvalidConfig("kernel methods require --params (run `tune` first)")
    raw = read_params(path)
    if "h_x" not in raw:
        raise InvalidConfig(f"params file {path} is missing h_x")
    return KernelParams(
        h_x=float(raw["h_x"]),
        lam=float(raw.get("lambda", 1.0)),
        h_w=float(raw["h_w"]) if "h_w" in raw else None,
        h_t=float(raw["h_t"]) if "h_t" in raw else None,
    )


def _cmd_forecast(args) -> int:
    horizon_start = _parse_ts(args.horizon_start)
    horizon = args.horizon_hours
    if horizon < 1:
        raise InvalidConfig("--horizon-hours must be >= 1")
    method = args.method

    if method in ("mix1", "mix2", "hybrid"):
        if not args.ckdw_csv or not args.ckdt_csv:
            raise InvalidConfig(f"{method} requires --ckdw-csv and --ckdt-csv")
        if method != "mix1" and not args.qr_csv:
            raise InvalidConfig(f"{method} requires --qr-csv")
        if method == "hybrid" and not args.weights:
            raise WeightsMissing("hybrid requires --weights (run `tune` first)")
        ckdw = read_quantile_csv(args.ckdw_csv)
        ckdt1 = read_quantile_csv(args.ckdt_csv)
        if method == "mix1":
            fc = mix1(ckdw, ckdt1)
        else:
            qr = read_quantile_csv(args.qr_csv)
            if method == "mix2":
                fc = mix2(ckdw, ckdt1, qr)
            else:
                fc = hybrid(ckdw, ckdt1, qr, read_weights(args.weights))
        write_quantile_csv(fc, args.out)
        print(f"wrote {fc.horizon_hours}x99 forecast to {args.out}")
        return 0

    full = ingest_load_csv(args.load)
    history = full.prefix(horizon_start) if full.covers(horizon_start) else full
    if method == "benchmark":
        fc = benchmark_forecast(history, horizon_start, horizon)
    elif method == "qr":
        fc = qr_forecast(
            history, horizon_start, horizon,
            window_days=args.window_days, workers=args.threads,
        )
    else:
        params = _kernel_params_from_file(args.params)
        temps = None
        temp_fc = None
        if method == CKD_T:
            if not args.temps:
                raise InvalidConfig("ckd-t requires --temps")
            table = ingest_temperature_csv(args.temps)
            mean = mean_temperature(table)
            mean_hist = mean.prefix(horizon_start) if mean.covers(horizon_start) else mean
            if len(mean_hist) > len(history):
                mean_hist = mean_hist.window(mean_hist.start, len(history))
            model = fit_temperature(mean_hist)
            temp_fc = forecast_temperature(model, mean_hist, horizon)
            temps = mean_hist
        fc = forecast_kernel(
            method, history, horizon_start, horizon, params,
            temps=temps, temp_forecast=temp_fc, circular_week=args.circular_week,
        )
    write_quantile_csv(fc, args.out)
    print(f"wrote {fc.horizon_hours}x99 forecast to {args.out}")
    return 0


def _cmd_tune(args) -> int:
    log_path = args.log or (args.out + ".log")
    if args.method == "hybrid-weights":
        if not args.task:
            raise InvalidConfig("hybrid-weights tuning requires at least one --task triple")
        tasks = []
        for spec in args.task:
            parts = spec.split(",")
            if len(parts) != 3:
                raise InvalidConfig(f"--task must be ckdw.csv,qr.csv,actuals.csv, got {spec!r}")
            tasks.append(
                HybridTask(
                    ckdw=read_quantile_csv(parts[0]),
                    qr=read_quantile_csv(parts[1]),
                    actuals=ingest_load_csv(parts[2]),
                )
            )
        grid = _parse_grid(args.weight_grid) if args.weight_grid else DEFAULT_WEIGHT_GRID
        weights = train_weights(tasks, grid)
        write_weights(weights, args.out)
        print(f"wrote weights to {args.out}")
        return 0

    if not args.load or not args.validation_start or args.validation_hours is None:
        raise InvalidConfig("kernel tuning requires --load, --validation-start, --validation-hours")
    history = ingest_load_csv(args.load)
    method = CKD_W if args.method == "ckd-w2" else args.method
    temps = None
    if method == CKD_T:
        if not args.temps:
            raise InvalidConfig("ckd-t tuning requires --temps")
        temps = mean_temperature(ingest_temperature_csv(args.temps))
    result = cross_validate_kernel(
        method,
        history,
        _parse_ts(args.validation_start),
        args.validation_hours,
        lambda_grid=_parse_grid(args.lambda_grid),
        temps=temps,
        bounded=(args.method == "ckd-w2"),
        circular_week=args.circular_week,
    )
    out = {"h_x": result.params.h_x, "lambda": result.params.lam}
    if result.params.h_w is not None:
        out["h_w"] = result.params.h_w
    if result.params.h_t is not None:
        out["h_t"] = result.params.h_t
    write_params(out, args.out)
    with open(log_path, "w", encoding="utf-8") as fh:
        for pt in result.grid:
            fh.write(f"{pt.lam},{pt.loss!r}\n")
    print(f"wrote params to {args.out} (grid log: {log_path})")
    return 0


def _cmd_evaluate(args) -> int:
    history = ingest_load_csv(args.history)
    actuals = ingest_load_csv(args.actuals)
    bench = benchmark_forecast(
        history.prefix(actuals.start) if history.covers(actuals.start) else history,
        actuals.start,
        len(actuals),
    )
    bench_pin = pinball_score(bench, actuals)
    rows = []
    for item in args.forecast:
        name, _, path = item.rpartition("=")
        if not name:
            name = Path(path).stem
        fc = read_quantile_csv(path)
        pin = pinball_score(fc, actuals)
        score = TaskScore.from_pinballs(args.task_id, pin, bench_pin)
        rows.append(
            MethodScore(
                method=name,
                task_id=args.task_id,
                pinball=pin,
                benchmark_pinball=bench_pin,
                improvement_pct=score.improvement_pct,
                weighted_score=score.improvement_pct,
            )
        )
    rows.sort(key=lambda r: (-r.weighted_score, r.method))
    write_score_csv(rows, args.out)
    if args.plot_data:
        write_plot_data(rows, args.plot_data)
    for r in rows:
        print(f"{r.method}: pinball={r.pinball:.4f} improvement={r.improvement_pct:.2f}%")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "forecast":
            return _cmd_forecast(args)
        if args.command == "tune":
            return _cmd_tune(args)
        return _cmd_evaluate(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LoadQuantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
