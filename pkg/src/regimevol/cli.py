"""Command-line interface.

Subcommands mirror the pipeline stages so each one is usable standalone:
ingest, transform, test-unitroot, test-linearity, fit, compare, simulate,
and run (the whole chain).  Every failure prints one structured error line
to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import dataio, pipeline
from .errors import PipelineError, RegimevolError
from .linearity import terasvirta_first_order, terasvirta_zero_order
from .regimes import simulate as simulate_model
from .selection import compare as compare_models
from .series import log_returns, realized_volatility
from .stationarity import NULL_BREAK, TREND_BREAK, perron_detrend, phillips_perron


def _emit(payload: dict, output: str | None) -> None:
    if output:
        dataio.write_json(output, payload)
    else:
        print(json.dumps(dataio._plain(payload), sort_keys=True, indent=2))


def _cmd_ingest(args) -> int:
    prices = dataio.ingest(args.input)
    _emit(
        {
            "observations": len(prices),
            "first_date": prices.timestamps[0].isoformat(),
            "last_date": prices.timestamps[-1].isoformat(),
            "min_close": float(prices.values.min()),
            "max_close": float(prices.values.max()),
        },
        args.output,
    )
    return 0


def _cmd_transform(args) -> int:
    prices = dataio.ingest(args.input)
    returns = log_returns(prices)
    volatility = realized_volatility(returns, args.window, centered=not args.uncentered)
    os.makedirs(args.output_dir, exist_ok=True)
    returns_path = os.path.join(args.output_dir, "returns.csv")
    vol_path = os.path.join(args.output_dir, "volatility.csv")
    dataio.write_series_csv(
        returns_path,
        returns.values,
        index=[d.isoformat() for d in prices.timestamps[1:]],
        header=("date", "value"),
    )
    dataio.write_series_csv(
        vol_path,
        volatility.values,
        index=[d.isoformat() for d in prices.timestamps[args.window:]],
        header=("date", "value"),
    )
    print(f"wrote {returns_path} ({len(returns)} rows) and {vol_path} ({len(volatility)} rows)")
    return 0


def _cmd_test_unitroot(args) -> int:
    prices = dataio.ingest(args.input)
    if (args.break_date is None) == (args.break_index is None):
        raise RegimevolError("provide exactly one of --break-date / --break-index")
    if args.break_index is not None:
        break_index = args.break_index
    else:
        import datetime as dt

        target = dt.date.fromisoformat(args.break_date)
        matches = [i + 1 for i, d in enumerate(prices.timestamps) if d == target]
        if not matches:
            raise RegimevolError(f"break date {args.break_date} not found in input dates")
        break_index = matches[0]
    detrend = perron_detrend(prices, break_index, args.specification)
    pp = phillips_perron(detrend.residuals)
    _emit(
        {
            "break_index": break_index,
            "specification": detrend.specification,
            "detrend_coefficients": list(detrend.coefficients),
            "z_statistic": pp.z_statistic,
            "p_value": pp.p_value,
            "bandwidth": pp.bandwidth,
            "long_run_variance": pp.long_run_variance,
            "critical_values": {str(k): v for k, v in pp.critical_values.items()},
        },
        args.output,
    )
    return 0


def _cmd_test_linearity(args) -> int:
    values = dataio.read_series_csv(args.input)
    zero = terasvirta_zero_order(values, args.ar_order, args.significance)
    first = terasvirta_first_order(values, max(1, args.ar_order), args.significance)
    _emit(
        {
            "ar_order": args.ar_order,
            "significance": args.significance,
            "zero_order": pipeline._linearity_dict(zero),
            "first_order": pipeline._linearity_dict(first),
            "verdict": first.verdict,
        },
        args.output,
    )
    return 0


def _model_request_from_args(args) -> pipeline.ModelRequest:
    return pipeline.ModelRequest(
        kind=args.kind,
        order=args.order,
        regimes=args.regimes,
        transitions=args.transitions,
        threshold=args.threshold,
        delay=args.delay,
        min_fraction=args.min_fraction,
        gamma_lo=args.gamma_lo,
        gamma_hi=args.gamma_hi,
        gamma_step=args.gamma_step,
        gamma_points=args.gamma_points,
        hidden=args.hidden,
        restarts=args.restarts,
        standardize=not args.raw_inputs,
    )


def _cmd_fit(args) -> int:
    values = dataio.read_series_csv(args.input)
    request = _model_request_from_args(args)
    model = pipeline._fit_request(request, values, args.seed)
    os.makedirs(args.output_dir, exist_ok=True)
    model_path = os.path.join(args.output_dir, "model.json")
    fitted_path = os.path.join(args.output_dir, "fitted.csv")
    dataio.write_json(model_path, dataio.model_to_dict(model))
    if hasattr(model, "kind"):
        dataio.emit_plot_data(model, fitted_path, series=values)
    else:
        fitted, residuals = model.one_step(values)
        dataio.write_series_csv(
            fitted_path, fitted, index=range(model.order + 1, len(values) + 1),
            header=("index", "fitted"),
        )
    print(f"wrote {model_path} and {fitted_path}")
    return 0


def _parse_model_spec(spec: str) -> pipeline.ModelRequest:
    """Parse compact specs like ``setar:order=1,regimes=3``."""
    kind, _, rest = spec.partition(":")
    payload: dict = {"kind": kind.strip()}
    if rest:
        for part in rest.split(","):
            key, _, value = part.partition("=")
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise RegimevolError(f"bad model spec fragment {part!r} in {spec!r}")
            if key in ("threshold",):
                payload[key] = value
            elif key in ("standardize",):
                payload[key] = value.lower() in ("1", "true", "yes")
            elif key in ("min_fraction", "gamma_lo", "gamma_hi", "gamma_step"):
                payload[key] = float(value)
            else:
                payload[key] = int(value)
    try:
        return pipeline.ModelRequest.from_dict(payload)
    except (TypeError, ValueError) as exc:
        raise RegimevolError(f"bad model spec {spec!r}: {exc}") from exc


def _cmd_compare(args) -> int:
    values = dataio.read_series_csv(args.input)
    requests = [_parse_model_spec(s) for s in args.model]
    if len(requests) < 2:
        raise RegimevolError("compare needs at least two --model specs")
    models = [pipeline._fit_request(r, values, args.seed) for r in requests]
    report = compare_models(models, values)
    os.makedirs(args.output_dir, exist_ok=True)
    json_path = os.path.join(args.output_dir, "comparison.json")
    text_path = os.path.join(args.output_dir, "comparison.txt")
    dataio.write_json(
        json_path,
        {
            "common_sample": report.common_sample,
            "best_by_aic": report.best_by_aic,
            "best_by_bic": report.best_by_bic,
            "best_by_mape": report.best_by_mape,
            "scores": [
                {
                    "model_id": s.model_id,
                    "n_obs": s.n_obs,
                    "n_params": s.n_params,
                    "rss": s.rss,
                    "aic": s.aic,
                    "bic": s.bic,
                    "mape": s.mape,
                    "mape_n_excluded": s.mape_n_excluded,
                }
                for s in report.scores
            ],
        },
    )
    with open(text_path, "w") as handle:
        handle.write(report.to_text() + "\n")
    print(report.to_text())
    return 0


def _cmd_run(args) -> int:
    if args.config:
        try:
            with open(args.config) as handle:
                payload = json.load(handle)
        except OSError as exc:
            raise RegimevolError(f"cannot open config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise RegimevolError(f"invalid config JSON: {exc}") from exc
        config = pipeline.PipelineConfig.from_dict(payload)
    else:
        if not args.input:
            raise RegimevolError("provide --config or --input")
        overrides: dict = {
            "input_path": args.input,
            "break_date": args.break_date,
            "break_index": args.break_index,
            "volatility_window": args.window,
            "ar_max_order": args.ar_max_order,
            "significance": args.significance,
            "seed": args.seed,
            "output_dir": args.output_dir,
        }
        config = pipeline.PipelineConfig.from_dict(overrides)
    artifacts = pipeline.run_pipeline(config)
    for name in sorted(artifacts):
        print(f"{name}: {artifacts[name]}")
    return 0


def _cmd_simulate(args) -> int:
    model = dataio.load_model_json(args.model)
    values = simulate_model(model, args.length, args.noise_sd, seed=args.seed, burn_in=args.burn_in)
    if args.output:
        dataio.write_series_csv(args.output, values)
        print(f"wrote {args.output} ({len(values)} rows)")
    else:
        for v in values:
            print(repr(float(v)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimevol",
        description="Structural breaks and regime-switching volatility models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a date,close CSV")
    p.add_argument("input")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("transform", help="prices -> log returns -> realized volatility")
    p.add_argument("input")
    p.add_argument("--window", type=int, default=60)
    p.add_argument("--uncentered", action="store_true",
                   help="use the uncentered root mean square instead of the sample std dev")
    p.add_argument("--output-dir", default="regimevol-out")
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("test-unitroot", help="Perron detrend + Phillips-Perron test")
    p.add_argument("input")
    p.add_argument("--break-date")
    p.add_argument("--break-index", type=int)
    p.add_argument("--specification", choices=[TREND_BREAK, NULL_BREAK], default=TREND_BREAK)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_test_unitroot)

    p = sub.add_parser("test-linearity", help="Taylor-expansion linearity tests")
    p.add_argument("input")
    p.add_argument("--ar-order", type=int, default=1)
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_test_linearity)

    p = sub.add_parser("fit", help="fit one model to a series CSV")
    p.add_argument("kind", choices=["ar", "setar", "lstar", "estar", "nnet"])
    p.add_argument("input")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--regimes", type=int, default=2)
    p.add_argument("--transitions", type=int, default=1)
    p.add_argument("--threshold", choices=["time", "lagged_value"], default="time")
    p.add_argument("--delay", type=int, default=1)
    p.add_argument("--min-fraction", type=float, default=None)
    p.add_argument("--gamma-lo", type=float, default=1.0)
    p.add_argument("--gamma-hi", type=float, default=200.0)
    p.add_argument("--gamma-step", type=float, default=None,
                   help="exact arithmetic gamma grid step (default: coarse log grid)")
    p.add_argument("--gamma-points", type=int, default=200)
    p.add_argument("--hidden", type=int, default=2)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--raw-inputs", action="store_true",
                   help="train the network on raw inputs (no standardization)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default="regimevol-out")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("compare", help="fit several models and rank them")
    p.add_argument("input")
    p.add_argument("--model", action="append", required=True,
                   help="e.g. ar:order=1 or setar:order=1,regimes=3 (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default="regimevol-out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("run", help="full pipeline from a config file or flags")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--input")
    p.add_argument("--break-date")
    p.add_argument("--break-index", type=int)
    p.add_argument("--window", type=int, default=60)
    p.add_argument("--ar-max-order", type=int, default=20)
    p.add_argument("--significance", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default="regimevol-out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("simulate", help="simulate a saved model JSON")
    p.add_argument("model")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"ERROR stage={exc.stage}: {exc}", file=sys.stderr)
        return 1
    except RegimevolError as exc:
        print(f"ERROR stage={args.command}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ERROR stage={args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
