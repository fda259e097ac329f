"""Command-line entry point.

Subcommands cover the whole workflow: `synth` writes reproducible test
scenarios, `train` fits and persists a model bundle, `predict` runs a
saved bundle over a scenario, `report` scores or summarizes prediction
files (optionally rendering figures), `analyze-rf` fits the per-type
RCS and frequency signatures, and `serve` starts the replay HTTP API.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 model
error. Argument errors from the parser also exit 2.
"""

import argparse
import json
import pathlib
import sys

from . import __version__
from .core import ConfigError, DataError, ModelError, SENSOR_ORDER, SENSORS, UranusError
from . import ingest
from . import pipeline
from . import rfanalysis
from . import synth


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uranus",
        description="multi-sensor drone detection, tracking, and classification",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="write synthetic test scenarios")
    p.add_argument("--out", required=True, help="directory to write scenario folders into")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--pattern",
        action="append",
        choices=synth.PATTERN_IDS,
        help="flight pattern to emit (repeatable)",
    )
    group.add_argument("--all", action="store_true", help="emit every pattern")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument(
        "--sample-ms",
        type=int,
        default=synth.DEFAULT_SAMPLE_MS,
        help="truth sampling interval in ms",
    )
    p.add_argument(
        "--no-truth",
        action="store_true",
        help="omit the drone log (evaluation-style scenario)",
    )

    p = sub.add_parser("train", help="train the five models from a config file")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="bundle output directory")

    p = sub.add_parser("predict", help="run a saved bundle over one scenario")
    p.add_argument("--model", required=True, help="bundle directory from train")
    p.add_argument("--scenario", required=True, help="scenario directory")
    p.add_argument("--out", required=True, help="prediction CSV to write")
    p.add_argument(
        "--tolerance-ms",
        type=int,
        default=None,
        help="sensor merge tolerance override (default: the bundle's)",
    )

    p = sub.add_parser("report", help="score or summarize a prediction file")
    p.add_argument("--pred", required=True, help="prediction CSV from predict")
    p.add_argument(
        "--truth",
        default=None,
        help="scenario directory with a drone log; omit for a descriptive summary",
    )
    p.add_argument(
        "--out",
        default=None,
        help="directory for report.json and figures; omit for stdout text only",
    )

    p = sub.add_parser("analyze-rf", help="fit per-type RF and radar signatures")
    p.add_argument("--scenario", required=True, help="scenario directory with a drone log")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tolerance-ms", type=int, default=1000, help="truth matching window")
    p.add_argument(
        "--radius-m",
        type=float,
        default=100.0,
        help="max distance for attributing a radar return to a drone",
    )

    p = sub.add_parser("serve", help="serve predictions over HTTP for the console")
    p.add_argument("--store", required=True, help="directory of prediction CSVs")
    p.add_argument("--model", default=None, help="bundle directory for /model/info")
    p.add_argument("--ui", default=None, help="static console assets to mount at /ui")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _cmd_synth(args) -> int:
    patterns = list(synth.PATTERN_IDS) if args.all else args.pattern
    out = pathlib.Path(args.out)
    for pattern in patterns:
        path = synth.emit_scenario(
            out / pattern,
            pattern=pattern,
            seed=args.seed,
            sample_ms=args.sample_ms,
            with_truth=not args.no_truth,
        )
        print(f"wrote {path}")
    return 0


def _cmd_train(args) -> int:
    config = pipeline.load_config(args.config)
    bundle, reports = pipeline.train(config)
    out = pipeline.save_bundle(bundle, args.out, extra_reports=reports)
    print(f"saved bundle to {out}")
    for target in pipeline.ALL_TARGETS:
        mean = bundle.cv[target]["mean"]
        parts = ", ".join(f"{k} {v:.4f}" for k, v in sorted(mean.items()))
        print(f"  cv {target}: {parts}")
    return 0


def _cmd_predict(args) -> int:
    bundle = pipeline.load_bundle(args.model)
    estimates = pipeline.predict(bundle, args.scenario, tolerance_ms=args.tolerance_ms)
    pipeline.write_predictions(args.out, estimates)
    print(f"wrote {len(estimates)} estimates to {args.out}")
    return 0


def _cmd_report(args) -> int:
    estimates = pipeline.read_predictions(args.pred)
    truth = None
    if args.truth is not None:
        scenario = ingest.load_scenario(args.truth)
        if scenario.drone_log is None:
            raise DataError(f"scenario has no drone log: {args.truth}")
        truth = scenario.drone_log
    summary = pipeline.report(estimates, truth=truth)
    print(pipeline.render_report(summary))
    if args.out is not None:
        out = pathlib.Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written = [out / "report.json"]
        if estimates:
            from . import plots  # matplotlib import deferred off the fast paths

            written.append(plots.save_track_figure(out / "track.png", estimates, truth=truth))
            if truth is not None and summary["classification"] is not None:
                written.append(
                    plots.save_regression_figure(out / "regression.png", estimates, truth)
                )
                written.append(
                    plots.save_confusion_figure(out / "confusion.png", summary["classification"])
                )
        for path in written:
            print(f"wrote {path}")
    return 0


def _cmd_analyze_rf(args) -> int:
    scenario = ingest.load_scenario(args.scenario)
    profile = rfanalysis.scenario_rf_profile(
        scenario, tolerance_ms=args.tolerance_ms, radius_m=args.radius_m
    )
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from . import plots

    models = [
        rfanalysis.fit_rcs(samples, drone_type=name)
        for name, samples in sorted(profile["rcs"].items())
        if len(samples) >= 2
    ]
    with open(out / "rcs_models.json", "w", encoding="utf-8") as fh:
        json.dump([m.to_dict() for m in models], fh, indent=2, sort_keys=True)
        fh.write("\n")
    likelihoods = [
        rfanalysis.freq_likelihood(samples, drone_type=name)
        for name, samples in sorted(profile["freq"].items())
        if samples
    ]
    with open(out / "freq_likelihoods.json", "w", encoding="utf-8") as fh:
        json.dump([fl.to_dict() for fl in likelihoods], fh, indent=2, sort_keys=True)
        fh.write("\n")
    written = [out / "rcs_models.json", out / "freq_likelihoods.json"]
    if models:
        written.append(plots.save_rcs_figure(out / "rcs.png", models))
    if likelihoods:
        written.append(plots.save_freq_figure(out / "freq.png", likelihoods))
    for name, track in sorted(profile["tracks"].items()):
        slug = pipeline._slug(name)
        series = [rfanalysis.distance_series(track, SENSORS[s]) for s in SENSOR_ORDER]
        for s in series:
            csv_path = out / f"distance_{slug}_{s.sensor.lower()}.csv"
            with open(csv_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(s.to_csv())
            written.append(csv_path)
        written.append(
            plots.save_distance_figure(out / f"distance_{slug}.png", series, title=name)
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .console_api import create_app

    app = create_app(args.store, bundle_dir=args.model, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "report": _cmd_report,
    "analyze-rf": _cmd_analyze_rf,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except UranusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
