"""Command-line interface.

Subcommands: simulate, estimate, georef, evaluate, oracle. Exit status 0 on
success, 1 on fatal I/O or configuration errors, 2 on validation errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import pipeline, streams
from .errors import (
    ConfigurationError,
    DegenerateGeometryError,
    InputError,
    InsufficientDataError,
    MgpError,
    ValidationError,
)
from .attitude import baseline_weights
from .mapping import evaluate_reflectors, georeference_stream, read_cloud, write_cloud
from .oracles import wahba_svd
from .simulator import simulate, scan_stream


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = streams.load_scenario(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    n = streams.write_epochs(args.out, simulate(config))
    print(f"wrote {n} epochs to {args.out}")
    if args.scan is not None:
        if config.scanner is None:
            raise ConfigurationError("scenario has no scanner model, cannot write a scan stream")
        frames = streams.write_scan(args.scan, scan_stream(config, config.scanner))
        print(f"wrote {frames} scan frames to {args.scan}")
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    config = pipeline.load_pipeline_config(args.config)
    overrides: dict[str, object] = {}
    if args.antennas is not None:
        try:
            subset = tuple(int(a) for a in args.antennas.split(",") if a.strip())
        except ValueError as exc:
            raise ConfigurationError(f"bad --antennas value {args.antennas!r}") from exc
        overrides["antenna_subset"] = subset
    if args.no_multipath_feedback:
        overrides["multipath_feedback"] = False
    if overrides:
        config = dataclasses.replace(config, **overrides)

    diagnostics: list[str] = []
    epochs = streams.read_epochs(args.epochs, skip_malformed=True, diagnostics=diagnostics)
    result = pipeline.run(epochs, config, diagnostics=diagnostics)
    streams.write_poses(args.poses, result.pose_rows)
    streams.write_json(args.metrics, result.metrics.to_json_dict())
    for line in result.diagnostics:
        print(line, file=sys.stderr)
    print(
        f"processed {result.metrics.epochs} epochs "
        f"({result.metrics.skipped} skipped), poses in {args.poses}, "
        f"metrics in {args.metrics}"
    )
    return 0


def _cmd_georef(args: argparse.Namespace) -> int:
    rows = streams.read_poses(args.poses)
    poses = streams.poses_for_georef(rows)
    calib = streams.load_calibration(args.calib)
    frames = streams.read_scan(args.scan)
    cloud, dropped = georeference_stream(poses, frames, calib)
    write_cloud(args.cloud, cloud)
    print(f"wrote {len(cloud)} points to {args.cloud} ({dropped} pulses dropped)")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cloud = read_cloud(args.cloud)
    reflectors, radius, min_hits = streams.load_reflectors(args.reflectors)
    report = evaluate_reflectors(cloud, reflectors, radius, min_hits)
    payload = {
        "per_reflector": [
            {
                "truth": [r.truth.x, r.truth.y, r.truth.z],
                "error": None if r.error is None else [r.error.x, r.error.y, r.error.z],
                "n_hits": r.n_hits,
                "resolved": r.resolved,
            }
            for r in report.per_reflector
        ],
        "rms_horizontal_m": report.rms_horizontal_m,
        "rms_vertical_m": report.rms_vertical_m,
        "unresolved": report.unresolved,
    }
    streams.write_json(args.report, payload)
    print(f"evaluated {len(report.per_reflector)} reflectors, report in {args.report}")
    return 0


def _cmd_oracle_wahba(args: argparse.Namespace) -> int:
    print("t,qx,qy,qz,qw")
    for epoch in streams.read_epochs(args.epochs):
        fixed = [o for o in epoch.baselines if o.fixed]
        if len(fixed) < 2:
            continue
        try:
            q = wahba_svd(fixed, baseline_weights(fixed))
        except (InsufficientDataError, DegenerateGeometryError):
            continue
        print(f"{epoch.t!r},{q.qx!r},{q.qy!r},{q.qz!r},{q.qw!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgp",
        description="Multi-antenna GNSS attitude/position estimation and 3D mapping toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate an epoch stream from a scenario")
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True, help="output epoch JSONL path")
    p.add_argument("--scan", default=None, help="optional output scan JSONL path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="run the estimation pipeline over an epoch stream")
    p.add_argument("--epochs", required=True, help="input epoch JSONL path")
    p.add_argument("--config", required=True, help="pipeline JSON config")
    p.add_argument("--poses", required=True, help="output pose CSV path")
    p.add_argument("--metrics", required=True, help="output metrics JSON path")
    p.add_argument("--antennas", default=None, help="comma-separated antenna ids to use")
    p.add_argument(
        "--no-multipath-feedback",
        action="store_true",
        help="disable satellite exclusion feedback",
    )
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("georef", help="georeference a scan stream with a pose trajectory")
    p.add_argument("--poses", required=True, help="pose CSV path")
    p.add_argument("--scan", required=True, help="scan JSONL path")
    p.add_argument("--calib", required=True, help="mount calibration JSON")
    p.add_argument("--cloud", required=True, help="output cloud path (.xyz or .bin)")
    p.set_defaults(func=_cmd_georef)

    p = sub.add_parser("evaluate", help="evaluate a cloud against surveyed reflectors")
    p.add_argument("--cloud", required=True, help="cloud path (.xyz or .bin)")
    p.add_argument("--reflectors", required=True, help="reflector JSON file")
    p.add_argument("--report", required=True, help="output report JSON path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("oracle", help="independent reference implementations")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    po = osub.add_parser("wahba-svd", help="SVD attitude oracle over an epoch stream")
    po.add_argument("--epochs", required=True, help="input epoch JSONL path")
    po.set_defaults(func=_cmd_oracle_wahba)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe; not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 1
    except (InputError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, InsufficientDataError, DegenerateGeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MgpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
