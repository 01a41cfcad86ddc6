"""Command line interface: synth, pipeline, grasp, repeat, density."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from .field import density_histogram
from .grasping import GripperGeometry, NoValidGraspError, SamplingInfeasibleError
from .mixture import NumericalFitError
from .pipeline import (
    ConfigError,
    PipelineConfig,
    PipelineIOError,
    load_regions_csv,
    run_grasp,
    run_pipeline,
    run_repeat,
    write_density_csv,
    write_synthetic_scene,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4

_VEC3_KEYS = {"crop_origin", "trace_start", "trace_end"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; config errors are 1
        self.exit(EXIT_CONFIG, f"error: {message}\n")


def _parse_vec3(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(parts)


def _parse_material(text: str):
    try:
        rgb, cof = text.split(":")
        color = [float(v) for v in rgb.split(",")]
        if len(color) != 3:
            raise ValueError
        return color, float(cof)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "material must look like R,G,B:COF (e.g. 0.9,0.85,0.2:0.35)"
        ) from None


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _VEC3_KEYS:
            parser.add_argument(flag, type=_parse_vec3, default=None)
        elif f.type.startswith("int"):
            parser.add_argument(flag, type=int, default=None)
        elif f.type.startswith("float"):
            parser.add_argument(flag, type=float, default=None)
        else:
            parser.add_argument(flag, type=str, default=None)


def _pipeline_config(args) -> PipelineConfig:
    payload = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="ascii") as fh:
                payload = json.load(fh)
        except OSError as exc:
            raise PipelineIOError(f"cannot read config: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    overrides = {
        f.name: getattr(args, f.name) for f in fields(PipelineConfig)
    }
    return PipelineConfig.from_dict(payload, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frictionfield", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic scene with ground truth")
    p_synth.add_argument("--shape", required=True)
    p_synth.add_argument(
        "--material", action="append", type=_parse_material, required=True,
        metavar="R,G,B:COF",
    )
    p_synth.add_argument("--noise", type=float, default=0.01)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--spacing", type=float, default=0.004)
    p_synth.add_argument("--mesh-out", default=None, help="also write a surface mesh (OFF)")
    p_synth.add_argument("--out", required=True)

    p_pipe = sub.add_parser("pipeline", help="run the full estimation pipeline")
    _add_pipeline_flags(p_pipe)

    p_repeat = sub.add_parser("repeat", help="run the pipeline with consecutive seeds")
    _add_pipeline_flags(p_repeat)
    p_repeat.add_argument("--runs", type=int, required=True)

    p_grasp = sub.add_parser("grasp", help="sample and rank friction-aware grasps")
    p_grasp.add_argument("--friction-ply", required=True)
    p_grasp.add_argument("--mesh", required=True)
    p_grasp.add_argument("--out", required=True)
    p_grasp.add_argument("--count", type=int, default=200)
    p_grasp.add_argument("--top-k", type=int, default=5)
    p_grasp.add_argument("--seed", type=int, default=0)
    p_grasp.add_argument("--cone-edges", type=int, default=8)
    p_grasp.add_argument(
        "--uniform-friction", type=float, default=None,
        help="ignore per-face friction and use this single value",
    )
    p_grasp.add_argument("--finger-length", type=float, default=0.05)
    p_grasp.add_argument("--finger-width", type=float, default=0.02)
    p_grasp.add_argument("--max-opening", type=float, default=0.08)
    p_grasp.add_argument("--palm-depth", type=float, default=0.02)

    p_density = sub.add_parser("density", help="histogram region frictions from regions.csv")
    p_density.add_argument("--regions", required=True)
    p_density.add_argument("--bin-width", type=float, default=0.025)
    p_density.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            summary = write_synthetic_scene(
                args.shape,
                args.material,
                args.out,
                noise=args.noise,
                seed=args.seed,
                spacing=args.spacing,
                mesh_out=args.mesh_out,
            )
            print(f"synth: wrote {summary['points']} points to {summary['out']}")
        elif args.command == "pipeline":
            summary = run_pipeline(_pipeline_config(args))
            print(
                f"pipeline: {summary['n_regions']} regions over {summary['n_points']} points, "
                f"{summary['n_annotations']} haptic annotations, peaks at "
                f"{[round(p, 4) for p in summary['peaks']]} -> {summary['out']}"
            )
        elif args.command == "repeat":
            summary = run_repeat(_pipeline_config(args), args.runs)
            print(
                f"repeat: {summary['runs']} runs, peak counts {summary['peak_counts']}"
            )
        elif args.command == "grasp":
            gripper = GripperGeometry(
                finger_length=args.finger_length,
                finger_width=args.finger_width,
                max_opening=args.max_opening,
                palm_depth=args.palm_depth,
            )
            summary = run_grasp(
                args.friction_ply,
                args.mesh,
                args.out,
                count=args.count,
                top_k=args.top_k,
                seed=args.seed,
                cone_edges=args.cone_edges,
                uniform_friction=args.uniform_friction,
                gripper=gripper,
            )
            print(
                f"grasp: accepted {summary['accepted']} candidates, kept {summary['ranked']}, "
                f"top quality {summary['top_quality']:.6g}"
            )
        elif args.command == "density":
            rows = load_regions_csv(args.regions)
            histogram = density_histogram(rows["friction"], args.bin_width)
            write_density_csv(histogram, args.out)
            print(f"density: {int(histogram.counts.sum())} regions into {args.out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PipelineIOError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalFitError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SamplingInfeasibleError, NoValidGraspError) as exc:
        print(f"sampling infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    raise SystemExit(main())
