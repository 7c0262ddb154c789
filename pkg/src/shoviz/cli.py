"""Command-line interface.

Three subcommands: ``gen`` builds an operator and writes it as JSON (to a
file or stdout, so generators pipe straight into ``characterize``),
``characterize`` turns an operator file into the gain/energy-vector
visualization plus optional data exports, and ``table1`` prints the
per-order localization limits.

Exit codes: 0 on success, 1 on compute/validation errors, 2 on usage or
I/O errors.  Diagnostics go to stderr; only data (operator JSON, the
characterization summary, the table) goes to stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from .characterize import characterize_field, field_to_json, raster_to_csv, re_max
from .colormaps import available_colormaps
from .grids import design_with_points, equirect_raster
from .operators import (
    SCENE_PRESETS,
    Rotation3,
    identity_op,
    identity_plus_mirror_op,
    mirror_op,
    nr_dp_op,
    nr_pm_op,
    op_from_file,
    op_from_json,
    op_to_file,
    op_to_json,
    rotation_op,
    scene_from_file,
    scene_preset,
    warp_op,
)
from .render import RenderSpec, render_ppm, render_svg

GEN_KINDS = ("rot", "warp", "nr-dp", "nr-pm", "identity", "mirror", "eq13")


def _parse_axis(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"axis must be three comma-separated numbers, got {text!r}"
        )
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"axis must be three comma-separated numbers, got {text!r}"
        ) from None
    return (x, y, z)


def _require_writable_dirs(*paths) -> None:
    """Fail with OSError (exit code 2) before compute if any output path
    points into a missing directory."""
    for path in paths:
        if path is None:
            continue
        parent = os.path.dirname(os.fspath(path)) or "."
        if not os.path.isdir(parent):
            raise OSError(f"output directory does not exist: {parent!r}")


def _resolve_scene(args: argparse.Namespace):
    if args.scene is not None:
        scene = scene_from_file(args.scene)
        if args.snr_db is not None:
            scene = dataclasses.replace(scene, snr_db=args.snr_db)
        if args.mu is not None:
            scene = dataclasses.replace(scene, mu=args.mu)
        return scene
    name = args.preset if args.preset is not None else "table2"
    return scene_preset(
        name,
        snr_db=args.snr_db if args.snr_db is not None else 0.0,
        mu=args.mu if args.mu is not None else 1.0,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    _require_writable_dirs(args.out)
    order = args.order
    if args.kind == "rot":
        rot = Rotation3.from_axis_angle(args.axis, math.radians(args.angle_deg))
        op = rotation_op(rot, order)
    elif args.kind == "warp":
        op = warp_op(args.alpha, order, order)
    elif args.kind == "nr-dp":
        op = nr_dp_op(_resolve_scene(args), order)
    elif args.kind == "nr-pm":
        op = nr_pm_op(_resolve_scene(args), order)
    elif args.kind == "identity":
        op = identity_op(order)
    elif args.kind == "mirror":
        op = mirror_op(order)
    else:  # eq13
        op = identity_plus_mirror_op(order)

    rows, cols = op.matrix.shape
    print(
        f"operator {rows}x{cols} (order {op.n_in} in -> order {op.n_out} out)",
        file=sys.stderr,
    )
    if "quadrature_residual" in op.meta:
        print(
            f"quadrature residual {op.meta['quadrature_residual']:.3e} "
            f"({op.meta['quadrature_grid']} vs {op.meta['check_grid']})",
            file=sys.stderr,
        )
    if args.out is not None:
        op_to_file(op, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(op_to_json(op))
    return 0


def cmd_characterize(args: argparse.Namespace) -> int:
    if args.op_path is None or args.op_path == "-":
        op = op_from_json(sys.stdin.read(), label="<stdin>")
    else:
        op = op_from_file(args.op_path)
    _require_writable_dirs(args.out, args.ppm_out, args.data_out, args.raster_out)
    spec = RenderSpec(
        raster_cell_deg=args.cell_deg,
        vector_grid_q=args.vec_grid,
        gain_db=args.gain_db,
        db_floor=args.db_floor,
        re_normalize=args.re_normalize,
        re_threshold=args.re_threshold,
        trail_encoding=args.trail_encoding,
        colormap=args.colormap,
    )
    field = characterize_field(
        op,
        display_grid=design_with_points(spec.vector_grid_q),
        raster=equirect_raster(spec.raster_cell_deg),
        threads=args.threads,
    )
    if args.out is not None:
        render_svg(field, spec, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    if args.ppm_out is not None:
        render_ppm(field, spec, args.ppm_out)
        print(f"wrote {args.ppm_out}", file=sys.stderr)
    if args.data_out is not None:
        field_to_json(field, args.data_out)
        print(f"wrote {args.data_out}", file=sys.stderr)
    if args.raster_out is not None:
        raster_to_csv(field, args.raster_out)
        print(f"wrote {args.raster_out}", file=sys.stderr)
    print(
        f"eta min {field.raster_eta.min():.9f} max {field.raster_eta.max():.9f} | "
        f"max |rE| {field.re_norm.max():.9f} | rE bound {field.re_bound:.9f}"
    )
    return 0


def cmd_table1(args: argparse.Namespace) -> int:
    if not 1 <= args.max_order <= 20:
        raise ValueError("max order must lie in [1, 20]")
    print(" N  N/(N+1)  rE_max")
    for n in range(1, args.max_order + 1):
        print(f"{n:2d}    {n / (n + 1):.3f}   {re_max(n):.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shoviz",
        description=(
            "Characterize linear operators on spherical-harmonics "
            "coefficients and render gain maps with energy-vector trails."
        ),
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="seed for randomized test-fixture generation "
        "(all bundled generators are deterministic)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser(
        "gen",
        help="build an operator and write it as JSON (stdout if no --out)",
    )
    gen.add_argument("kind", choices=GEN_KINDS)
    gen.add_argument(
        "--order", type=int, default=4, help="truncation order (default 4)"
    )
    gen.add_argument(
        "--axis",
        type=_parse_axis,
        default=(1.0, 1.0, 1.0),
        help="rotation axis as x,y,z (default 1,1,1)",
    )
    gen.add_argument(
        "--angle-deg",
        type=float,
        default=60.0,
        help="rotation angle in degrees (default 60)",
    )
    gen.add_argument(
        "--alpha",
        type=float,
        default=0.8,
        help="warp strength in (-1, 1) (default 0.8)",
    )
    scene_src = gen.add_mutually_exclusive_group()
    scene_src.add_argument(
        "--preset",
        choices=sorted(SCENE_PRESETS),
        default=None,
        help="bundled source scene (default table2)",
    )
    scene_src.add_argument(
        "--scene", default=None, help="source-scene JSON file"
    )
    gen.add_argument(
        "--mu", type=float, default=None, help="noise-reduction tradeoff (default 1)"
    )
    gen.add_argument(
        "--snr-db",
        type=float,
        default=None,
        help="scene signal-to-noise ratio in dB (default 0)",
    )
    gen.add_argument("--out", default=None, help="operator JSON output path")
    gen.set_defaults(func=cmd_gen)

    char = sub.add_parser(
        "characterize",
        help="render an operator file (or stdin) and print a summary",
    )
    char.add_argument(
        "op_path",
        nargs="?",
        default=None,
        help="operator JSON path ('-' or omitted reads stdin)",
    )
    char.add_argument(
        "--gain-db", action="store_true", help="color the gain map in dB"
    )
    char.add_argument(
        "--db-floor",
        type=float,
        default=-40.0,
        help="bottom of the dB color scale (default -40)",
    )
    char.add_argument(
        "--re-normalize",
        action="store_true",
        help="encode |rE| relative to the identity-operator reference",
    )
    char.add_argument(
        "--re-threshold",
        type=float,
        default=0.0,
        help="hide trails whose encoded |rE| scalar falls below this",
    )
    char.add_argument(
        "--cell-deg",
        type=float,
        default=2.0,
        help="gain raster cell size in degrees (default 2)",
    )
    char.add_argument(
        "--vec-grid",
        type=int,
        default=144,
        help="minimum number of vector-field display directions (default 144)",
    )
    char.add_argument(
        "--trail-encoding",
        choices=("color", "linewidth"),
        default="color",
        help="how trails encode the |rE| scalar (default color)",
    )
    char.add_argument(
        "--colormap",
        choices=available_colormaps(),
        default="viridis",
        help="colormap for gain map and trails (default viridis)",
    )
    char.add_argument("--out", default=None, help="SVG output path")
    char.add_argument("--ppm-out", default=None, help="gain raster PPM output path")
    char.add_argument(
        "--data-out", default=None, help="vector-field JSON output path"
    )
    char.add_argument(
        "--raster-out", default=None, help="gain raster CSV output path"
    )
    char.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads for characterization (default 1)",
    )
    char.set_defaults(func=cmd_characterize)

    table = sub.add_parser(
        "table1", help="print per-order localization limits N/(N+1) and rE_max"
    )
    table.add_argument(
        "--max-order",
        type=int,
        default=10,
        help="largest order to print, in [1, 20] (default 10)",
    )
    table.set_defaults(func=cmd_table1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
