#!/usr/bin/env python3
"""Render the four showcase operator characterizations to SVG (and PPM).

Each figure pairs a directional-gain map with the energy-vector trail field:

  rotation   -- a rigid rotation: unit gain everywhere, trails arc uniformly
  warp       -- an equator-stretching inclination warp: gain ripples, the
                trail field shears toward the poles and the response blurs
  nr-dp      -- direction-preserving noise-reduction filter for a three
                source scene: gain concentrates on the sources, trails stay
                put where energy survives
  nr-pm      -- subspace-projection variant of the same scene: harder
                off-source attenuation, rank-three response

Usage:
    python3 scripts/make_figures.py [--outdir figures] [--ppm] [--gain-db]
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from shoviz.characterize import characterize_field
from shoviz.operators import (
    Rotation3,
    nr_dp_op,
    nr_pm_op,
    rotation_op,
    three_source_scene,
    warp_op,
)
from shoviz.render import RenderSpec, render_ppm, render_svg

ORDER = 4


def figure_operators():
    scene = three_source_scene(snr_db=0.0, mu=1.0)
    rot = Rotation3.from_axis_angle((1.0, 1.0, 1.0), math.radians(60.0))
    return {
        "rotation": rotation_op(rot, ORDER),
        "warp": warp_op(0.8, ORDER, ORDER),
        "nr-dp": nr_dp_op(scene, ORDER),
        "nr-pm": nr_pm_op(scene, ORDER),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=Path, default=Path("figures"))
    parser.add_argument("--ppm", action="store_true",
                        help="also write the raw gain map as a PPM image")
    parser.add_argument("--gain-db", action="store_true",
                        help="color the gain map in decibels")
    args = parser.parse_args(argv)

    args.outdir.mkdir(parents=True, exist_ok=True)
    spec = RenderSpec(gain_db=args.gain_db)

    for name, op in figure_operators().items():
        field = characterize_field(op)
        svg_path = args.outdir / f"{name}.svg"
        render_svg(field, spec, svg_path)
        line = f"{name:8s} -> {svg_path}"
        if args.ppm:
            ppm_path = args.outdir / f"{name}.ppm"
            render_ppm(field, spec, ppm_path)
            line += f" and {ppm_path}"
        print(
            f"{line}  (eta {field.raster_eta.min():.3f}..{field.raster_eta.max():.3f},"
            f" max |rE| {field.re_norm.max():.3f})"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
