"""Freeze the colormap lookup tables embedded in the package.

Samples matplotlib's viridis (sequential, for gain maps) and coolwarm
(diverging, for signed overlays) at 256 points and writes them as plain
text so the package itself never needs matplotlib.

Run from the repository root:

    python scripts/generate_colormaps.py
"""

from pathlib import Path

import numpy as np
from matplotlib import colormaps

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "shoviz" / "data" / "colormaps"

TABLES = {"viridis": "viridis", "coolwarm": "coolwarm"}


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(0.0, 1.0, 256)
    for name, mpl_name in TABLES.items():
        cmap = colormaps[mpl_name]
        rgba = cmap(xs)
        path = OUT_DIR / f"{name}.txt"
        with open(path, "w") as fh:
            fh.write(f"# {name}: 256-entry RGB lookup table, rows map [0, 1] linearly\n")
            fh.write("# columns: r g b in [0, 1]\n")
            for row in rgba:
                fh.write("%.6f %.6f %.6f\n" % (row[0], row[1], row[2]))
        print(f"wrote {path.name}")


if __name__ == "__main__":
    main()
