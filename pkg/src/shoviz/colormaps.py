"""Embedded colormap tables and lookup.

Two 256-entry RGB tables ship with the package: ``viridis`` (sequential,
monotone perceived lightness — the default for gain maps) and ``coolwarm``
(diverging, for signed overlays).  Lookup interpolates linearly between
neighboring entries; inputs are clamped to [0, 1].
"""

from __future__ import annotations

from functools import cache
from importlib import resources

import numpy as np


@cache
def _table(name: str) -> np.ndarray:
    root = resources.files("shoviz.data") / "colormaps"
    entry = root / f"{name}.txt"
    try:
        with entry.open("r") as fh:
            table = np.loadtxt(fh, comments="#", ndmin=2)
    except FileNotFoundError:
        raise ValueError(
            f"unknown colormap {name!r} (available: {', '.join(available_colormaps())})"
        ) from None
    if table.shape != (256, 3):
        raise RuntimeError(f"colormap table {name!r} must be 256 x 3")
    table.flags.writeable = False
    return table


@cache
def available_colormaps() -> tuple[str, ...]:
    root = resources.files("shoviz.data") / "colormaps"
    return tuple(
        sorted(item.name.removesuffix(".txt") for item in root.iterdir() if item.name.endswith(".txt"))
    )


def colormap_apply(name: str, values: np.ndarray) -> np.ndarray:
    """RGB rows in [0, 1] for an array of values, linearly interpolated.

    Values are clamped to [0, 1]; ``v`` maps to position ``v * 255`` in the
    table, blending the two neighboring entries.
    """
    table = _table(name)
    values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    position = values * 255.0
    low = np.floor(position).astype(int)
    high = np.minimum(low + 1, 255)
    frac = (position - low)[..., None]
    return (1.0 - frac) * table[low] + frac * table[high]


def colormap_lookup(name: str, value: float) -> tuple[float, float, float]:
    """RGB triple in [0, 1] for a single value in [0, 1]."""
    rgb = colormap_apply(name, np.asarray(float(value)))
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]))
