"""Equirectangular visualization of operator characterizations.

Produces a deterministic SVG: the directional-gain raster as colored cells,
energy-vector trails drawn as great-circle arcs from the response direction
(red mark) to the excitation direction (blue mark), axis ticks every 45
degrees, and colorbars for the gain and the energy-vector norm.  A plain
PPM sidecar of the gain raster is available for raster consumers.

Rendering is a pure function of (field, spec): numbers are written with
fixed 3-decimal formatting and no timestamps, so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .characterize import ResponseField
from .colormaps import colormap_apply
from .sph import Direction, cart_to_angles

_ANTIPODAL_EPS = 1e-6
_COINCIDENT_EPS = 1e-9
_TRAIL_STEP_DEG = 2.0
_MIN_TRAIL_STEPS = 8

# canvas layout in pixels (margins around the map area)
_MARGIN_LEFT = 56.0
_MARGIN_TOP = 16.0
_MARGIN_BOTTOM = 44.0
_BAR_GAP = 22.0
_BAR_WIDTH = 16.0
_BAR_LABEL = 58.0
_COLORBAR_STEPS = 64

_BLUE = "#2255cc"
_RED = "#cc2222"
_LINEWIDTH_TRAIL_COLOR = "#404040"


@dataclass(frozen=True)
class RenderSpec:
    """All visualization parameters.

    ``gain_vmin``/``gain_vmax`` are linear gain limits (``None`` means the
    field maximum); in dB mode the scale runs from ``db_floor`` up to the
    dB value of the linear maximum, and zero gain lands exactly on the
    first colormap entry.  ``re_threshold`` is compared against the
    encoded energy-vector scalar (norm, divided by the identity reference
    when ``re_normalize`` is on); trails and response marks below it are
    dropped.
    """

    raster_cell_deg: float = 2.0
    vector_grid_q: int = 144
    gain_db: bool = False
    db_floor: float = -40.0
    re_normalize: bool = False
    re_threshold: float = 0.0
    trail_encoding: str = "color"
    colormap: str = "viridis"
    map_width_px: int = 720
    gain_vmin: float = 0.0
    gain_vmax: float | None = None

    def __post_init__(self) -> None:
        if not 0.1 <= self.raster_cell_deg <= 30.0:
            raise ValueError("raster_cell_deg must lie in [0.1, 30]")
        if self.vector_grid_q < 1:
            raise ValueError("vector_grid_q must be >= 1")
        if not self.db_floor < 0.0:
            raise ValueError("db_floor must be negative")
        if not 0.0 <= self.re_threshold <= 1.0:
            raise ValueError("re_threshold must lie in [0, 1]")
        if self.trail_encoding not in ("color", "linewidth"):
            raise ValueError("trail_encoding must be 'color' or 'linewidth'")
        if self.map_width_px < 100:
            raise ValueError("map_width_px must be >= 100")
        if self.gain_vmax is not None and not self.gain_vmax > self.gain_vmin:
            raise ValueError("gain_vmax must exceed gain_vmin")


def _arc_between(a: np.ndarray, b: np.ndarray) -> float:
    # atan2 form stays well-conditioned where acos(dot) loses ~8 digits
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))


@dataclass(frozen=True)
class Trail:
    """Great-circle polyline with the scalar it encodes.

    ``vertices`` are unit vectors from the response direction (index 0,
    red mark) to the excitation direction (last index, blue mark).
    """

    vertices: np.ndarray
    value: float = 0.0


def great_circle_trail(
    start: Direction, end: Direction, steps: int, value: float = 0.0
) -> Trail:
    """Sample the shortest great-circle path from ``start`` to ``end``.

    Spherical linear interpolation at ``steps`` uniform parameter values;
    endpoints are exact.  Coincident endpoints degenerate to a single
    point; antipodal endpoints have no unique shortest path and raise.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    a, b = start.vec, end.vec
    delta = _arc_between(a, b)
    if delta > math.pi - _ANTIPODAL_EPS:
        raise ValueError(
            "antipodal endpoints: no unique great-circle path exists"
        )
    if delta < _COINCIDENT_EPS:
        return Trail(a[None, :].copy(), value)
    t = np.linspace(0.0, 1.0, steps)
    sin_delta = math.sin(delta)
    vertices = (
        np.sin((1.0 - t)[:, None] * delta) * a + np.sin(t[:, None] * delta) * b
    ) / sin_delta
    vertices[0] = a
    vertices[-1] = b
    return Trail(vertices, value)


def trail_steps(delta_rad: float) -> int:
    """Sample count for a trail spanning ``delta_rad``: one point per two
    degrees of arc, at least :data:`_MIN_TRAIL_STEPS`."""
    return max(_MIN_TRAIL_STEPS, math.ceil(math.degrees(delta_rad) / _TRAIL_STEP_DEG))


def project_equirect(
    direction: Direction, canvas: tuple[float, float]
) -> tuple[float, float]:
    """Pixel position of a direction on an equirectangular canvas.

    Azimuth maps left to right over (-pi, pi], inclination top to bottom
    over [0, pi].
    """
    width, height = canvas
    x = (direction.phi + math.pi) / (2.0 * math.pi) * width
    y = direction.theta / math.pi * height
    return (x, y)


def _project_angles(
    thetas: np.ndarray, phis: np.ndarray, width: float, height: float
) -> tuple[np.ndarray, np.ndarray]:
    return (
        (phis + math.pi) / (2.0 * math.pi) * width,
        thetas / math.pi * height,
    )


def split_at_seam(thetas: np.ndarray, phis: np.ndarray) -> list[np.ndarray]:
    """Indices of polyline runs that stay on one side of the azimuth seam.

    A jump of more than pi between consecutive azimuths means the path
    crossed the +/-pi seam; the polyline is cut there.  Every vertex lands
    in exactly one run, so no vertices are dropped.
    """
    if len(phis) == 0:
        return []
    jumps = np.where(np.abs(np.diff(phis)) > math.pi)[0]
    runs = []
    start = 0
    for jump in jumps:
        runs.append(np.arange(start, jump + 1))
        start = jump + 1
    runs.append(np.arange(start, len(phis)))
    return runs


def _fmt(value: float) -> str:
    out = f"{value:.3f}"
    return "0.000" if out == "-0.000" else out


def _hex_color(rgb: np.ndarray) -> str:
    r, g, b = (int(round(float(c) * 255.0)) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def _gain_scale(raster_eta: np.ndarray, spec: RenderSpec) -> tuple[float, float, str]:
    """(low, high, label_suffix) of the gain color scale in display units."""
    vmax = spec.gain_vmax if spec.gain_vmax is not None else float(raster_eta.max())
    if spec.gain_db:
        top_db = 20.0 * math.log10(vmax) if vmax > 0.0 else spec.db_floor + 1.0
        top_db = max(top_db, spec.db_floor + 1e-9)
        return (spec.db_floor, top_db, " [dB]")
    if not vmax > spec.gain_vmin:
        vmax = spec.gain_vmin + 1.0
    return (spec.gain_vmin, vmax, "")


def _gain_to_unit(eta: np.ndarray, spec: RenderSpec) -> np.ndarray:
    low, high, _ = _gain_scale(eta, spec)
    if spec.gain_db:
        with np.errstate(divide="ignore"):
            levels = np.where(
                eta > 0.0, 20.0 * np.log10(np.where(eta > 0.0, eta, 1.0)), -np.inf
            )
    else:
        levels = eta
    return np.clip((levels - low) / (high - low), 0.0, 1.0)


def _raster_shape(field: ResponseField) -> tuple[int, int]:
    # angles recovered from unit vectors carry last-bit noise, so bucket
    # them well below the smallest legal cell (0.1 deg ~ 1.7e-3 rad)
    n_phi = int(np.unique(np.round(field.raster_grid.phis, 9)).size)
    n_theta = int(np.unique(np.round(field.raster_grid.thetas, 9)).size)
    if n_theta * n_phi != field.raster_grid.q:
        raise ValueError("raster grid is not a regular equirectangular grid")
    return n_theta, n_phi


def _re_encoding(field: ResponseField, spec: RenderSpec) -> tuple[np.ndarray, float]:
    """(encoded scalar per display point, top of the norm color scale)."""
    if spec.re_normalize:
        reference = field.re_reference if field.re_reference > 0.0 else 1.0
        return field.re_norm / reference, 1.0
    bar_top = field.re_bound if field.re_bound > 0.0 else 1.0
    return field.re_norm.copy(), bar_top


def _colorbar_svg(
    parts: list[str],
    x: float,
    map_top: float,
    map_height: float,
    title: str,
    colormap: str,
    low: float,
    high: float,
) -> None:
    step_h = map_height / _COLORBAR_STEPS
    values = (np.arange(_COLORBAR_STEPS) + 0.5) / _COLORBAR_STEPS
    colors = colormap_apply(colormap, values)
    for k in range(_COLORBAR_STEPS):
        y = map_top + map_height - (k + 1) * step_h
        parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(_BAR_WIDTH)}" '
            f'height="{_fmt(step_h + 0.3)}" fill="{_hex_color(colors[k])}"/>'
        )
    parts.append(
        f'<rect x="{_fmt(x)}" y="{_fmt(map_top)}" width="{_fmt(_BAR_WIDTH)}" '
        f'height="{_fmt(map_height)}" fill="none" stroke="#000000" stroke-width="0.6"/>'
    )
    label_x = x + _BAR_WIDTH + 4.0
    parts.append(
        f'<text x="{_fmt(x)}" y="{_fmt(map_top - 5.0)}" font-family="monospace" '
        f'font-size="11" fill="#000000">{title}</text>'
    )
    for frac, val in ((0.0, high), (0.5, 0.5 * (low + high)), (1.0, low)):
        y = map_top + frac * map_height
        parts.append(
            f'<text x="{_fmt(label_x)}" y="{_fmt(y + 3.5)}" font-family="monospace" '
            f'font-size="10" fill="#000000">{_fmt(val)}</text>'
        )


def render_svg(field: ResponseField, spec: RenderSpec, path) -> None:
    """Write the full visualization as a deterministic SVG file.

    Layer order: gain cells, axis ticks, trails, marks, colorbars.  Blue
    marks show every excitation direction; red marks and their trails show
    response directions and are dropped where the energy-vector direction
    is undefined or its encoded scalar falls below ``spec.re_threshold``.
    Antipodal response/excitation pairs (no unique shortest path, e.g.
    under a point mirror) keep their marks but draw no trail.
    """
    width = float(spec.map_width_px)
    height = width / 2.0
    bars_x0 = _MARGIN_LEFT + width
    total_w = bars_x0 + 2.0 * (_BAR_GAP + _BAR_WIDTH + _BAR_LABEL)
    total_h = _MARGIN_TOP + height + _MARGIN_BOTTOM

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(total_w)}" '
        f'height="{_fmt(total_h)}" viewBox="0 0 {_fmt(total_w)} {_fmt(total_h)}">'
    )
    parts.append(
        f'<rect x="0" y="0" width="{_fmt(total_w)}" height="{_fmt(total_h)}" '
        f'fill="#ffffff"/>'
    )

    # gain raster cells, row-major from the north pole
    n_theta, n_phi = _raster_shape(field)
    cell_w = width / n_phi
    cell_h = height / n_theta
    unit = _gain_to_unit(field.raster_eta, spec)
    colors = colormap_apply(spec.colormap, unit)
    cell_w_s = _fmt(cell_w + 0.05)
    cell_h_s = _fmt(cell_h + 0.05)
    for i in range(n_theta):
        y_s = _fmt(_MARGIN_TOP + i * cell_h)
        base = i * n_phi
        for j in range(n_phi):
            parts.append(
                f'<rect x="{_fmt(_MARGIN_LEFT + j * cell_w)}" y="{y_s}" '
                f'width="{cell_w_s}" height="{cell_h_s}" '
                f'fill="{_hex_color(colors[base + j])}"/>'
            )

    # axis ticks every 45 degrees
    for phi_deg in range(-180, 181, 45):
        x = _MARGIN_LEFT + (phi_deg + 180.0) / 360.0 * width
        y0 = _MARGIN_TOP + height
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(y0)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(y0 + 4.0)}" stroke="#000000" stroke-width="0.8"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y0 + 15.0)}" font-family="monospace" '
            f'font-size="10" text-anchor="middle" fill="#000000">{phi_deg}</text>'
        )
    for theta_deg in range(0, 181, 45):
        y = _MARGIN_TOP + theta_deg / 180.0 * height
        parts.append(
            f'<line x1="{_fmt(_MARGIN_LEFT - 4.0)}" y1="{_fmt(y)}" '
            f'x2="{_fmt(_MARGIN_LEFT)}" y2="{_fmt(y)}" stroke="#000000" '
            f'stroke-width="0.8"/>'
        )
        parts.append(
            f'<text x="{_fmt(_MARGIN_LEFT - 7.0)}" y="{_fmt(y + 3.5)}" '
            f'font-family="monospace" font-size="10" text-anchor="end" '
            f'fill="#000000">{theta_deg}</text>'
        )
    parts.append(
        f'<text x="{_fmt(_MARGIN_LEFT + width / 2.0)}" '
        f'y="{_fmt(_MARGIN_TOP + height + 32.0)}" font-family="monospace" '
        f'font-size="11" text-anchor="middle" fill="#000000">azimuth [deg]</text>'
    )
    parts.append(
        f'<text x="14" y="{_fmt(_MARGIN_TOP + height / 2.0)}" '
        f'font-family="monospace" font-size="11" text-anchor="middle" '
        f'fill="#000000" transform="rotate(-90 14 {_fmt(_MARGIN_TOP + height / 2.0)})"'
        f'>inclination [deg]</text>'
    )

    # trails, then marks on top
    encoded, bar_top = _re_encoding(field, spec)
    display = field.display_grid
    shown = field.re_defined & (encoded >= spec.re_threshold)
    for q in range(display.q):
        if not shown[q]:
            continue
        start = Direction(field.re_unit[q])
        end = Direction(display.points[q])
        delta = _arc_between(start.vec, end.vec)
        if delta > math.pi - _ANTIPODAL_EPS:
            continue  # marks stay, no unique trail
        trail = great_circle_trail(
            start, end, trail_steps(delta), float(encoded[q])
        )
        if trail.vertices.shape[0] < 2:
            continue
        thetas, phis = cart_to_angles(trail.vertices)
        if spec.trail_encoding == "color":
            color = _hex_color(
                colormap_apply(spec.colormap, np.asarray(trail.value / bar_top))
            )
            stroke_w = 1.4
        else:
            color = _LINEWIDTH_TRAIL_COLOR
            stroke_w = 0.4 + 2.2 * min(1.0, max(0.0, trail.value / bar_top))
        for run in split_at_seam(thetas, phis):
            xs, ys = _project_angles(thetas[run], phis[run], width, height)
            pts = " ".join(
                f"{_fmt(_MARGIN_LEFT + x)},{_fmt(_MARGIN_TOP + y)}"
                for x, y in zip(xs, ys)
            )
            parts.append(
                f'<polyline class="trail" points="{pts}" fill="none" '
                f'stroke="{color}" stroke-width="{_fmt(stroke_w)}"/>'
            )
    disp_x, disp_y = _project_angles(display.thetas, display.phis, width, height)
    for q in range(display.q):
        parts.append(
            f'<circle class="mark-excitation" cx="{_fmt(_MARGIN_LEFT + disp_x[q])}" '
            f'cy="{_fmt(_MARGIN_TOP + disp_y[q])}" r="2.400" fill="{_BLUE}"/>'
        )
    re_thetas, re_phis = cart_to_angles(field.re_unit)
    re_x, re_y = _project_angles(re_thetas, re_phis, width, height)
    for q in range(display.q):
        if not shown[q]:
            continue
        parts.append(
            f'<circle class="mark-response" cx="{_fmt(_MARGIN_LEFT + re_x[q])}" '
            f'cy="{_fmt(_MARGIN_TOP + re_y[q])}" r="1.900" fill="{_RED}"/>'
        )

    # colorbars: gain, then energy-vector norm
    gain_low, gain_high, gain_suffix = _gain_scale(field.raster_eta, spec)
    bar1_x = bars_x0 + _BAR_GAP
    _colorbar_svg(
        parts, bar1_x, _MARGIN_TOP, height,
        f"eta{gain_suffix}", spec.colormap, gain_low, gain_high,
    )
    bar2_x = bar1_x + _BAR_WIDTH + _BAR_LABEL + _BAR_GAP
    re_title = "|rE|/ref" if spec.re_normalize else "|rE|"
    _colorbar_svg(
        parts, bar2_x, _MARGIN_TOP, height, re_title, spec.colormap, 0.0, bar_top
    )

    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def render_ppm(field: ResponseField, spec: RenderSpec, path) -> None:
    """Write the colormap-mapped gain raster as a binary PPM (P6) file.

    One pixel per raster cell, row-major from the north pole, using the
    same gain scale as the SVG background.
    """
    n_theta, n_phi = _raster_shape(field)
    unit = _gain_to_unit(field.raster_eta, spec)
    rgb = colormap_apply(spec.colormap, unit)
    data = np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n_phi} {n_theta}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
