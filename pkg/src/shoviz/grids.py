"""Spherical sampling grids: embedded quadrature designs and display rasters.

A :class:`SphereGrid` bundles unit-vector sample points with quadrature
weights and a declared polynomial exactness degree.  The embedded catalog
consists of antipodally symmetric point sets whose equal weights ``4*pi/Q``
integrate every spherical polynomial up to the declared degree exactly (to
machine precision); see ``scripts/generate_tdesigns.py`` for how they were
constructed and validated.  Rasters for map display carry approximate
cell-area weights and declare degree 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cache, cached_property
from importlib import resources

import numpy as np

from .sph import angles_to_cart, cart_to_angles, sh_matrix

FOUR_PI = 4.0 * math.pi

# Largest exactness degree served by the public catalog lookup.  One finer
# design is embedded beyond this for internal convergence checks.
MAX_BUILTIN_DEGREE = 21

_MAX_VERIFY_DEGREE = 50
_UNIT_DEVIATION_REJECT = 1e-6
_CENTROID_TOL = 0.05
_FILENAME_RE = re.compile(r"tdesign_deg(\d+)_q(\d+)\.txt$")


class UnsupportedDegreeError(ValueError):
    """Requested exactness degree exceeds the embedded design catalog."""


@dataclass(frozen=True)
class SphereGrid:
    """Immutable point set with quadrature weights and declared exactness.

    ``points`` is a (Q, 3) array of unit vectors, ``weights`` the matching
    (Q,) array of positive quadrature weights in steradians.  ``degree`` is
    the declared polynomial exactness (0 for display-only grids), ``name``
    a provenance label.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int
    name: str

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float, order="C")
        weights = np.array(self.weights, dtype=float, order="C")
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 1:
            raise ValueError("points must form a (Q, 3) array with Q >= 1")
        if weights.shape != (points.shape[0],):
            raise ValueError("weights must form a (Q,) array matching points")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise ValueError("grid points and weights must be finite")
        if np.max(np.abs(np.linalg.norm(points, axis=1) - 1.0)) > 1e-12:
            raise ValueError("grid points must be unit vectors")
        if np.any(weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if self.degree < 0:
            raise ValueError("declared degree must be >= 0")
        if self.degree >= 2:
            centroid = float(np.linalg.norm(points.mean(axis=0)))
            if centroid >= _CENTROID_TOL:
                raise ValueError(
                    f"point centroid norm {centroid:.3g} too large for a "
                    "quasi-uniform quadrature design"
                )
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def q(self) -> int:
        """Number of sample points."""
        return self.points.shape[0]

    @cached_property
    def _angles(self) -> tuple[np.ndarray, np.ndarray]:
        return cart_to_angles(self.points)

    @property
    def thetas(self) -> np.ndarray:
        """Inclinations of all points, in [0, pi]."""
        return self._angles[0]

    @property
    def phis(self) -> np.ndarray:
        """Azimuths of all points, in (-pi, pi]; 0 at the poles."""
        return self._angles[1]


def _validated_unit_points(points: np.ndarray, label: str) -> np.ndarray:
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"{label}: expected three columns of coordinates")
    norms = np.linalg.norm(points, axis=1)
    if np.max(np.abs(norms - 1.0)) > _UNIT_DEVIATION_REJECT:
        raise ValueError(f"{label}: coordinates deviate too far from unit length")
    return points / norms[:, None]


def equal_weight_grid(points: np.ndarray, degree: int, name: str) -> SphereGrid:
    """Grid with uniform weights ``4*pi/Q`` on the given unit vectors.

    Points within rounding distance of unit length are renormalized;
    anything farther off is rejected.
    """
    points = _validated_unit_points(np.asarray(points, dtype=float), name)
    q = points.shape[0]
    return SphereGrid(points, np.full(q, FOUR_PI / q), degree, name)


@cache
def _catalog_entries() -> tuple[tuple[int, int, str], ...]:
    """Sorted (degree, Q, filename) triples of the embedded designs."""
    root = resources.files("shoviz.data") / "tdesigns"
    entries = []
    for item in root.iterdir():
        match = _FILENAME_RE.fullmatch(item.name)
        if match:
            entries.append((int(match.group(1)), int(match.group(2)), item.name))
    if not entries:
        raise RuntimeError("no embedded quadrature designs found")
    entries.sort()
    return tuple(entries)


@cache
def _load_catalog_design(filename: str, degree: int) -> SphereGrid:
    root = resources.files("shoviz.data") / "tdesigns"
    with (root / filename).open("r") as fh:
        points = np.loadtxt(fh, comments="#", ndmin=2)
    points = _validated_unit_points(points, filename)
    return equal_weight_grid(points, degree, filename.removesuffix(".txt"))


def builtin_tdesign(min_degree: int) -> SphereGrid:
    """Smallest embedded design with exactness degree >= ``min_degree``.

    The catalog serves degrees up to :data:`MAX_BUILTIN_DEGREE`; asking for
    more raises :class:`UnsupportedDegreeError`.
    """
    if min_degree < 0:
        raise ValueError("min_degree must be >= 0")
    if min_degree > MAX_BUILTIN_DEGREE:
        raise UnsupportedDegreeError(
            f"no embedded design with degree >= {min_degree}; "
            f"the catalog ends at {MAX_BUILTIN_DEGREE}"
        )
    for degree, _, filename in _catalog_entries():
        if degree >= min_degree:
            return _load_catalog_design(filename, degree)
    raise UnsupportedDegreeError(f"no embedded design with degree >= {min_degree}")


def design_above(degree: int) -> SphereGrid:
    """Smallest embedded design with exactness degree strictly above ``degree``.

    Reaches one step past :data:`MAX_BUILTIN_DEGREE`, which is how the
    integral-built operators re-evaluate their quadrature on a finer grid
    for convergence checking.
    """
    for entry_degree, _, filename in _catalog_entries():
        if entry_degree > degree:
            return _load_catalog_design(filename, entry_degree)
    raise UnsupportedDegreeError(f"no embedded design with degree > {degree}")


def display_tdesign() -> SphereGrid:
    """The 144-point design used as the default vector-field display grid."""
    for degree, q, filename in _catalog_entries():
        if q == 144:
            return _load_catalog_design(filename, degree)
    raise RuntimeError("embedded catalog is missing the 144-point display design")


def design_with_points(min_points: int) -> SphereGrid:
    """Smallest embedded design with at least ``min_points`` points.

    Point-count selection for display grids, where spatial coverage rather
    than exactness degree is what matters.
    """
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    best = None
    for degree, q, filename in _catalog_entries():
        if q >= min_points and (best is None or q < best[1]):
            best = (degree, q, filename)
    if best is None:
        largest = max(q for _, q, _ in _catalog_entries())
        raise UnsupportedDegreeError(
            f"no embedded design with at least {min_points} points "
            f"(largest has {largest})"
        )
    return _load_catalog_design(best[2], best[0])


def gauss_ring_grid(n_polar: int, n_azimuth: int) -> SphereGrid:
    """Product quadrature: Gauss-Legendre in cos(theta) times uniform rings.

    Declared exactness is ``min(2*n_polar - 1, n_azimuth - 1)``: the ring
    average kills every azimuthal order below ``n_azimuth`` and the
    Gauss-Legendre nodes integrate the remaining polynomial in cos(theta).
    Beyond polynomial exactness, the rule converges geometrically for
    integrands analytic in cos(theta) and periodic-analytic in azimuth,
    which is what the integral-built operators rely on.
    """
    if n_polar < 1 or n_azimuth < 1:
        raise ValueError("node counts must be >= 1")
    nodes, gl_weights = np.polynomial.legendre.leggauss(n_polar)
    thetas = np.arccos(nodes)
    d_phi = 2.0 * math.pi / n_azimuth
    phis = -math.pi + (np.arange(n_azimuth) + 0.5) * d_phi
    theta_grid = np.repeat(thetas, n_azimuth)
    phi_grid = np.tile(phis, n_polar)
    weights = np.repeat(gl_weights, n_azimuth) * d_phi
    degree = min(2 * n_polar - 1, n_azimuth - 1)
    return SphereGrid(
        angles_to_cart(theta_grid, phi_grid),
        weights,
        degree,
        f"gauss_ring_{n_polar}x{n_azimuth}",
    )


def equirect_raster(cell_deg: float) -> SphereGrid:
    """Cell-center grid of an equirectangular map with square cells.

    Covers azimuth (-pi, pi] left to right and inclination [0, pi] top to
    bottom in row-major order starting at the north pole.  Weights are the
    cell solid angles ``sin(theta) * dtheta * dphi`` — good enough for
    display averages, not an exact quadrature (declared degree 0).
    """
    if not 0.1 <= cell_deg <= 30.0:
        raise ValueError("cell_deg must lie in [0.1, 30]")
    n_phi = math.ceil(360.0 / cell_deg)
    n_theta = math.ceil(180.0 / cell_deg)
    d_theta = math.pi / n_theta
    d_phi = 2.0 * math.pi / n_phi
    thetas = (np.arange(n_theta) + 0.5) * d_theta
    phis = -math.pi + (np.arange(n_phi) + 0.5) * d_phi
    theta_grid = np.repeat(thetas, n_phi)
    phi_grid = np.tile(phis, n_theta)
    weights = np.sin(theta_grid) * d_theta * d_phi
    return SphereGrid(
        angles_to_cart(theta_grid, phi_grid),
        weights,
        0,
        f"equirect_{cell_deg:g}deg",
    )


def quadrature_deviation(grid: SphereGrid, order: int) -> float:
    """Max deviation of the weighted basis Gram matrix from identity at ``order``."""
    basis = sh_matrix(grid.thetas, grid.phis, order)
    gram = basis.T @ (grid.weights[:, None] * basis)
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def verify_degree(grid: SphereGrid, degree: int) -> bool:
    """Check the quadrature exactness claim at ``degree``.

    True iff the weighted basis Gram matrix at order ``degree // 2``
    matches the identity within 1e-9, i.e. the grid integrates all
    products of basis functions up to that order exactly.
    """
    if not 0 <= degree <= _MAX_VERIFY_DEGREE:
        raise ValueError(f"degree must lie in [0, {_MAX_VERIFY_DEGREE}]")
    return quadrature_deviation(grid, degree // 2) < 1e-9
