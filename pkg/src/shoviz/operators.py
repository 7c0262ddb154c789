"""Linear operators on spherical-harmonics coefficient vectors.

Constructors for the operator families the package ships: rotations (by
recurrence, with an integral oracle), point-mirror and identity maps,
inclination warping with an energy-equalizing gain, and two noise-reduction
Wiener filters built from scene covariances.  All operators are dense real
matrices mapping order ``n_in`` coefficients to order ``n_out``, both sides
ACN-indexed in the real orthonormal basis.

Integral-built operators (warping, the direction-preserving Wiener filter)
have integrands that are smooth but not band-limited, so fixed-degree
design quadrature cannot be exact.  By default they are evaluated on a
Gauss-Legendre-by-rings product grid — exact in azimuth wherever the
integrand is band-limited there, geometrically convergent in inclination —
and re-evaluated with doubled node counts; construction fails with
:class:`ConvergenceError` unless the two evaluations agree in Frobenius
norm.  Passing an explicit design grid instead re-evaluates on the next
finer embedded design with a looser gate, which only converges for weak
warping or smooth gains.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grids import SphereGrid, design_above, gauss_ring_grid
from .sph import SHVector, cart_to_angles, n_coeffs, sh_matrix

OPERATOR_FILE_VERSION = 1
OPERATOR_FILE_CONVENTION = "real-N3D-ACN"

_DESIGN_REFINE_TOL = 1e-6
_PRODUCT_REFINE_TOL = 1e-9
_MAX_POLAR_NODES = 2000
_ROTATION_TOL = 1e-12


class ConvergenceError(ArithmeticError):
    """Quadrature failed to converge between two successive grid refinements."""


@dataclass(frozen=True, eq=False)
class SHOperator:
    """Dense real matrix acting on SH coefficient vectors.

    ``matrix`` has shape ``((n_out+1)**2, (n_in+1)**2)``.  ``meta`` carries
    construction diagnostics (quadrature residuals, grid names) and does not
    affect behavior.
    """

    n_in: int
    n_out: int
    matrix: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=float, order="C")
        if self.n_in < 0 or self.n_out < 0:
            raise ValueError("operator orders must be >= 0")
        expected = (n_coeffs(self.n_out), n_coeffs(self.n_in))
        if matrix.shape != expected:
            raise ValueError(
                f"matrix shape {matrix.shape} does not match orders "
                f"(expected {expected})"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("operator entries must be finite")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)


def apply(op: SHOperator, x: SHVector) -> SHVector:
    """Transform a coefficient vector; output has order ``op.n_out``."""
    if x.order != op.n_in:
        raise ValueError(
            f"operator expects input order {op.n_in}, got {x.order}"
        )
    return SHVector(op.n_out, op.matrix @ x.coeffs)


def compose(outer: SHOperator, inner: SHOperator) -> SHOperator:
    """Operator equivalent to applying ``inner`` first, then ``outer``."""
    if inner.n_out != outer.n_in:
        raise ValueError(
            f"cannot compose: inner output order {inner.n_out} != "
            f"outer input order {outer.n_in}"
        )
    return SHOperator(inner.n_in, outer.n_out, outer.matrix @ inner.matrix)


def identity_op(n: int) -> SHOperator:
    """The identity map at order ``n``."""
    return SHOperator(n, n, np.eye(n_coeffs(n)))


def _parity_signs(n: int) -> np.ndarray:
    orders = np.repeat(np.arange(n + 1), 2 * np.arange(n + 1) + 1)
    return (-1.0) ** orders


def mirror_op(n: int) -> SHOperator:
    """Point reflection of the field through the origin (s -> -s).

    Diagonal with sign (-1)**order per coefficient block, by the parity of
    the basis functions.
    """
    return SHOperator(n, n, np.diag(_parity_signs(n)))


def identity_plus_mirror_op(n: int) -> SHOperator:
    """Superposition of the identity and the point mirror.

    Doubles even-order coefficients and zeroes odd ones.  The response to
    any directional impulse is split evenly between two antipodal points,
    so the energy centroid vanishes everywhere — the canonical operator
    whose response direction is undefined.
    """
    return SHOperator(n, n, np.diag(1.0 + _parity_signs(n)))


# --------------------------------------------------------------------------
# rotation


@dataclass(frozen=True)
class Rotation3:
    """A proper rotation of 3-space, stored as a 3x3 matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=float, order="C")
        if matrix.shape != (3, 3):
            raise ValueError("rotation matrix must be 3x3")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("rotation matrix entries must be finite")
        if np.max(np.abs(matrix.T @ matrix - np.eye(3))) > _ROTATION_TOL:
            raise ValueError("matrix is not orthogonal")
        if abs(float(np.linalg.det(matrix)) - 1.0) > _ROTATION_TOL:
            raise ValueError("matrix is not a proper rotation (det != 1)")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_axis_angle(cls, axis, angle_rad: float) -> "Rotation3":
        """Right-handed rotation by ``angle_rad`` about ``axis`` (any norm)."""
        axis = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if not math.isfinite(norm) or norm < 1e-300:
            raise ValueError("rotation axis must be a nonzero finite vector")
        u = axis / norm
        k = np.array(
            [[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]]
        )
        mat = (
            np.eye(3)
            + math.sin(angle_rad) * k
            + (1.0 - math.cos(angle_rad)) * (k @ k)
        )
        return cls(mat)

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self.matrix.T


def _rotation_blocks(r1: np.ndarray, order: int) -> list[np.ndarray]:
    """Per-order rotation blocks from the order-1 block by recurrence.

    Standard real-basis recursion: every entry of the order-l block is a
    u/v/w-weighted combination of products of order-1 entries with entries
    of the (l-1) block.
    """

    def p(i: int, ell: int, a: int, b: int, prev: np.ndarray) -> float:
        ri1 = r1[i + 1, 2]
        rim1 = r1[i + 1, 0]
        ri0 = r1[i + 1, 1]
        if b == -ell:
            return ri1 * prev[a + ell - 1, 0] + rim1 * prev[a + ell - 1, 2 * ell - 2]
        if b == ell:
            return ri1 * prev[a + ell - 1, 2 * ell - 2] - rim1 * prev[a + ell - 1, 0]
        return ri0 * prev[a + ell - 1, b + ell - 1]

    def u_term(ell: int, m: int, n: int, prev: np.ndarray) -> float:
        return p(0, ell, m, n, prev)

    def v_term(ell: int, m: int, n: int, prev: np.ndarray) -> float:
        if m == 0:
            return p(1, ell, 1, n, prev) + p(-1, ell, -1, n, prev)
        if m > 0:
            if m == 1:
                return math.sqrt(2.0) * p(1, ell, 0, n, prev)
            return p(1, ell, m - 1, n, prev) - p(-1, ell, 1 - m, n, prev)
        if m == -1:
            return math.sqrt(2.0) * p(-1, ell, 0, n, prev)
        return p(-1, ell, -m - 1, n, prev) + p(1, ell, m + 1, n, prev)

    def w_term(ell: int, m: int, n: int, prev: np.ndarray) -> float:
        if m > 0:
            return p(1, ell, m + 1, n, prev) + p(-1, ell, -m - 1, n, prev)
        if m < 0:
            return p(1, ell, m - 1, n, prev) - p(-1, ell, 1 - m, n, prev)
        return 0.0

    blocks = [np.ones((1, 1)), r1.copy()]
    prev = r1
    for ell in range(2, order + 1):
        block = np.zeros((2 * ell + 1, 2 * ell + 1))
        for m in range(-ell, ell + 1):
            d = 1 if m == 0 else 0
            for n in range(-ell, ell + 1):
                if abs(n) == ell:
                    denom = (2 * ell) * (2 * ell - 1)
                else:
                    denom = ell * ell - n * n
                u = math.sqrt((ell * ell - m * m) / denom)
                v = (
                    math.sqrt((1.0 + d) * (ell + abs(m) - 1.0) * (ell + abs(m)) / denom)
                    * (1.0 - 2.0 * d)
                    * 0.5
                )
                w = (
                    math.sqrt((ell - abs(m) - 1.0) * (ell - abs(m)) / denom)
                    * (1.0 - d)
                    * (-0.5)
                )
                value = 0.0
                if u != 0.0:
                    value += u * u_term(ell, m, n, prev)
                if v != 0.0:
                    value += v * v_term(ell, m, n, prev)
                if w != 0.0:
                    value += w * w_term(ell, m, n, prev)
                block[m + ell, n + ell] = value
        blocks.append(block)
        prev = block
    return blocks[: order + 1]


def rotation_op(rot: Rotation3, n: int) -> SHOperator:
    """Coefficient-domain rotation, block-diagonal per order.

    The order-1 block is the Cartesian rotation conjugated into the basis
    axis order (y, z, x); higher blocks follow by recurrence.  Transforming
    coefficients with the result rotates the synthesized field forward:
    the new field at direction s equals the old field at ``rot^-1 s``.
    """
    perm = [1, 2, 0]
    r1 = rot.matrix[np.ix_(perm, perm)]
    matrix = np.zeros((n_coeffs(n), n_coeffs(n)))
    offset = 0
    for block in _rotation_blocks(r1, n):
        size = block.shape[0]
        matrix[offset : offset + size, offset : offset + size] = block
        offset += size
    return SHOperator(n, n, matrix)


def rotation_op_oracle(rot: Rotation3, n: int, grid: SphereGrid) -> SHOperator:
    """Rotation operator by direct quadrature of the rotated basis.

    Computes ``sum_q w_q * y(s_q)^T y(rot^-1 s_q)``, which is exact when
    the grid integrates polynomials of degree 2n.  Serves as the
    independent reference for :func:`rotation_op`.
    """
    if grid.degree < 2 * n:
        raise ValueError(
            f"grid degree {grid.degree} is insufficient; need >= {2 * n}"
        )
    basis = sh_matrix(grid.thetas, grid.phis, n)
    back_rotated = grid.points @ rot.matrix  # rows are rot^-1 applied to each point
    theta_b, phi_b = cart_to_angles(back_rotated)
    basis_back = sh_matrix(theta_b, phi_b, n)
    matrix = (basis * grid.weights[:, None]).T @ basis_back
    return SHOperator(n, n, matrix)


# --------------------------------------------------------------------------
# inclination warping


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or not -1.0 < alpha < 1.0:
        raise ValueError("warp strength alpha must satisfy -1 < alpha < 1")
    return alpha


def warp_f(theta, alpha: float):
    """Warped inclination: a Moebius map of cos(theta).

    Monotone bijection of [0, pi] onto itself; positive ``alpha`` pulls
    the field toward the north pole.  Accepts scalars or arrays.
    """
    alpha = _check_alpha(alpha)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > math.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")
    c = np.cos(theta)
    warped = np.arccos(np.clip((c + alpha) / (1.0 + alpha * c), -1.0, 1.0))
    return float(warped) if warped.ndim == 0 else warped


def warp_f_inv(theta_t, alpha: float):
    """Inverse of :func:`warp_f`; algebraically equal to warping by -alpha."""
    return warp_f(theta_t, -_check_alpha(alpha))


def warp_g(theta_t, alpha: float):
    """Energy-equalizing gain on the warped sphere.

    Equals sqrt of the area compression ``d cos(theta) / d cos(theta_t)``,
    so multiplying the warped field by it preserves total energy.
    """
    alpha = _check_alpha(alpha)
    theta_t = np.asarray(theta_t, dtype=float)
    gain = math.sqrt(1.0 - alpha * alpha) / (1.0 - alpha * np.cos(theta_t))
    return float(gain) if gain.ndim == 0 else gain


def _refinement_pair(
    build: Callable[[SphereGrid], np.ndarray],
    coarse_grid: SphereGrid,
    fine_grid: SphereGrid,
    tol: float,
    label: str,
) -> tuple[np.ndarray, dict]:
    """Evaluate a quadrature on two grids and gate on their agreement.

    Returns the finer result plus diagnostics; raises
    :class:`ConvergenceError` if the evaluations differ by ``tol`` or more
    in Frobenius norm.
    """
    coarse = build(coarse_grid)
    fine = build(fine_grid)
    residual = float(np.linalg.norm(fine - coarse))
    if not residual < tol:
        raise ConvergenceError(
            f"{label}: quadrature changed by {residual:.3e} between "
            f"{coarse_grid.name} and {fine_grid.name} (tolerance {tol})"
        )
    meta = {
        "quadrature_residual": residual,
        "quadrature_grid": fine_grid.name,
        "check_grid": coarse_grid.name,
    }
    return fine, meta


def _converged_quadrature(
    build: Callable[[SphereGrid], np.ndarray],
    grid: SphereGrid | None,
    n_polar: int,
    n_azimuth: int,
    label: str,
) -> tuple[np.ndarray, dict]:
    """Dispatch between the product-rule default and an explicit design grid.

    With ``grid=None``, evaluates on a Gauss-Legendre-by-rings grid and
    doubles the nodes until two consecutive evaluations agree under a
    tight gate (geometric for integrands analytic on the sphere, so a few
    rounds suffice).  With an explicit grid, the check re-evaluates on the
    next finer embedded design under a loose gate — faithful to
    fixed-degree quadrature but only usable when the integrand is nearly
    band-limited at the grid's degree.
    """
    if grid is None:
        n_polar = min(n_polar, _MAX_POLAR_NODES)
        coarse_grid = gauss_ring_grid(n_polar, n_azimuth)
        coarse = build(coarse_grid)
        while True:
            fine_grid = gauss_ring_grid(2 * n_polar, 2 * n_azimuth)
            fine = build(fine_grid)
            residual = float(np.linalg.norm(fine - coarse))
            if residual < _PRODUCT_REFINE_TOL:
                return fine, {
                    "quadrature_residual": residual,
                    "quadrature_grid": fine_grid.name,
                    "check_grid": coarse_grid.name,
                }
            if 2 * n_polar >= _MAX_POLAR_NODES:
                raise ConvergenceError(
                    f"{label}: quadrature changed by {residual:.3e} between "
                    f"{coarse_grid.name} and {fine_grid.name} (tolerance "
                    f"{_PRODUCT_REFINE_TOL}) and the node limit is reached"
                )
            n_polar *= 2
            n_azimuth *= 2
            coarse_grid, coarse = fine_grid, fine
    return _refinement_pair(
        build, grid, design_above(grid.degree), _DESIGN_REFINE_TOL, label
    )


def _warp_polar_nodes(alpha: float, n_in: int, n_out: int) -> int:
    """Gauss-Legendre node count for the warp integrand at strength ``alpha``.

    The integrand is analytic in cos(theta) with its nearest singularity at
    1/alpha, so the quadrature error decays like rho**(-2K) where rho is
    the Bernstein-ellipse radius through that pole.  Sized for machine
    precision with margin; the node-doubling gate verifies the result.
    """
    if alpha == 0.0:
        return max(40, n_in + n_out + 1)
    pole = 1.0 / abs(alpha)
    log_rho = math.log(pole + math.sqrt(pole * pole - 1.0))
    return max(40, math.ceil(18.0 / log_rho) + n_in + n_out)


def warp_op(
    alpha: float,
    n_in: int,
    n_out: int,
    grid: SphereGrid | None = None,
) -> SHOperator:
    """Inclination-warping operator with energy-equalizing gain.

    Projects the gained, warped field back onto the basis by quadrature
    over the output sphere.  The warped basis functions are not
    band-limited (their spectrum decays only like ``alpha**degree``), so
    the default path integrates on a product grid sized for the strength
    of the warp and verifies by node doubling; ``meta`` records the
    refinement residual.  Azimuth-invariant: commutes with rotations about
    the z axis.
    """
    alpha = _check_alpha(alpha)
    if grid is not None and grid.degree < n_in + n_out + 1:
        raise ValueError(
            f"grid degree {grid.degree} too low for warp quadrature at "
            f"orders ({n_in}, {n_out}); need > {n_in + n_out}"
        )

    def build(g: SphereGrid) -> np.ndarray:
        gain = warp_g(g.thetas, alpha)
        basis_out = sh_matrix(g.thetas, g.phis, n_out)
        basis_in = sh_matrix(warp_f_inv(g.thetas, alpha), g.phis, n_in)
        return (basis_out * (g.weights * gain)[:, None]).T @ basis_in

    matrix, meta = _converged_quadrature(
        build,
        grid,
        _warp_polar_nodes(alpha, n_in, n_out),
        n_in + n_out + 8,  # the azimuth factor is band-limited; small margin
        "warp",
    )
    meta["alpha"] = alpha
    return SHOperator(n_in, n_out, matrix, meta)


# --------------------------------------------------------------------------
# noise-reduction Wiener filters


@dataclass(frozen=True)
class SceneSource:
    """One far-field source: amplitude and direction angles in radians."""

    amplitude: float
    theta_rad: float
    phi_rad: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ValueError("source amplitude must be finite and >= 0")
        if not (math.isfinite(self.theta_rad) and math.isfinite(self.phi_rad)):
            raise ValueError("source angles must be finite")


@dataclass(frozen=True)
class SourceScene:
    """Discrete sources in diffuse noise, with SNR and trade-off parameter.

    ``snr_db`` fixes the noise level via the trace ratio of the two
    covariances; ``mu`` weighs noise suppression against distortion.
    """

    sources: tuple[SceneSource, ...]
    snr_db: float = 0.0
    mu: float = 1.0

    def __post_init__(self) -> None:
        sources = tuple(self.sources)
        if not sources:
            raise ValueError("scene must contain at least one source")
        if not all(isinstance(s, SceneSource) for s in sources):
            raise TypeError("sources must be SceneSource instances")
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not math.isfinite(self.mu) or self.mu <= 0.0:
            raise ValueError("mu must be finite and > 0")
        object.__setattr__(self, "sources", sources)


def three_source_scene(snr_db: float = 0.0, mu: float = 1.0) -> SourceScene:
    """The reference three-source scene used by the bundled presets."""
    return SourceScene(
        sources=(
            SceneSource(0.8, math.pi / 5.0, 0.0),
            SceneSource(1.0, math.pi / 2.0, math.pi / 3.0),
            SceneSource(0.4, 4.0 * math.pi / 5.0, -9.0 * math.pi / 10.0),
        ),
        snr_db=snr_db,
        mu=mu,
    )


SCENE_PRESETS: dict[str, Callable[..., SourceScene]] = {
    "table2": three_source_scene,
}


def scene_preset(name: str, snr_db: float = 0.0, mu: float = 1.0) -> SourceScene:
    """Named bundled scene; raises for unknown names."""
    try:
        factory = SCENE_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(SCENE_PRESETS))
        raise ValueError(f"unknown scene preset {name!r} (known: {known})") from None
    return factory(snr_db=snr_db, mu=mu)


def scene_covariances(scene: SourceScene, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Signal and noise covariance matrices of a scene at order ``n``.

    The signal covariance sums amplitude-squared outer products of the
    basis rows at the source directions; the noise is diffuse (a scaled
    identity) with its trace set by the scene's SNR.
    """
    size = n_coeffs(n)
    phi_d = np.zeros((size, size))
    for src in scene.sources:
        row = sh_matrix([src.theta_rad], [src.phi_rad], n)[0]
        phi_d += src.amplitude**2 * np.outer(row, row)
    sigma2 = np.trace(phi_d) / (size * 10.0 ** (scene.snr_db / 10.0))
    phi_nu = sigma2 * np.eye(size)
    return phi_d, phi_nu


def _power_factor(cov: np.ndarray) -> np.ndarray:
    """Low-rank factor ``L`` with ``cov = L @ L.T`` (PSD part).

    Tiny negative eigenvalues from rounding are clipped; keeping only the
    significant eigenpairs makes the per-direction power evaluation scale
    with the covariance rank instead of its full dimension.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (cov + cov.T))
    top = float(eigenvalues.max(initial=0.0))
    if top <= 0.0:
        return np.zeros((cov.shape[0], 0))
    keep = eigenvalues > top * 1e-15
    return eigenvectors[:, keep] * np.sqrt(eigenvalues[keep])


def _steered_powers(basis: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Power a unit beam steered at each basis row picks up from a field
    with covariance ``factor @ factor.T``."""
    if factor.shape[1] == 0:
        return np.zeros(basis.shape[0])
    return np.square(basis @ factor).sum(axis=1)


def nr_dp_from_covariances(
    phi_d: np.ndarray,
    phi_nu: np.ndarray,
    mu: float,
    n: int,
    grid: SphereGrid | None = None,
) -> SHOperator:
    """Direction-preserving Wiener filter from covariance matrices.

    Applies the scalar Wiener gain ``h = P_d / (P_d + mu * P_nu)`` of the
    steered-response powers pointwise on the sphere and projects back.
    ``h`` is a ratio of band-limited functions, hence smooth but not
    band-limited itself, so the default path integrates on a product grid
    and verifies by node doubling.  Symmetric positive semidefinite with
    spectral norm strictly below 1 for positive-definite noise.
    """
    if not math.isfinite(mu) or mu <= 0.0:
        raise ValueError("mu must be finite and > 0")
    if grid is not None and grid.degree < 2 * n + 1:
        raise ValueError(
            f"grid degree {grid.degree} too low for gain quadrature at "
            f"order {n}; need > {2 * n}"
        )

    factor_d = _power_factor(phi_d)
    factor_nu = _power_factor(phi_nu)

    def build(g: SphereGrid) -> np.ndarray:
        basis = sh_matrix(g.thetas, g.phis, n)
        p_d = _steered_powers(basis, factor_d)
        p_nu = _steered_powers(basis, factor_nu)
        denom = p_d + mu * p_nu
        gain = np.divide(p_d, denom, out=np.zeros_like(p_d), where=denom > 0.0)
        return (basis * (g.weights * gain)[:, None]).T @ basis

    nodes = max(128, 8 * n + 64)
    matrix, meta = _converged_quadrature(
        build, grid, nodes, nodes, "direction-preserving filter"
    )
    matrix = 0.5 * (matrix + matrix.T)
    return SHOperator(n, n, matrix, meta)


def nr_dp_op(scene: SourceScene, n: int, grid: SphereGrid | None = None) -> SHOperator:
    """Direction-preserving noise-reduction filter for a source scene."""
    phi_d, phi_nu = scene_covariances(scene, n)
    return nr_dp_from_covariances(phi_d, phi_nu, scene.mu, n, grid)


def nr_pm_from_covariances(
    phi_d: np.ndarray, phi_nu: np.ndarray, mu: float
) -> SHOperator:
    """Parametric multichannel Wiener filter from covariance matrices.

    Computes ``phi_d @ inv(phi_d + mu * phi_nu)`` through a linear solve
    (no explicit inverse).  With diffuse noise this is symmetric with
    eigenvalues in [0, 1), and its rank equals the number of sources.
    """
    if not math.isfinite(mu) or mu <= 0.0:
        raise ValueError("mu must be finite and > 0")
    phi_d = np.asarray(phi_d, dtype=float)
    regularized = phi_d + mu * np.asarray(phi_nu, dtype=float)
    matrix = np.linalg.solve(regularized.T, phi_d.T).T
    n = int(round(math.sqrt(phi_d.shape[0]))) - 1
    return SHOperator(n, n, matrix)


def nr_pm_op(scene: SourceScene, n: int) -> SHOperator:
    """Parametric multichannel Wiener filter for a source scene."""
    phi_d, phi_nu = scene_covariances(scene, n)
    return nr_pm_from_covariances(phi_d, phi_nu, scene.mu)


# --------------------------------------------------------------------------
# file I/O


def op_to_json(op: SHOperator) -> str:
    """Operator as a single-line JSON document (trailing newline included).

    Floats are serialized via ``repr`` so the matrix round-trips losslessly.
    """
    payload = {
        "version": OPERATOR_FILE_VERSION,
        "convention": OPERATOR_FILE_CONVENTION,
        "n_in": op.n_in,
        "n_out": op.n_out,
        "matrix": op.matrix.tolist(),
    }
    return json.dumps(payload, allow_nan=False) + "\n"


def op_to_file(op: SHOperator, path) -> None:
    """Write an operator as JSON; round-trips losslessly via repr floats."""
    with open(path, "w") as fh:
        fh.write(op_to_json(op))


def op_from_json(text: str, label: str = "operator") -> SHOperator:
    """Parse an operator JSON document, validating the schema.

    ``label`` names the source (a path, or e.g. ``"<stdin>"``) in errors.
    """
    payload = json.loads(text)
    path = label
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: operator file must contain a JSON object")
    version = payload.get("version")
    if version != OPERATOR_FILE_VERSION:
        raise ValueError(f"{path}: unsupported operator file version {version!r}")
    convention = payload.get("convention")
    if convention != OPERATOR_FILE_CONVENTION:
        raise ValueError(
            f"{path}: unsupported coefficient convention {convention!r} "
            f"(expected {OPERATOR_FILE_CONVENTION!r})"
        )
    try:
        n_in = int(payload["n_in"])
        n_out = int(payload["n_out"])
        matrix = np.array(payload["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed operator file: {exc}") from exc
    if matrix.ndim != 2 or matrix.shape != (n_coeffs(n_out), n_coeffs(n_in)):
        raise ValueError(
            f"{path}: matrix shape {matrix.shape} does not match declared "
            f"orders ({n_out}, {n_in})"
        )
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{path}: operator entries must be finite")
    return SHOperator(n_in, n_out, matrix)


def op_from_file(path) -> SHOperator:
    """Read an operator written by :func:`op_to_file`, validating the schema."""
    with open(path) as fh:
        text = fh.read()
    return op_from_json(text, label=str(path))


def scene_to_file(scene: SourceScene, path) -> None:
    """Write a source scene as JSON."""
    payload = {
        "sources": [
            {
                "amplitude": src.amplitude,
                "theta_rad": src.theta_rad,
                "phi_rad": src.phi_rad,
            }
            for src in scene.sources
        ],
        "snr_db": scene.snr_db,
        "mu": scene.mu,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, allow_nan=False, indent=2)
        fh.write("\n")


def scene_from_file(path) -> SourceScene:
    """Read a source scene written by :func:`scene_to_file`."""
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "sources" not in payload:
        raise ValueError(f"{path}: scene file must be an object with 'sources'")
    try:
        sources = tuple(
            SceneSource(
                float(entry["amplitude"]),
                float(entry["theta_rad"]),
                float(entry["phi_rad"]),
            )
            for entry in payload["sources"]
        )
        scene = SourceScene(
            sources=sources,
            snr_db=float(payload.get("snr_db", 0.0)),
            mu=float(payload.get("mu", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed scene file: {exc}") from exc
    return scene
