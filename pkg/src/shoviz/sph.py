"""Real spherical-harmonics basis, Legendre machinery, and discrete transforms.

Conventions used throughout the package:

* real, fully normalized ("N3D") spherical harmonics without the
  Condon-Shortley phase,
* ACN channel ordering, i.e. the coefficient of order ``n`` and degree
  ``m`` lives at linear index ``n**2 + n + m``,
* inclination ``theta`` measured from the +z axis in ``[0, pi]``, azimuth
  ``phi`` measured from +x towards +y in ``(-pi, pi]``.

A band-limited field of truncation order ``N`` therefore has ``(N+1)**2``
real coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_4PI = math.sqrt(4.0 * math.pi)

# below this value of sin(theta) the azimuth is reported as 0; the basis
# functions do not depend on it there
_POLE_SIN_EPS = 1e-12


def acn_index(n: int, m: int) -> int:
    """Linear ACN channel index ``n**2 + n + m`` of an (order, degree) pair."""
    if n < 0 or abs(m) > n:
        raise ValueError(f"invalid spherical-harmonic indices n={n}, m={m}")
    return n * n + n + m


def acn_orders(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays of order n and degree m for all channels up to ``order``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    n = np.repeat(np.arange(order + 1), 2 * np.arange(order + 1) + 1)
    m = np.concatenate([np.arange(-k, k + 1) for k in range(order + 1)])
    return n, m


def n_coeffs(order: int) -> int:
    """Number of coefficients of a signal truncated at ``order``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return (order + 1) ** 2


@dataclass(frozen=True, eq=False)
class Direction:
    """A unit direction on the sphere.

    Stores the Cartesian unit vector; spherical angles are derived.  At the
    poles (``sin(theta) < 1e-12``) the azimuth is defined as 0.
    """

    vec: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if v.shape != (3,):
            raise ValueError("direction must be a 3-vector")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("direction must have unit norm (use from_cartesian)")
        object.__setattr__(self, "vec", v)

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float) -> "Direction":
        """Normalize an arbitrary nonzero Cartesian vector to a Direction."""
        v = np.array([x, y, z], dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(v / norm)

    @classmethod
    def from_spherical(cls, theta: float, phi: float) -> "Direction":
        st = math.sin(theta)
        return cls(np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)]))

    @property
    def theta(self) -> float:
        """Inclination from +z in [0, pi]."""
        return math.acos(min(1.0, max(-1.0, self.vec[2])))

    @property
    def phi(self) -> float:
        """Azimuth in (-pi, pi]; 0 at the poles."""
        if math.hypot(self.vec[0], self.vec[1]) < _POLE_SIN_EPS:
            return 0.0
        return math.atan2(self.vec[1], self.vec[0])


def cart_to_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (theta, phi) of an (..., 3) array of unit vectors."""
    points = np.asarray(points, dtype=float)
    theta = np.arccos(np.clip(points[..., 2], -1.0, 1.0))
    phi = np.arctan2(points[..., 1], points[..., 0])
    # fix the azimuth at the poles
    pole = np.hypot(points[..., 0], points[..., 1]) < _POLE_SIN_EPS
    phi = np.where(pole, 0.0, phi)
    return theta, phi


def angles_to_cart(theta, phi) -> np.ndarray:
    """Vectorized unit vectors of (theta, phi) arrays, stacked on the last axis."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(eq=False)
class SHVector:
    """Real SH coefficient vector of truncation order ``order``, ACN-indexed."""

    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (n_coeffs(self.order),):
            raise ValueError(
                f"coefficient vector of order {self.order} must have length "
                f"{n_coeffs(self.order)}, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        self.coeffs = c

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def legendre_p(n: int, x):
    """Legendre polynomial P_n evaluated by the three-term recurrence.

    Accepts a scalar or array ``x`` with ``|x| <= 1``.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("legendre_p argument must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def _legendre_pair(n: int, x: float) -> tuple[float, float]:
    """(P_n(x), P_{n-1}(x)) for scalar x, used by the Newton root solver."""
    p_prev, p = 1.0, x
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p, p_prev


def legendre_max_zero(n: int) -> float:
    """Largest zero of the Legendre polynomial P_n.

    Newton iteration started from the classical cosine estimate for the
    first root; the derivative uses P_{n-1} so no polynomial coefficients
    are ever formed.  The result satisfies ``|P_n(root)| < 1e-12``.
    """
    if n < 1:
        raise ValueError("degree must be >= 1")
    if n == 1:
        return 0.0
    # first-root estimate (largest zero)
    x = (1.0 - 1.0 / (8.0 * n * n) + 1.0 / (8.0 * n ** 3)) * math.cos(
        math.pi * 3.0 / (4.0 * n + 2.0)
    )
    for _ in range(60):
        p, p_prev = _legendre_pair(n, x)
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        step = p / dp
        x -= step
        if abs(step) < 1e-16:
            break
    if abs(_legendre_pair(n, x)[0]) > 1e-12:
        raise RuntimeError(f"Newton iteration for the largest P_{n} zero did not converge")
    return x


def sh_matrix(thetas, phis, order: int) -> np.ndarray:
    """Basis matrix with rows ``y(theta_q, phi_q)``, shape (Q, (order+1)**2).

    Orthonormal associated Legendre values are generated by the sectoral
    seed / order-raising recurrences, which are stable far beyond the
    orders this package targets; no factorials are formed.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if thetas.shape != phis.shape or thetas.ndim != 1:
        raise ValueError("thetas and phis must be 1-D arrays of equal length")
    ct = np.cos(thetas)
    st = np.sin(thetas)
    out = np.empty((thetas.size, n_coeffs(order)))
    sqrt2 = math.sqrt(2.0)

    pmm = np.full(thetas.shape, 1.0 / SQRT_4PI)
    for m in range(order + 1):
        if m > 0:
            pmm = pmm * st * math.sqrt((2 * m + 1) / (2.0 * m))
        if m == 0:
            cos_m = None
            sin_m = None
        else:
            cos_m = sqrt2 * np.cos(m * phis)
            sin_m = sqrt2 * np.sin(m * phis)
        p_nm2 = None
        p_nm1 = None
        for n in range(m, order + 1):
            if n == m:
                p = pmm
            elif n == m + 1:
                p = math.sqrt(2 * m + 3) * ct * pmm
            else:
                a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
                b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
                p = a * (ct * p_nm1 - b * p_nm2)
            p_nm2, p_nm1 = p_nm1, p
            if m == 0:
                out[:, acn_index(n, 0)] = p
            else:
                out[:, acn_index(n, m)] = p * cos_m
                out[:, acn_index(n, -m)] = p * sin_m
    return out


def eval_sh_row(direction: Direction, order: int) -> np.ndarray:
    """Row vector of all basis values at one direction, ACN order."""
    return sh_matrix([direction.theta], [direction.phi], order)[0]


def synthesize(x: SHVector, grid) -> np.ndarray:
    """Evaluate the band-limited field described by ``x`` at the grid points."""
    return sh_matrix(grid.thetas, grid.phis, x.order) @ x.coeffs


def analyze(values, grid, order: int) -> SHVector:
    """Project sampled field values onto the basis using the grid weights.

    Exact whenever the field is band-limited at ``order`` and the grid
    integrates polynomials of degree ``2 * order``.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.q,):
        raise ValueError(
            f"expected {grid.q} samples for grid '{grid.name}', got {values.shape}"
        )
    basis = sh_matrix(grid.thetas, grid.phis, order)
    return SHVector(order, basis.T @ (grid.weights * values))


def dirac_excitation(direction: Direction, order: int) -> SHVector:
    """Unit-norm band-limited directional impulse aimed at ``direction``."""
    return SHVector(order, (SQRT_4PI / (order + 1)) * eval_sh_row(direction, order))


def dirac_pattern(delta, order: int):
    """Closed-form spatial shape of the band-limited impulse.

    ``delta`` is the great-circle angle to the impulse center; the value is
    ``sum_n (2n+1) P_n(cos delta) / sqrt(4 pi (order+1)**2)``.
    """
    delta = np.asarray(delta, dtype=float)
    x = np.cos(delta)
    total = np.zeros_like(x)
    p_prev = np.ones_like(x)
    p = x.copy()
    for n in range(order + 1):
        if n == 0:
            pn = p_prev
        elif n == 1:
            pn = p
        else:
            p_prev, p = p, ((2 * n - 1) * x * p - (n - 1) * p_prev) / n
            pn = p
        total = total + (2 * n + 1) * pn
    total = total / (SQRT_4PI * (order + 1))
    return total if total.ndim else float(total)
