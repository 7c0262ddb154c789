"""Directional characterization of coefficient-domain operators.

An operator is probed with unit-norm band-limited directional impulses:
the response norm gives the directional gain, and the energy centroid of
the squared response pattern gives the energy vector, whose norm is
bounded by the largest zero of the next-order Legendre polynomial.  A
:class:`ResponseField` gathers gain and energy vectors over a display grid
plus a dense gain raster for map backgrounds, and an operator can be
reconstructed exactly from its responses on a sufficiently dense grid.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grids import SphereGrid, builtin_tdesign, display_tdesign, equirect_raster
from .operators import SHOperator, apply
from .sph import (
    SQRT_4PI,
    Direction,
    SHVector,
    dirac_excitation,
    legendre_max_zero,
    sh_matrix,
)

# Below this response energy the centroid is numerical noise and the energy
# vector is reported as exactly zero.
_ENERGY_FLOOR = 1e-20

# Below this energy-vector norm the derived unit direction carries no
# information and is flagged undefined.
DIRECTION_THRESHOLD = 1e-6

# Directions are processed in fixed-size blocks so that results are
# bit-identical for every thread count.
_CHUNK = 512


def re_max(n_out: int) -> float:
    """Upper bound of the energy-vector norm at output order ``n_out``.

    The largest zero of the Legendre polynomial of degree ``n_out + 1``;
    defined as 0 for order 0 (a constant response has no centroid offset).
    """
    if n_out < 0:
        raise ValueError("order must be >= 0")
    if n_out == 0:
        return 0.0
    return legendre_max_zero(n_out + 1)


def response(op: SHOperator, direction: Direction) -> SHVector:
    """Operator output for the unit-norm impulse excitation at ``direction``."""
    return apply(op, dirac_excitation(direction, op.n_in))


def directional_gain(op: SHOperator, direction: Direction) -> float:
    """Norm of the response to the unit-norm excitation from ``direction``."""
    return response(op, direction).norm()


def _excitations(op: SHOperator, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Excitation coefficient rows for a batch of directions, shape (Q, n_in_coeffs)."""
    return (SQRT_4PI / (op.n_in + 1)) * sh_matrix(thetas, phis, op.n_in)


def _check_quad_grid(op: SHOperator, grid: SphereGrid) -> None:
    if grid.degree < 2 * op.n_out:
        raise ValueError(
            f"quadrature grid degree {grid.degree} insufficient for output "
            f"order {op.n_out}; need >= {2 * op.n_out}"
        )


def energy_vector(op: SHOperator, direction: Direction, grid: SphereGrid) -> np.ndarray:
    """Normalized energy centroid of the response pattern.

    Integrates the squared response pattern times the direction vector over
    the sphere and divides by the pattern energy.  Returns the zero vector
    when the response energy is negligible.  The grid must integrate
    squared patterns of the output order exactly.
    """
    _check_quad_grid(op, grid)
    u = response(op, direction).coeffs
    values = sh_matrix(grid.thetas, grid.phis, op.n_out) @ u
    power = grid.weights * values**2
    energy = float(power.sum())
    if energy < _ENERGY_FLOOR:
        return np.zeros(3)
    return (power @ grid.points) / energy


@dataclass(frozen=True)
class ResponseField:
    """Gain and energy-vector characterization of one operator.

    Per display-grid direction: gain ``eta``, energy vector ``re_vec`` with
    norm ``re_norm``, derived unit direction ``re_unit`` (zero rows where
    ``re_defined`` is False), plus a dense gain raster for map backgrounds.
    ``re_bound`` is the norm bound at the output order; ``re_reference``
    the value an identity of the input order would produce.
    """

    n_in: int
    n_out: int
    display_grid: SphereGrid
    eta: np.ndarray
    re_vec: np.ndarray
    re_norm: np.ndarray
    re_unit: np.ndarray
    re_defined: np.ndarray
    raster_grid: SphereGrid
    raster_eta: np.ndarray
    re_bound: float
    re_reference: float


def _gains_chunked(
    op: SHOperator, grid: SphereGrid, pool: ThreadPoolExecutor | None
) -> np.ndarray:
    out = np.empty(grid.q)

    def work(start: int, stop: int) -> None:
        exc = _excitations(op, grid.thetas[start:stop], grid.phis[start:stop])
        out[start:stop] = np.linalg.norm(op.matrix @ exc.T, axis=0)

    _run_chunks(work, grid.q, pool)
    return out


def _energy_vectors_chunked(
    op: SHOperator,
    grid: SphereGrid,
    quad_grid: SphereGrid,
    pool: ThreadPoolExecutor | None,
) -> tuple[np.ndarray, np.ndarray]:
    gains = np.empty(grid.q)
    vecs = np.empty((grid.q, 3))
    quad_basis = sh_matrix(quad_grid.thetas, quad_grid.phis, op.n_out)

    def work(start: int, stop: int) -> None:
        exc = _excitations(op, grid.thetas[start:stop], grid.phis[start:stop])
        responses = op.matrix @ exc.T  # (n_out_coeffs, chunk)
        gains[start:stop] = np.linalg.norm(responses, axis=0)
        power = quad_grid.weights[:, None] * (quad_basis @ responses) ** 2
        energy = power.sum(axis=0)
        centroid = power.T @ quad_grid.points
        safe = energy >= _ENERGY_FLOOR
        centroid[~safe] = 0.0
        centroid[safe] /= energy[safe, None]
        vecs[start:stop] = centroid

    _run_chunks(work, grid.q, pool)
    return gains, vecs


def _run_chunks(work, total: int, pool: ThreadPoolExecutor | None) -> None:
    bounds = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    if pool is None:
        for start, stop in bounds:
            work(start, stop)
    else:
        for future in [pool.submit(work, s, e) for s, e in bounds]:
            future.result()


def characterize_field(
    op: SHOperator,
    display_grid: SphereGrid | None = None,
    raster: SphereGrid | None = None,
    quad_grid: SphereGrid | None = None,
    threads: int = 1,
) -> ResponseField:
    """Characterize an operator over a display grid and a gain raster.

    Defaults: the 144-point display design, a 2-degree raster, and the
    smallest embedded design that integrates squared output patterns
    exactly.  ``threads`` parallelizes over directions in fixed blocks, so
    results are identical for every thread count.
    """
    if display_grid is None:
        display_grid = display_tdesign()
    if raster is None:
        raster = equirect_raster(2.0)
    if quad_grid is None:
        quad_grid = builtin_tdesign(2 * op.n_out)
    _check_quad_grid(op, quad_grid)
    if threads < 1:
        raise ValueError("threads must be >= 1")

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        raster_eta = _gains_chunked(op, raster, pool)
        eta, re_vec = _energy_vectors_chunked(op, display_grid, quad_grid, pool)
    finally:
        if pool is not None:
            pool.shutdown()

    re_norm = np.linalg.norm(re_vec, axis=1)
    re_defined = re_norm > DIRECTION_THRESHOLD
    re_unit = np.zeros_like(re_vec)
    re_unit[re_defined] = re_vec[re_defined] / re_norm[re_defined, None]
    return ResponseField(
        n_in=op.n_in,
        n_out=op.n_out,
        display_grid=display_grid,
        eta=eta,
        re_vec=re_vec,
        re_norm=re_norm,
        re_unit=re_unit,
        re_defined=re_defined,
        raster_grid=raster,
        raster_eta=raster_eta,
        re_bound=re_max(op.n_out),
        re_reference=op.n_in / (op.n_in + 1.0),
    )


def responses_over_grid(op: SHOperator, grid: SphereGrid) -> np.ndarray:
    """Response coefficient rows for excitations at all grid points, (Q, coeffs)."""
    exc = _excitations(op, grid.thetas, grid.phis)
    return (op.matrix @ exc.T).T


def reconstruct_operator(
    responses: np.ndarray, grid: SphereGrid, n_in: int
) -> SHOperator:
    """Recover the operator matrix from its responses on a quadrature grid.

    ``responses`` holds one response coefficient row per grid point, as
    produced by :func:`responses_over_grid`.  Exact (it inverts the
    excitation map) whenever the grid integrates products of input-order
    basis functions exactly.
    """
    if grid.degree < 2 * n_in:
        raise ValueError(
            f"grid degree {grid.degree} insufficient for reconstruction at "
            f"input order {n_in}; need >= {2 * n_in}"
        )
    responses = np.asarray(responses, dtype=float)
    if responses.ndim != 2 or responses.shape[0] != grid.q:
        raise ValueError("responses must have one row per grid point")
    basis_in = sh_matrix(grid.thetas, grid.phis, n_in)
    matrix = (SQRT_4PI * (n_in + 1) / grid.q) * (responses.T @ basis_in)
    n_out = int(round(math.sqrt(responses.shape[1]))) - 1
    return SHOperator(n_in, n_out, matrix)


def field_to_json(field: ResponseField, path) -> None:
    """Write the display-grid characterization as JSON."""
    payload = {
        "n_in": field.n_in,
        "n_out": field.n_out,
        "re_bound": field.re_bound,
        "re_reference": field.re_reference,
        "display_points": [
            {"theta_rad": float(t), "phi_rad": float(p)}
            for t, p in zip(field.display_grid.thetas, field.display_grid.phis)
        ],
        "eta": field.eta.tolist(),
        "re_vec": field.re_vec.tolist(),
        "re_norm": field.re_norm.tolist(),
        "re_defined": field.re_defined.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, allow_nan=False)
        fh.write("\n")


def raster_to_csv(field: ResponseField, path) -> None:
    """Write the gain raster as CSV rows of theta_deg, phi_deg, eta."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "phi_deg", "eta"])
        thetas = np.degrees(field.raster_grid.thetas)
        phis = np.degrees(field.raster_grid.phis)
        for theta, phi, eta in zip(thetas, phis, field.raster_eta):
            writer.writerow([f"{theta:.6f}", f"{phi:.6f}", repr(float(eta))])
