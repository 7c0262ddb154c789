"""Generate the embedded spherical quadrature point sets.

Each set is antipodally symmetric ({x} and {-x} both present), so every
odd-degree spherical polynomial integrates to zero identically.  The free
half of the set is then optimized until the equal-weight quadrature error
of all even degrees up to (declared_degree - 1) vanishes to machine
precision, which makes the full set an equal-weight quadrature rule exact
through the declared (odd) degree.

Pipeline per design: Fibonacci-sphere initialization of the free half,
L-BFGS on the squared residual sum, then Levenberg-Marquardt polish on the
residual vector with an analytic Jacobian.  A design is only written after
it passes the Gram-matrix identity check at order floor(degree / 2) with
margin below the tolerances the package promises.

Run from the repository root:

    python scripts/generate_tdesigns.py [--only DEGREE]

Output goes to src/shoviz/data/tdesigns/.  Existing files are kept unless
--force is given.  Requires scipy (optimizer only; the package itself does
not depend on it).
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from shoviz.sph import acn_orders, sh_matrix  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "shoviz" / "data" / "tdesigns"

# (declared odd exactness degree, total point count Q); Q is even, the
# optimizer works on Q/2 free points.  Sizes follow the roughly t^2/2 + t/2
# growth of known symmetric designs, with margin.
GENERATED = [
    (7, 32),
    (9, 48),
    (11, 72),
    (13, 96),
    (15, 144),
    (17, 160),
    (19, 200),
    (21, 240),
    (25, 340),
]

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def octahedron() -> np.ndarray:
    eye = np.eye(3)
    return np.concatenate([eye, -eye], axis=0)


def icosahedron() -> np.ndarray:
    pts = []
    for a in (-1.0, 1.0):
        for b in (-GOLDEN, GOLDEN):
            pts.append((0.0, a, b))
            pts.append((a, b, 0.0))
            pts.append((b, 0.0, a))
    pts = np.array(pts) / math.sqrt(1.0 + GOLDEN ** 2)
    return pts


def sh_and_grads(thetas, phis, order):
    """Basis matrix plus its theta and phi derivatives, each (Q, (order+1)^2).

    The derivative recurrences are the term-by-term derivatives of the
    evaluation recurrences in shoviz.sph.sh_matrix.
    """
    ct, st = np.cos(thetas), np.sin(thetas)
    q = thetas.size
    ncoef = (order + 1) ** 2
    y = np.empty((q, ncoef))
    dy_t = np.empty((q, ncoef))
    dy_p = np.zeros((q, ncoef))
    sqrt2 = math.sqrt(2.0)

    pmm = np.full(q, 1.0 / math.sqrt(4.0 * math.pi))
    dpmm = np.zeros(q)
    for m in range(order + 1):
        if m > 0:
            cm = math.sqrt((2 * m + 1) / (2.0 * m))
            pmm, dpmm = cm * st * pmm, cm * (ct * pmm + st * dpmm)
        if m > 0:
            cos_m = sqrt2 * np.cos(m * phis)
            sin_m = sqrt2 * np.sin(m * phis)
        p2 = dp2 = None
        p1 = dp1 = None
        for n in range(m, order + 1):
            if n == m:
                p, dp = pmm, dpmm
            elif n == m + 1:
                c = math.sqrt(2 * m + 3)
                p, dp = c * ct * pmm, c * (-st * pmm + ct * dpmm)
            else:
                a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
                b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
                p = a * (ct * p1 - b * p2)
                dp = a * (-st * p1 + ct * dp1 - b * dp2)
            p2, dp2, p1, dp1 = p1, dp1, p, dp
            base = n * n + n
            if m == 0:
                y[:, base] = p
                dy_t[:, base] = dp
            else:
                y[:, base + m] = p * cos_m
                dy_t[:, base + m] = dp * cos_m
                dy_p[:, base + m] = -m * p * sin_m
                y[:, base - m] = p * sin_m
                dy_t[:, base - m] = dp * sin_m
                dy_p[:, base - m] = m * p * cos_m
    return y, dy_t, dy_p


def _selfcheck_grads(rng):
    thetas = rng.uniform(0.1, math.pi - 0.1, 40)
    phis = rng.uniform(-math.pi, math.pi, 40)
    order = 12
    y, dy_t, dy_p = sh_and_grads(thetas, phis, order)
    h = 1e-6
    fd_t = (sh_matrix(thetas + h, phis, order) - sh_matrix(thetas - h, phis, order)) / (2 * h)
    fd_p = (sh_matrix(thetas, phis + h, order) - sh_matrix(thetas, phis - h, order)) / (2 * h)
    assert np.max(np.abs(y - sh_matrix(thetas, phis, order))) < 1e-14
    assert np.max(np.abs(dy_t - fd_t)) < 1e-7, np.max(np.abs(dy_t - fd_t))
    assert np.max(np.abs(dy_p - fd_p)) < 1e-7, np.max(np.abs(dy_p - fd_p))


def even_degree_columns(even_max):
    n, _ = acn_orders(even_max)
    mask = (n >= 2) & (n % 2 == 0)
    return np.where(mask)[0]


def residuals_and_jac(params, even_max, cols, want_jac=True):
    m_pts = params.size // 2
    thetas = params[:m_pts]
    phis = params[m_pts:]
    y, dy_t, dy_p = sh_and_grads(thetas, phis, even_max)
    r = y[:, cols].sum(axis=0)
    if not want_jac:
        return r, None
    jac = np.concatenate([dy_t[:, cols].T, dy_p[:, cols].T], axis=1)
    return r, jac


def fibonacci_half(m_pts, rng):
    """m_pts points roughly covering a hemisphere, jittered."""
    i = np.arange(2 * m_pts)
    z = 1.0 - (i + 0.5) / m_pts  # spans [1, -1] over 2*m_pts, keep upper half
    z = z[:m_pts]
    phi = (2.0 * math.pi * (GOLDEN - 1.0)) * i[:m_pts]
    thetas = np.arccos(np.clip(z, -1, 1)) + rng.normal(0, 0.01, m_pts)
    phis = np.mod(phi + rng.normal(0, 0.01, m_pts), 2 * math.pi)
    return np.concatenate([thetas, phis])


def gram_error(points, order):
    thetas = np.arccos(np.clip(points[:, 2], -1, 1))
    phis = np.arctan2(points[:, 1], points[:, 0])
    y = sh_matrix(thetas, phis, order)
    g = (4.0 * math.pi / points.shape[0]) * (y.T @ y)
    return np.max(np.abs(g - np.eye(g.shape[0])))


def params_to_points(params):
    m_pts = params.size // 2
    thetas, phis = params[:m_pts], params[m_pts:]
    half = np.stack(
        [np.sin(thetas) * np.cos(phis), np.sin(thetas) * np.sin(phis), np.cos(thetas)],
        axis=1,
    )
    return np.concatenate([half, -half], axis=0)


def optimize_design(degree, q_total, seed):
    even_max = degree - 1
    cols = even_degree_columns(even_max)
    rng = np.random.default_rng(seed)
    params = fibonacci_half(q_total // 2, rng)

    def fval(p):
        r, jac = residuals_and_jac(p, even_max, cols)
        return float(r @ r), 2.0 * (jac.T @ r)

    res = minimize(fval, params, jac=True, method="L-BFGS-B",
                   options={"maxiter": 4000, "ftol": 0, "gtol": 1e-12})
    params = res.x

    # Levenberg-Marquardt polish, min-norm Gauss-Newton steps
    lam = 1e-8
    r, jac = residuals_and_jac(params, even_max, cols)
    best = float(np.max(np.abs(r)))
    for _ in range(200):
        if best < 2e-13:
            break
        jjt = jac @ jac.T
        jjt[np.diag_indices_from(jjt)] += lam * max(1e-300, np.trace(jjt) / jjt.shape[0])
        try:
            step = -jac.T @ np.linalg.solve(jjt, r)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        cand = params + step
        r_new, jac_new = residuals_and_jac(cand, even_max, cols)
        if np.max(np.abs(r_new)) < best:
            params, r, jac = cand, r_new, jac_new
            best = float(np.max(np.abs(r)))
            lam = max(lam * 0.25, 1e-14)
        else:
            lam *= 10
            if lam > 1e6:
                break
    return params_to_points(params), best


def write_design(path, points, degree, meta_lines):
    with open(path, "w") as fh:
        fh.write("# spherical quadrature point set, equal weights 4*pi/Q\n")
        fh.write(f"# declared polynomial exactness degree: {degree}\n")
        fh.write(f"# points: {points.shape[0]} (antipodally symmetric)\n")
        for line in meta_lines:
            fh.write(f"# {line}\n")
        fh.write("# columns: x y z\n")
        for p in points:
            fh.write("%.17g %.17g %.17g\n" % (p[0], p[1], p[2]))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", type=int, default=None, help="generate a single degree")
    ap.add_argument("--force", action="store_true", help="overwrite existing files")
    args = ap.parse_args()

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    _selfcheck_grads(np.random.default_rng(0))
    print("gradient self-check passed")

    exact = [(3, octahedron()), (5, icosahedron())]
    for degree, points in exact:
        if args.only is not None and degree != args.only:
            continue
        path = OUT_DIR / f"tdesign_deg{degree:02d}_q{points.shape[0]:04d}.txt"
        if path.exists() and not args.force:
            print(f"keep {path.name}")
            continue
        err = gram_error(points, degree // 2)
        write_design(path, points, degree,
                     [f"construction: exact polyhedron, max Gram deviation {err:.3e}"])
        print(f"wrote {path.name}  gram_err={err:.3e}")

    for degree, q_total in GENERATED:
        if args.only is not None and degree != args.only:
            continue
        existing = sorted(OUT_DIR.glob(f"tdesign_deg{degree:02d}_q*.txt"))
        if existing and not args.force:
            print(f"keep {existing[0].name}")
            continue
        t0 = time.time()
        done = False
        for extra in (0, 8, 16):
            q_try = q_total + extra
            for seed in range(4):
                points, maxres = optimize_design(degree, q_try, seed)
                err = gram_error(points, degree // 2)
                print(f"  deg {degree} Q={q_try} seed={seed}: residual={maxres:.2e} "
                      f"gram={err:.2e}  ({time.time()-t0:.0f}s)")
                if err < 2e-11:
                    path = OUT_DIR / f"tdesign_deg{degree:02d}_q{q_try:04d}.txt"
                    write_design(
                        path, points, degree,
                        [f"construction: optimized antipodal set, seed {seed}",
                         f"max even-degree sum residual: {maxres:.3e}",
                         f"max Gram deviation at order {degree // 2}: {err:.3e}"],
                    )
                    print(f"wrote {path.name}")
                    done = True
                    break
            if done:
                break
        if not done:
            print(f"FAILED degree {degree}", file=sys.stderr)
            sys.exit(1)
    print("all designs ready")


if __name__ == "__main__":
    main()
