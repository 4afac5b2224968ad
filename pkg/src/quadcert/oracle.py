"""Ground-truth solvers used to validate certificates.

These are deliberately independent of the certificate machinery: a damped
multistart Newton iteration for generic real systems, an exact interval
oracle for decoupled scalar quadratics, and a brute-force occupancy scan
over 2-D parameter slices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnsupportedFormError
from .linalg import inf_norm_vec
from .quadform import QuadraticSystem, eval_f, jac_x_matrix

GRID_MULTISTART_MAX_DIM = 4


@dataclass
class SolveReport:
    found: bool
    x: Optional[np.ndarray]
    residual: float
    distance_from_nominal: float
    starts_tried: int


def _newton_from(sys, u, x0, tol, max_iter=50, max_halvings=20):
    """Damped Newton from one start; returns a solution vector or None."""
    x = np.asarray(x0, dtype=complex)
    fx = eval_f(sys, x, u)
    for _ in range(max_iter):
        r = inf_norm_vec(fx)
        if r < tol:
            return x
        try:
            step = np.linalg.solve(jac_x_matrix(sys, x, u), -fx)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(max_halvings):
            x_new = x + lam * step
            f_new = eval_f(sys, x_new, u)
            if inf_norm_vec(f_new) < r:
                x, fx = x_new, f_new
                break
            lam *= 0.5
        else:
            return None
    return x if inf_norm_vec(fx) < tol else None


def newton_multistart(
    sys: QuadraticSystem,
    u,
    x_star,
    r: float,
    grid_points_per_dim: int = 5,
    tol: float = 1e-10,
) -> SolveReport:
    """Search for a root near x_star inside the inf-ball of radius r.

    Starts on a uniform grid over the ball for dimension <= 4, otherwise only
    from x_star. Reports the converged root closest to x_star, with the
    residual re-checked through eval_f rather than trusted from the iteration.
    """
    if sys.complex_flag:
        raise ValueError("newton_multistart supports real (non-conjugating) systems")
    x_star = np.asarray(x_star, dtype=complex)
    if sys.n <= GRID_MULTISTART_MAX_DIM:
        axes = [
            np.linspace(x_star[i].real - r, x_star[i].real + r, grid_points_per_dim)
            for i in range(sys.n)
        ]
        starts = [np.array(p, dtype=complex) for p in itertools.product(*axes)]
    else:
        starts = [x_star.copy()]

    best = None
    best_dist = math.inf
    for x0 in starts:
        x = _newton_from(sys, u, x0, tol)
        if x is None:
            continue
        if inf_norm_vec(eval_f(sys, x, u)) >= tol:
            continue
        dist = inf_norm_vec(x - x_star)
        if dist < best_dist:
            best, best_dist = x, dist
    if best is None:
        return SolveReport(False, None, math.inf, math.inf, len(starts))
    return SolveReport(
        True,
        best,
        inf_norm_vec(eval_f(sys, best, u)),
        best_dist,
        len(starts),
    )


def _diagonal_coefficients(sys: QuadraticSystem):
    """Extract per-equation (a, b, c0, kappa) for a decoupled system.

    Equation i must read a_i x_i^2 + b_i x_i + c0_i + kappa_i u_i = 0 with
    parameter-independent a, b; raises UnsupportedFormError otherwise.
    """
    if sys.complex_flag:
        raise UnsupportedFormError("decoupled oracle handles real systems only")
    n = sys.n
    a = np.zeros(n)
    b = np.zeros(n)
    for m, i, j, l, c in sys.quad_terms:
        if m != 0 or j != i or l != i:
            raise UnsupportedFormError(
                "quadratic terms must be x_i^2 with fixed coefficients"
            )
        a[i] += c.real
    for m, i, j, c in sys.lin_terms:
        if m != 0 or j != i:
            raise UnsupportedFormError(
                "linear terms must be diagonal with fixed coefficients"
            )
        b[i] += c.real
    if sys.k != n:
        raise UnsupportedFormError("expected one parameter per equation")
    kap = np.zeros(n)
    for i in range(n):
        row = sys.k1[i]
        nz = np.nonzero(row)[0]
        if len(nz) != 1 or nz[0] != i or row[i].imag != 0:
            raise UnsupportedFormError("each equation must see exactly its own parameter")
        kap[i] = row[i].real
    if np.any(a == 0):
        raise UnsupportedFormError("equations must be genuinely quadratic")
    return a, b, np.real(sys.k0), kap


def scalar_quadratic_region(sys: QuadraticSystem, x_center, radius: float):
    """Exact per-coordinate parameter intervals with a root in the ball.

    For each decoupled equation, the set of u_i for which
    a x^2 + b x + c0 + kappa u_i = 0 has a root with |x - center_i| <= radius
    is the image of x -> -(a x^2 + b x + c0) / kappa over the ball interval,
    computed from endpoint and vertex values. radius may be math.inf.
    """
    a, b, c0, kap = _diagonal_coefficients(sys)
    x_center = np.real(np.asarray(x_center, dtype=complex))
    intervals = []
    for i in range(sys.n):
        def gi(x, i=i):
            return -(a[i] * x * x + b[i] * x + c0[i])

        vertex = -b[i] / (2.0 * a[i])
        if math.isinf(radius):
            peak = gi(vertex)
            lo, hi = (peak, math.inf) if a[i] < 0 else (-math.inf, peak)
        else:
            xs = [x_center[i] - radius, x_center[i] + radius]
            if xs[0] <= vertex <= xs[1]:
                xs.append(vertex)
            vals = [gi(x) for x in xs]
            lo, hi = min(vals), max(vals)
        lo, hi = lo / kap[i], hi / kap[i]
        intervals.append((min(lo, hi), max(lo, hi)))
    return intervals


def region_scan_2d(
    sys: QuadraticSystem,
    x_star,
    u_star,
    axis1,
    axis2,
    grid_a,
    grid_b,
    r: float,
    tol: float = 1e-10,
) -> np.ndarray:
    """Occupancy of the true solvability region on a 2-D parameter slice.

    Cell (ia, ib) is True when a root exists within the r-ball of x_star at
    u = u_star + grid_a[ia] * axis1 + grid_b[ib] * axis2.
    """
    axis1 = np.asarray(axis1, dtype=complex)
    axis2 = np.asarray(axis2, dtype=complex)
    u_star = np.asarray(u_star, dtype=complex)
    occupancy = np.zeros((len(grid_a), len(grid_b)), dtype=bool)
    for ia, aa in enumerate(grid_a):
        for ib, bb in enumerate(grid_b):
            u = u_star + aa * axis1 + bb * axis2
            rep = newton_multistart(sys, u, x_star, r, tol=tol)
            occupancy[ia, ib] = rep.found and rep.distance_from_nominal <= r + 1e-8
    return occupancy
