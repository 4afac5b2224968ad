"""Solvability certificates built from a nominal solution.

Around a nominal solution with invertible Jacobian, three scalars summarize
how a parameter value u perturbs the system:

    e  - infinity norm of the Jacobian-rescaled shift of f(x_star, .)
         between u_star and u (a norm of an affine map of u - u_star),
    g  - induced infinity norm of the deviation of the rescaled Jacobian at
         x_star from the identity map,
    h  - a row-sum upper bound on the gain of the rescaled quadratic part
         over the unit ball, evaluated over the monomial basis
         {x_j x_l : j <= l} with coefficients of (j, l) and (l, j) summed.

A solution within distance rho of x_star exists whenever

    rho * h + g + e / rho <= 1

for some admissible rho, so certification amounts to minimizing the convex
left side in closed form (rho = sqrt(e / h), clamped) over (0, r] for a
ball of radius r, or over all rho > 0 for the unconstrained variant whose
minimum is 2 sqrt(h e) + g. When the infimum is not attained (e = 0 with
h > 0, or h = 0 with e > 0) the boundary value 1 is excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnsupportedFormError
from .linalg import inf_norm_induced, inf_norm_vec
from .quadform import (
    NominalPoint,
    QuadraticSystem,
    eval_f,
    jac_x_matrix,
    jac_xbar_matrix,
    quad_tensor,
)

# Columns of the monomial-gain matrix below this fraction of the largest are
# treated as structural zeros when deciding whether the h bound is exact.
_EXACTNESS_ZERO_RTOL = 1e-13


@dataclass
class CertificateTerms:
    """The (e, g, h) triple evaluated at a query parameter u.

    h_exact is True when the row-sum bound coincides with the true gain of
    the quadratic part (at most one active monomial per output row).
    """

    e: float
    g: float
    h: float
    h_exact: bool


@dataclass
class BallCertificate:
    certified: bool
    lhs_value: float
    witness_radius: Optional[float] = None
    note: Optional[str] = None


def _require_inf(norm: str):
    if norm != "inf":
        raise NotImplementedError(f"norm {norm!r} is not implemented")


def _monomial_columns(sys: QuadraticSystem, u) -> np.ndarray:
    """Aggregated coefficient columns, one per unordered index pair."""
    t = quad_tensor(sys, u)
    cols = []
    for j in range(sys.n):
        for l in range(j, sys.n):
            col = t[:, j, l] if j == l else t[:, j, l] + t[:, l, j]
            if np.any(col != 0):
                cols.append(col)
    if not cols:
        return np.zeros((sys.n, 0), dtype=complex)
    return np.column_stack(cols)


def _h_from_columns(c: np.ndarray) -> tuple[float, bool]:
    if c.size == 0:
        return 0.0, True
    mags = np.abs(c)
    h = float(np.max(np.sum(mags, axis=1)))
    cutoff = _EXACTNESS_ZERO_RTOL * max(1.0, float(np.max(mags)))
    exact = bool(np.all(np.sum(mags > cutoff, axis=1) <= 1))
    return h, exact


def compute_terms(
    nominal: NominalPoint, sys: QuadraticSystem, u, norm: str = "inf"
) -> CertificateTerms:
    """Evaluate the certificate triple (e, g, h) at parameter u."""
    _require_inf(norm)
    u = np.asarray(u, dtype=complex)
    df = eval_f(sys, nominal.x_star, u) - eval_f(sys, nominal.x_star, nominal.u_star)
    eye = np.eye(sys.n, dtype=complex)
    if nominal.is_block:
        m, nn = nominal.m_star, nominal.n_star
        e = inf_norm_vec(m @ df + nn @ np.conj(df))
        a = jac_x_matrix(sys, nominal.x_star, u)
        b = jac_xbar_matrix(sys, nominal.x_star, u)
        p = m @ a + nn @ np.conj(b) - eye
        r = m @ b + nn @ np.conj(a)
        g = float(np.max(np.sum(np.abs(p), axis=1) + np.sum(np.abs(r), axis=1)))
        cols = _monomial_columns(sys, u)
        h, h_exact = _h_from_columns(m @ cols + nn @ np.conj(cols))
    else:
        fact = nominal.jac_factor
        e = inf_norm_vec(fact.solve(df))
        ml = fact.solve_matrix(jac_x_matrix(sys, nominal.x_star, u)) - eye
        g = inf_norm_induced(ml)
        h, h_exact = _h_from_columns(fact.solve_matrix(_monomial_columns(sys, u)))
    return CertificateTerms(e=e, g=g, h=h, h_exact=h_exact)


def _certify(e: float, g: float, h: float, r: Optional[float]) -> BallCertificate:
    """Minimize rho*h + g + e/rho over rho in (0, r] (r=None: unbounded)."""
    if h > 0.0 and e > 0.0:
        rho = math.sqrt(e / h)
        if r is not None and rho > r:
            rho = r
        lhs = rho * h + g + e / rho
        certified = lhs <= 1.0
        return BallCertificate(certified, lhs, rho if certified else None)
    if h == 0.0:
        if r is not None:
            lhs = g + e / r
            certified = lhs <= 1.0
            return BallCertificate(certified, lhs, r if certified else None)
        # Unbounded: inf over rho is g, attained only when e = 0.
        if e == 0.0:
            return BallCertificate(g <= 1.0, g)
        note = None
        if g == 1.0:
            note = "infimum g = 1 is not attained for any finite radius"
        return BallCertificate(g < 1.0, g, note=note)
    # h > 0, e = 0: inf over rho -> 0+ equals g and is never attained, but any
    # rho with rho*h <= 1 - g establishes the self-map.
    certified = g < 1.0
    witness = None
    if certified:
        witness = (1.0 - g) / h
        if r is not None:
            witness = min(witness, r)
    note = None
    if g == 1.0:
        note = "infimum g = 1 is not attained for any positive radius"
    return BallCertificate(certified, g, witness if r is not None else None, note)


def certify_in_ball(
    nominal: NominalPoint, sys: QuadraticSystem, u, r: float, norm: str = "inf"
) -> BallCertificate:
    """Certify a solution within distance r of x_star at parameter u."""
    if not (r > 0.0):
        raise ValueError(f"radius must be positive, got {r}")
    t = compute_terms(nominal, sys, u, norm)
    return _certify(t.e, t.g, t.h, r)


def certify_unbounded(
    nominal: NominalPoint, sys: QuadraticSystem, u, norm: str = "inf"
) -> BallCertificate:
    """Certify existence of a solution with no distance constraint.

    The reported lhs_value is 2 sqrt(h e) + g, the infimum of the ball
    certificate's left side over all radii.
    """
    t = compute_terms(nominal, sys, u, norm)
    if t.h > 0.0 and t.e > 0.0:
        lhs = 2.0 * math.sqrt(t.h * t.e) + t.g
        certified = lhs <= 1.0
        witness = math.sqrt(t.e / t.h) if certified else None
        return BallCertificate(certified, lhs, witness)
    return _certify(t.e, t.g, t.h, None)


def tightness_bounds(
    nominal: NominalPoint, sys: QuadraticSystem, kappa: float, norm: str = "inf"
) -> tuple[float, float, float]:
    """Inner/outer e-thresholds and ball radius for u-independent Q and L.

    Returns (inner, outer, radius): every u with e <= inner has a solution in
    the ball of the returned radius around x_star, and every u with e > outer
    has none.
    """
    _require_inf(norm)
    if not (0.0 < kappa < 1.0):
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if any(t[0] != 0 for t in sys.quad_terms) or any(
        t[0] != 0 for t in sys.lin_terms
    ):
        raise UnsupportedFormError(
            "tightness bounds require parameter-independent quadratic and linear terms"
        )
    h_star = compute_terms(nominal, sys, nominal.u_star, norm).h
    if not (h_star > 0.0):
        raise ValueError("tightness bounds require a nonzero quadratic part")
    inner = (2.0 * kappa - kappa * kappa) / (4.0 * h_star)
    outer = (2.0 * kappa + kappa * kappa) / (4.0 * h_star)
    return inner, outer, kappa / (2.0 * h_star)
