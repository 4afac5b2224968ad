"""Lifted SDP relaxation of the fixed-point power-flow system.

For a unit direction with matrix zeta_hat, the scaled system at t replaces
the rank-one lifting X = gamma gamma^H by a PSD-dominating Hermitian X:

    t (zeta_hat o X) 1 + gamma = 1,     X >= gamma gamma^H

(o is the elementwise product; the PSD domination is encoded as the
Schur-complement block [[X, gamma], [gamma^H, 1]] >= 0). Every true solution
yields a feasible point, so the smallest t at which the relaxation is
infeasible upper-bounds the true solvability boundary along the direction.

Feasibility at a trial t is decided by minimizing the infinity norm of the
equality residual subject to the PSD constraint: the relaxation is feasible
when the optimal violation is below a small slack. An indeterminate solve
counts as feasible, which biases the bisection upward; the reported value is
never below the true infeasibility threshold minus the bisection tolerance.
"""

from __future__ import annotations

import math
import warnings

import cvxpy as cp
import numpy as np

FEASIBILITY_SLACK = 1e-7
BISECTION_TOL_FRACTION = 1e-4
MAX_DOUBLINGS = 30


class BracketError(ValueError):
    """The (feasible, infeasible) bisection bracket could not be established."""


class RelaxationInstance:
    """The relaxation for one direction, with the scaling t as a parameter.

    Building the problem once and re-solving for each trial t lets cvxpy
    reuse the canonicalization across the bisection.
    """

    def __init__(self, zeta_hat):
        zeta = np.asarray(zeta_hat, dtype=complex)
        if zeta.ndim != 2 or zeta.shape[0] != zeta.shape[1]:
            raise ValueError(f"zeta must be square, got shape {zeta.shape}")
        self.zeta = zeta
        n = zeta.shape[0]
        self.n = n
        self._t = cp.Parameter(nonneg=True)
        x = cp.Variable((n, n), hermitian=True)
        gamma = cp.Variable(n, complex=True)
        block = cp.bmat(
            [
                [x, cp.reshape(gamma, (n, 1), order="C")],
                [cp.reshape(cp.conj(gamma), (1, n), order="C"),
                 cp.Constant(np.ones((1, 1)))],
            ]
        )
        residual = (
            self._t * cp.sum(cp.multiply(zeta, x), axis=1) + gamma - np.ones(n)
        )
        self._problem = cp.Problem(
            cp.Minimize(cp.max(cp.abs(residual))), [block >> 0]
        )

    def violation(self, t: float):
        """Minimal equality violation at scaling t, or None if the solver
        could not produce a usable answer."""
        self._t.value = float(t)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self._problem.solve(solver=cp.CLARABEL)
        except cp.error.SolverError:
            return None
        if self._problem.status in ("optimal", "optimal_inaccurate"):
            return float(self._problem.value)
        return None

    def feasible(self, t: float, slack: float = FEASIBILITY_SLACK) -> bool:
        """Whether the relaxation admits a point at scaling t.

        Indeterminate solves count as feasible (conservative for the oracle's
        use as an upper bound).
        """
        v = self.violation(t)
        return v is None or v <= slack


def t_star(
    zeta_hat,
    t_lo: float,
    t_hi: float | None = None,
    tol: float | None = None,
    slack: float = FEASIBILITY_SLACK,
) -> float:
    """Smallest scaling at which the relaxation is infeasible, by bisection.

    t_lo must be feasible (the caller normally passes the primary
    certificate's boundary distance, which a true solution makes feasible).
    When t_hi is omitted it is found by doubling; if no infeasible scaling
    appears within MAX_DOUBLINGS, +inf is returned. tol defaults to
    BISECTION_TOL_FRACTION * t_lo.
    """
    zeta = np.asarray(zeta_hat, dtype=complex)
    if np.all(zeta == 0):
        return math.inf
    if not t_lo > 0:
        raise ValueError(f"t_lo must be positive, got {t_lo}")
    inst = RelaxationInstance(zeta)
    if tol is None:
        tol = BISECTION_TOL_FRACTION * t_lo
    if not inst.feasible(t_lo, slack):
        raise BracketError(f"relaxation already infeasible at t_lo = {t_lo}")
    if t_hi is None:
        t_hi = 2.0 * t_lo
        for _ in range(MAX_DOUBLINGS):
            if not inst.feasible(t_hi, slack):
                break
            t_lo, t_hi = t_hi, 2.0 * t_hi
        else:
            return math.inf
    elif inst.feasible(t_hi, slack):
        raise BracketError(f"relaxation still feasible at t_hi = {t_hi}")
    while t_hi - t_lo > tol:
        mid = 0.5 * (t_lo + t_hi)
        if inst.feasible(mid, slack):
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
