"""Dense linear algebra helpers: LU factorization, solves, infinity norms.

Matrices are plain 2-D complex numpy arrays (real data is the zero
imaginary-part case). Factorization is LAPACK partial-pivoting LU via
scipy, wrapped so a relative pivot test makes near-singularity explicit
instead of silently producing garbage solves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularJacobianError

# A pivot below this fraction of the largest initial entry is treated as zero.
SINGULARITY_RTOL = 1e-12


@dataclass
class LUFactorization:
    """Packed LU factors of a square matrix with a singularity flag."""

    lu: np.ndarray
    piv: np.ndarray
    n: int
    singular: bool

    def solve(self, b) -> np.ndarray:
        """Solve A x = b for one right-hand side."""
        b = np.asarray(b, dtype=complex)
        if b.shape != (self.n,):
            raise DimensionError(
                f"right-hand side has shape {b.shape}, expected ({self.n},)"
            )
        if self.singular:
            raise SingularJacobianError("factorization is singular")
        return scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)

    def solve_matrix(self, b) -> np.ndarray:
        """Solve A X = B column-wise for a matrix right-hand side."""
        b = np.asarray(b, dtype=complex)
        if b.ndim != 2 or b.shape[0] != self.n:
            raise DimensionError(
                f"right-hand side has shape {b.shape}, expected ({self.n}, m)"
            )
        if self.singular:
            raise SingularJacobianError("factorization is singular")
        return scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)

    def inverse(self) -> np.ndarray:
        return self.solve_matrix(np.eye(self.n, dtype=complex))


def lu_factor(m) -> LUFactorization:
    """LU-factorize a square matrix with partial pivoting.

    The singularity flag is set when any pivot magnitude falls below
    SINGULARITY_RTOL times the largest entry magnitude of the input.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    with warnings.catch_warnings():
        # LAPACK getrf warns on exact zero pivots; the flag below covers it.
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    singular = scale == 0.0 or bool(np.min(pivots) < SINGULARITY_RTOL * scale)
    return LUFactorization(lu=lu, piv=piv, n=a.shape[0], singular=singular)


def solve(f: LUFactorization, b) -> np.ndarray:
    return f.solve(b)


def inf_norm_vec(v) -> float:
    """max_i |v_i| (0 for an empty vector)."""
    v = np.asarray(v, dtype=complex)
    return float(np.max(np.abs(v))) if v.size else 0.0


def inf_norm_induced(m) -> float:
    """Induced infinity norm: the largest row sum of entry moduli."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(m), axis=1)))
