"""Affinely parameterized quadratic systems and their Jacobians.

A system is

    f(x, u) = Q(x, y, u) + L(x, u) + K(u),   y = conj(x) if conjugating else x

where Q is trilinear (linear in each slot), L bilinear, K affine, and every
coefficient is itself affine in the parameter vector u. Coefficients are kept
as sparse term lists:

    quad term (m, i, j, l, c):  adds c * u_m * x_j * y_l to output i
    lin  term (m, i, j, c):     adds c * u_m * x_j to output i

with the convention u_0 = 1 (m = 0 holds the parameter-independent part) and
m in 1..k addressing u[m-1]. Constants are K(u) = k0 + k1 @ u.

Conjugating systems (complex_flag=True) are not holomorphic in x; their
Jacobian splits into d/dx and d/dconj(x) blocks, and the nominal Jacobian is
the doubled block matrix over (x, conj(x)) whose inverse carries the
(m_star, n_star) blocks used by the certificate layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, NotASolutionError, SingularJacobianError
from .linalg import LUFactorization, inf_norm_vec, lu_factor

NOMINAL_RESIDUAL_TOL = 1e-9


@dataclass(eq=False)
class QuadraticSystem:
    n: int
    k: int
    quad_terms: list = field(default_factory=list)
    lin_terms: list = field(default_factory=list)
    k0: np.ndarray = None
    k1: np.ndarray = None
    complex_flag: bool = False

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise DimensionError(f"invalid dimensions n={self.n}, k={self.k}")
        self.k0 = (
            np.zeros(self.n, dtype=complex)
            if self.k0 is None
            else np.asarray(self.k0, dtype=complex).reshape(self.n)
        )
        self.k1 = (
            np.zeros((self.n, self.k), dtype=complex)
            if self.k1 is None
            else np.asarray(self.k1, dtype=complex).reshape(self.n, self.k)
        )
        q = np.array([t[:4] for t in self.quad_terms], dtype=int).reshape(-1, 4)
        self._qm, self._qi, self._qj, self._ql = q.T
        self._qc = np.array([t[4] for t in self.quad_terms], dtype=complex)
        ln = np.array([t[:3] for t in self.lin_terms], dtype=int).reshape(-1, 3)
        self._lm, self._li, self._lj = ln.T
        self._lc = np.array([t[3] for t in self.lin_terms], dtype=complex)
        for name, idx, hi in (
            ("quad m", self._qm, self.k),
            ("quad i", self._qi, self.n - 1),
            ("quad j", self._qj, self.n - 1),
            ("quad l", self._ql, self.n - 1),
            ("lin m", self._lm, self.k),
            ("lin i", self._li, self.n - 1),
            ("lin j", self._lj, self.n - 1),
        ):
            if idx.size and (idx.min() < 0 or idx.max() > hi):
                raise DimensionError(f"{name} index out of range")

    def _uext(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        if u.shape != (self.k,):
            raise DimensionError(f"u has shape {u.shape}, expected ({self.k},)")
        return np.concatenate(([1.0 + 0.0j], u))

    def _check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.n,):
            raise DimensionError(f"x has shape {x.shape}, expected ({self.n},)")
        return x


@dataclass
class NominalPoint:
    """A solution (x_star, u_star) with its factorized nominal Jacobian.

    For conjugating systems (and for any system built with use_block=True)
    the factorization is of the doubled 2n x 2n block Jacobian and
    m_star / n_star hold the top blocks of its inverse; otherwise the plain
    n x n Jacobian is factored and m_star / n_star are None.
    """

    x_star: np.ndarray
    u_star: np.ndarray
    jac_factor: LUFactorization
    m_star: Optional[np.ndarray] = None
    n_star: Optional[np.ndarray] = None

    @property
    def is_block(self) -> bool:
        return self.m_star is not None


def eval_quad(sys: QuadraticSystem, x, y, u) -> np.ndarray:
    """The trilinear part Q(x, y, u) with independent left/right slots."""
    x = sys._check_x(x)
    y = sys._check_x(y)
    uext = sys._uext(u)
    out = np.zeros(sys.n, dtype=complex)
    if sys._qc.size:
        np.add.at(out, sys._qi, sys._qc * uext[sys._qm] * x[sys._qj] * y[sys._ql])
    return out


def eval_lin(sys: QuadraticSystem, x, u) -> np.ndarray:
    x = sys._check_x(x)
    uext = sys._uext(u)
    out = np.zeros(sys.n, dtype=complex)
    if sys._lc.size:
        np.add.at(out, sys._li, sys._lc * uext[sys._lm] * x[sys._lj])
    return out


def eval_f(sys: QuadraticSystem, x, u) -> np.ndarray:
    """Evaluate f(x, u)."""
    x = sys._check_x(x)
    y = np.conj(x) if sys.complex_flag else x
    u = np.asarray(u, dtype=complex)
    return eval_quad(sys, x, y, u) + eval_lin(sys, x, u) + sys.k0 + sys.k1 @ u


def eval_jacobian_action(sys: QuadraticSystem, x, u, y) -> np.ndarray:
    """Directional derivative of f in x along y.

    For conjugating systems this is (df/dx) y + (df/dconj(x)) conj(y), i.e.
    the derivative of t -> f(x + t y, u) at t = 0 for real t.
    """
    x = sys._check_x(x)
    y = sys._check_x(y)
    if sys.complex_flag:
        xc = np.conj(x)
        return (
            eval_quad(sys, y, xc, u)
            + eval_quad(sys, x, np.conj(y), u)
            + eval_lin(sys, y, u)
        )
    return eval_quad(sys, y, x, u) + eval_quad(sys, x, y, u) + eval_lin(sys, y, u)


def jac_x_matrix(sys: QuadraticSystem, x, u) -> np.ndarray:
    """The matrix df/dx at (x, u)."""
    x = sys._check_x(x)
    uext = sys._uext(u)
    a = np.zeros((sys.n, sys.n), dtype=complex)
    if sys._qc.size:
        w = sys._qc * uext[sys._qm]
        if sys.complex_flag:
            np.add.at(a, (sys._qi, sys._qj), w * np.conj(x)[sys._ql])
        else:
            np.add.at(a, (sys._qi, sys._qj), w * x[sys._ql])
            np.add.at(a, (sys._qi, sys._ql), w * x[sys._qj])
    if sys._lc.size:
        np.add.at(a, (sys._li, sys._lj), sys._lc * uext[sys._lm])
    return a


def jac_xbar_matrix(sys: QuadraticSystem, x, u) -> np.ndarray:
    """The matrix df/dconj(x) at (x, u); zero for non-conjugating systems."""
    x = sys._check_x(x)
    b = np.zeros((sys.n, sys.n), dtype=complex)
    if sys.complex_flag and sys._qc.size:
        uext = sys._uext(u)
        np.add.at(b, (sys._qi, sys._ql), sys._qc * uext[sys._qm] * x[sys._qj])
    return b


def quad_tensor(sys: QuadraticSystem, u) -> np.ndarray:
    """Dense coefficient tensor T[i, j, l] of the quadratic part at u."""
    uext = sys._uext(u)
    t = np.zeros((sys.n, sys.n, sys.n), dtype=complex)
    if sys._qc.size:
        np.add.at(t, (sys._qi, sys._qj, sys._ql), sys._qc * uext[sys._qm])
    return t


def make_nominal(sys: QuadraticSystem, x_star, u_star, use_block: bool = False) -> NominalPoint:
    """Validate a nominal solution and factorize its Jacobian.

    use_block forces the doubled 2n x 2n path even for non-conjugating
    systems; results are then carried through (m_star, n_star) exactly as in
    the conjugating case (with n_star identically zero).
    """
    x_star = sys._check_x(np.asarray(x_star, dtype=complex))
    u_star = np.asarray(u_star, dtype=complex)
    residual = inf_norm_vec(eval_f(sys, x_star, u_star))
    if residual > NOMINAL_RESIDUAL_TOL:
        raise NotASolutionError(
            f"nominal residual {residual:.3e} exceeds {NOMINAL_RESIDUAL_TOL:.0e}"
        )
    if sys.complex_flag or use_block:
        a = jac_x_matrix(sys, x_star, u_star)
        b = jac_xbar_matrix(sys, x_star, u_star)
        big = np.block([[a, b], [np.conj(b), np.conj(a)]])
        fact = lu_factor(big)
        if fact.singular:
            raise SingularJacobianError("nominal block Jacobian is singular")
        inv = fact.inverse()
        n = sys.n
        return NominalPoint(
            x_star=x_star,
            u_star=u_star,
            jac_factor=fact,
            m_star=inv[:n, :n],
            n_star=inv[:n, n:],
        )
    fact = lu_factor(jac_x_matrix(sys, x_star, u_star))
    if fact.singular:
        raise SingularJacobianError("nominal Jacobian is singular")
    return NominalPoint(x_star=x_star, u_star=u_star, jac_factor=fact)


# ---------------------------------------------------------------------------
# JSON interchange
#
# {"n":., "k":., "complex":., "quad":[[m,i,j,l,c_re,c_im],..],
#  "lin":[[m,i,j,c_re,c_im],..], "const_k0":[[re,im],..],
#  "const_k1":[[[re,im],..],..], "x_star":[..], "u_star":[..]}
#
# Scalar entries are accepted wherever an [re, im] pair is expected and read
# as purely real. x_star/u_star are optional and default to zeros.
# ---------------------------------------------------------------------------


def _read_scalar(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"expected [re, im] pair, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v), 0.0)


def _write_scalar(c: complex):
    return [float(c.real), float(c.imag)]


def system_from_dict(data: dict) -> QuadraticSystem:
    n = int(data["n"])
    k = int(data["k"])
    quad = [
        (int(m), int(i), int(j), int(l), complex(c_re, c_im))
        for m, i, j, l, c_re, c_im in data.get("quad", [])
    ]
    lin = [
        (int(m), int(i), int(j), complex(c_re, c_im))
        for m, i, j, c_re, c_im in data.get("lin", [])
    ]
    k0 = np.array([_read_scalar(v) for v in data.get("const_k0", [0] * n)])
    k1 = np.array(
        [[_read_scalar(v) for v in row] for row in data.get("const_k1", [])]
    )
    if k1.size == 0:
        k1 = np.zeros((n, k), dtype=complex)
    return QuadraticSystem(
        n=n,
        k=k,
        quad_terms=quad,
        lin_terms=lin,
        k0=k0,
        k1=k1,
        complex_flag=bool(data.get("complex", False)),
    )


def system_to_dict(sys: QuadraticSystem) -> dict:
    return {
        "n": sys.n,
        "k": sys.k,
        "complex": sys.complex_flag,
        "quad": [
            [int(m), int(i), int(j), int(l), float(c.real), float(c.imag)]
            for (m, i, j, l, c) in sys.quad_terms
        ],
        "lin": [
            [int(m), int(i), int(j), float(c.real), float(c.imag)]
            for (m, i, j, c) in sys.lin_terms
        ],
        "const_k0": [_write_scalar(c) for c in sys.k0],
        "const_k1": [[_write_scalar(c) for c in row] for row in sys.k1],
    }


def load_system(path):
    """Load (system, x_star, u_star) from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    sys_ = system_from_dict(data)
    x_star = np.array(
        [_read_scalar(v) for v in data.get("x_star", [0] * sys_.n)]
    )
    u_star = np.array(
        [_read_scalar(v) for v in data.get("u_star", [0] * sys_.k)]
    )
    return sys_, x_star, u_star


def dump_system(sys: QuadraticSystem, path, x_star=None, u_star=None):
    data = system_to_dict(sys)
    if x_star is not None:
        data["x_star"] = [_write_scalar(complex(c)) for c in np.asarray(x_star)]
    if u_star is not None:
        data["u_star"] = [_write_scalar(complex(c)) for c in np.asarray(u_star)]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
