import importlib.resources as resources
from pathlib import Path

import numpy as np
import pytest

from quadcert import build_model, parse_matpower
from quadcert.quadform import QuadraticSystem

DATA_DIR = Path(__file__).parent / "data"


def case_path(name: str) -> Path:
    return Path(str(resources.files("quadcert") / "cases" / name))


def case_text(name: str) -> str:
    return (resources.files("quadcert") / "cases" / name).read_text()


def scalar_system(a=1.0, b=1.0, c0=0.0):
    """f = a x^2 + b x + c0 + u, the workhorse single-equation system."""
    return QuadraticSystem(
        n=1,
        k=1,
        quad_terms=[(0, 0, 0, 0, a)],
        lin_terms=[(0, 0, 0, b)],
        k0=[c0],
        k1=[[1.0]],
    )


def diagonal_system(a, b, c0):
    """Decoupled f_i = a_i x_i^2 + b_i x_i + c0_i + u_i."""
    n = len(a)
    return QuadraticSystem(
        n=n,
        k=n,
        quad_terms=[(0, i, i, i, a[i]) for i in range(n)],
        lin_terms=[(0, i, i, b[i]) for i in range(n)],
        k0=list(c0),
        k1=np.eye(n),
    )


def random_real_system(rng, n_max=3, k_max=3, lin_diag=1.5, quad_scale=1.0):
    """A random well-posed real system with x*=0, u*=0 as nominal solution."""
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(1, k_max + 1))
    n_quad = int(rng.integers(1, 2 * n + 3))
    quad = [
        (
            int(rng.integers(0, k + 1)),
            int(rng.integers(0, n)),
            int(rng.integers(0, n)),
            int(rng.integers(0, n)),
            float(rng.normal()) * quad_scale,
        )
        for _ in range(n_quad)
    ]
    lin = [(0, i, i, lin_diag) for i in range(n)]
    n_lin = int(rng.integers(0, n + 2))
    lin += [
        (
            int(rng.integers(0, k + 1)),
            int(rng.integers(0, n)),
            int(rng.integers(0, n)),
            float(rng.normal()) * 0.2,
        )
        for _ in range(n_lin)
    ]
    k1 = rng.normal(size=(n, k))
    return QuadraticSystem(n=n, k=k, quad_terms=quad, lin_terms=lin, k1=k1)


@pytest.fixture(scope="session")
def model2():
    return build_model(parse_matpower(case_text("case2.m")))


@pytest.fixture(scope="session")
def model18():
    return build_model(parse_matpower(case_text("case18.m")))
