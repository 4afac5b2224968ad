"""Convex inner approximations of solvability regions of quadratic systems."""

from .certificate import (
    BallCertificate,
    CertificateTerms,
    certify_in_ball,
    certify_unbounded,
    compute_terms,
    tightness_bounds,
)
from .errors import (
    DegenerateNoLoadError,
    DimensionError,
    FormatError,
    ModelError,
    NotASolutionError,
    ParseError,
    QuadcertError,
    SingularJacobianError,
    UnsupportedFormError,
)
from .linalg import inf_norm_induced, inf_norm_vec, lu_factor, solve
from .oracle import SolveReport, newton_multistart, region_scan_2d, scalar_quadratic_region
from .powerflow import (
    GridCase,
    InjectionDirection,
    PowerFlowModel,
    build_model,
    kappa,
    kappa_prime,
    parse_matpower,
    picard_solve,
    serialize_matpower,
    to_quadratic_system,
    zeta,
)
from .quadform import (
    NominalPoint,
    QuadraticSystem,
    eval_f,
    eval_jacobian_action,
    load_system,
    make_nominal,
)
from .scan import (
    ScanRecord,
    direction_scan,
    merge_relaxation,
    random_directions,
    rotation_scan,
)

__version__ = "0.1.0"
