"""AC power-flow specialization: case parsing, network model, certificates.

Case files use the MATPOWER text format (a MATLAB subset): assignments
``mpc.baseMVA``, ``mpc.bus``, ``mpc.branch``, ``mpc.gen`` with bracketed
numeric matrices whose rows end at ``;`` or a newline, ``%`` comments, and
arbitrary unknown fields (``mpc.gencost`` etc.) which are ignored.

The network model eliminates the slack bus: with Y the non-slack admittance
block, Y0 the coupling column to the slack and V0 the slack voltage, the
unknown voltages satisfy the fixed-point form

    V = w + Z diag(conj(V))^-1 conj(s),   Z = Y^-1,  Y w = -Y0 V0,

where w is the zero-injection voltage profile and s the per-unit complex
injections at non-slack buses. All certificate functionals are built from

    zeta(s) = diag(w)^-1 Z diag(conj(w))^-1 diag(conj(s)).

A solution exists whenever

    kappa(s) = 2 ||zeta(s) 1||_inf + 2 sqrt(||zeta(s) 1||_inf ||zeta(s)||_inf) <= 1

(with the flat nominal point: zero injections, V = w). The comparator
kappa_prime(s) = 4 ||zeta(s)||_inf reproduces the best previously published
region for the same nominal point and is never smaller than kappa(s).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateNoLoadError, ModelError, ParseError
from .linalg import inf_norm_induced, inf_norm_vec, lu_factor
from .quadform import QuadraticSystem

BUS_TYPES = {1: "PQ", 2: "PV", 3: "slack"}
BUS_CODES = {v: k for k, v in BUS_TYPES.items()}


@dataclass
class Bus:
    id: int
    type: str  # "PQ" | "PV" | "slack"
    pd: float  # MW
    qd: float  # MVAr
    gs: float  # MW at V=1 pu
    bs: float  # MVAr at V=1 pu
    vm: float  # pu
    va: float  # degrees


@dataclass
class Branch:
    f_bus: int
    t_bus: int
    r: float
    x: float
    b: float  # total line charging susceptance
    tap: float  # 0 means nominal (1.0)
    shift: float  # degrees
    status: int


@dataclass
class Gen:
    bus: int
    pg: float  # MW
    qg: float  # MVAr
    status: int
    vg: float


@dataclass
class GridCase:
    base_mva: float
    buses: list
    branches: list
    gens: list


@dataclass
class PowerFlowModel:
    n: int
    bus_ids: list  # non-slack bus ids in case order
    slack_id: int
    base_mva: float
    y: np.ndarray  # n x n admittance block
    y0: np.ndarray  # coupling column to the slack bus
    v0: complex  # slack voltage
    z: np.ndarray  # y^-1
    w: np.ndarray  # zero-injection voltages
    s_nominal: np.ndarray  # per-unit injections from the case data
    warnings: list = field(default_factory=list)


@dataclass
class PicardResult:
    converged: bool
    v: Optional[np.ndarray]
    iterations: int
    step_norm: float
    mismatch: Optional[float] = None
    reason: Optional[str] = None


@dataclass
class InjectionDirection:
    """A unit-2-norm complex injection direction with its provenance."""

    s_hat: np.ndarray
    seed: int
    index: int


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

_ASSIGN_RE = re.compile(r"^\s*mpc\.(\w+)\s*=\s*(.*)$")


def _parse_matrix(lines, start, name):
    """Parse rows of a bracketed matrix starting after '['; returns
    (rows, row_lines, next_line_index)."""
    rows, row_lines = [], []
    current, current_line = [], None

    def push_row():
        nonlocal current, current_line
        if current:
            rows.append(current)
            row_lines.append(current_line)
            current, current_line = [], None

    i = start
    while i < len(lines):
        ln, text = lines[i]
        i += 1
        for tok in re.finditer(r"[^\s,;\]]+|;|\]", text):
            piece = tok.group(0)
            if piece == ";":
                push_row()
            elif piece == "]":
                push_row()
                return rows, row_lines, i
            else:
                try:
                    val = float(piece)
                except ValueError:
                    raise ParseError(
                        f"malformed number {piece!r} in mpc.{name}", line=ln
                    ) from None
                if current_line is None:
                    current_line = ln
                current.append(val)
        push_row()  # newline terminates a row
    last_line = lines[-1][0] if lines else None
    raise ParseError(f"unterminated matrix mpc.{name}", line=last_line)


def parse_matpower(text: str) -> GridCase:
    """Parse MATPOWER case text into a GridCase."""
    raw_lines = text.splitlines()
    # (1-based line number, comment-stripped text)
    lines = [(i + 1, ln.split("%", 1)[0]) for i, ln in enumerate(raw_lines)]

    fields = {}
    field_lines = {}
    i = 0
    while i < len(lines):
        ln, textline = lines[i]
        i += 1
        m = _ASSIGN_RE.match(textline)
        if not m:
            continue
        name, rest = m.group(1), m.group(2).strip()
        if rest.startswith("["):
            after = rest[1:].strip()
            block = ([(ln, after)] if after else []) + lines[i:]
            rows, row_lines, nxt = _parse_matrix(block, 0, name)
            # advance past the consumed lines of the original stream
            i += nxt - (1 if after else 0)
            fields[name] = (rows, row_lines)
            field_lines[name] = ln
        elif rest.startswith("'") or rest.startswith('"'):
            continue  # string field (mpc.version)
        else:
            value = rest.rstrip(";").strip()
            if name == "baseMVA":
                try:
                    fields[name] = float(value)
                except ValueError:
                    raise ParseError(
                        f"malformed number {value!r} in mpc.baseMVA", line=ln
                    ) from None
                field_lines[name] = ln

    if "baseMVA" not in fields:
        raise ParseError("missing mpc.baseMVA")
    for req in ("bus", "branch", "gen"):
        if req not in fields:
            raise ParseError(f"missing mpc.{req}")

    base_mva = fields["baseMVA"]
    if not base_mva > 0:
        raise ParseError(
            f"mpc.baseMVA must be positive, got {base_mva}",
            line=field_lines["baseMVA"],
        )

    buses = []
    bus_ids = set()
    for row, ln in zip(*fields["bus"]):
        if len(row) < 9:
            raise ParseError(
                f"bus row has {len(row)} columns, expected at least 9", line=ln
            )
        code = int(row[1])
        if code not in BUS_TYPES:
            raise ParseError(f"unknown bus type code {code}", line=ln)
        bus_id = int(row[0])
        if bus_id in bus_ids:
            raise ParseError(f"duplicate bus id {bus_id}", line=ln)
        bus_ids.add(bus_id)
        buses.append(
            Bus(
                id=bus_id,
                type=BUS_TYPES[code],
                pd=row[2],
                qd=row[3],
                gs=row[4],
                bs=row[5],
                vm=row[7],
                va=row[8],
            )
        )

    slack_count = sum(1 for b in buses if b.type == "slack")
    if slack_count != 1:
        raise ParseError(
            f"expected exactly one slack bus, found {slack_count}",
            line=field_lines["bus"],
        )

    branches = []
    for row, ln in zip(*fields["branch"]):
        if len(row) < 11:
            raise ParseError(
                f"branch row has {len(row)} columns, expected at least 11", line=ln
            )
        fb, tb = int(row[0]), int(row[1])
        for end in (fb, tb):
            if end not in bus_ids:
                raise ParseError(f"branch references unknown bus {end}", line=ln)
        branches.append(
            Branch(
                f_bus=fb,
                t_bus=tb,
                r=row[2],
                x=row[3],
                b=row[4],
                tap=row[8],
                shift=row[9],
                status=int(row[10]),
            )
        )

    gens = []
    for row, ln in zip(*fields["gen"]):
        if len(row) < 8:
            raise ParseError(
                f"gen row has {len(row)} columns, expected at least 8", line=ln
            )
        gbus = int(row[0])
        if gbus not in bus_ids:
            raise ParseError(f"generator references unknown bus {gbus}", line=ln)
        gens.append(Gen(bus=gbus, pg=row[1], qg=row[2], status=int(row[7]), vg=row[5]))

    return GridCase(base_mva=base_mva, buses=buses, branches=branches, gens=gens)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize_matpower(case: GridCase) -> str:
    """Render a GridCase back to MATPOWER case text (canonical columns)."""
    out = ["function mpc = case", "mpc.version = '2';"]
    out.append(f"mpc.baseMVA = {_fmt(case.base_mva)};")
    out.append("mpc.bus = [")
    for b in case.buses:
        row = [b.id, BUS_CODES[b.type]] + [
            _fmt(v) for v in (b.pd, b.qd, b.gs, b.bs)
        ] + ["1"] + [_fmt(v) for v in (b.vm, b.va)] + ["0", "1", "1.1", "0.9"]
        out.append("\t" + "\t".join(str(v) for v in row) + ";")
    out.append("];")
    out.append("mpc.gen = [")
    for g in case.gens:
        row = [g.bus, _fmt(g.pg), _fmt(g.qg), "0", "0", _fmt(g.vg), "0", g.status, "0", "0"]
        out.append("\t" + "\t".join(str(v) for v in row) + ";")
    out.append("];")
    out.append("mpc.branch = [")
    for br in case.branches:
        row = [br.f_bus, br.t_bus] + [
            _fmt(v) for v in (br.r, br.x, br.b)
        ] + ["0", "0", "0"] + [_fmt(br.tap), _fmt(br.shift), str(br.status), "-360", "360"]
        out.append("\t" + "\t".join(str(v) for v in row) + ";")
    out.append("];")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Network model
# ---------------------------------------------------------------------------


def build_model(case: GridCase) -> PowerFlowModel:
    """Assemble the admittance partition and fixed-point data for a case."""
    ids = [b.id for b in case.buses]
    index = {bus_id: i for i, bus_id in enumerate(ids)}
    nb = len(ids)
    ybus = np.zeros((nb, nb), dtype=complex)

    for br in case.branches:
        if br.status == 0:
            continue
        f, t = index[br.f_bus], index[br.t_bus]
        ys = 1.0 / complex(br.r, br.x)
        bc = 1j * br.b / 2.0
        tap = br.tap if br.tap != 0.0 else 1.0
        shift = math.radians(br.shift)
        tphasor = tap * np.exp(1j * shift)
        ybus[f, f] += (ys + bc) / (tap * tap)
        ybus[f, t] += -ys / np.conj(tphasor)
        ybus[t, f] += -ys / tphasor
        ybus[t, t] += ys + bc

    for b in case.buses:
        i = index[b.id]
        ybus[i, i] += complex(b.gs, b.bs) / case.base_mva

    slack = next(b for b in case.buses if b.type == "slack")
    s_idx = index[slack.id]
    keep = [i for i in range(nb) if i != s_idx]
    bus_ids = [ids[i] for i in keep]

    warnings = []
    pv = [b.id for b in case.buses if b.type == "PV"]
    if pv:
        warnings.append(
            f"PV buses {pv} treated as fixed PQ injections at scheduled (Pg, Qg)"
        )

    y = ybus[np.ix_(keep, keep)]
    y0 = ybus[keep, s_idx]
    v0 = slack.vm * np.exp(1j * math.radians(slack.va))

    fact = lu_factor(y)
    if fact.singular:
        raise ModelError("admittance block is singular (islanded bus?)")
    n = len(keep)
    z = fact.solve_matrix(np.eye(n, dtype=complex))
    w = fact.solve(-y0 * v0)
    if inf_norm_induced(y @ z - np.eye(n)) > 1e-8:
        raise ModelError("admittance inverse failed the reconstruction check")
    if inf_norm_vec(y @ w + y0 * v0) > 1e-10:
        raise ModelError("zero-injection profile failed the residual check")
    if np.min(np.abs(w)) <= 1e-12 * max(1.0, float(np.max(np.abs(w)))):
        raise DegenerateNoLoadError("zero-injection voltage has a zero component")

    pg = np.zeros(n)
    qg = np.zeros(n)
    for g in case.gens:
        if g.status == 0 or g.bus == slack.id:
            continue
        i = bus_ids.index(g.bus)
        pg[i] += g.pg
        qg[i] += g.qg
    pd = np.array([b.pd for b in case.buses if b.id != slack.id])
    qd = np.array([b.qd for b in case.buses if b.id != slack.id])
    s_nominal = ((pg - pd) + 1j * (qg - qd)) / case.base_mva

    return PowerFlowModel(
        n=n,
        bus_ids=bus_ids,
        slack_id=slack.id,
        base_mva=case.base_mva,
        y=y,
        y0=y0,
        v0=v0,
        z=z,
        w=w,
        s_nominal=s_nominal,
        warnings=warnings,
    )


def model_summary(model: PowerFlowModel) -> dict:
    return {
        "n": model.n,
        "slack_bus": model.slack_id,
        "z_inf_norm": inf_norm_induced(model.z),
        "w_min_abs": float(np.min(np.abs(model.w))),
    }


# ---------------------------------------------------------------------------
# Certificate functionals
# ---------------------------------------------------------------------------


def zeta(model: PowerFlowModel, s) -> np.ndarray:
    """The scaled impedance-injection matrix for injections s."""
    s = np.asarray(s, dtype=complex).reshape(model.n)
    scale = np.outer(model.w, np.conj(model.w))
    return model.z * np.conj(s)[None, :] / scale


def kappa(model: PowerFlowModel, s) -> float:
    """Certificate functional; injections s are solvable when kappa <= 1.

    Assumes the flat nominal point (zero injections, V = w).
    """
    zt = zeta(model, s)
    a = inf_norm_vec(zt.sum(axis=1))
    b = inf_norm_induced(zt)
    return 2.0 * a + 2.0 * math.sqrt(a * b)


def kappa_prime(model: PowerFlowModel, s) -> float:
    """Prior-work comparator: 4 ||zeta(s)||_inf."""
    return 4.0 * inf_norm_induced(zeta(model, s))


def picard_solve(
    model: PowerFlowModel, s, tol: float = 1e-10, max_iter: int = 200
) -> PicardResult:
    """Fixed-point iteration V <- w + Z diag(conj(V))^-1 conj(s) from V = w.

    Succeeds when the iteration step drops below tol; divergence (voltage
    collapse, blow-up, or iteration cap) is reported, not raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    s = np.asarray(s, dtype=complex).reshape(model.n)
    v = model.w.copy()
    w_scale = float(np.max(np.abs(model.w)))
    step = math.inf
    for it in range(1, max_iter + 1):
        if np.min(np.abs(v)) < 1e-8 * w_scale:
            return PicardResult(False, None, it, step, reason="voltage collapse")
        v_new = model.w + model.z @ (np.conj(s) / np.conj(v))
        if not np.all(np.isfinite(v_new)):
            return PicardResult(False, None, it, math.inf, reason="non-finite iterate")
        step = inf_norm_vec(v_new - v)
        v = v_new
        if step < tol:
            s_calc = v * np.conj(model.y @ v + model.y0 * model.v0)
            mismatch = inf_norm_vec(s_calc - s)
            return PicardResult(True, v, it, step, mismatch=mismatch)
        if step > 1e9 * w_scale:
            return PicardResult(False, None, it, step, reason="iterate blow-up")
    return PicardResult(False, None, max_iter, step, reason="iteration limit reached")


def to_quadratic_system(model: PowerFlowModel):
    """Express the fixed-point power flow as a conjugating quadratic system.

    The state is gamma = w / V and the parameter vector is conj(s), so the
    system is trilinear in (gamma, conj(gamma), u). Returns
    (system, x_star, u_star) with the flat nominal gamma = 1, u = 0; a query
    injection s maps to the parameter u = conj(s).
    """
    n = model.n
    scale = np.outer(model.w, np.conj(model.w))
    zsc = model.z / scale
    quad = [
        (l + 1, i, i, l, zsc[i, l])
        for i in range(n)
        for l in range(n)
        if zsc[i, l] != 0
    ]
    lin = [(0, i, i, 1.0 + 0.0j) for i in range(n)]
    sys_ = QuadraticSystem(
        n=n,
        k=n,
        quad_terms=quad,
        lin_terms=lin,
        k0=-np.ones(n, dtype=complex),
        k1=np.zeros((n, n), dtype=complex),
        complex_flag=True,
    )
    return sys_, np.ones(n, dtype=complex), np.zeros(n, dtype=complex)
