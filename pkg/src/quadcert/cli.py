"""Command-line front end.

Commands:
    certify    evaluate certificate terms and region membership for a system
    scan       random-direction boundary scan over a grid case (CSV)
    rotate     phase-rotation scan of one direction (CSV)
    case-info  JSON summary of a parsed grid case

Exit codes: 0 success (certify: certified), 1 operational error,
2 (certify only) sound run but not certified.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import certificate, oracle, powerflow, scan
from .errors import QuadcertError
from .quadform import load_system, make_nominal


def _parse_u(text: str) -> np.ndarray:
    try:
        return np.array([complex(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise QuadcertError(f"could not parse --u value {text!r}: {exc}") from exc


def _load_model(path: str) -> powerflow.PowerFlowModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            case = powerflow.parse_matpower(fh.read())
    except OSError as exc:
        raise QuadcertError(f"cannot read case file {path}: {exc}") from exc
    model = powerflow.build_model(case)
    for w in model.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return model


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    sys_, x_star, u_star = load_system(args.system)
    if args.u is None:
        raise QuadcertError("certify requires --u")
    u = _parse_u(args.u)
    nominal = make_nominal(sys_, x_star, u_star)
    terms = certificate.compute_terms(nominal, sys_, u)
    if args.r is not None:
        cert = certificate.certify_in_ball(nominal, sys_, u, args.r)
    else:
        cert = certificate.certify_unbounded(nominal, sys_, u)
    report = {
        "terms": {"e": terms.e, "g": terms.g, "h": terms.h, "h_exact": terms.h_exact},
        "certificate": {
            "bounded": args.r is not None,
            "r": args.r,
            "certified": cert.certified,
            "lhs_value": cert.lhs_value,
            "witness_radius": cert.witness_radius,
        },
    }
    if cert.note:
        report["certificate"]["note"] = cert.note
    if args.kappa is not None:
        inner, outer, radius = certificate.tightness_bounds(nominal, sys_, args.kappa)
        report["tightness"] = {
            "kappa": args.kappa,
            "inner_threshold": inner,
            "outer_threshold": outer,
            "ball_radius": radius,
        }
    if args.verify:
        radius = args.r if args.r is not None else (
            cert.witness_radius if cert.witness_radius else 1.0
        )
        rep = oracle.newton_multistart(sys_, u, x_star, radius)
        report["verification"] = {
            "found": rep.found,
            "x": [[c.real, c.imag] for c in rep.x] if rep.found else None,
            "residual": rep.residual if rep.found else None,
            "distance_from_nominal": rep.distance_from_nominal if rep.found else None,
            "starts_tried": rep.starts_tried,
        }
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return 0 if cert.certified else 2


def cmd_scan(args) -> int:
    model = _load_model(args.case)
    directions = scan.random_directions(model, args.dirs, args.seed)
    records = scan.direction_scan(model, directions)
    if args.export_zeta:
        with open(args.export_zeta, "w", encoding="utf-8") as fh:
            scan.export_zeta_jsonl(model, directions, records, fh)
    if args.relax_csv:
        records = scan.merge_relaxation(records, args.relax_csv)
    _emit(scan.scan_csv_text(records), args.out)
    return 0


def cmd_rotate(args) -> int:
    model = _load_model(args.case)
    base = scan.random_directions(model, 1, args.seed)[0]
    rows = scan.rotation_scan(model, base.s_hat, args.theta_count)
    import io

    buf = io.StringIO()
    scan.write_rotation_csv(rows, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_case_info(args) -> int:
    model = _load_model(args.case)
    _emit(json.dumps(powerflow.model_summary(model), indent=1) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadcert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_cert = sub.add_parser("certify", help="certify solvability at a parameter value")
    p_cert.add_argument("--system", required=True, help="system description JSON")
    p_cert.add_argument("--u", help="parameter vector, comma-separated")
    p_cert.add_argument("--r", type=float, help="state-ball radius (omit for unbounded)")
    p_cert.add_argument("--kappa", type=float, help="also report tightness thresholds")
    p_cert.add_argument("--verify", action="store_true", help="run the root-finding oracle")
    p_cert.add_argument("--out", help="write the JSON report here instead of stdout")
    p_cert.set_defaults(func=cmd_certify)

    p_scan = sub.add_parser("scan", help="random-direction boundary scan")
    p_scan.add_argument("--case", required=True, help="grid case file")
    p_scan.add_argument("--dirs", type=int, default=1000, help="number of directions")
    p_scan.add_argument("--seed", type=int, default=42)
    p_scan.add_argument("--relax-csv", help="merge outer-bound values from this CSV")
    p_scan.add_argument("--export-zeta", help="write per-direction zeta JSON lines here")
    p_scan.add_argument("--out", help="write the CSV here instead of stdout")
    p_scan.set_defaults(func=cmd_scan)

    p_rot = sub.add_parser("rotate", help="phase-rotation scan of one direction")
    p_rot.add_argument("--case", required=True, help="grid case file")
    p_rot.add_argument("--seed", type=int, default=42)
    p_rot.add_argument("--theta-count", type=int, default=360)
    p_rot.add_argument("--out", help="write the CSV here instead of stdout")
    p_rot.set_defaults(func=cmd_rotate)

    p_info = sub.add_parser("case-info", help="summary of a parsed grid case")
    p_info.add_argument("--case", required=True, help="grid case file")
    p_info.add_argument("--out", help="write the JSON here instead of stdout")
    p_info.set_defaults(func=cmd_case_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QuadcertError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
