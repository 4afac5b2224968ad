"""Direction scans over the injection space and their CSV interchange.

Random directions are complex vectors with i.i.d. standard normal real and
imaginary parts, normalized to unit 2-norm. The stream is numpy's PCG64
generator seeded directly with the scan seed; for direction index d the draws
are, in order, n real parts then n imaginary parts, so a prefix of the
directions is independent of the requested count. CSV floats carry 17
significant digits so identical seeds reproduce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import FormatError
from .powerflow import InjectionDirection, PowerFlowModel, kappa, kappa_prime, zeta

CSV_HEADER = ["direction_id", "seed", "t_cert", "t_prior", "t_relax",
              "ratio_prior", "ratio_relax"]

WORKERS_ENV = "QUADCERT_THREADS"


@dataclass
class ScanRecord:
    direction_id: int
    seed: int
    t_cert: float
    t_prior: float
    ratio_prior: float
    t_relax: Optional[float] = None
    ratio_relax: Optional[float] = None
    flag: Optional[str] = None  # None | "invalid" | "inconsistent"


def random_directions(model: PowerFlowModel, count: int, seed: int):
    """Deterministic unit-2-norm complex directions in injection space."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    out = []
    for idx in range(count):
        re = rng.standard_normal(model.n)
        im = rng.standard_normal(model.n)
        v = re + 1j * im
        out.append(InjectionDirection(s_hat=v / np.linalg.norm(v), seed=seed, index=idx))
    return out


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def _scan_one(model, d: InjectionDirection) -> ScanRecord:
    if np.all(zeta(model, d.s_hat) == 0):
        return ScanRecord(d.index, d.seed, math.inf, math.inf, math.nan, flag="invalid")
    t_cert = 1.0 / kappa(model, d.s_hat)
    t_prior = 1.0 / kappa_prime(model, d.s_hat)
    return ScanRecord(d.index, d.seed, t_cert, t_prior, t_cert / t_prior)


def direction_scan(model: PowerFlowModel, directions) -> list:
    """Per-direction certified boundary distances, ordered by direction_id."""
    workers = _workers()
    if workers == 1 or len(directions) < 2:
        records = [_scan_one(model, d) for d in directions]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda d: _scan_one(model, d), directions))
    return sorted(records, key=lambda rec: rec.direction_id)


def rotation_scan(model: PowerFlowModel, s_hat, theta_count: int):
    """Boundary distances for the direction rotated through [0, 2pi).

    Returns a list of (theta, t_cert, t_prior) rows on a uniform theta grid.
    """
    if theta_count < 4:
        raise ValueError("theta_count must be at least 4")
    s_hat = np.asarray(s_hat, dtype=complex)
    rows = []
    for k in range(theta_count):
        theta = 2.0 * math.pi * k / theta_count
        s = s_hat * np.exp(1j * theta)
        rows.append((theta, 1.0 / kappa(model, s), 1.0 / kappa_prime(model, s)))
    return rows


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.17g}"


def write_scan_csv(records, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(
            [
                rec.direction_id,
                rec.seed,
                _fmt(rec.t_cert),
                _fmt(rec.t_prior),
                _fmt(rec.t_relax),
                _fmt(rec.ratio_prior),
                _fmt(rec.ratio_relax),
            ]
        )


def scan_csv_text(records) -> str:
    buf = io.StringIO()
    write_scan_csv(records, buf)
    return buf.getvalue()


def write_rotation_csv(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["theta", "t_cert", "t_prior"])
    for theta, t_cert, t_prior in rows:
        writer.writerow([_fmt(theta), _fmt(t_cert), _fmt(t_prior)])


def read_relaxation_csv(path) -> dict:
    """Read direction_id -> t_relax from the outer-bound oracle's CSV."""
    out = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["direction_id", "t_relax"]:
            raise FormatError(f"unexpected relaxation CSV header: {header}")
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            try:
                did = int(row[0])
                t_relax = float(row[1])
            except (ValueError, IndexError) as exc:
                raise FormatError(f"malformed relaxation row {row!r}") from exc
            if did in out:
                raise FormatError(f"duplicate direction_id {did} in relaxation CSV")
            out[did] = t_relax
    return out


def merge_relaxation(records, relax_csv_path) -> list:
    """Join outer-bound values onto scan records by direction_id.

    Records whose relaxation bound falls below the certified distance are
    flagged inconsistent (an inner bound can never exceed an outer one).
    """
    relax = read_relaxation_csv(relax_csv_path)
    merged = []
    for rec in records:
        t_relax = relax.get(rec.direction_id)
        if t_relax is None:
            merged.append(rec)
            continue
        ratio = rec.t_cert / t_relax if t_relax != 0 else math.inf
        flag = rec.flag
        if t_relax < rec.t_cert:
            flag = "inconsistent"
        merged.append(replace(rec, t_relax=t_relax, ratio_relax=ratio, flag=flag))
    return merged


def export_zeta_jsonl(model, directions, records, fh) -> None:
    """Write per-direction zeta matrices for the outer-bound oracle.

    One JSON object per line: direction_id, n, zeta_re, zeta_im (row-major
    nested lists for the unit direction) and the certified distance t_cert.
    """
    import json

    by_id = {rec.direction_id: rec for rec in records}
    for d in directions:
        zt = zeta(model, d.s_hat)
        rec = by_id[d.index]
        fh.write(
            json.dumps(
                {
                    "direction_id": d.index,
                    "n": model.n,
                    "zeta_re": zt.real.tolist(),
                    "zeta_im": zt.imag.tolist(),
                    "t_cert": rec.t_cert,
                }
            )
            + "\n"
        )
