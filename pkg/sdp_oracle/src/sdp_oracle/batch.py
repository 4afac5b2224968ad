"""Batch pipeline: per-direction zeta matrices in, outer bounds out.

Input is JSON lines as exported by the primary scan command:

    {"direction_id": 0, "n": 17, "zeta_re": [[...]], "zeta_im": [[...]],
     "t_cert": 4.2}

Output is a CSV with header ``direction_id,t_relax``, ordered by
direction_id, consumable by the primary's --relax-csv merge. Malformed rows
are skipped with a warning on stderr and make the final exit status nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .relax import BracketError, t_star


def process_line(line: str):
    """Parse one JSONL row and compute its bound; returns (id, t_relax)."""
    row = json.loads(line)
    direction_id = int(row["direction_id"])
    n = int(row["n"])
    zeta = np.asarray(row["zeta_re"], dtype=float) + 1j * np.asarray(
        row["zeta_im"], dtype=float
    )
    if zeta.shape != (n, n):
        raise ValueError(f"zeta shape {zeta.shape} does not match n = {n}")
    t_cert = float(row["t_cert"])
    return direction_id, t_star(zeta, t_lo=t_cert)


def run_batch(in_path, out_path, err=sys.stderr) -> int:
    """Process a JSONL export into a CSV of outer bounds; 0 iff no row failed."""
    results = {}
    failures = 0
    with open(in_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                direction_id, bound = process_line(line)
            except (ValueError, KeyError, TypeError, BracketError,
                    json.JSONDecodeError) as exc:
                print(f"warning: skipping line {lineno}: {exc}", file=err)
                failures += 1
                continue
            if direction_id in results:
                print(
                    f"warning: skipping line {lineno}: duplicate direction_id"
                    f" {direction_id}",
                    file=err,
                )
                failures += 1
                continue
            results[direction_id] = bound
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["direction_id", "t_relax"])
        for direction_id in sorted(results):
            bound = results[direction_id]
            text = "inf" if math.isinf(bound) else f"{bound:.17g}"
            writer.writerow([direction_id, text])
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("input", help="JSONL export from the primary scan")
    ap.add_argument("output", help="CSV of direction_id,t_relax")
    args = ap.parse_args(argv)
    return run_batch(args.input, args.output)


if __name__ == "__main__":
    sys.exit(main())
