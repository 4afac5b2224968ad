import io
import json
import subprocess
import sys

import pytest

from sdp_oracle.batch import run_batch


def jsonl_row(direction_id, zeta, t_cert):
    import numpy as np

    zeta = np.asarray(zeta, dtype=complex)
    return json.dumps(
        {
            "direction_id": direction_id,
            "n": zeta.shape[0],
            "zeta_re": zeta.real.tolist(),
            "zeta_im": zeta.imag.tolist(),
            "t_cert": t_cert,
        }
    )


def test_empty_input_gives_header_only(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text("")
    out = tmp_path / "out.csv"
    assert run_batch(src, out) == 0
    assert out.read_text() == "direction_id,t_relax\n"


def test_single_2bus_direction(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(jsonl_row(0, [[-0.1]], 2.5) + "\n")
    out = tmp_path / "out.csv"
    assert run_batch(src, out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "direction_id,t_relax"
    did, t_relax = lines[1].split(",")
    assert did == "0"
    assert float(t_relax) == pytest.approx(2.5, rel=1e-2)
    assert float(t_relax) >= 2.5  # outer bound never below the certificate


def test_malformed_row_skipped_with_warning(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(
        "this is not json\n" + jsonl_row(3, [[-0.1]], 2.5) + "\n"
    )
    out = tmp_path / "out.csv"
    err = io.StringIO()
    assert run_batch(src, out, err=err) == 1
    assert "skipping line 1" in err.getvalue()
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("3,")


def test_duplicate_direction_id_skipped(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(
        jsonl_row(0, [[-0.1]], 2.5) + "\n" + jsonl_row(0, [[-0.1]], 2.5) + "\n"
    )
    out = tmp_path / "out.csv"
    err = io.StringIO()
    assert run_batch(src, out, err=err) == 1
    assert "duplicate" in err.getvalue()


def test_output_ordered_by_direction_id(tmp_path):
    src = tmp_path / "in.jsonl"
    rows = [jsonl_row(i, [[-0.1]], 2.5) for i in (2, 0, 1)]
    src.write_text("\n".join(rows) + "\n")
    out = tmp_path / "out.csv"
    assert run_batch(src, out) == 0
    ids = [line.split(",")[0] for line in out.read_text().splitlines()[1:]]
    assert ids == ["0", "1", "2"]


def test_cli_entry_point(tmp_path):
    src = tmp_path / "in.jsonl"
    src.write_text(jsonl_row(0, [[-0.1]], 2.5) + "\n")
    out = tmp_path / "out.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "sdp_oracle.batch", str(src), str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[0] == "direction_id,t_relax"
