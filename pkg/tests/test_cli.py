import csv
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from bb84eve import cli
from bb84eve.interaction import DisturbancePair, build_fuchs_equal, to_document
from bb84eve.oracle import SampleConfig, random_interactions


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def usage_error(capsys, *argv):
    with pytest.raises(SystemExit) as info:
        cli.main(list(argv))
    capsys.readouterr()
    return info.value.code


def pairs(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


# ---------------------------------------------------------------- construct


def test_construct_fuchs1(capsys):
    code, out, _ = run(capsys, "construct", "--family", "fuchs1", "--dxy", "0.2", "--duv", "0.3")
    assert code == 0
    doc = json.loads(out)
    dp = (math.sqrt(0.7) + math.sqrt(0.3)) / math.sqrt(2)
    dm = (math.sqrt(0.7) - math.sqrt(0.3)) / math.sqrt(2)
    assert np.allclose(pairs([doc["interaction"]["xi_x"]])[0], [dp, 0, 0, dm], atol=1e-12)
    assert doc["gain"]["achieved"] == pytest.approx(doc["gain"]["bound"], abs=1e-9)
    assert doc["degenerate"] is False and doc["prop3"]["verdict"] is True


def test_construct_one_param_half_povm(capsys):
    code, out, _ = run(capsys, "construct", "--family", "one-param", "--a", "0.5", "--dxy", "0.25", "--duv", "0.25")
    assert code == 0
    v = pairs(json.loads(out)["povm"])
    r = 1 / math.sqrt(2)
    expected = np.array([[r, -r, 0, 0], [r, r, 0, 0], [0, 0, r, -r], [0, 0, r, r]])
    assert np.allclose(np.abs(v.conj() @ expected.T), np.eye(4), atol=1e-12)


def test_construct_no_disturbance(capsys):
    code, out, _ = run(capsys, "construct", "--family", "general", "--dxy", "0", "--duv", "0")
    doc = json.loads(out)
    assert code == 0
    assert doc["gain"]["achieved"] == pytest.approx(0, abs=1e-15)
    assert doc["mutual_information"]["achieved"] == pytest.approx(0, abs=1e-15)
    assert doc["degenerate"] is True


def test_construct_bits(capsys):
    _, out, _ = run(capsys, "construct", "--family", "general", "--dxy", "0.1", "--duv", "0.5", "--bits")
    mi = json.loads(out)["mutual_information"]
    assert mi["unit"] == "bits" and mi["achieved"] == pytest.approx(1.0, abs=1e-12)


def test_construct_rotated_seed(capsys):
    argv = ("construct", "--family", "rotated", "--seed", "4", "--dxy", "0.1", "--duv", "0.2")
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    assert json.loads(first)["canonical"]["matches_pattern"] is True


def test_construct_stats_csv(capsys, tmp_path):
    path = tmp_path / "stats.csv"
    code, _, _ = run(capsys, "construct", "--family", "general", "--dxy", "0.25", "--duv", "0.25",
                     "--stats-csv", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 5 and rows[-1]["outcome"] == "total"
    assert float(rows[-1]["gain"]) == pytest.approx(0.8660254, abs=1e-7)


@pytest.mark.parametrize("argv", [
    ("construct", "--family", "general", "--a", "0.3", "--dxy", "0.1", "--duv", "0.1"),
    ("construct", "--family", "fuchs1", "--seed", "3", "--dxy", "0.1", "--duv", "0.1"),
    ("construct", "--family", "general", "--dxy", "0.7", "--duv", "0.1"),
    ("construct", "--family", "general", "--dxy", "abc", "--duv", "0.1"),
    ("construct", "--family", "one-param", "--a", "2", "--dxy", "0.1", "--duv", "0.1"),
    ("construct", "--family", "bogus", "--dxy", "0.1", "--duv", "0.1"),
    ("sweep", "--family", "general", "--dmin", "0.3", "--dmax", "0.1", "--steps", "2", "--out", "-"),
    ("sweep", "--family", "general", "--dmin", "0.1", "--dmax", "0.2", "--steps", "0", "--out", "-"),
    ("verify", "--trials", "0"),
    (),
])
def test_usage_errors_exit_2(capsys, argv):
    assert usage_error(capsys, *argv) == 2


# ---------------------------------------------------------------- sweep


def read_csv(path):
    text = path.read_bytes().decode()
    assert "\r" not in text
    return list(csv.reader(text.splitlines()))


def test_sweep_acceptance_grid(capsys, tmp_path):
    out = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "sweep", "--dmin", "0.05", "--dmax", "0.45", "--steps", "9",
                     "--family", "general", "--out", str(out))
    rows = read_csv(out)
    assert code == 0
    assert rows[0] == cli.SWEEP_HEADER
    assert len(rows) == 82
    for r in rows[1:]:
        assert abs(float(r[2]) - float(r[3])) < 1e-9
        assert r[7] == "true"
    # d_xy is the outer loop
    assert [r[0] for r in rows[1:10]] == ["0.05"] * 9


def test_sweep_single_point(capsys, tmp_path):
    out = tmp_path / "one.csv"
    run(capsys, "sweep", "--dmin", "0.25", "--dmax", "0.25", "--steps", "1", "--family", "fuchs1", "--out", str(out))
    row = read_csv(out)[1]
    assert row[2] == row[3] == "0.8660254038"


def test_sweep_zero_point(capsys, tmp_path):
    out = tmp_path / "zero.csv"
    run(capsys, "sweep", "--dmin", "0", "--dmax", "0", "--steps", "1", "--family", "general", "--out", str(out))
    row = read_csv(out)[1]
    assert [float(x) for x in row[:7]] == pytest.approx([0] * 7, abs=1e-15)
    assert row[7] == "false"


def test_sweep_workers_match_serial(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ("sweep", "--dmin", "0", "--dmax", "0.5", "--steps", "5", "--family", "one-param", "--a", "0.3")
    run(capsys, *base, "--out", str(a))
    run(capsys, *base, "--out", str(b), "--workers", "2")
    assert a.read_bytes() == b.read_bytes()


def test_sweep_stdout_and_bits(capsys):
    code, out, _ = run(capsys, "sweep", "--dmin", "0.5", "--dmax", "0.5", "--steps", "1",
                       "--family", "fuchs2", "--out", "-", "--bits")
    assert code == 0
    assert out.splitlines()[1].split(",")[4] == "1"


def test_sweep_unwritable_path(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--dmin", "0", "--dmax", "0.5", "--steps", "2",
                       "--family", "general", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2 and "cannot write" in err


# ---------------------------------------------------------------- verify


def test_verify_default_passes_quickly(capsys):
    t0 = time.perf_counter()
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert time.perf_counter() - t0 < 60
    assert "FAIL" not in out and "canary" in out


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--trials", "10000", "--seed", "7")
    second = run(capsys, "verify", "--trials", "10000", "--seed", "7")
    assert first == second and first[0] == 0


def test_verify_reports_offending_instance(capsys, monkeypatch):
    bad = random_interactions(DisturbancePair(0.25, 0.25), SampleConfig(1, 1))[0].interaction
    monkeypatch.setattr(cli, "build_optimal_general", lambda d: bad)
    code, out, err = run(capsys, "verify", "--trials", "50")
    assert code == 1
    assert "FAIL" in out
    offending = json.loads(err.splitlines()[1])
    assert set(offending) >= {"xi_x", "xi_y", "zeta_x", "zeta_y", "d_xy", "d_uv"}


# ---------------------------------------------------------------- canonicalize


def write_doc(tmp_path, doc, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=1))
    return str(path)


def test_canonicalize_fuchs_equal(capsys, tmp_path):
    d = DisturbancePair.equal(0.25)
    code, out, _ = run(capsys, "canonicalize", "--input", write_doc(tmp_path, to_document(build_fuchs_equal(0.25), d)))
    doc = json.loads(out)
    assert code == 0
    assert doc["matches_pattern"] is True and doc["optimal"] is True
    assert np.allclose(doc["coefficients"], doc["pattern"], atol=1e-9)


def test_canonicalize_random_reports_slack(capsys, tmp_path):
    d = DisturbancePair(0.25, 0.25)
    iv = random_interactions(d, SampleConfig(3, 1))[0].interaction
    code, out, _ = run(capsys, "canonicalize", "--input", write_doc(tmp_path, to_document(iv, d)))
    doc = json.loads(out)
    assert code == 0
    assert doc["matches_pattern"] is False and doc["optimal"] is False
    assert doc["slack_g"] > 0


def test_canonicalize_non_unit_vector(capsys, tmp_path):
    d = DisturbancePair.equal(0.25)
    doc = to_document(build_fuchs_equal(0.25), d)
    doc["xi_x"][0] = [1.5, 0.0]
    code, _, err = run(capsys, "canonicalize", "--input", write_doc(tmp_path, doc))
    assert code == 2 and "xi_x" in err and "unit norm" in err


def test_canonicalize_malformed_json_reports_line(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "basis": "canonical",\n  "d_xy": ,\n}')
    code, _, err = run(capsys, "canonicalize", "--input", str(path))
    assert code == 2 and "line 3" in err


def test_canonicalize_missing_field(capsys, tmp_path):
    d = DisturbancePair.equal(0.25)
    doc = to_document(build_fuchs_equal(0.25), d)
    del doc["zeta_y"]
    code, _, err = run(capsys, "canonicalize", "--input", write_doc(tmp_path, doc))
    assert code == 2 and "zeta_y" in err


def test_canonicalize_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "canonicalize", "--input", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_canonicalize_degenerate_notice(capsys, tmp_path):
    d = DisturbancePair(0.25, 0.0)
    code, out, err = run(capsys, "canonicalize", "--input", write_doc(tmp_path, to_document(build_fuchs_equal(0.0), d)))
    assert code == 0
    assert json.loads(out)["unique"] is False
    assert "not unique" in err


# ---------------------------------------------------------------- process level


def test_module_entry_point_is_byte_identical():
    argv = [sys.executable, "-m", "bb84eve", "construct", "--family", "fuchs2", "--dxy", "0.3", "--duv", "0.3"]
    a = subprocess.run(argv, capture_output=True, check=True)
    b = subprocess.run(argv, capture_output=True, check=True)
    assert a.stdout == b.stdout and a.returncode == 0


def test_module_entry_point_usage_exit_code():
    r = subprocess.run([sys.executable, "-m", "bb84eve", "construct", "--family", "general",
                        "--dxy", "0.1", "--duv", "0.1", "--a", "0.5"], capture_output=True)
    assert r.returncode == 2 and b"--a" in r.stderr
