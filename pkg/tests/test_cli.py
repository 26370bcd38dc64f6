"""Command-line behaviour: output text, exit codes, artifacts."""

import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ldpc_audit import BitMatrix, build_Mn, family_dimensions, read_matrix
from ldpc_audit.cli import main
from ldpc_audit.matrix_io import write_alist

CHAIN = [[1, 1, 0], [0, 1, 1]]


@pytest.fixture(scope="module")
def m18_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "m18.alist"
    write_alist(build_Mn(1), str(p))
    return str(p)


@pytest.fixture(scope="module")
def chain_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "chain.alist"
    write_alist(BitMatrix.from_dense(CHAIN), str(p))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_round_trip(tmp_path, capsys):
    out = tmp_path / "m18.alist"
    code, text, _ = run(["generate", "--N", "1", "--out", str(out)], capsys)
    assert code == 0
    assert f"wrote 9x18 matrix to {out}" in text
    assert read_matrix(str(out)) == build_Mn(1)


def test_generate_blocks(tmp_path, capsys):
    out = tmp_path / "fam.alist"
    code, text, _ = run(
        ["generate", "--N", "1", "--out", str(out), "--blocks"], capsys
    )
    assert code == 0
    blocks = {
        tag: read_matrix(str(tmp_path / f"fam.{tag}.alist"))
        for tag in ("A", "S", "D", "B")
    }
    dims = family_dimensions(1)
    assert (blocks["A"].rows, blocks["A"].cols) == (
        dims["head_rows"], dims["head_cols"]
    )
    # B spans the head columns; the trailing tail_cols hold the identity part
    assert (blocks["B"].rows, blocks["B"].cols) == (
        dims["tail_rows"], dims["head_cols"]
    )
    s, d = blocks["S"].to_dense(), blocks["D"].to_dense()
    assert np.array_equal(blocks["A"].to_dense(), s ^ d)
    assert not (s & d).any()
    assert f"wrote {dims['head_rows']}x{dims['head_cols']} block A" in text


def test_generate_dense_format(tmp_path, capsys):
    out = tmp_path / "m18.txt"
    code, _, _ = run(
        ["generate", "--N", "1", "--out", str(out), "--format", "dense"], capsys
    )
    assert code == 0
    assert read_matrix(str(out), "dense") == build_Mn(1)


def test_generate_rejects_even_N(tmp_path, capsys):
    code, _, err = run(
        ["generate", "--N", "2", "--out", str(tmp_path / "x.alist")], capsys
    )
    assert code == 3
    assert "odd" in err


def test_decompose_text(m18_path, capsys):
    code, text, _ = run(["decompose", m18_path], capsys)
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("component 1: residual, rows {c1, c2, c3")
    assert ", k_1 = 9" in lines[0]
    assert "removed c7" in lines[1]
    assert lines[-1] == "sum k_i = 10 > dim Ker = 9 -> OVERCOUNT"


def test_decompose_json_matches_report_file(m18_path, tmp_path, capsys):
    rpt = tmp_path / "report.json"
    code, text, _ = run(
        ["decompose", m18_path, "--json", "--out", str(rpt)], capsys
    )
    assert code == 0
    assert rpt.read_text() == text
    payload = json.loads(text)
    assert payload["kind"] == "decomposition-report"
    assert payload["verdict"] == "OVERCOUNT"


def test_decompose_text_names_report_file(m18_path, tmp_path, capsys):
    rpt = tmp_path / "report.json"
    code, text, _ = run(["decompose", m18_path, "--out", str(rpt)], capsys)
    assert code == 0
    assert f"report: {rpt}" in text
    assert json.loads(rpt.read_text())["kind"] == "decomposition-report"


def test_decompose_random_policy_prints_seed(chain_path, capsys):
    code, text, _ = run(
        ["decompose", chain_path, "--policy", "random", "--seed", "7"], capsys
    )
    assert code == 0
    assert text.splitlines()[0] == "effective seed: 7"


def test_decompose_missing_file(capsys):
    code, _, err = run(["decompose", "does-not-exist.alist"], capsys)
    assert code == 3
    assert "no such file" in err


def test_decompose_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.alist"
    bad.write_text("not an alist\n")
    code, _, err = run(["decompose", str(bad)], capsys)
    assert code == 3
    assert err.startswith("error:")


def test_decompose_depth_limit_exit(m18_path, capsys):
    code, _, err = run(["decompose", m18_path, "--depth-limit", "1"], capsys)
    assert code == 2
    assert "depth limit 1" in err


def test_trace_default_replays_reference_walk(capsys):
    code, text, _ = run(["trace-m18"], capsys)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == (
        "decomposing the 9x18 family member (policy: scripted(1 overrides))"
    )
    assert any("synthesized c7+c9" in ln for ln in lines)
    assert any("rebuilt the previous component" in ln for ln in lines)
    assert (
        "totals: sum k_i = 10 + 0 + 1 + 0 = 11 > dim Ker = 9 -> OVERCOUNT"
        in lines
    )
    assert lines[-1].startswith("note: the replayed tie-break takes c9 over c8")


def test_trace_in_order(capsys):
    code, text, _ = run(["trace-m18", "--policy", "in-order"], capsys)
    assert code == 0
    assert (
        "totals: sum k_i = 9 + 1 + 0 = 10 > dim Ker = 9 -> OVERCOUNT"
        in text.splitlines()
    )
    assert "note:" not in text


def test_trace_json(capsys):
    code, text, _ = run(["trace-m18", "--json"], capsys)
    assert code == 0
    payload = json.loads(text)
    assert payload["kind"] == "decomposition-report"
    assert payload["sum_k"] == 11


def test_verify_family_passes(capsys):
    code, text, _ = run(["verify", "--N", "1"], capsys)
    assert code == 0
    assert text.splitlines() == [
        "PASS finder walks the head rows in order (lemma)",
        "PASS finder returns the head block (item 1)",
        "PASS kernel dimension bound (item 2): dim Ker = 9 <= 11",
        "PASS head kernel dimension bound (item 3): 10 >= 10",
        "PASS decomposition overcounts (corollary): sum k_i = 10 vs dim Ker = 9",
    ]


def test_verify_family_json(capsys):
    code, text, _ = run(["verify", "--N", "3", "--json"], capsys)
    assert code == 0
    payload = json.loads(text)
    assert payload["ok"] is True
    assert payload["kernel_dim"] == 20
    assert payload["sum_k"] == 23


def test_verify_wants_exactly_one_target(m18_path, capsys):
    code, _, err = run(["verify"], capsys)
    assert code == 3 and "exactly one" in err
    code, _, err = run(["verify", m18_path, "--N", "1"], capsys)
    assert code == 3 and "exactly one" in err


def test_verify_file_flags_the_overcount(m18_path, capsys):
    code, text, _ = run(["verify", m18_path], capsys)
    assert code == 2
    lines = text.splitlines()
    assert "sum k_i = 10 > dim Ker = 9 -> OVERCOUNT" in lines
    assert "unenforced constraints: c2" in lines
    assert "FAIL composed circuit: non-codeword-output" in lines
    assert any(ln.startswith("  witness message: ") for ln in lines)
    assert "  n_inputs = 11, dim Ker = 9, image rank = 11" in lines


def test_verify_file_passes_on_peelable_matrix(chain_path, capsys):
    code, text, _ = run(["verify", chain_path], capsys)
    assert code == 0
    assert "sum k_i = 1 = dim Ker = 1 -> EXACT" in text
    assert "PASS composed circuit encodes the kernel" in text


def test_verify_file_json(chain_path, capsys):
    code, text, _ = run(["verify", chain_path, "--json"], capsys)
    assert code == 0
    payload = json.loads(text)
    assert payload["kind"] == "file-verification"
    assert payload["encoder"]["ok"] is True
    assert payload["decomposition"]["verdict"] == "EXACT"


def test_encode_refuses_non_peelable(m18_path, capsys):
    code, _, err = run(["encode", m18_path], capsys)
    assert code == 3
    assert "9 rows / 18 columns survive as an ESS" in err
    assert "--force" in err


def test_encode_layout(chain_path, capsys):
    code, text, _ = run(["encode", chain_path], capsys)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "message bits: 1 (columns 3)"
    assert lines[1].startswith("gates: ")


def test_encode_message(chain_path, capsys):
    code, text, _ = run(["encode", chain_path, "--message", "1"], capsys)
    assert code == 0 and text == "111\n"
    code, text, _ = run(["encode", chain_path, "--message", "0"], capsys)
    assert code == 0 and text == "000\n"


def test_encode_rejects_bad_messages(chain_path, capsys):
    code, _, err = run(["encode", chain_path, "--message", "x"], capsys)
    assert code == 3
    assert "only 0/1" in err and "'x'" in err
    code, _, err = run(["encode", chain_path, "--message", "10"], capsys)
    assert code == 3
    assert "must be 1 characters" in err


def test_encode_force_reports_unmet_constraints(m18_path, capsys):
    code, text, err = run(
        ["encode", m18_path, "--force", "--message", "10101010101"], capsys
    )
    assert code == 0
    assert text == "000011001010101011\n"
    assert "warning: circuit does not enforce c2" in err
    assert "warning: output violates rows c2, c7, c8, c9" in err


def test_encode_json_layout(chain_path, capsys):
    code, text, _ = run(["encode", chain_path, "--json"], capsys)
    assert code == 0
    payload = json.loads(text)
    assert payload["kind"] == "encoder-circuit"
    assert payload["message_cols"] == [3]


def test_encode_json_codeword(m18_path, capsys):
    code, text, err = run(
        ["encode", m18_path, "--force", "--json", "--message", "10101010101"],
        capsys,
    )
    assert code == 0
    payload = json.loads(text)
    assert payload["kind"] == "codeword"
    assert payload["codeword"] == "000011001010101011"
    assert payload["violated_rows"] == ["c2", "c7", "c8", "c9"]


def test_experiment_writes_csv(tmp_path, capsys):
    out = tmp_path / "runs.csv"
    code, text, _ = run(
        ["experiment", "--n", "12", "--trials", "3", "--seed", "5",
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "effective seed: 5"
    assert lines[1].startswith("trials: 3, completed: 3, depth-limited: 0")
    assert lines[2].startswith("fraction OVERCOUNT: ")
    assert lines[3] == f"csv: {out}"
    with open(out, newline="") as fh:
        assert len(list(csv.DictReader(fh))) == 3


def _rows_without_time(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row.pop("elapsed_s")
    return rows


def test_experiment_reruns_identically(tmp_path, capsys):
    argv = ["experiment", "--n", "12", "--trials", "3", "--seed", "5", "--json"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(argv + ["--out", str(a)], capsys)[0] == 0
    assert run(argv + ["--out", str(b)], capsys)[0] == 0
    assert _rows_without_time(a) == _rows_without_time(b)
    # the JSON report holds no wall-clock field at all
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_experiment_default_csv_name(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, text, _ = run(["experiment", "--n", "12", "--trials", "2"], capsys)
    assert code == 0
    assert (tmp_path / "ensemble-n12-trials2-seed0.csv").is_file()
    assert "csv: ensemble-n12-trials2-seed0.csv" in text


def test_experiment_rejects_bad_ensembles(capsys):
    code, _, err = run(["experiment", "--n", "10", "--dc", "4"], capsys)
    assert code == 3 and "divisible" in err
    code, _, err = run(["experiment", "--n", "8", "--dv", "4", "--dc", "8"], capsys)
    assert code == 3 and "dv" in err


def test_unknown_subcommand_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_log_env_toggles_info_lines(m18_path, tmp_path):
    env = {**os.environ, "LDPC_AUDIT_BACKEND": "numpy"}
    argv = [
        sys.executable, "-m", "ldpc_audit.cli",
        "decompose", m18_path, "--out", str(tmp_path / "r.json"),
    ]
    quiet = subprocess.run(argv, capture_output=True, text=True, env=env)
    assert quiet.returncode == 0
    assert "INFO" not in quiet.stderr
    loud = subprocess.run(
        argv, capture_output=True, text=True,
        env={**env, "LDPC_AUDIT_LOG": "info"},
    )
    assert loud.returncode == 0
    assert "INFO ldpc_audit.cli: wrote report to" in loud.stderr
    # unknown level names fall back to the default
    odd = subprocess.run(
        argv, capture_output=True, text=True,
        env={**env, "LDPC_AUDIT_LOG": "chatty"},
    )
    assert odd.returncode == 0
