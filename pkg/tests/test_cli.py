"""Command-line surface: exit codes, canonical JSON output, certificate
round trips, and the audit suites at reduced sample counts.

Output goes through --out files rather than captured stdout so the replay
tests can compare bytes directly.
"""

import json
import shutil
import subprocess
import warnings

import numpy as np
import pytest

from covercert.cli import main, render_json


def run(args, out=None):
    """Invoke the CLI in-process; returns (exit_code, parsed_out_or_None)."""
    argv = list(args) + (["--out", str(out)] if out is not None else [])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rc = main(argv)
    if out is None:
        return rc, None
    return rc, json.loads(out.read_text())


# ---------------------------------------------------------------------------
# canonical JSON


def test_render_json_is_canonical():
    blob = render_json({"b": np.float64(1.5), "a": [np.int64(2), True, None]})
    assert blob == '{"a":[2,true,null],"b":1.5}\n'
    assert render_json({}) == "{}\n"


def test_render_json_handles_arrays_and_tuples():
    blob = render_json({"m": np.eye(2), "t": (1, 2)})
    assert blob == '{"m":[[1.0,0.0],[0.0,1.0]],"t":[1,2]}\n'


# ---------------------------------------------------------------------------
# bounds


def test_bounds_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main(["bounds", "--sweep", "2", "100", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == ("n,r_n,bound_log,borsuk_log,eps_log,"
                       "diam_bound_log,family_margin_log")
    assert len(lines) == 1 + 99
    first = lines[1].split(",")
    assert first[0] == "2"
    assert float(first[1]) == pytest.approx(np.sqrt(1.0 / 3.0), rel=1e-12)


def test_bounds_single_n_json(tmp_path):
    rc, doc = run(["bounds", "--n", "50", "--lam", "3.0"], tmp_path / "b.json")
    assert rc == 0
    assert doc["schema_version"] == 1
    assert doc["config"]["command"] == "bounds"
    assert set(doc) >= {"theorem_lower_bound_log", "borsuk", "pipeline",
                        "thickening", "constant_width", "choose_alpha"}
    assert "main_inequality" not in doc
    assert doc["choose_alpha"]["lambda"] == 3.0


def test_bounds_with_r_uses_chosen_alpha(tmp_path):
    rc, doc = run(["bounds", "--n", "50", "--lam", "3.0", "--r", "0.55"],
                  tmp_path / "b.json")
    assert rc == 0
    assert doc["main_inequality"]["alpha"] == pytest.approx(
        doc["choose_alpha"]["alpha"], rel=1e-15)
    rc, doc = run(["bounds", "--n", "50", "--r", "0.55", "--alpha", "1.0"],
                  tmp_path / "c.json")
    assert rc == 0
    assert doc["main_inequality"]["alpha"] == 1.0
    assert "choose_alpha" not in doc


def test_bounds_error_paths():
    assert main(["bounds"]) == 2
    assert main(["bounds", "--sweep", "10", "2"]) == 2
    assert main(["bounds", "--sweep", "1", "5"]) == 2
    assert main(["bounds", "--n", "6", "--r", "0.6"]) == 2
    assert main(["bounds", "--n", "2", "--lam", "5.0"]) == 2  # lam ln n >= n


# ---------------------------------------------------------------------------
# jung-check


def test_jung_check_passes_small(tmp_path):
    out = tmp_path / "jung.json"
    rc, doc = run(["jung-check", "--n", "3", "--seed", "9",
                   "--samples", "50", "--cloud-size", "8"], out)
    assert rc == 0
    assert doc["pass"]
    assert doc["simplex"]["ok"]
    assert doc["simplex"]["radius"] == pytest.approx(doc["r_n"], abs=1e-6)
    assert doc["clouds"]["ok"]
    assert doc["clouds"]["max_radius"] <= doc["r_n"] + 1e-6


def test_jung_check_domain():
    assert main(["jung-check", "--n", "11", "--seed", "0"]) == 2
    assert main(["jung-check", "--n", "0", "--seed", "0"]) == 2


# ---------------------------------------------------------------------------
# witness pipeline


@pytest.fixture(scope="module")
def witness_cert(tmp_path_factory):
    """One full witness run at the pinned seed, with recorded warnings."""
    out = tmp_path_factory.mktemp("wit") / "cert.json"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rc = main(["witness", "--seed", "2", "--out", str(out)])
    return rc, out, caught


def test_witness_requires_seed(capsys):
    assert main(["witness"]) == 2
    assert "seed" in capsys.readouterr().err


def test_witness_succeeds_and_replays(witness_cert, tmp_path):
    rc, out, _ = witness_cert
    assert rc == 0
    cert = json.loads(out.read_text())
    assert cert["schema_version"] == 1
    assert cert["kind"] == "witness-certificate"
    assert cert["verdict"] is True
    assert cert["diam_X"] <= cert["threshold"] + 1e-12
    # verdict rule for k = 1: no single member holds every witness point
    assert cert["non_coverage_method"] == "per-member-counts"
    assert max(cert["per_member_counts"]) < len(cert["X"]["points"])
    replay = tmp_path / "replay.json"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["witness", "--seed", "2", "--out", str(replay)]) == 0
    assert replay.read_bytes() == out.read_bytes()


def test_witness_flags_hypothesis_estimates(witness_cert):
    _, out, caught = witness_cert
    assert any("hypotheses fail on measured estimates" in str(w.message)
               for w in caught)
    cert = json.loads(out.read_text())
    # the measured first-moment estimate is diagnostic, not the design p
    assert cert["estimates"]["p_hat_max"] > cert["config"]["params"]["p"]
    assert not cert["hypotheses"]["pass"]


def test_witness_verify_cert_accepts(witness_cert, tmp_path):
    _, out, _ = witness_cert
    report_path = tmp_path / "verify.json"
    rc, doc = run(["witness", "--verify-cert", str(out)], report_path)
    assert rc == 0
    assert doc["kind"] == "witness-verification"
    assert doc["pass"]
    assert all(c["ok"] for c in doc["checks"])


@pytest.mark.parametrize("corrupt", ["diam", "counts", "verdict"])
def test_witness_verify_cert_rejects_tampering(witness_cert, tmp_path, corrupt):
    _, out, _ = witness_cert
    cert = json.loads(out.read_text())
    if corrupt == "diam":
        cert["diam_X"] = 0.5 * cert["diam_X"]
    elif corrupt == "counts":
        cert["per_member_counts"][0] += 1
    else:
        cert["X"]["points"] = cert["X"]["points"][:2]  # shrink the witness set
    bad = tmp_path / f"bad_{corrupt}.json"
    bad.write_text(json.dumps(cert))
    rc, doc = run(["witness", "--verify-cert", str(bad)], tmp_path / "r.json")
    assert rc == 1
    assert not doc["pass"]


def test_witness_negative_control_fails(tmp_path):
    # a radius-0.7 window: every diameter-1 set fits in some radius r_2 < 0.7
    # ball, so one family member always covers the survivors
    out = tmp_path / "neg.json"
    rc, cert = run(["witness", "--seed", "2", "--ball-radius", "0.7",
                    "--max-retries", "2", "--samples", "1000"], out)
    assert rc == 1
    assert cert["verdict"] is False


def test_witness_body_file(tmp_path):
    body = tmp_path / "body.json"
    body.write_text(json.dumps(
        {"kind": "ball", "dim": 2, "ball": {"center": [0.0, 0.0], "radius": 0.5}}))
    out = tmp_path / "cert.json"
    rc, cert = run(["witness", "--seed", "2", "--body", str(body),
                    "--samples", "2000"], out)
    assert rc == 0
    assert cert["verdict"] is True
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps(
        {"kind": "ball", "dim": 3,
         "ball": {"center": [0.0, 0.0, 0.0], "radius": 0.5}}))
    assert main(["witness", "--seed", "2", "--body", str(wrong)]) == 2


# ---------------------------------------------------------------------------
# audit suites


@pytest.mark.parametrize("suite,samples", [
    ("caps", None), ("sweep", 200), ("edges", 2000),
    ("cone", 600), ("cover", 40),
])
def test_audit_suites_pass(tmp_path, suite, samples):
    args = ["audit", "--suite", suite, "--seed", "1"]
    if samples is not None:
        args += ["--samples", str(samples)]
    rc, doc = run(args, tmp_path / f"{suite}.json")
    assert rc == 0
    assert doc["pass"]
    assert doc["suite"] == suite
    assert doc["failures"] == []


@pytest.mark.parametrize("suite,samples", [("cone", 600), ("cover", 40)])
def test_audit_expect_fail_controls(tmp_path, suite, samples):
    rc, doc = run(["audit", "--suite", suite, "--seed", "1",
                   "--samples", str(samples), "--expect-fail"],
                  tmp_path / "neg.json")
    assert rc == 0
    assert doc["fault_injection"]
    assert doc["pass"]  # pass means the injected fault was detected


def test_audit_expect_fail_rejected_elsewhere():
    assert main(["audit", "--suite", "caps", "--seed", "1",
                 "--expect-fail"]) == 2


def test_audit_argparse_errors():
    with pytest.raises(SystemExit) as exc:
        main(["audit", "--suite", "nonsense", "--seed", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["audit", "--suite", "caps"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# console script


def test_console_script_runs():
    exe = shutil.which("covercert")
    assert exe, "console script not on PATH; install with pip install -e ."
    proc = subprocess.run([exe, "bounds", "--n", "4"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["schema_version"] == 1
    assert doc["config"]["params"]["n"] == 4
