import json
import math
import re
import subprocess
import sys

import pytest

from lemnilab.cli import dispatch, emit_svg, parse_poly
from lemnilab.ensembles import ComplexPolynomial
from lemnilab.geometry import GridConfig, extract_lemniscate, roots

SPEC_FLAGS = [
    "--ensemble", "--degree", "--degrees", "--trials", "--seed", "--tolerance",
    "--grid-depth", "--radius", "--threshold", "--threads", "--out", "--csv",
    "--poly", "--limit",
]


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "lemnilab.cli", *args],
        capture_output=True, text=True, timeout=600,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_parse_poly_examples():
    p = parse_poly("z^2-4")
    assert p.coefficients == (complex(-4), 0j, complex(1))
    q = parse_poly("3z^3+2z-1")
    assert q.coefficients == (complex(-1), complex(2), 0j, complex(3))
    r = parse_poly("z")
    assert r.coefficients == (0j, complex(1))


def test_parse_poly_rejects_garbage():
    for bad in ("", "4", "z^", "q^2", "z^2 + ^3"):
        with pytest.raises(ValueError):
            parse_poly(bad)


def test_help_documents_every_spec_flag():
    rc, out, _ = run_cli(["--help"])
    assert rc == 0
    helps = [out]
    for sub in ("theory", "sample", "trace", "mc-length", "mc-b0",
                "mc-giant", "mc-tail", "plot"):
        rc, sout, _ = run_cli([sub, "--help"])
        assert rc == 0
        helps.append(sout)
    combined = "\n".join(helps)
    for flag in SPEC_FLAGS:
        assert flag in combined, f"{flag} missing from --help"


def test_usage_error_exit_code_2():
    rc, _, err = run_cli(["trace", "--bogus-flag"])
    assert rc == 2
    rc, _, _ = run_cli(["no-such-command"])
    assert rc == 2


def test_sample_deterministic_bytes():
    rc1, out1, _ = run_cli(["sample", "--ensemble", "kac", "--degree", "10", "--seed", "42"])
    rc2, out2, _ = run_cli(["sample", "--ensemble", "kac", "--degree", "10", "--seed", "42"])
    assert rc1 == rc2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert len(doc["coefficients"]) == 11


def test_trace_literal_polynomial():
    rc, out, _ = run_cli(["trace", "--poly", "z^2-4", "--grid-depth", "8"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["b0"] == 2


def test_trace_writes_full_curve_json(tmp_path):
    out_file = tmp_path / "curve.json"
    rc, out, _ = run_cli(["trace", "--poly", "z", "--out", str(out_file)])
    assert rc == 0
    doc = json.loads(out_file.read_text())
    assert doc["b0"] == 1
    assert len(doc["components"]) == 1
    assert doc["total_length"] == pytest.approx(2 * math.pi, abs=1e-5)
    brief = json.loads(out)
    assert brief["b0"] == 1


def test_theory_finite_and_limit():
    rc, out, _ = run_cli(["theory", "--ensemble", "kac", "--degree", "10",
                          "--tolerance", "1e-5"])
    assert rc == 0
    doc = json.loads(out)
    assert set(doc) == {"ensemble", "n", "value", "error_bound", "cells"}
    assert doc["value"] == pytest.approx(6.4565, abs=1e-3)

    rc, out, _ = run_cli(["theory", "--ensemble", "kac", "--limit"])
    assert rc == 0
    doc = json.loads(out)
    from lemnilab.theory import kac_limit_constant

    assert doc["constant"] == pytest.approx(kac_limit_constant(), abs=1e-9)


def test_theory_limit_unavailable_for_recip():
    rc, _, err = run_cli(["theory", "--ensemble", "recip_binom", "--limit"])
    assert rc == 2
    assert "limit" in err


def test_mc_length_json_and_csv(tmp_path):
    args = ["mc-length", "--ensemble", "kac", "--degrees", "4", "--trials", "12",
            "--seed", "5", "--threads", "1", "--out", str(tmp_path)]
    rc, out, _ = run_cli(args)
    assert rc == 0
    doc = json.loads(out)
    assert "summaries" in doc and "theory" in doc
    assert (tmp_path / "kac_4.csv").exists()
    rc, out_csv, _ = run_cli(args[:-2] + ["--csv"])
    assert rc == 0
    lines = out_csv.strip().splitlines()
    assert lines[0].startswith("degree,trial_index,seed")
    assert len(lines) == 13


def test_mc_config_file_round_trip(tmp_path):
    cfg_file = tmp_path / "exp.json"
    cfg_file.write_text(json.dumps({
        "ensemble": {"kind": "kac", "degree": 4},
        "degrees": [4],
        "trials_per_degree": 6,
        "master_seed": 11,
    }))
    rc, out, _ = run_cli(["mc-b0", "--config", str(cfg_file), "--threads", "1", "--csv"])
    assert rc == 0
    lines = out.strip().splitlines()
    assert len(lines) == 7          # config's trial count respected
    rc, out, _ = run_cli(["mc-b0", "--config", str(cfg_file), "--threads", "1",
                          "--trials", "3", "--csv"])
    assert rc == 0
    assert len(out.strip().splitlines()) == 4   # flag overrides the file


def test_mc_giant_and_tail_commands():
    rc, out, _ = run_cli(["mc-giant", "--ensemble", "kac", "--degrees", "6",
                          "--trials", "40", "--seed", "2", "--radius", "0.5",
                          "--threads", "1"])
    assert rc == 0
    doc = json.loads(out)
    assert "frequency" in doc and "wilson" in doc and "indeterminate" in doc

    rc, out, _ = run_cli(["mc-tail", "--ensemble", "kac", "--degrees", "5",
                          "--trials", "30", "--seed", "2",
                          "--threshold", "10,30", "--threads", "1"])
    assert rc == 0
    doc = json.loads(out)
    assert "5:10.0" in doc["frequency"]
    assert doc["frequency"]["5:30.0"] <= doc["frequency"]["5:10.0"]


def test_threads_env_fallback(tmp_path, monkeypatch):
    import os

    env = dict(os.environ, LEMNI_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "lemnilab.cli", "mc-b0", "--ensemble", "kac",
         "--degrees", "4", "--trials", "6", "--seed", "9", "--csv"],
        capture_output=True, text=True, timeout=600, env=env,
    )
    assert proc.returncode == 0
    # worker count must not change results: compare against 1 thread
    rc, out1, _ = run_cli(["mc-b0", "--ensemble", "kac", "--degrees", "4",
                           "--trials", "6", "--seed", "9", "--threads", "1", "--csv"])
    assert rc == 0
    assert proc.stdout == out1


def test_plot_svg_structure(tmp_path):
    svg = tmp_path / "z.svg"
    rc, out, _ = run_cli(["plot", "--poly", "z", "--out", str(svg)])
    assert rc == 0
    text = svg.read_text()
    assert text.count("<path") == 1
    assert "<svg" in text and "viewBox" in text

    svg2 = tmp_path / "kac.svg"
    rc, out, _ = run_cli(["plot", "--ensemble", "kac", "--degree", "12",
                          "--seed", "3", "--grid-depth", "9", "--out", str(svg2)])
    assert rc == 0
    doc = json.loads(out)
    assert svg2.read_text().count("<path") == doc["b0"]


def test_plot_deterministic_bytes(tmp_path):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    for path in (a, b):
        rc, _, _ = run_cli(["plot", "--ensemble", "kac", "--degree", "8",
                            "--seed", "21", "--grid-depth", "9", "--out", str(path)])
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()


def test_emit_svg_direct(tmp_path):
    p = ComplexPolynomial.from_coefficients([-4, 0, 1])
    curve = extract_lemniscate(p, GridConfig(max_depth=8, length_refine_tolerance=1e-4))
    out = tmp_path / "two.svg"
    emit_svg(curve, roots(p), str(out))
    text = out.read_text()
    assert text.count("<path") == 2
    assert text.count('fill="#c02020"') == 2   # root markers


def test_dispatch_in_process():
    assert dispatch(["sample", "--degree", "3", "--seed", "1"]) == 0
    assert dispatch(["theory"]) == 2   # missing degree
