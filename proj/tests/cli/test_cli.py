import csv
import json
import math
import os
import subprocess
from pathlib import Path

import pytest

NED_LAB = os.environ.get("NED_LAB", "ned_lab")
CONFIGS = Path(os.environ.get("NED_CONFIGS", Path(__file__).resolve().parents[2] / "tools" / "configs"))


def run(*args, cwd=None, env=None):
    return subprocess.run([NED_LAB, *map(str, args)], capture_output=True, text=True, cwd=cwd, env=env)


def test_gallery_list():
    r = run("gallery", "list")
    assert r.returncode == 0
    for name in ["barreira", "sign_switch", "smooth_limits", "factorial_steps", "piecewise_barreira"]:
        assert name in r.stdout


def test_gallery_eval_barreira():
    r = run("gallery", "eval", "barreira")
    assert r.returncode == 0, r.stderr


def test_robustness_constants():
    r = run("robustness", "--M", 1, "--omega", 1, "--upsilon", 0.2, "--eps", 0.1)
    assert r.returncode == 0, r.stderr
    j = json.loads(r.stdout)
    assert abs(j["omega_tilde"] - 0.74963323143579375334) < 1e-14
    assert j["admissible"] is True
    assert j["w_sign_flipped"] > 0


def test_classify_writes_frontier_and_certificate(tmp_path):
    out = tmp_path / "frontier.csv"
    r = run("classify", "--process", CONFIGS / "barreira.json", "--kind", "II", "--side", "plus",
            "--alpha-grid", "0.5:4:0.25", "--out", out)
    assert r.returncode == 0, r.stderr
    rows = list(csv.DictReader(out.open()))
    assert rows and list(rows[0].keys()) == ["alpha", "delta", "lnM"]
    alphas = [float(x["alpha"]) for x in rows]
    assert abs(alphas[-1] - 4.0) < 1e-12 or max(alphas) <= 4.0
    cert = tmp_path / "frontier.certificate.json"
    assert cert.exists()
    c = run("check", "--process", CONFIGS / "barreira.json", "--certificate", cert, "--horizon", 40)
    assert c.returncode == 0, c.stderr
    assert json.loads(c.stdout)["max_violation"] <= 1e-9


def test_convert_round_trip(tmp_path):
    src = tmp_path / "c.json"
    src.write_text(json.dumps({"kind": "I", "domain": "plus", "M": 2, "stable": {"alpha": 3, "delta": 1},
                               "unstable": None, "projection": "zero"}))
    mid, back = tmp_path / "mid.json", tmp_path / "back.json"
    assert run("convert", "--certificate", src, "--out", mid).returncode == 0
    m = json.loads(mid.read_text())
    assert m["kind"] == "II" and m["stable"]["alpha"] == 4
    assert run("convert", "--certificate", mid, "--out", back).returncode == 0
    b = json.loads(back.read_text())
    assert b["kind"] == "I" and b["stable"] == {"alpha": 3.0, "delta": 1.0} and b["M"] == 2


def test_reject_sign_switch():
    r = run("reject", "--gallery", "sign_switch", "--windows", "5,10,20", "--kind", "I")
    assert r.returncode == 0, r.stderr
    j = json.loads(r.stdout)
    series = j["series"][0]
    assert series["rejects"] is True
    lnM = [w["min_lnM"] for w in series["windows"]]
    assert lnM[0] < lnM[1] < lnM[2]


def test_exit_codes(tmp_path):
    assert run("classify", "--no-such-flag").returncode == 64
    assert run("frobnicate").returncode == 64
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "II", "domain": "full", "M": 1, "stable": {"alpha": 3, "delta": 0}}))
    r = run("check", "--gallery", "barreira", "--side", "full", "--horizon", 5, "--certificate", bad)
    assert r.returncode == 2
    missing = run("check", "--gallery", "barreira", "--certificate", tmp_path / "absent.json")
    assert missing.returncode == 2


def test_attract_affine(tmp_path):
    out = tmp_path / "cloud.csv"
    r = run("attract", "--config", CONFIGS / "pullback_affine.json", "--out", out)
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "cloud.json").read_text())
    assert rep["containment"]["min_margin"] >= -1e-6
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "x1", "cluster_id"]
    for row in rows[1:]:
        assert abs(float(row[1]) - 1.0) < 1e-6
    env = list(csv.reader((tmp_path / "cloud.envelope.csv").open()))
    assert env[0] == ["t", "R"] and abs(float(env[1][1]) - 1.0) < 1e-12


def test_pde_transfer(tmp_path):
    out = tmp_path / "pde.csv"
    r = run("pde", "--config", CONFIGS / "pde_dirichlet.json", "--out", out)
    assert r.returncode == 0, r.stderr
    cert = json.loads((tmp_path / "pde.certificate.json").read_text())
    assert abs(cert["stable"]["alpha"] - (3 + 9.8616797753407769706)) < 1e-9


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        assert run("--seed", 4, "attract", "--config", CONFIGS / "cooperative.json", "--out", d / "c.csv").returncode == 0
        assert run("classify", "--process", CONFIGS / "barreira.json", "--kind", "II", "--side", "plus",
                   "--alpha-grid", "0.5:4:0.25", "--out", d / "f.csv").returncode == 0
        outs.append(d)
    for name in ["c.csv", "c.json", "f.csv", "f.certificate.json"]:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
    assert (outs[0] / "c.csv.meta.json").exists()


def test_thread_count_does_not_change_results(tmp_path):
    args = ["classify", "--gallery", "sign_switch", "--side", "full", "--horizon", 10]
    one = run("--threads", 1, *args)
    env = dict(os.environ, NED_LAB_THREADS="3")
    many = run(*args, env=env)
    assert one.returncode == many.returncode
    assert one.stdout == many.stdout
