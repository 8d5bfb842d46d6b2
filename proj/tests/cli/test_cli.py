"""End-to-end checks of the pointdiff executable (path in $POINTDIFF_BIN)."""

import csv
import io
import json
import math
import os
import subprocess

import pytest
from scipy.special import k0

BIN = os.environ.get("POINTDIFF_BIN", "pointdiff")


def run(*args, env=None):
    return subprocess.run([BIN, *args], capture_output=True, text=True, env=env, timeout=600)


def rows(stdout):
    return list(csv.DictReader(io.StringIO(stdout)))


def gst_survival_reference(theta, T, r):
    # int_{theta T}^inf e^{-a - c^2 r^2 / (4a)} / (2a) da over the same integral from 0.
    from scipy.integrate import quad

    c2 = 2.0 * theta
    f = lambda a: math.exp(-a - c2 * r * r / (4 * a)) / (2 * a)
    return quad(f, theta * T, math.inf, epsabs=0, epsrel=1e-12)[0] / k0(math.sqrt(c2) * r)


def test_gst_survival_row():
    out = run("table", "survival", "--family", "gst", "--theta", "1", "--T", "1", "--r", "1")
    assert out.returncode == 0, out.stderr
    (row,) = rows(out.stdout)
    assert set(row) == {"t", "r", "value", "err_estimate"}
    assert float(row["value"]) == pytest.approx(gst_survival_reference(1.0, 1.0, 1.0), rel=1e-9)
    # 17 significant digits
    assert len(row["value"].replace("0.", "", 1).lstrip("0")) >= 16


def test_hitdensity_integrates_to_one():
    out = run("table", "hitdensity", "--family", "leb", "--theta", "1", "--T", "1", "--r", "1")
    assert out.returncode == 0, out.stderr
    data = [(float(r["t"]), float(r["value"])) for r in rows(out.stdout)]
    total = sum(0.5 * (t1 - t0) * (v0 + v1) for (t0, v0), (t1, v1) in zip(data, data[1:]))
    assert abs(total - 1.0) < 1e-3


def test_json_shape():
    out = run("table", "h", "--family", "gau:alpha=0.5", "--r", "0.5,1", "--t", "0.25:1:4", "--format", "json")
    assert out.returncode == 0, out.stderr
    doc = json.loads(out.stdout)
    assert set(doc) == {"meta", "rows"}
    assert doc["meta"]["family"] == "gau:alpha=0.5"
    assert len(doc["rows"]) == 8


def test_usage_errors_exit_2():
    assert run("table", "h", "--family", "dir:eps").returncode == 2
    assert run("table", "nonsense").returncode == 2
    assert run("table", "h", "--r", "1:2").returncode == 2
    assert run("verify", "nosuch").returncode == 2
    assert run("table", "h", "--theta", "-1").returncode == 2


def test_numeric_failure_exit_3_with_diagnostic_row():
    out = run("table", "kernel", "--x0", "1", "--r", "0,1")
    assert out.returncode == 3
    values = [r["value"] for r in rows(out.stdout)]
    assert values[0] == "nan" and math.isfinite(float(values[1]))
    assert "origin" in out.stderr


def test_hit_branch_paths_rejected():
    out = run("sample", "path", "--resolve-hit", "--n-paths", "2")
    assert out.returncode == 3
    assert "not supported" in out.stderr


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("family=leb\ntheta=2\n")
    meta = lambda *a: json.loads(run("--config", str(cfg), "table", "h", "--format", "json", *a).stdout)["meta"]
    assert meta()["family"] == "leb" and meta()["theta"] == "2"
    assert meta("--theta", "3")["theta"] == "3"


def test_rtol_environment_override():
    env = dict(os.environ, POINTDIFF_RTOL="1e-6")
    doc = json.loads(run("table", "h", "--format", "json", env=env).stdout)
    assert float(doc["meta"]["rel_tol"]) == 1e-6
    doc = json.loads(run("table", "h", "--format", "json", "--rtol", "1e-9", env=env).stdout)
    assert float(doc["meta"]["rel_tol"]) == 1e-9


def test_sampling_independent_of_workers():
    args = ("sample", "transition", "--family", "leb", "--n-paths", "50", "--seed", "11")
    one = run(*args, "--workers", "1")
    three = run(*args, "--workers", "3")
    assert one.returncode == 0 and one.stdout == three.stdout
    assert len(rows(one.stdout)) == 50


def test_hit_sample_columns():
    out = run("sample", "hit", "--family", "gst", "--n-paths", "40")
    assert out.returncode == 0, out.stderr
    for r in rows(out.stdout):
        tau = float(r["tau"])
        assert (r["hit"] == "1" and 0 < tau < 1) or (r["hit"] == "0" and math.isnan(tau))


def test_verify_specfun_lines():
    out = run("verify", "specfun")
    assert out.returncode == 0
    assert sum("renewal_identity" in line and line.endswith("PASS") for line in out.stdout.splitlines()) == 3


def test_verify_kernel_weak_coupling():
    out = run("verify", "kernel", "--theta", "1e-8")
    line = next(l for l in out.stdout.splitlines() if l.startswith("kernel.semigroup_residual"))
    assert "< 1e-06" in line and line.endswith("PASS")
