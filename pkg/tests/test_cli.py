import csv
import json

import pytest

from curvcert.cli import run

SPHERE_CERTIFY = """\
job = "certify"
[manifold]
builtin = "round_sphere"
params = [3, 1.0]
[sampler]
grid = 2
seed = 0
"""

TORUS_CERTIFY = """\
job = "certify"
[manifold]
builtin = "flat_torus"
params = [2]
[sampler]
grid = 2
"""

DW_ROOT = """\
job = "dw-root"
[dw]
r = 2
n = [1, 1]
p = [1.0, 3.0]
q = [1.0, 1.0]
kappa_lo = -2.0
kappa_hi = 2.0
sweep = 40
"""

INLINE_CHART = """\
job = "curvature"
[manifold]
dim = 2
domain = [[-0.5, 0.5], [-0.5, 0.5]]
metric = [["1", "0"], ["0", "1 + x0^2"]]
[sampler]
grid = 2
"""

SOLITON = """\
job = "soliton-check"
[manifold]
builtin = "round_sphere"
params = [2, 1.0]
[soliton]
rho = 1.0
f = "0"
[sampler]
grid = 2
"""


def write(tmp_path, text, name="job.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def invoke(job, cfg_path, tmp_path, *extra):
    out = tmp_path / "out"
    return run([job, "--config", cfg_path, "--out", str(out), *extra]), out


class TestExitCodes:
    def test_positive_exits_zero(self, tmp_path):
        code, _ = invoke("certify", write(tmp_path, SPHERE_CERTIFY), tmp_path)
        assert code == 0

    def test_violated_exits_one(self, tmp_path):
        code, _ = invoke("certify", write(tmp_path, TORUS_CERTIFY), tmp_path)
        assert code == 1

    def test_unknown_key_exits_two_and_names_key(self, tmp_path, capsys):
        cfg = write(tmp_path, SPHERE_CERTIFY + "\nbogus_key = 1\n")
        code, _ = invoke("certify", cfg, tmp_path)
        assert code == 2
        assert "bogus_key" in capsys.readouterr().err

    def test_unreadable_config_exits_two(self, tmp_path):
        code, _ = invoke("certify", str(tmp_path / "missing.toml"), tmp_path)
        assert code == 2

    def test_job_mismatch_exits_two(self, tmp_path):
        code, _ = invoke("curvature", write(tmp_path, SPHERE_CERTIFY),
                         tmp_path)
        assert code == 2


class TestReports:
    def test_json_round_trip(self, tmp_path):
        code, out = invoke("certify", write(tmp_path, SPHERE_CERTIFY),
                           tmp_path)
        report = json.loads((out / "certify.json").read_text())
        assert report["result"]["verdict"] == "Positive"
        assert report["result"]["min_ricci_eig"] == pytest.approx(2.0,
                                                                  abs=1e-8)
        assert report["seed"] == 0
        assert report["config"]["manifold"]["builtin"] == "round_sphere"
        assert "wall_time" not in json.dumps(report)

    def test_csv_row_count_matches_samples(self, tmp_path):
        code, out = invoke("certify", write(tmp_path, SPHERE_CERTIFY),
                           tmp_path)
        with open(out / "certify.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][-1] == "value"
        assert len(rows) - 1 == 2 ** 3  # grid=2 on a 3-manifold

    def test_inline_chart_metric(self, tmp_path):
        code, out = invoke("curvature", write(tmp_path, INLINE_CHART),
                           tmp_path)
        assert code == 0
        report = json.loads((out / "curvature.json").read_text())
        assert report["result"]["points"] == 4

    def test_soliton_job(self, tmp_path):
        code, out = invoke("soliton-check", write(tmp_path, SOLITON),
                           tmp_path)
        assert code == 0
        report = json.loads((out / "soliton_check.json").read_text())
        assert report["result"]["classification"] == "Shrinking"

    def test_dw_root_job(self, tmp_path):
        code, out = invoke("dw-root", write(tmp_path, DW_ROOT), tmp_path)
        assert code == 0
        report = json.loads((out / "dw_root.json").read_text())
        roots = report["result"]["roots"]
        assert len(roots) == 1 and roots[0]["non_einstein"]


class TestDeterminism:
    def test_byte_identical_across_runs_and_threads(self, tmp_path):
        cfg = write(tmp_path, SPHERE_CERTIFY)
        outputs = []
        for sub, threads in (("a", "1"), ("b", "1"), ("c", "4")):
            out = tmp_path / sub
            code = run(["certify", "--config", cfg, "--out", str(out),
                        "--threads", threads])
            assert code == 0
            outputs.append(((out / "certify.json").read_bytes(),
                            (out / "certify.csv").read_bytes()))
        assert outputs[0] == outputs[1] == outputs[2]
