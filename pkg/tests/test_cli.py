import io
import json
import subprocess
import sys

import pytest

from yamabekit import configs
from yamabekit.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_TOLERANCE, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, text, name="job.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


@pytest.mark.parametrize(
    "name, mode, code",
    [
        ("flat_gaussian", "curvature", EXIT_OK),
        ("flat_gaussian", "verify", EXIT_OK),
        ("flat_gaussian", "classify", EXIT_OK),
        ("shrinking_product", "verify", EXIT_OK),
        ("shrinking_product", "classify", EXIT_OK),
        ("expanding_product", "classify", EXIT_OK),
        ("steady_origin", "classify", EXIT_OK),
        ("steady_origin", "profile", EXIT_OK),
        ("random_battery", "verify", EXIT_OK),
        ("sphere_non_soliton", "verify", EXIT_TOLERANCE),
        ("sphere_non_soliton", "curvature", EXIT_OK),
        ("asymmetric_metric", "curvature", EXIT_CONFIG),
    ],
)
def test_bundled_configs(tmp_path, name, mode, code):
    got, out, err = invoke(mode, "--config", configs.path(name), "--out", tmp_path)
    assert got == code, out + err


def test_classify_labels_in_json(tmp_path):
    for name, label in [
        ("flat_gaussian", "flat"),
        ("shrinking_product", "shrinking_product"),
        ("expanding_product", "expanding_product"),
    ]:
        assert invoke("classify", "--config", configs.path(name), "--out", tmp_path, "--quiet")[0] == 0
        data = json.loads((tmp_path / f"{name}.classify.json").read_text())
        assert data["classification"]["label"] == label


def test_asymmetric_metric_names_the_key(tmp_path):
    code, _, err = invoke("curvature", "--config", configs.path("asymmetric_metric"), "--out", tmp_path)
    assert code == EXIT_CONFIG
    assert "[metric.components[0][1]]" in err and "asymmetric_metric.toml" in err


def test_report_writes_every_format(tmp_path):
    code, out, _ = invoke("report", "--config", configs.path("flat_gaussian"), "--out", tmp_path)
    assert code == EXIT_OK
    names = {p.name for p in tmp_path.iterdir()}
    for suffix in ("json", "md", "svg", "checks.csv", "trajectory.csv", "soliton.csv"):
        assert f"flat_gaussian.report.{suffix}" in names
    assert "wrote" in out
    assert (tmp_path / "flat_gaussian.report.svg").read_text().startswith("<svg")


def test_outputs_are_byte_identical(tmp_path):
    for mode, name in [("report", "flat_gaussian"), ("verify", "random_battery")]:
        a, b = tmp_path / f"{mode}a", tmp_path / f"{mode}b"
        for d in (a, b):
            assert invoke(mode, "--config", configs.path(name), "--out", d, "--quiet")[0] == 0
        files = sorted(p.name for p in a.iterdir())
        assert files == sorted(p.name for p in b.iterdir())
        for f in files:
            assert (a / f).read_bytes() == (b / f).read_bytes()


def test_seed_override_changes_samples(tmp_path):
    cfg = configs.path("flat_gaussian")
    invoke("curvature", "--config", cfg, "--out", tmp_path / "s0", "--quiet")
    invoke("curvature", "--config", cfg, "--out", tmp_path / "s1", "--quiet", "--seed", 1)
    a = json.loads((tmp_path / "s0" / "flat_gaussian.curvature.json").read_text())
    b = json.loads((tmp_path / "s1" / "flat_gaussian.curvature.json").read_text())
    assert a["seed"] == 0 and b["seed"] == 1
    assert a["curvature"][0]["point"] != b["curvature"][0]["point"]
    code, _, _ = invoke("curvature", "--config", cfg, "--out", tmp_path, "--seed", 2**64 - 1, "--quiet")
    assert code == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [
        ("bogus", "--config", "x.toml"),
        ("verify",),
        ("verify", "--config", "x.toml", "--seed", "-1"),
        ("verify", "--config", "x.toml", "--seed", str(2**64)),
        ("verify", "--config", "x.toml", "--tol-scale", "0"),
        ("verify", "--config", "x.toml", "--jet-order", "1"),
        ("verify", "--config", "x.toml", "--format", "pdf"),
    ],
)
def test_usage_errors(argv):
    assert invoke(*argv)[0] == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    code, _, err = invoke("verify", "--config", tmp_path / "absent.toml")
    assert code == EXIT_CONFIG and "[<file>]" in err


def test_tiny_tolerance_scale_violates(tmp_path):
    code, out, _ = invoke("verify", "--config", configs.path("shrinking_product"), "--out", tmp_path, "--tol-scale", 1e-12)
    assert code == EXIT_TOLERANCE and "FAIL" in out


def test_empty_sampling_writes_nothing(tmp_path):
    text = configs.path("flat_gaussian").read_text().replace("count = 16", "count = 0")
    cfg = write(tmp_path, text)
    out_dir = tmp_path / "out"
    code, _, err = invoke("verify", "--config", cfg, "--out", out_dir)
    assert code == EXIT_CONFIG and "[sampling.count]" in err
    assert not out_dir.exists()


def test_unwritable_output_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = invoke("verify", "--config", configs.path("flat_gaussian"), "--out", blocker / "sub")
    assert code == EXIT_CONFIG and "[output.dir]" in err


BASE = """
[chart]
coords = ["x", "y", "z"]
box = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]

[metric]
diagonal = ["1", "1", "1"]
"""


@pytest.mark.parametrize(
    "extra, key",
    [
        ("[soliton]\npotential = 'x'\nrho = 1.0\nbogus = 2\n", "[soliton.bogus]"),
        ("[sampling]\ncount = -1\n", "[sampling.count]"),
        ("[tolerances]\ngate = 0\n", "[tolerances.gate]"),
        ("[tolerances]\nnope = 1e-3\n", "[tolerances.nope]"),
        ("nonsense = 1\n", "[metric.nonsense]"),
        ("[extras]\nx = 1\n", "[extras]"),
        ("[soliton\n", "[<toml>]"),
    ],
)
def test_config_errors_name_the_key(tmp_path, extra, key):
    cfg = write(tmp_path, BASE + extra)
    code, _, err = invoke("verify", "--config", cfg)
    assert code == EXIT_CONFIG
    assert key in err and "job.toml" in err


def test_bad_expression_reports_component(tmp_path):
    cfg = write(tmp_path, BASE.replace('"1", "1", "1"', '"1", "1 +* x", "1"'))
    code, _, err = invoke("curvature", "--config", cfg)
    assert code == EXIT_CONFIG and "[metric.diagonal[1]]" in err


def test_verify_without_anything_to_check(tmp_path):
    cfg = write(tmp_path, BASE.replace('["x", "y", "z"]', '["x", "y"]').replace(', [-1.0, 1.0]]', ']').replace('"1", "1", "1"', '"1", "1"'))
    code, _, err = invoke("verify", "--config", cfg, "--out", tmp_path)
    assert code == EXIT_CONFIG and "[soliton]" in err


def test_degenerate_metric_is_numerical_failure(tmp_path):
    cfg = write(tmp_path, BASE.replace('"1", "1", "1"', '"1", "x", "1"'))
    code, _, err = invoke("curvature", "--config", cfg, "--out", tmp_path)
    assert code == EXIT_NUMERICAL and "numerical failure" in err


def test_profile_collapse_is_numerical_failure(tmp_path):
    cfg = write(
        tmp_path,
        "[profile]\nn = 3\nfiber_scalar = -2.0\nrho = 0.0\nr_end = 50.0\nic = { r = 0.0, phi = 1.0, dphi = -1.0 }\n",
    )
    code, out, _ = invoke("profile", "--config", cfg, "--out", tmp_path)
    assert code == EXIT_NUMERICAL and "singularity" in out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "yamabekit.cli", "classify", "--config", str(configs.path("flat_gaussian")), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "label: flat" in proc.stdout
