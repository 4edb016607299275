import json
import math
import os
import shutil
import subprocess
import sys

import pytest

import oracles
from contour_forge.cli import main, to_json
from contour_forge.identity import get_record, strange_vs_segment

SCHEMA = {"identity", "orientation", "R_values", "residuals", "conditioning_floors", "limit_estimate",
          "target", "limit_residual", "pass", "notes", "wall_time_ms"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(autouse=True)
def _in_empty_dir(tmp_path, monkeypatch):
    # every command must leave the working directory untouched
    monkeypatch.chdir(tmp_path)
    yield
    leftovers = [p.name for p in tmp_path.iterdir() if not p.name.startswith("out")]
    assert leftovers == []


# --------------------------------------------------------------- derive


def test_derive_sinc_latex(capsys):
    code, out, _ = run(capsys, "derive", "--function", "sinc(z)", "--contour", "semicircle(R=3)", "--emit", "latex")
    assert code == 0
    assert r"\cosh" in out and r"\sinh" in out and r"\theta" in out


def test_derive_sinc_json_matches_printed_form(capsys):
    from contour_forge.expr import parse_expr
    from contour_forge.lowering import pointwise_equiv, to_real

    code, out, _ = run(capsys, "derive", "--function", "sinc(z)", "--contour", "semicircle(R=3)", "--emit", "json")
    seg = json.loads(out)["segments"][0]
    re_part = to_real(parse_expr(seg["re_part"]))
    ref = to_real(parse_expr("-(cos(3 * cos(theta)) * sinh(3 * sin(theta)))"))
    assert pointwise_equiv(re_part, ref, seg["domain"]).max_abs < 1e-12


def test_derive_parabola_text(capsys):
    code, out, _ = run(capsys, "derive", "--function", "exp(-z^2)", "--contour", "parabola(R=2)", "--emit", "text")
    assert code == 0
    assert "(t^2 - 4)^2 - t^2" in out
    assert "parameter t" in out and "2 -> -2" in out and "orientation" in out


def test_derive_syntax_error(capsys):
    code, _, err = run(capsys, "derive", "--function", "sin(", "--contour", "semicircle(R=3)")
    assert code == 2 and "ExprSyntaxError" in err and "offset 5" in err


def test_derive_lowering_error(capsys):
    code, _, err = run(capsys, "derive", "--function", "sinc(z)", "--contour", "loop(semicircle(R=3))")
    assert code == 3 and "RemovablePointOnPath" in err


def test_derive_bad_contour(capsys):
    code, _, err = run(capsys, "derive", "--function", "z", "--contour", "hexagon(R=1)")
    assert code == 2


# ------------------------------------------------------------ integrate


def test_integrate_gaussian_segment(capsys):
    code, out, _ = run(capsys, "integrate", "--function", "exp(-z^2)", "--contour", "segment(-3,3)", "--emit", "json")
    assert code == 0
    d = json.loads(out)
    assert d["converged"] and abs(d["value"]["re"] - oracles.gauss_segment(3)) < 1e-12
    assert abs(d["value"]["re"] - 1.7724147) < 1e-7


def test_integrate_text_uses_ten_digits(capsys):
    code, out, _ = run(capsys, "integrate", "--function", "exp(-z^2)", "--contour", "segment(-3,3)")
    assert "1.772414697 + 0i" in out


def test_integrate_singular_path(capsys):
    code, _, err = run(capsys, "integrate", "--function", "1/z", "--contour", "loop(semicircle(R=1))")
    assert code == 3 and "EvaluationError" in err


def test_integrate_cubic(capsys):
    code, out, _ = run(capsys, "integrate", "--function", "z^2", "--contour", "segment(0,3)", "--emit", "json")
    d = json.loads(out)
    assert code == 0 and abs(d["value"]["re"] - 9) < 1e-13 and d["value"]["im"] == 0


def test_integrate_not_converged(capsys):
    code, _, _ = run(capsys, "integrate", "--function", "exp(i*50*z)", "--contour", "segment(0,20)",
                     "--max-subdiv", "2", "--abs-tol", "1e-14")
    assert code == 4


def test_integrate_interval(capsys):
    code, out, _ = run(capsys, "integrate", "--function", "sin(t)", "--interval", "0,3.141592653589793",
                       "--emit", "json")
    assert code == 0 and abs(json.loads(out)["value"]["re"] - 2) < 1e-12


def test_bad_tolerance_is_input_error(capsys):
    code, _, _ = run(capsys, "integrate", "--function", "z", "--contour", "segment(0,1)", "--abs-tol", "0")
    assert code == 2


# --------------------------------------------------------------- verify


def test_verify_sinc_identity(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "eq3_sinc_semicircle", "--R", "5")
    d = json.loads(out)
    assert code == 0 and d["pass"] is True and set(d) == SCHEMA
    assert d["R_values"] == [5.0]


def test_verify_json_round_trips_17_digits(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "eq3_sinc_semicircle", "--R", "5")
    d = json.loads(out)
    rep = strange_vs_segment(get_record("eq3_sinc_semicircle"), 5.0)
    assert d["residuals"] == rep.residuals
    assert d["conditioning_floors"] == rep.conditioning_floors
    assert complex(d["limit_estimate"]["re"], d["limit_estimate"]["im"]) == rep.limit_estimate


def test_verify_conditioning(capsys):
    code, _, err = run(capsys, "verify", "--identity", "parabola_gaussian", "--R", "4")
    assert code == 5 and "ConditioningLimit" in err


def test_verify_paths(capsys):
    code, out, _ = run(capsys, "verify", "--pathA", "segment(-2,2)", "--pathB", "parabola(R=2)",
                       "--function", "exp(-z^2)")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["residuals"][0] < 1e-8


def test_verify_paths_endpoint_mismatch(capsys):
    code, _, err = run(capsys, "verify", "--pathA", "segment(-2,2)", "--pathB", "parabola(R=3)",
                       "--function", "exp(-z^2)")
    assert code == 2 and "EndpointMismatch" in err


def test_verify_missing_flags(capsys):
    code, _, err = run(capsys, "verify", "--pathA", "segment(-2,2)")
    assert code == 2 and "--pathB" in err


def test_verify_small_circle_and_arc(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "small_circle_sinc_exp")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "--identity", "jordan_arc_exp", "--R", "10,50,100")
    assert code == 0 and json.loads(out)["R_values"] == [10.0, 50.0, 100.0]


def test_verify_failure_exit_code(capsys):
    # an integrand with a pole between the paths: runs fine, residual is 2 pi i
    code, out, _ = run(capsys, "verify", "--pathA", "segment(-2,2)", "--pathB", "semicircle(R=2)",
                       "--function", "1/(z - i)")
    assert code == 1 and json.loads(out)["pass"] is False


# ---------------------------------------------------------------- limit


def test_limit_gaussian(capsys):
    code, out, _ = run(capsys, "limit", "--identity", "eq1_gaussian_semicircle", "--ladder", "1:6:1")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    assert abs(d["limit_estimate"]["re"] - 1.7724538509) < 1e-10
    assert d["R_values"] == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]


def test_limit_sinc(capsys):
    code, out, _ = run(capsys, "limit", "--identity", "eq3_sinc_semicircle", "--ladder", "25,50,100,200")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["limit_residual"] < 1e-2


def test_limit_truncated(capsys):
    code, out, _ = run(capsys, "limit", "--identity", "eq1_gaussian_semicircle", "--ladder", "0.1,0.2")
    assert code == 4 and json.loads(out)["pass"] is False


def test_limit_bad_ladder(capsys):
    code, _, _ = run(capsys, "limit", "--identity", "eq1_gaussian_semicircle", "--ladder", "3,1")
    assert code == 2


# -------------------------------------------------------------- catalog


def test_catalog_text(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    entries = [line for line in out.splitlines() if line and not line.startswith(" ")]
    assert len(entries) == 5
    assert "1.772453851" in out and "3.141592654" in out
    assert out.count("orientation:") == 5


def test_catalog_json(capsys):
    code, out, _ = run(capsys, "catalog", "--emit", "json")
    d = json.loads(out)
    assert len(d) == 5 and d[1]["target"] == {"re": math.pi, "im": 0.0}


# --------------------------------------------------- plumbing and output


def test_out_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "verify", "--identity", "eq3_sinc_semicircle", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["pass"]


def test_config_file_with_cli_precedence(capsys, tmp_path):
    cfg = tmp_path / "out.cfg"
    cfg.write_text("# identity run\nidentity = eq3_sinc_semicircle\nR = 2\nemit = json\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0 and json.loads(out)["R_values"] == [2.0]
    code, out, _ = run(capsys, "verify", "--config", str(cfg), "--R", "5")
    assert json.loads(out)["R_values"] == [5.0]


def test_config_file_errors(capsys, tmp_path):
    cfg = tmp_path / "out.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "out.cfg:1" in err
    code, _, _ = run(capsys, "verify", "--config", str(tmp_path / "missing.cfg"))
    assert code == 2


def test_unknown_command_and_choice(capsys):
    assert run(capsys, "plot")[0] == 2
    assert run(capsys, "catalog", "--emit", "yaml")[0] == 2


def test_to_json_floats():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json(float("nan")) == "null" and to_json(3.0) == "3.0" and to_json(1e300) == "1.0000000000000001e+300"
    x = [math.pi, 1 / 3, 2.0 ** -1074]
    assert json.loads(to_json(x)) == x


@pytest.mark.skipif(shutil.which("contour-forge") is None, reason="console script not installed")
def test_console_script(tmp_path):
    env = dict(os.environ, CONTOUR_FORGE_THREADS="2")
    out = subprocess.run(["contour-forge", "catalog"], capture_output=True, text=True, env=env, cwd=tmp_path)
    assert out.returncode == 0 and "jordan_arc_exp" in out.stdout


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "contour_forge.cli", "verify", "--identity", "parabola_gaussian",
                          "--R", "4"], capture_output=True, text=True, cwd=tmp_path)
    assert out.returncode == 5
