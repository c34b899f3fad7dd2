import csv
import io
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from bosepd import cli, solve_bogoliubov_nu, solve_extended
from bosepd.model import SQRT2


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_defaults_and_arithmetic():
    cmd, cfg = cli.parse_config(["solve", "--g", "0.1", "--w", "2"])
    assert cmd == "solve"
    assert cfg.params.omega0_prime == pytest.approx(-0.9)
    assert cfg.alpha == 1.0 + 0.0j


def test_config_file_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\ng = 0.2\nw=1.5\n")
    _, cfg = cli.parse_config(["solve", "--config", str(f), "--g", "0.3"])
    assert cfg.params.g == 0.3
    assert cfg.params.w == 1.5


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["evolve", "--steps", "1"], "steps"),
        (["solve", "--g", "abc"], "'g'"),
        (["solve", "--bogus", "1"], "bogus"),
        (["evolve", "--method", "rk4"], "method"),
        (["solve", "--g", "-0.1"], "g"),
    ],
)
def test_invalid_config_exit_2(argv, needle):
    code, _, err = run_cli(*argv)
    assert code == 2
    assert needle in err


def test_unknown_key_in_file(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("gee = 0.1\n")
    code, _, err = run_cli("solve", "--config", str(f))
    assert code == 2 and "gee" in err


def test_solve_table():
    code, out, _ = run_cli("solve")
    assert code == 0
    rows = {r["method"]: r for r in table(out)}
    assert set(rows) == {"bogoliubov", "hfb", "exthfb"}
    assert float(rows["bogoliubov"]["nu"]) == pytest.approx(np.sqrt(4.5))
    assert float(rows["hfb"]["theta"]) == pytest.approx(float(rows["exthfb"]["theta"]), abs=1e-8)
    assert all(r["converged"] == "1" for r in rows.values())


def test_evolve_bogoliubov_drift():
    code, out, _ = run_cli("evolve", "--method", "bogoliubov", "--steps", "21", "--alpha-re", "1.4")
    assert code == 0
    rows = table(out)
    assert len(rows) == 21
    assert list(rows[0]) == ["t", "x_mean", "p_mean", "p_var", "n_mean", "method"]
    nu = np.sqrt(4.5)
    x0 = SQRT2 * (1.4 - nu)
    for r in rows:
        assert float(r["p_mean"]) == pytest.approx(-0.4 * nu**2 * x0 * float(r["t"]), abs=1e-10)
    assert float(rows[0]["p_var"]) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("method", ["oracle", "bogoliubov", "hfb", "exthfb"])
def test_evolve_initial_row(method):
    code, out, _ = run_cli("evolve", "--method", method, "--steps", "5", "--tmax", "1")
    assert code == 0
    r = table(out)[0]
    assert float(r["t"]) == 0.0
    assert float(r["p_var"]) == pytest.approx(0.5, abs=1e-10)
    assert r["method"] == method


def test_evolve_oracle_vs_exthfb_weak_coupling():
    g = 0.01
    nu = solve_extended(cli.ModelParams(1.0, 1.9 + g, g, 0.0)).solution.nu
    args = ["evolve", "--g", str(g), "--w", str(1.9 + g), "--alpha-re", str(nu + 0.5),
            "--tmax", str(1.0 / (4 * g * nu**2)), "--steps", "21", "--fock-dim", "128"]
    _, o, _ = run_cli(*args, "--method", "oracle")
    _, e, _ = run_cli(*args, "--method", "exthfb")
    for a, b in zip(table(o), table(e)):
        for col in ("x_mean", "p_var", "n_mean"):
            assert float(b[col]) == pytest.approx(float(a[col]), rel=0.1)


def test_evolve_oracle_non_convergence_exit_3():
    code, _, err = run_cli("evolve", "--method", "oracle", "--alpha-re", "30", "--steps", "3", "--tmax", "1")
    assert code == 3
    assert "not converged" in err


def test_determinism():
    a = run_cli("evolve", "--steps", "30", "--g", "0.05", "--lambda", "0.01")
    b = run_cli("evolve", "--steps", "30", "--g", "0.05", "--lambda", "0.01")
    assert a[1] == b[1] and a[1]


def test_sweep_lambda_default():
    code, out, _ = run_cli("sweep-lambda")
    assert code == 0
    rows = table(out)
    assert list(rows[0]) == ["lambda", "nu", "theta", "exthfb_min_abs_eig", "hfb_gap"]
    lams = [float(r["lambda"]) for r in rows]
    assert lams == pytest.approx(list(np.geomspace(1e-2, 1e-6, 5)))
    eig = [float(r["exthfb_min_abs_eig"]) for r in rows]
    assert all(b < a for a, b in zip(eig, eig[1:]))
    gaps = [float(r["hfb_gap"]) for r in rows]
    assert 0.5 <= gaps[-1] / gaps[0] <= 2.0


def test_sweep_lambda_to_zero():
    code, out, _ = run_cli("sweep-lambda", "--lambda-to", "0", "--points", "6")
    assert code == 0
    rows = table(out)
    assert [float(r["lambda"]) for r in rows] == [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0]
    eig = [float(r["exthfb_min_abs_eig"]) for r in rows]
    assert all(b < a for a, b in zip(eig, eig[1:]))
    assert eig[-1] < 1e-10


def test_compare_summary():
    code, out, _ = run_cli("compare", "--steps", "101")
    assert code == 0
    body, summary = out.split("\n\n")
    assert len(table(body)) == 4 * 101
    rows = {r["method"]: r for r in table(summary)}
    nu = solve_bogoliubov_nu(cli.ModelParams(1.0, 2.0, 0.1)).solution.nu
    assert float(rows["bogoliubov"]["pd_quadratic_coef"]) == pytest.approx(8 * 0.01 * nu**4, abs=1e-8)
    assert float(rows["exthfb"]["pd_quadratic_coef"]) > 0
    assert abs(float(rows["hfb"]["pd_quadratic_coef"])) < 0.05
    assert float(rows["hfb"]["continuity_residual"]) > 1e-3
    assert float(rows["exthfb"]["continuity_residual"]) < 1e-8


def test_compare_requires_lambda_zero():
    code, _, err = run_cli("compare", "--lambda", "0.01")
    assert code == 2 and "lambda" in err


def test_verify_default_and_driven():
    for argv in (["verify"], ["verify", "--lambda", "1e-3"]):
        code, out, _ = run_cli(*argv)
        assert code == 0, out
        assert out.splitlines()[-1].startswith("ALL PASS")


def test_verify_detects_theta_perturbation():
    th = solve_extended(cli.ModelParams(1.0, 2.0, 0.1)).solution.theta
    code, out, _ = run_cli("verify", "--theta-override", repr(th + 0.1))
    assert code == 1
    failed = [line.split()[1] for line in out.splitlines() if line.startswith("FAIL")]
    assert "constraint_Lambda" in failed and "constraint_E1" in failed


@pytest.mark.parametrize("extra", [[], ["--w", "0.5", "--lambda", "0.1"]])
def test_verify_g_zero(extra):
    code, out, _ = run_cli("verify", "--g", "0", *extra)
    assert code == 0, out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bosepd", "solve"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("method,nu,theta")
