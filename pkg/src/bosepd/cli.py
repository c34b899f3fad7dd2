"""Command-line front end.

Subcommands write CSV to stdout and diagnostics to stderr. Exit codes:
0 success, 1 verification failure, 2 invalid configuration, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from . import exthfb, fock, gaussian, simulate
from .model import MeanField, ModelError, ModelParams, coherent_gamma_moments
from .solvers import SolverError, solve_bogoliubov_nu, solve_extended, solve_hfb

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOCONV = 0, 1, 2, 3

DEFAULTS = {
    "omega0": 1.0,
    "w": 2.0,
    "g": 0.1,
    "lambda": 0.0,
    "alpha_re": 1.0,
    "alpha_im": 0.0,
    "method": "exthfb",
    "tmax": 10.0,
    "steps": 200,
    "fock_dim": fock.DEFAULT_DIM,
    "lambda_from": 1e-2,
    "lambda_to": 1e-6,
    "points": 5,
    "theta_override": None,
    "nu_override": None,
}
_INT_KEYS = {"steps", "fock_dim", "points"}
_STR_KEYS = {"method"}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    method: str
    alpha: complex
    tmax: float
    steps: int
    fock_dim: int
    lambda_from: float
    lambda_to: float
    points: int
    theta_override: float | None = None
    nu_override: float | None = None

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.steps)

    def sweep_lambdas(self) -> list[float]:
        if self.lambda_to == 0.0:
            # one decade per point below lambda_from, then the exact endpoint
            lams = [self.lambda_from / 10.0**k for k in range(self.points - 1)]
            return lams + [0.0]
        return list(np.geomspace(self.lambda_from, self.lambda_to, self.points))


def _convert(key: str, raw):
    if raw is None:
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _STR_KEYS:
            return str(raw).strip()
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for '{key}': {raw!r}") from None


def read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path!r}: {err}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key '{key}'")
        values[key] = _convert(key, value)
    return values


def build_config(values: dict) -> RunConfig:
    v = dict(values)
    if v["steps"] < 2:
        raise ConfigError(f"'steps' must be >= 2, got {v['steps']}")
    if v["tmax"] <= 0:
        raise ConfigError(f"'tmax' must be > 0, got {v['tmax']}")
    if v["fock_dim"] < 2:
        raise ConfigError(f"'fock_dim' must be >= 2, got {v['fock_dim']}")
    if v["method"] not in simulate.METHODS:
        raise ConfigError(f"'method' must be one of {', '.join(simulate.METHODS)}")
    if v["points"] < 2:
        raise ConfigError(f"'points' must be >= 2, got {v['points']}")
    if not (v["lambda_from"] > v["lambda_to"] >= 0):
        raise ConfigError("sweep needs lambda_from > lambda_to >= 0")
    try:
        params = ModelParams(v["omega0"], v["w"], v["g"], v["lambda"])
    except ModelError as err:
        raise ConfigError(str(err)) from None
    return RunConfig(
        params=params,
        method=v["method"],
        alpha=complex(v["alpha_re"], v["alpha_im"]),
        tmax=v["tmax"],
        steps=v["steps"],
        fock_dim=v["fock_dim"],
        lambda_from=v["lambda_from"],
        lambda_to=v["lambda_to"],
        points=v["points"],
        theta_override=v["theta_override"],
        nu_override=v["nu_override"],
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for key in DEFAULTS:
        flag = "--" + key.replace("_", "-")
        common.add_argument(flag, dest=key, default=None)
    common.add_argument("--config", default=None, help="flat 'key = value' file")
    parser = _Parser(prog="bosepd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("verify", "run the invariant suite and report PASS/FAIL per check"),
        ("solve", "print mean-field solutions"),
        ("evolve", "trajectory of a coherent state as CSV"),
        ("sweep-lambda", "extended-HFB lowest frequency and HFB gap versus lambda"),
        ("compare", "all methods side by side at lambda = 0"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def parse_config(argv) -> tuple[str, RunConfig]:
    ns = make_parser().parse_args(argv)
    values = dict(DEFAULTS)
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in DEFAULTS:
        raw = getattr(ns, key)
        if raw is not None:
            values[key] = _convert(key, raw)
    return ns.command, build_config(values)


# --- output -----------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(header, rows, out=None):
    out = out or sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _err(msg):
    print(msg, file=sys.stderr)


# --- commands -----------------------------------------------------------------


def _overrides(cfg: RunConfig) -> dict:
    return {"nu": cfg.nu_override, "theta": cfg.theta_override}


def cmd_solve(cfg: RunConfig) -> int:
    rows = []
    for name, solver in [("bogoliubov", solve_bogoliubov_nu), ("hfb", solve_hfb),
                         ("exthfb", solve_extended)]:
        rep = solver(cfg.params)
        rows.append([name, rep.solution.nu, rep.solution.theta, max(rep.residuals.values()),
                     rep.iterations, rep.converged, rep.phase])
    write_table(["method", "nu", "theta", "max_residual", "iterations", "converged", "phase"], rows)
    return EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    tr = simulate.run(cfg.method, cfg.params, cfg.alpha, cfg.times(), cfg.fock_dim,
                      **_overrides(cfg))
    write_table(
        ["t", "x_mean", "p_mean", "p_var", "n_mean", "method"],
        ([t, s.x_mean, s.p_mean, s.p_var, s.n_mean, cfg.method] for t, s in tr.rows()),
    )
    return EXIT_OK


def sweep_row(m: ModelParams):
    ext = solve_extended(m).solution
    spec = exthfb.spectrum(exthfb.assemble_evolution(m, ext))
    hfb = solve_hfb(m).solution
    return [m.lam, ext.nu, ext.theta, spec.min_abs, gaussian.gap(gaussian.hfb_quadratic(m, hfb))]


def cmd_sweep_lambda(cfg: RunConfig) -> int:
    rows, failed = [], False
    for lam in cfg.sweep_lambdas():
        m = cfg.params.with_lambda(float(lam))
        try:
            rows.append(sweep_row(m))
        except (SolverError, ModelError) as err:
            _err(f"lambda={lam!r}: {err}")
            rows.append([lam, np.nan, np.nan, np.nan, np.nan])
            failed = True
    write_table(["lambda", "nu", "theta", "exthfb_min_abs_eig", "hfb_gap"], rows)
    return EXIT_NOCONV if failed else EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.params.lam != 0.0:
        raise ConfigError("compare runs at lambda = 0")
    times = cfg.times()
    trajs = [simulate.run(meth, cfg.params, cfg.alpha, times, cfg.fock_dim)
             for meth in simulate.METHODS]
    write_table(
        ["t", "x_mean", "p_mean", "p_var", "n_mean", "method"],
        ([t, s.x_mean, s.p_mean, s.p_var, s.n_mean, tr.method] for tr in trajs for t, s in tr.rows()),
    )
    sys.stdout.write("\n")
    summary = []
    for tr in trajs:
        fit = exthfb.pd_extract(tr.rows())
        summary.append([tr.method, fit.var_quadratic_coef, tr.continuity_residual])
    write_table(["method", "pd_quadratic_coef", "continuity_residual"], summary)
    return EXIT_OK


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    skipped: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.skipped) or (np.isfinite(self.residual) and self.residual < self.tol)

    def line(self) -> str:
        if self.skipped:
            return f"PASS {self.name} skipped ({self.skipped})"
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name} residual={self.residual:.3e} tol={self.tol:.1e}"


def verification_checks(cfg: RunConfig) -> list[Check]:
    m = cfg.params
    ext = solve_extended(m)
    hfb = solve_hfb(m)
    sol = ext.solution
    mf = MeanField(
        sol.nu if cfg.nu_override is None else cfg.nu_override,
        sol.theta if cfg.theta_override is None else cfg.theta_override,
    )
    condensed = mf.nu > 0
    no_cond = "no condensate"
    checks = []
    em = exthfb.assemble_evolution(m, mf)
    q = em.coeffs
    checks.append(Check("constraint_Lambda", abs(q.Lambda), 1e-10))
    checks.append(Check("constraint_E1", abs(q.E1), 1e-10))
    if condensed:
        checks.append(Check("E0_closed_form", abs(q.E0 - exthfb.ezero_closed_form(m, mf)), 1e-10))
    else:
        checks.append(Check("E0_closed_form", 0.0, 1e-10, no_cond))
    checks.append(Check("constant_vector_norm", float(np.linalg.norm(em.c)), 1e-12))
    checks.append(Check("number_row_zero", float(np.abs(em.M[4]).max()), 1e-12))
    checks.append(Check("matrix_conjugation_symmetry", em.conjugation_defect(), 1e-12))
    if condensed:
        rep = exthfb.verify_continuity_columns(em, mf, m)
        for k, r in enumerate(rep.columns, 1):
            checks.append(Check(f"continuity_column_{k}", r, 1e-12))
        for name, r in zip(("identity_E0", "identity_cont2", "identity_reduced_E1"), rep.closed_forms):
            checks.append(Check(name, r, 1e-12))
    else:
        for k in range(1, 5):
            checks.append(Check(f"continuity_column_{k}", 0.0, 1e-12, no_cond))
        for name in ("identity_E0", "identity_cont2", "identity_reduced_E1"):
            checks.append(Check(name, 0.0, 1e-12, no_cond))
    checks.append(Check("theta_hfb_vs_extended", abs(hfb.solution.theta - sol.theta), 1e-8))

    times = np.linspace(0.0, max(cfg.tmax, 20.0), 101)
    s0 = coherent_gamma_moments(cfg.alpha, mf)
    moments = exthfb.propagate_moments(em, s0, times)
    checks.append(Check("propagated_conjugation_symmetry",
                        max(s.conjugation_defect() for s in moments), 1e-10))
    checks.append(Check("quasiparticle_number_drift",
                        max(abs(s.n - s0.n) for s in moments), 1e-12))
    tr = simulate.run("exthfb", m, cfg.alpha, times, nu=mf.nu, theta=mf.theta)
    checks.append(Check("exthfb_dynamic_continuity", tr.continuity_residual, 1e-8))

    if m.lam == 0.0 and condensed:
        try:
            spec = exthfb.spectrum(em)
            checks.append(Check("zero_mode_left_null", spec.left_null_residual, 1e-10))
            checks.append(Check("zero_mode_eigenvalue", spec.min_abs, 1e-10))
        except ModelError as err:
            _err(f"spectrum: {err}")
            checks.append(Check("zero_mode_left_null", np.inf, 1e-10))
            checks.append(Check("zero_mode_eigenvalue", np.inf, 1e-10))
        k0 = exthfb.motion_constant(moments[0], mf)
        checks.append(Check("motion_constant_drift",
                            max(abs(exthfb.motion_constant(s, mf) - k0) for s in moments), 1e-10))
    else:
        why = "lambda > 0" if m.lam else no_cond
        for name in ("zero_mode_left_null", "zero_mode_eigenvalue", "motion_constant_drift"):
            checks.append(Check(name, 0.0, 1e-10, why))

    quads = [gaussian.bogoliubov_quadratic(m, solve_bogoliubov_nu(m).solution.nu),
             gaussian.hfb_quadratic(m, hfb.solution)]
    tq = np.linspace(0.0, cfg.tmax, 11)
    checks.append(Check("symplectic_det",
                        max(abs(np.linalg.det(gaussian.propagator_matrix(h, t)) - 1.0)
                            for h in quads for t in tq), 1e-12))
    s_g = gaussian.GaussianState.coherent(cfg.alpha)
    checks.append(Check("uncertainty_det",
                        max(0.25 - gaussian.propagate(h, s_g, t).uncertainty_det()
                            for h in quads for t in tq), 1e-12))

    orc = fock.run_single_mode(m, cfg.alpha, tq, dim=cfg.fock_dim)
    checks.append(Check("oracle_norm_drift", orc.norm_drift, 1e-10))
    checks.append(Check("oracle_energy_drift", orc.energy_drift, 1e-9))
    tc = np.arange(0, 101) * 1e-3
    orc_c = fock.run_single_mode(m, cfg.alpha, tc, dim=cfg.fock_dim)
    cres = fock.continuity_residual(list(zip(tc, orc_c.stats, orc_c.a_means)), m.lam)
    checks.append(Check("oracle_continuity", cres, 1e-6))
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    checks = verification_checks(cfg)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{'ALL PASS' if ok else 'FAILED'}: {sum(c.passed for c in checks)}/{len(checks)}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "solve": cmd_solve,
    "evolve": cmd_evolve,
    "sweep-lambda": cmd_sweep_lambda,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        command, cfg = parse_config(argv)
        return COMMANDS[command](cfg)
    except ConfigError as err:
        _err(f"error: {err}")
        return EXIT_CONFIG
    except (SolverError, fock.NotConvergedError) as err:
        _err(f"non-convergence: {err}")
        return EXIT_NOCONV
    except ModelError as err:
        _err(f"error: {err}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
