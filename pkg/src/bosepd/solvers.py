"""Self-consistency solvers for the condensate amplitude and Bogoliubov angle.

All three problems reduce to one-dimensional bracketed roots:

* Bogoliubov: the condensate cubic ``w0' nu + 2 g nu^3 - lam = 0``.
* HFB and extended HFB: for fixed ``theta`` the linear-term cancellation is a
  cubic in ``nu`` with a unique positive root, leaving a scalar equation in
  ``theta`` (the HFB angle equation, or ``E1 = 0``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exthfb import assemble_coefficients, ezero_closed_form
from .model import MeanField, ModelParams

RESIDUAL_TOL = 1e-10
INTERNAL_TOL = 1e-12
MAX_ITER = 200
THETA_STEP = 0.02
THETA_MIN = -8.0


class SolverError(RuntimeError):
    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


class BracketError(SolverError):
    pass


@dataclass
class SolveReport:
    solution: MeanField
    residuals: dict = field(default_factory=dict)
    iterations: int = 0
    converged: bool = False
    phase: str = "condensed"
    method: str = ""


def find_root_bracketed(f, lo, hi, tol=INTERNAL_TOL, fprime=None, maxiter=MAX_ITER,
                        full_output=False):
    """Safeguarded root of ``f`` on ``[lo, hi]``.

    Newton steps (when ``fprime`` is given) or Illinois false-position steps
    are taken when they land inside the bracket and shrink it fast enough;
    otherwise the step is a bisection. Converged means ``|f(x)| < tol``.
    """
    flo, fhi = f(lo), f(hi)
    if abs(flo) < tol:
        return (lo, 0) if full_output else lo
    if abs(fhi) < tol:
        return (hi, 0) if full_output else hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:.3e}, {fhi:.3e}")
    x = 0.5 * (lo + hi) if fprime is None else (lo if abs(flo) < abs(fhi) else hi)
    fx = f(x)
    side = 0
    width = abs(hi - lo)
    for it in range(1, maxiter + 1):
        if abs(fx) < tol:
            return (x, it) if full_output else x
        if fprime is not None:
            d = fprime(x)
            cand = x - fx / d if d != 0 else None
        else:
            cand = (lo * fhi - hi * flo) / (fhi - flo)
        if cand is None or not (min(lo, hi) < cand < max(lo, hi)) or abs(hi - lo) > 0.5 * width:
            cand = 0.5 * (lo + hi)
            width = abs(hi - lo)
        x = cand
        fx = f(x)
        if fx * flo < 0:
            hi, fhi = x, fx
            if side == -1 and fprime is None:
                flo *= 0.5
            side = -1
        else:
            lo, flo = x, fx
            if side == 1 and fprime is None:
                fhi *= 0.5
            side = 1
        if abs(hi - lo) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            if abs(fx) < tol:
                return (x, it) if full_output else x
            raise SolverError(f"bracket collapsed at x={x!r} with |f|={abs(fx):.3e}", last=x)
    raise SolverError(f"no convergence after {maxiter} iterations (x={x!r}, f={fx:.3e})", last=x)


def positive_cubic_root(b: float, g: float, lam: float) -> tuple[float, int]:
    """Non-negative root of ``2 g nu^3 + b nu - lam``, continuous in ``lam``."""
    if lam == 0.0:
        if g > 0 and b < 0:
            return float(np.sqrt(-b / (2 * g))), 0
        return 0.0, 0
    if g == 0.0:
        if b <= 0:
            raise SolverError(f"no non-negative condensate amplitude for g=0, b={b}")
        return lam / b, 0
    f = lambda nu: b * nu + 2 * g * nu**3 - lam
    fp = lambda nu: b + 6 * g * nu**2
    hi = max(1.0, np.sqrt(abs(b) / g), np.cbrt(lam / g))
    while f(hi) <= 0:
        hi *= 2
    scale = max(1.0, lam, abs(b) * hi)
    return find_root_bracketed(f, 0.0, hi, tol=INTERNAL_TOL * scale, fprime=fp, full_output=True)


def solve_bogoliubov_nu(m: ModelParams) -> SolveReport:
    wp, g, lam = m.omega0_prime, m.g, m.lam
    nu, it = positive_cubic_root(wp, g, lam)
    phase = "normal" if (lam == 0 and nu == 0.0) else "condensed"
    h1 = wp * nu + 2 * g * nu**3 - lam
    rep = SolveReport(MeanField(float(nu), 0.0), {"h1": abs(h1)}, it, phase=phase, method="bogoliubov")
    rep.converged = abs(h1) < RESIDUAL_TOL
    if not rep.converged:
        raise SolverError(f"condensate cubic residual {abs(h1):.3e}", last=rep)
    return rep


def _linear_coef(m: ModelParams, theta: float) -> float:
    # w0' + 2 g sinh(theta)(e^theta + sinh(theta)) written with double angles
    c2, s2 = np.cosh(2 * theta), np.sinh(2 * theta)
    return m.omega0_prime + 2 * m.g * (c2 - 1 + 0.5 * s2)


def nu_for_theta(m: ModelParams, theta: float) -> float:
    return positive_cubic_root(_linear_coef(m, theta), m.g, m.lam)[0]


def _hfb_angle_residual(m: ModelParams, theta: float) -> float:
    """Angle equation with the denominator cleared."""
    nu = nu_for_theta(m, theta)
    g = m.g
    sc = 0.5 * np.sinh(2 * theta)
    ln = m.lam / nu if m.lam else 0.0
    return np.tanh(2 * theta) * (2 * g * (nu**2 - sc) + ln) + 2 * g * (nu**2 + sc)


def hfb_angle_equation_residual(m: ModelParams, mf: MeanField) -> float:
    g, nu, th = m.g, mf.nu, mf.theta
    sc = 0.5 * np.sinh(2 * th)
    ln = m.lam / nu if m.lam else 0.0
    den = 2 * g * (nu**2 - sc) + ln
    if den == 0:
        return abs(2 * g * (nu**2 + sc))
    return float(abs(np.tanh(2 * th) + 2 * g * (nu**2 + sc) / den))


def _e1_reduced(m: ModelParams, theta: float) -> float:
    """``e^(-2 theta) E1`` after eliminating ``w0'`` with the linear-term condition."""
    nu = nu_for_theta(m, theta)
    g = m.g
    s2 = np.sinh(2 * theta)
    ln = m.lam / nu if m.lam else 0.0
    return 2 * g * nu**2 + g * s2 * np.exp(-4 * theta) + ln * s2 * np.exp(-2 * theta)


def _theta_root(m: ModelParams, fn) -> tuple[float, int]:
    """First root below ``theta = 0``: the branch continued from the uncoupled limit."""
    f0 = fn(0.0)
    if f0 == 0.0:
        return 0.0, 0
    prev = 0.0
    th = -THETA_STEP
    while th >= THETA_MIN:
        if fn(th) * f0 <= 0:
            return find_root_bracketed(lambda t: fn(t), th, prev, tol=1e-13 * max(1.0, abs(f0)),
                                       full_output=True)
        prev, th = th, th - THETA_STEP
    raise BracketError(f"no angle root in [{THETA_MIN}, 0]")


def _pair_solve(m: ModelParams, fn, method: str) -> SolveReport:
    if m.g == 0.0:
        nu, it = positive_cubic_root(m.omega0_prime, 0.0, m.lam)
        theta = 0.0
    else:
        theta, it = _theta_root(m, fn)
        nu = nu_for_theta(m, theta)
    mf = MeanField(float(nu), float(theta))
    phase = "normal" if (m.lam == 0 and nu == 0.0) else "condensed"
    return SolveReport(mf, {}, it, phase=phase, method=method)


def solve_hfb(m: ModelParams) -> SolveReport:
    rep = _pair_solve(m, lambda t: _hfb_angle_residual(m, t), "hfb")
    q = assemble_coefficients(m, rep.solution)
    rep.residuals = {
        "angle_equation": hfb_angle_equation_residual(m, rep.solution),
        "Lambda": abs(q.Lambda),
    }
    rep.converged = all(v < RESIDUAL_TOL for v in rep.residuals.values())
    if not rep.converged:
        raise SolverError(f"HFB residuals too large: {rep.residuals}", last=rep)
    return rep


def solve_extended(m: ModelParams) -> SolveReport:
    rep = _pair_solve(m, lambda t: _e1_reduced(m, t), "exthfb")
    mf = rep.solution
    q = assemble_coefficients(m, mf)
    res = {"Lambda": abs(q.Lambda), "E1": abs(q.E1)}
    if mf.nu > 0:
        g, th = m.g, mf.theta
        s2 = np.sinh(2 * th)
        ln = m.lam / mf.nu
        res["reduced_E1"] = abs(2 * g * mf.nu**2 + g * s2 * np.exp(-4 * th)
                                + ln * s2 * np.exp(-2 * th))
        res["E0_closed_form"] = abs(q.E0 - ezero_closed_form(m, mf))
    rep.residuals = res
    rep.converged = all(v < RESIDUAL_TOL for v in res.values())
    if not rep.converged:
        raise SolverError(f"extended-HFB residuals too large: {res}", last=rep)
    return rep
