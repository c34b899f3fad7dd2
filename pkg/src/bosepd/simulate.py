"""Per-method trajectories of a bare coherent state and their continuity residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exthfb, fock, gaussian
from .model import SQRT2, MeanField, ModelParams, coherent_gamma_moments
from .solvers import solve_bogoliubov_nu, solve_extended, solve_hfb

METHODS = ("oracle", "bogoliubov", "hfb", "exthfb")


@dataclass
class Trajectory:
    method: str
    times: np.ndarray
    stats: list
    mean_field: MeanField | None
    continuity_residual: float

    def rows(self):
        return list(zip(self.times, self.stats))


def mean_field_for(method: str, m: ModelParams, nu=None, theta=None) -> MeanField:
    if method == "bogoliubov":
        mf = solve_bogoliubov_nu(m).solution
        return MeanField(mf.nu if nu is None else nu, 0.0)
    if method == "hfb":
        mf = solve_hfb(m).solution
    elif method == "exthfb":
        mf = solve_extended(m).solution
    else:
        raise ValueError(f"no mean field for method {method!r}")
    return MeanField(mf.nu if nu is None else nu, mf.theta if theta is None else theta)


def _gaussian_run(method, h, m, mf, alpha, times):
    states = gaussian.trajectory(h, alpha, mf.nu, times)
    stats = [gaussian.to_quadratures(s, mf.nu) for s in states]
    res = max(abs(gaussian.number_rate(h, s, mf.nu) - SQRT2 * m.lam * s.p_mean) for s in states)
    return Trajectory(method, times, stats, mf, float(res))


def run(method: str, m: ModelParams, alpha: complex, times, fock_dim: int = fock.DEFAULT_DIM,
        nu=None, theta=None) -> Trajectory:
    times = np.asarray(times, dtype=float)
    if method == "oracle":
        orc = fock.run_single_mode(m, alpha, times, dim=fock_dim)
        samples = list(zip(times, orc.stats, orc.a_means))
        res = fock.continuity_residual(samples, m.lam) if len(times) >= 3 else 0.0
        return Trajectory(method, times, orc.stats, None, res)
    mf = mean_field_for(method, m, nu, theta)
    if method == "bogoliubov":
        return _gaussian_run(method, gaussian.bogoliubov_quadratic(m, mf.nu), m, mf, alpha, times)
    if method == "hfb":
        return _gaussian_run(method, gaussian.hfb_quadratic(m, mf), m, mf, alpha, times)
    if method == "exthfb":
        em = exthfb.assemble_evolution(m, mf)
        stats = exthfb.heisenberg_stats(em, alpha, times)
        s0 = coherent_gamma_moments(alpha, mf)
        moments = exthfb.propagate_moments(em, s0, times)
        res = max(
            abs(exthfb.number_rate(em, s) - SQRT2 * m.lam * st.p_mean)
            for s, st in zip(moments, stats)
        )
        return Trajectory(method, times, stats, mf, float(res))
    raise ValueError(f"unknown method {method!r}")


def hfb_continuity_rate(m: ModelParams, alpha: complex) -> tuple[float, MeanField]:
    """Instantaneous ``|d<N>/dt - sqrt(2) lam <p>|`` of HFB dynamics at ``t = 0``."""
    mf = solve_hfb(m).solution
    h = gaussian.hfb_quadratic(m, mf)
    s0 = gaussian.GaussianState.coherent(complex(alpha) - mf.nu)
    return abs(gaussian.number_rate(h, s0, mf.nu) - SQRT2 * m.lam * s0.p_mean), mf
