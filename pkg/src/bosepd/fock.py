"""Exact dynamics of the bare mode in a truncated Fock space."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import SQRT2, ModelParams, QuadratureStats, TwoModeParams

DEFAULT_DIM = 64
MAX_DIM = 1024
CONVERGENCE_TOL = 1e-8
HERMITIAN_TOL = 1e-12


class FockError(ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class NotConvergedError(RuntimeError):
    """Raised when doubling the Fock dimension up to the cap still changes results."""


@dataclass(frozen=True)
class FockVector:
    amps: np.ndarray

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise FockError("operator must be a square matrix")
        scale = max(1.0, float(np.abs(e).max(initial=0.0)))
        if np.abs(e - e.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise FockError("operator is not Hermitian")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expect(self, psi: FockVector) -> float:
        return float(np.vdot(psi.amps, self.entries @ psi.amps).real)


def _check_dim(dim: int):
    if dim < 2:
        raise FockError(f"Fock dimension must be >= 2, got {dim}")


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_diag(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=float)


def build_single_mode_h(m: ModelParams, dim: int) -> HermitianOperator:
    _check_dim(dim)
    n = number_diag(dim)
    h = np.diag(m.omega0_prime * n + m.g * n * (n - 1)).astype(complex)
    off = -m.lam * np.sqrt(np.arange(1, dim, dtype=float))
    h += np.diag(off, -1) + np.diag(off, 1)
    return HermitianOperator(h)


def build_quadratic_h(d_coef: float, c_coef: float, dim: int) -> HermitianOperator:
    """``D a^+a + (C/2)(a^2 + a^+2)`` truncated at ``dim``."""
    _check_dim(dim)
    a = annihilation(dim)
    a2 = a @ a
    h = d_coef * np.diag(number_diag(dim)) + 0.5 * c_coef * (a2 + a2.conj().T)
    return HermitianOperator(h.astype(complex))


def build_two_mode_h(p: TwoModeParams, dim: int, normal_modes: bool = True) -> HermitianOperator:
    """Two coupled modes on a ``dim x dim`` product basis.

    With ``normal_modes`` the Hamiltonian is written in the symmetric and
    antisymmetric modes, otherwise in the bare tunnel-coupled modes.
    """
    _check_dim(dim)
    a = annihilation(dim)
    eye = np.eye(dim)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    n1, n2 = a1.conj().T @ a1, a2.conj().T @ a2
    ntot = n1 + n2
    if normal_modes:
        h = (p.omega0 - p.w) * n1 + (p.omega0 + p.w) * n2
    else:
        hop = a1.conj().T @ a2
        h = p.omega0 * ntot - p.w * (hop + hop.conj().T)
    h = h + p.g * ntot @ ntot
    return HermitianOperator(h.astype(complex))


def two_mode_number(dim: int) -> np.ndarray:
    n = number_diag(dim)
    return np.diag(np.add.outer(n, n).ravel()).astype(complex)


def safe_coherent_dim(alpha: complex) -> int:
    n = abs(alpha) ** 2
    return int(np.ceil(n + 10.0 * np.sqrt(n + 1.0)))


def coherent_vector(alpha: complex, dim: int) -> FockVector:
    _check_dim(dim)
    alpha = complex(alpha)
    k = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return FockVector(amps)
    logmag = k * np.log(abs(alpha)) - 0.5 * gammaln(k + 1) - 0.5 * abs(alpha) ** 2
    amps = np.exp(logmag) * np.exp(1j * k * np.angle(alpha))
    tail = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if tail > 1e-12:
        warnings.warn(
            f"coherent state alpha={alpha} truncated at dim={dim}: tail weight {tail:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return FockVector(amps / np.linalg.norm(amps))


class Propagator:
    """``exp(-i H t)`` from a single dense eigendecomposition."""

    def __init__(self, h: HermitianOperator):
        self.h = h
        self.evals, self.evecs = np.linalg.eigh(h.entries)

    def evolve(self, psi0: FockVector, times) -> list[FockVector]:
        c0 = self.evecs.conj().T @ psi0.amps
        return [FockVector(self.evecs @ (np.exp(-1j * self.evals * t) * c0)) for t in times]


def evolve(h: HermitianOperator, psi0: FockVector, times) -> list[FockVector]:
    return Propagator(h).evolve(psi0, times)


def observables(psi: FockVector) -> QuadratureStats:
    v = psi.amps
    dim = v.shape[0]
    sq = np.sqrt(np.arange(1, dim, dtype=float))
    n = number_diag(dim)
    a_mean = np.vdot(v[:-1], sq * v[1:])
    a2_mean = np.vdot(v[:-2], sq[:-1] * sq[1:] * v[2:])
    n_mean = float(np.sum(n * np.abs(v) ** 2))
    x = SQRT2 * a_mean.real
    p = SQRT2 * a_mean.imag
    # x^2 = (a^2 + a^+2 + 2n + 1)/2, p^2 = -(a^2 + a^+2 - 2n - 1)/2
    x2 = a2_mean.real + n_mean + 0.5
    p2 = -a2_mean.real + n_mean + 0.5
    return QuadratureStats(x_mean=x, p_mean=p, p_var=p2 - p * p, x_var=x2 - x * x, n_mean=n_mean)


def a_expectation(psi: FockVector) -> complex:
    v = psi.amps
    return complex(np.vdot(v[:-1], np.sqrt(np.arange(1, v.shape[0])) * v[1:]))


def continuity_residual(trajectory, lam: float) -> float:
    """Largest violation of ``d<N>/dt = sqrt(2) lam <p>`` on interior samples.

    ``trajectory`` is a sequence of ``(t, QuadratureStats, <a>)``; the time
    derivative is a centered difference, so for exact dynamics the result is
    pure discretization error.
    """
    if len(trajectory) < 3:
        raise FockError("continuity check needs at least 3 samples")
    t = np.array([row[0] for row in trajectory], dtype=float)
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0) or dt[0] <= 0:
        raise FockError("continuity check needs uniformly increasing times")
    n = np.array([row[1].n_mean for row in trajectory])
    p = np.array([row[1].p_mean for row in trajectory])
    dndt = (n[2:] - n[:-2]) / (2.0 * dt[0])
    return float(np.max(np.abs(dndt - SQRT2 * lam * p[1:-1])))


@dataclass
class OracleRun:
    times: np.ndarray
    stats: list
    a_means: list
    dim: int
    converged: bool
    max_change: float
    norm_drift: float
    energy_drift: float


def _run_at_dim(build, alpha, times, dim):
    h = build(dim)
    prop = Propagator(h)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        psi0 = coherent_vector(alpha, dim)
    states = prop.evolve(psi0, times)
    e0 = h.expect(psi0)
    norm_drift = max(abs(s.norm() - 1.0) for s in states)
    energy_drift = max(abs(h.expect(s) - e0) for s in states) / max(1.0, abs(e0))
    stats = [observables(s) for s in states]
    return stats, [a_expectation(s) for s in states], norm_drift, energy_drift


def _stats_vector(stats) -> np.ndarray:
    return np.array([[s.x_mean, s.p_mean, s.p_var, s.x_var, s.n_mean] for s in stats])


def run_converged(build, alpha: complex, times, dim: int = DEFAULT_DIM,
                  max_dim: int = MAX_DIM, tol: float = CONVERGENCE_TOL,
                  strict: bool = True) -> OracleRun:
    """Evolve ``|alpha>`` under ``build(dim)``, doubling ``dim`` until results settle.

    Convergence means the reported statistics at ``dim`` and ``2 dim`` agree
    within ``tol`` (absolute, relative for entries above 1).
    """
    times = np.asarray(times, dtype=float)
    dim = max(dim, 2)
    while dim < safe_coherent_dim(alpha) and dim < max_dim:
        dim *= 2
    prev = _run_at_dim(build, alpha, times, dim)
    change = np.inf
    while 2 * dim <= max_dim:
        cur = _run_at_dim(build, alpha, times, 2 * dim)
        a, b = _stats_vector(prev[0]), _stats_vector(cur[0])
        change = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
        dim *= 2
        prev = cur
        if change < tol:
            break
    converged = change < tol
    if strict and not converged:
        raise NotConvergedError(
            f"Fock truncation not converged at dim={dim} (change {change:.3e})"
        )
    stats, a_means, nd, ed = prev
    return OracleRun(times, stats, a_means, dim, converged, change, nd, ed)


def run_single_mode(m: ModelParams, alpha: complex, times, **kw) -> OracleRun:
    return run_converged(lambda d: build_single_mode_h(m, d), alpha, times, **kw)
