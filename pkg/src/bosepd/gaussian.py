"""Exact Gaussian dynamics for quadratic single-mode Hamiltonians.

``H = D a^+a + (C/2)(a^2 + a^+2)`` is ``(D+C)/2 x^2 + (D-C)/2 p^2`` up to a
constant, so means and covariances follow the linear flow
``d(x, p)/dt = K (x, p)`` with ``K = [[0, D-C], [-(D+C), 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SQRT2, MeanField, ModelParams, QuadratureStats, translated_coefficients

PARABOLIC_RTOL = 1e-12


@dataclass(frozen=True)
class QuadraticH:
    d_coef: float
    c_coef: float

    def __post_init__(self):
        if not (np.isfinite(self.d_coef) and np.isfinite(self.c_coef)):
            raise ValueError("quadratic coefficients must be finite")

    @property
    def discriminant(self) -> float:
        return self.d_coef**2 - self.c_coef**2

    def is_parabolic(self) -> bool:
        scale = max(self.d_coef**2, self.c_coef**2)
        return abs(self.discriminant) <= PARABOLIC_RTOL * scale

    @property
    def dynamically_unstable(self) -> bool:
        return not self.is_parabolic() and self.discriminant < 0


@dataclass(frozen=True)
class GaussianState:
    x_mean: float
    p_mean: float
    cov: np.ndarray  # [[Var x, Cov(x,p)], [Cov(x,p), Var p]]

    @classmethod
    def coherent(cls, alpha: complex) -> "GaussianState":
        alpha = complex(alpha)
        return cls(SQRT2 * alpha.real, SQRT2 * alpha.imag, 0.5 * np.eye(2))

    @property
    def means(self) -> np.ndarray:
        return np.array([self.x_mean, self.p_mean])

    def uncertainty_det(self) -> float:
        return float(np.linalg.det(self.cov))


def flow_matrix(h: QuadraticH) -> np.ndarray:
    d, c = h.d_coef, h.c_coef
    return np.array([[0.0, d - c], [-(d + c), 0.0]])


def propagator_matrix(h: QuadraticH, t: float) -> np.ndarray:
    """``exp(t K)`` in closed form; ``K^2 = -(D^2 - C^2) I``."""
    k = flow_matrix(h)
    eye = np.eye(2)
    if h.is_parabolic():
        return eye + t * k
    q = h.discriminant
    if q > 0:
        om = np.sqrt(q)
        return np.cos(om * t) * eye + (np.sin(om * t) / om) * k
    kap = np.sqrt(-q)
    return np.cosh(kap * t) * eye + (np.sinh(kap * t) / kap) * k


def propagate(h: QuadraticH, s0: GaussianState, t: float) -> GaussianState:
    f = propagator_matrix(h, t)
    m = f @ s0.means
    cov = f @ s0.cov @ f.T
    cov = 0.5 * (cov + cov.T)
    return GaussianState(float(m[0]), float(m[1]), cov)


def gap(h: QuadraticH) -> float:
    """Quasiparticle frequency; 0 for parabolic and for unstable forms."""
    if h.is_parabolic() or h.discriminant < 0:
        return 0.0
    return float(np.sqrt(h.discriminant))


def bogoliubov_quadratic(m: ModelParams, nu: float) -> QuadraticH:
    tc = translated_coefficients(m, nu)
    return QuadraticH(tc.quad_diag, 2.0 * tc.quad_offdiag)


def hfb_quadratic(m: ModelParams, mf: MeanField) -> QuadraticH:
    """Quadratic form left after mean-field decoupling of the cubic and quartic terms."""
    g, nu = m.g, mf.nu
    s, c = np.sinh(mf.theta), np.cosh(mf.theta)
    return QuadraticH(m.omega0_prime + 4 * g * nu**2 + 4 * g * s * s, 2 * g * (nu**2 + s * c))


def to_quadratures(s: GaussianState, nu: float) -> QuadratureStats:
    """Bare-mode statistics from a state of the translated mode."""
    vx, vp = s.cov[0, 0], s.cov[1, 1]
    ntt = 0.5 * (vx + vp + s.x_mean**2 + s.p_mean**2 - 1.0)
    return QuadratureStats(
        x_mean=s.x_mean + SQRT2 * nu,
        p_mean=s.p_mean,
        p_var=float(vp),
        x_var=float(vx),
        n_mean=float(ntt + SQRT2 * nu * s.x_mean + nu * nu),
    )


def number_rate(h: QuadraticH, s: GaussianState, nu: float) -> float:
    """Exact ``d<a^+a>/dt`` of the bare mode for the state ``s``."""
    k = flow_matrix(h)
    dm = k @ s.means
    dcov = k @ s.cov + s.cov @ k.T
    dntt = 0.5 * (dcov[0, 0] + dcov[1, 1]) + s.x_mean * dm[0] + s.p_mean * dm[1]
    return float(dntt + SQRT2 * nu * dm[0])


def trajectory(h: QuadraticH, alpha: complex, nu: float, times):
    """Start from the bare coherent state ``|alpha>``; return states of the translated mode."""
    s0 = GaussianState.coherent(complex(alpha) - nu)
    return [propagate(h, s0, t) for t in times]
