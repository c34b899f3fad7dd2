"""Quasiparticle-frame equations of motion truncated at bilinear order.

The independent variables are ``Gamma = (gamma, gamma^+, gamma^2, gamma^+2,
gamma^+ gamma)``; cubic and higher normal-ordered products are dropped, which
leaves the affine system ``i dGamma/dt = c + M Gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import (
    CONJ_TOL,
    SQRT2,
    MeanField,
    ModelError,
    ModelParams,
    MomentState,
    QuadratureStats,
    coherent_gamma_moments,
    coherent_moment_matrix,
    gamma_to_quadratures,
)

CONSTRAINT_TOL = 1e-8


class SingularParameterError(ModelError):
    pass


class ConstraintError(ModelError):
    """Spectral analysis requested away from the ``Lambda = E1 = 0`` manifold."""


@dataclass(frozen=True)
class QuasiCoeffs:
    Lambda: float
    Lambda0: float
    E0: float
    Lambda1: float
    E1: float


def _lam_over_nu(m: ModelParams, nu: float) -> float:
    if m.lam == 0.0:
        return 0.0
    if nu == 0.0:
        raise SingularParameterError("lambda > 0 with nu = 0: lambda/nu is singular")
    return m.lam / nu


def assemble_coefficients(m: ModelParams, mf: MeanField) -> QuasiCoeffs:
    g, nu, th, wp = m.g, mf.nu, mf.theta, m.omega0_prime
    _lam_over_nu(m, nu)
    s = np.sinh(th)
    c2, s2 = np.cosh(2 * th), np.sinh(2 * th)
    et = np.exp(th)
    # nu e^theta [(w0' + 2 g nu^2) - lam/nu + 2 g sinh(e^theta + sinh)], without dividing by nu
    lam_ = et * (nu * (wp + 2 * g * nu**2 + 2 * g * s * (et + s)) - m.lam)
    lam0 = (wp + 4 * g * nu**2) * c2 + 2 * g * nu**2 * s2
    e0 = lam0 + g * (c2**2 + s2**2 + c2 * (2 * s * s - 1))
    lam1 = (wp + 4 * g * nu**2) * s2 + 2 * g * nu**2 * c2
    e1 = lam1 + 2 * g * s2 * (c2 + s * s - 0.5)
    return QuasiCoeffs(float(lam_), float(lam0), float(e0), float(lam1), float(e1))


# permutation gamma <-> gamma^+, gamma^2 <-> gamma^+2, n fixed
_SWAP = np.array([1, 0, 3, 2, 4])


@dataclass(frozen=True)
class EvolutionMatrix:
    c: np.ndarray
    M: np.ndarray
    A: float
    B: float
    Q: float
    T: float
    coeffs: QuasiCoeffs
    mf: MeanField
    params: ModelParams

    def augmented(self) -> np.ndarray:
        """6x6 generator of ``[Gamma; 1]`` so that ``d/dt [Gamma; 1] = -i G [Gamma; 1]``."""
        g = np.zeros((6, 6), dtype=complex)
        g[:5, :5] = self.M
        g[:5, 5] = self.c
        return g

    def conjugation_defect(self) -> float:
        s = _SWAP
        dm = np.abs(self.M + np.conj(self.M)[np.ix_(s, s)]).max()
        dc = np.abs(self.c + np.conj(self.c)[s]).max()
        return float(max(dm, dc))


def assemble_evolution(m: ModelParams, mf: MeanField) -> EvolutionMatrix:
    q = assemble_coefficients(m, mf)
    g, nu, th = m.g, mf.nu, mf.theta
    c2, s2 = np.cosh(2 * th), np.sinh(2 * th)
    et = np.exp(th)
    A = g * nu * et * (2 * c2 + s2)
    B = g * nu * et * s2
    Q = g * (c2**2 + 0.5 * s2**2)
    T = q.E1 + 3 * g * c2 * s2
    L, E0, E1 = q.Lambda, q.E0, q.E1
    g3 = 3 * g * s2**2
    M = np.array(
        [
            [E0, E1, A, 3 * B, 2 * A],
            [-E1, -E0, -3 * B, -A, -2 * A],
            [2 * (L + A), 6 * B, 2 * (E0 + Q), g3, 2 * T],
            [-6 * B, -2 * (L + A), -g3, -2 * (E0 + Q), -2 * T],
            [-L, L, -E1, E1, 0.0],
        ],
        dtype=complex,
    )
    cvec = np.array([L, -L, E1, -E1, 0.0], dtype=complex)
    return EvolutionMatrix(cvec, M, A, B, Q, T, q, mf, m)


@dataclass(frozen=True)
class ContinuityReport:
    columns: tuple
    closed_forms: tuple

    @property
    def max_residual(self) -> float:
        return max(self.columns + self.closed_forms)


def verify_continuity_columns(em: EvolutionMatrix, mf: MeanField, m: ModelParams) -> ContinuityReport:
    """Residuals of the four column identities and three closed-form identities.

    Columns: ``kappa (M3k + M4k) + M1k + M2k = rhs_k`` with
    ``kappa = sinh(2 theta) e^-theta / (2 nu)`` and
    ``rhs = (mu, -mu, 0, 0)``, ``mu = (lam/nu) e^(-2 theta)``.
    """
    nu, th, g = mf.nu, mf.theta, m.g
    if nu == 0.0:
        raise SingularParameterError("continuity identities involve 1/nu; nu = 0")
    s2 = np.sinh(2 * th)
    ln = m.lam / nu
    kappa = s2 * np.exp(-th) / (2 * nu)
    mu = ln * np.exp(-2 * th)
    M = em.M.real
    rhs = (mu, -mu, 0.0, 0.0)
    cols = tuple(
        float(abs(kappa * (M[2, k] + M[3, k]) + M[0, k] + M[1, k] - rhs[k])) for k in range(4)
    )
    e0 = em.coeffs.E0
    a5 = abs(2 * g * s2 * np.exp(-2 * th) + e0 - mu)
    a6 = abs(s2 * (e0 + g) + 2 * g * nu**2)
    a7 = abs(2 * g * nu**2 + g * s2 * np.exp(-4 * th) + ln * s2 * np.exp(-2 * th))
    return ContinuityReport(cols, (float(a5), float(a6), float(a7)))


def ezero_closed_form(m: ModelParams, mf: MeanField) -> float:
    """Quasiparticle energy implied by ``Lambda = E1 = 0``."""
    s2 = np.sinh(2 * mf.theta)
    return (_lam_over_nu(m, mf.nu) - 2 * m.g * s2) * np.exp(-2 * mf.theta)


def zero_mode_vector(mf: MeanField) -> np.ndarray:
    ne = mf.nu * np.exp(mf.theta)
    h = 0.5 * np.sinh(2 * mf.theta)
    return np.array([ne, ne, h, h])


def motion_constant(s: MomentState, mf: MeanField) -> complex:
    """``(sinh 2theta / 2)(g2 + g2d) + nu e^theta (g1 + g1d)``; conserved at ``lam = 0``."""
    l = zero_mode_vector(mf)
    return complex(l @ s.as_array()[:4])


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    min_abs: float
    left_null_residual: float


def spectrum(em: EvolutionMatrix) -> SpectrumReport:
    """Eigenvalues of the ``Gamma_1..Gamma_4`` block.

    The block is similarity-transformed so its first row becomes the
    continuity combination ``(1, 1, kappa, kappa)``; that row is then set to
    its exact value, which makes the ``lam -> 0`` zero mode exact instead of
    the ``sqrt(eps)`` splitting a defective block produces under a plain
    eigen-decomposition.
    """
    q, mf, m = em.coeffs, em.mf, em.params
    scale = max(1.0, float(np.abs(em.M).max()))
    if abs(q.Lambda) > CONSTRAINT_TOL * scale or abs(q.E1) > CONSTRAINT_TOL * scale:
        raise ConstraintError(
            f"constraints violated (Lambda={q.Lambda:.3e}, E1={q.E1:.3e}); spectrum undefined"
        )
    m4 = em.M[:4, :4].real
    left_null = float(np.linalg.norm(zero_mode_vector(mf) @ m4))
    if mf.nu == 0.0:
        ev = np.linalg.eigvals(m4)
    else:
        kappa = np.sinh(2 * mf.theta) * np.exp(-mf.theta) / (2 * mf.nu)
        mu = (m.lam / mf.nu) * np.exp(-2 * mf.theta)
        p = np.eye(4)
        p[0] = (1.0, 1.0, kappa, kappa)
        pinv = np.eye(4)
        pinv[0] = (1.0, -1.0, -kappa, -kappa)
        a = p @ m4 @ pinv
        exact_row = np.array([mu, -mu, 0.0, 0.0]) @ pinv
        if np.abs(a[0] - exact_row).max() > CONSTRAINT_TOL * scale:
            raise ConstraintError("continuity row identity fails; spectrum undefined")
        a[0] = exact_row
        if mu == 0.0:
            ev = np.concatenate([[0.0], np.linalg.eigvals(a[1:, 1:])])
        else:
            ev = np.linalg.eigvals(a)
    ev = np.sort_complex(ev.astype(complex))
    return SpectrumReport(ev, float(np.abs(ev).min()), left_null)


def _check_moments(s0: MomentState):
    d = s0.conjugation_defect()
    if d > CONJ_TOL * max(1.0, s0.magnitude()):
        raise ModelError(f"initial moments break conjugation symmetry by {d:.3e}")


def propagators(em: EvolutionMatrix, times) -> list[np.ndarray]:
    g = em.augmented()
    return [expm(-1j * g * t) for t in times]


def propagate_moments(em: EvolutionMatrix, s0: MomentState, times) -> list[MomentState]:
    _check_moments(s0)
    v0 = np.append(s0.as_array(), 1.0)
    out = []
    for f in propagators(em, times):
        v = f @ v0
        out.append(MomentState.from_array(v))
    return out


def moment_rates(em: EvolutionMatrix, s: MomentState) -> np.ndarray:
    return -1j * (em.c + em.M @ s.as_array())


def number_rate(em: EvolutionMatrix, s: MomentState) -> float:
    """Exact ``d<a^+a>/dt`` of the bare mode implied by the truncated equations."""
    mf = em.mf
    th, nu = mf.theta, mf.nu
    r = moment_rates(em, s)
    val = (
        np.cosh(2 * th) * r[4]
        + 0.5 * np.sinh(2 * th) * (r[2] + r[3])
        + nu * np.exp(th) * (r[0] + r[1])
    )
    return float(val.real)


def heisenberg_stats(em: EvolutionMatrix, alpha: complex, times) -> list[QuadratureStats]:
    """Quadrature statistics of ``|alpha>`` with operators evolved by the truncated system.

    The equations are linear in operators, so ``p(t) = u(t) . Gamma(0)`` with
    ``u(t)`` a row of the propagator; means follow from ``<Gamma(0)>`` and
    variances from the exact second moments ``<Gamma_j(0) Gamma_k(0)>`` of the
    initial coherent state.
    """
    mf = em.mf
    th = mf.theta
    mom = coherent_moment_matrix(alpha, mf)
    mean = mom[5]  # <1 * Gamma_k>
    ux = np.zeros(6, dtype=complex)
    ux[0] = ux[1] = np.exp(th) / SQRT2
    up = np.zeros(6, dtype=complex)
    up[0] = -1j * np.exp(-th) / SQRT2
    up[1] = -up[0]
    out = []
    for f in propagators(em, times):
        s = MomentState.from_array(f @ mean)
        base = gamma_to_quadratures(s, mf)
        vx = ux @ f
        vp = up @ f
        xm, pm = vx @ mean, vp @ mean
        x_var = (vx @ mom @ vx - xm * xm).real
        p_var = (vp @ mom @ vp - pm * pm).real
        out.append(
            QuadratureStats(base.x_mean, base.p_mean, float(p_var), float(x_var), base.n_mean)
        )
    return out


def closure_stats(em: EvolutionMatrix, alpha: complex, times) -> list[QuadratureStats]:
    """Statistics read off the propagated closure moments alone."""
    s0 = coherent_gamma_moments(alpha, em.mf)
    return [gamma_to_quadratures(s, em.mf) for s in propagate_moments(em, s0, times)]


@dataclass(frozen=True)
class PDFit:
    drift_p: float
    var_quadratic_coef: float
    fit_residual: float
    var_offset: float
    drift_fit_residual: float


def pd_extract(traj) -> PDFit:
    """Least squares ``p_mean = c0 + c1 t`` and ``p_var = a + b t^2``.

    ``fit_residual`` is the largest pointwise deviation of the variance fit.
    """
    if len(traj) < 10:
        raise ValueError("phase-diffusion fit needs at least 10 samples")
    t = np.array([row[0] for row in traj], dtype=float)
    if np.ptp(t) == 0:
        raise ValueError("degenerate time grid")
    p = np.array([row[1].p_mean for row in traj])
    v = np.array([row[1].p_var for row in traj])
    lin = np.vstack([np.ones_like(t), t]).T
    quad = np.vstack([np.ones_like(t), t * t]).T
    cp = np.linalg.lstsq(lin, p, rcond=None)[0]
    cv = np.linalg.lstsq(quad, v, rcond=None)[0]
    return PDFit(
        drift_p=float(cp[1]),
        var_quadratic_coef=float(cv[1]),
        fit_residual=float(np.abs(quad @ cv - v).max()),
        var_offset=float(cv[0]),
        drift_fit_residual=float(np.abs(lin @ cp - p).max()),
    )
