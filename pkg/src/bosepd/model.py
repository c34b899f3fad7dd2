"""Model parameters, the translated Hamiltonian and quasiparticle-frame maps.

Conventions used throughout the package (hbar = 1, dimensionless units):

* ``a`` is the single condensing mode, ``H_a = w0' a^+a + g a^+2 a^2 - lam (a + a^+)``
  with ``w0' = omega0 - w + g``.
* The condensate is split off by ``a = nu + at`` with ``nu`` real.
* Quasiparticles are ``gamma = cosh(theta) at - sinh(theta) at^+``.
* Quadratures are ``x = (a^+ + a)/sqrt(2)`` and ``p = i (a^+ - a)/sqrt(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

SQRT2 = np.sqrt(2.0)

#: Tolerance on conjugation symmetry of a moment vector.
CONJ_TOL = 1e-9


class ModelError(ValueError):
    """Raised for parameter combinations the model cannot handle."""


@dataclass(frozen=True)
class TwoModeParams:
    omega0: float
    w: float
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise ModelError(f"nonlinearity g must be >= 0, got {self.g}")


@dataclass(frozen=True)
class ModelParams:
    """Single-mode parameters. ``omega0_prime`` is derived, never passed."""

    omega0: float
    w: float
    g: float
    lam: float = 0.0
    omega0_prime: float = field(init=False)

    def __post_init__(self):
        if self.g < 0:
            raise ModelError(f"nonlinearity g must be >= 0, got {self.g}")
        if self.lam < 0:
            raise ModelError(f"field lambda must be >= 0, got {self.lam}")
        object.__setattr__(self, "omega0_prime", self.omega0 - self.w + self.g)

    def with_lambda(self, lam: float) -> "ModelParams":
        return ModelParams(self.omega0, self.w, self.g, lam)

    def with_g(self, g: float) -> "ModelParams":
        return ModelParams(self.omega0, self.w, g, self.lam)


@dataclass(frozen=True)
class MeanField:
    nu: float
    theta: float = 0.0

    def __post_init__(self):
        if self.nu < 0:
            raise ModelError(f"condensate amplitude must be >= 0, got {self.nu}")
        if not np.isfinite(self.theta):
            raise ModelError("Bogoliubov angle must be finite")


@dataclass(frozen=True)
class TranslatedCoeffs:
    """Coefficients of ``H`` after ``a -> a + nu``.

    ``H = e0_classical + h1 (a + a^+) + quad_diag a^+a + quad_offdiag (a^2 + a^+2)
    + cubic (a^+2 a + a^+ a^2) + quartic a^+2 a^2``
    """

    e0_classical: float
    h1: float
    quad_diag: float
    quad_offdiag: float
    cubic: float
    quartic: float


@dataclass(frozen=True)
class MomentState:
    """Expectation values of ``gamma, gamma^+, gamma^2, gamma^+2, gamma^+ gamma``."""

    g1: complex
    g1d: complex
    g2: complex
    g2d: complex
    n: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.g1, self.g1d, self.g2, self.g2d, self.n], dtype=complex)

    @classmethod
    def from_array(cls, v) -> "MomentState":
        v = np.asarray(v, dtype=complex)
        return cls(*(complex(z) for z in v[:5]))

    def conjugation_defect(self) -> float:
        return max(
            abs(self.g1d - np.conj(self.g1)),
            abs(self.g2d - np.conj(self.g2)),
            abs(self.n.imag),
        )

    def magnitude(self) -> float:
        return float(np.abs(self.as_array()).max())


@dataclass(frozen=True)
class QuadratureStats:
    x_mean: float
    p_mean: float
    p_var: float
    x_var: float
    n_mean: float


def reduce_two_mode(p: TwoModeParams, lam: float = 0.0) -> ModelParams:
    """Keep the symmetric mode ``a = (a1 + a2)/sqrt(2)`` with the antisymmetric one in vacuum."""
    return ModelParams(p.omega0, p.w, p.g, lam)


def translated_coefficients(m: ModelParams, nu: float) -> TranslatedCoeffs:
    wp, g, lam = m.omega0_prime, m.g, m.lam
    return TranslatedCoeffs(
        e0_classical=wp * nu**2 + g * nu**4 - 2.0 * lam * nu,
        h1=wp * nu + 2.0 * g * nu**3 - lam,
        quad_diag=wp + 4.0 * g * nu**2,
        quad_offdiag=g * nu**2,
        cubic=2.0 * g * nu,
        quartic=g,
    )


def h1_derivative(m: ModelParams, nu: float) -> float:
    """d h1 / d nu for the condensate cubic."""
    return m.omega0_prime + 6.0 * m.g * nu**2


def coherent_gamma_moments(alpha: complex, mf: MeanField) -> MomentState:
    """Quasiparticle moments of the coherent state ``|alpha>`` of the bare mode."""
    beta = complex(alpha) - mf.nu
    bc = beta.conjugate()
    c, s = np.cosh(mf.theta), np.sinh(mf.theta)
    b2 = abs(beta) ** 2
    g1 = c * beta - s * bc
    g2 = c * c * beta**2 + s * s * bc**2 - c * s * (2.0 * b2 + 1.0)
    n = c * c * b2 + s * s * (b2 + 1.0) - c * s * (beta**2 + bc**2)
    return MomentState(g1, g1.conjugate(), g2, g2.conjugate(), complex(n.real, 0.0))


def gamma_to_quadratures(s: MomentState, mf: MeanField) -> QuadratureStats:
    """Bare-mode quadrature statistics from quasiparticle moments.

    Variances are formed from the second moments carried in ``s``; this is
    exact for genuine (Gaussian or otherwise) states and is what a moment
    closure reports.
    """
    defect = s.conjugation_defect()
    if defect > CONJ_TOL * max(1.0, s.magnitude()):
        raise ModelError(f"moment state breaks conjugation symmetry by {defect:.3e}")
    th, nu = mf.theta, mf.nu
    ep, em = np.exp(th), np.exp(-th)
    sum1 = (s.g1 + s.g1d).real
    diff1 = (1j * (s.g1d - s.g1)).real
    sum2 = (s.g2 + s.g2d).real
    n = s.n.real

    xt = ep * sum1 / SQRT2
    p = em * diff1 / SQRT2
    p2 = -np.exp(-2 * th) * (sum2 - 2.0 * n - 1.0) / 2.0
    xt2 = np.exp(2 * th) * (sum2 + 2.0 * n + 1.0) / 2.0
    c2, s2 = np.cosh(2 * th), np.sinh(2 * th)
    # at^+ at in the quasiparticle frame
    ntt = c2 * n + np.sinh(th) ** 2 + 0.5 * s2 * sum2
    return QuadratureStats(
        x_mean=xt + SQRT2 * nu,
        p_mean=p,
        p_var=p2 - p * p,
        x_var=xt2 - xt * xt,
        n_mean=ntt + nu * ep * sum1 + nu * nu,
    )


# --- exact coherent-state expectations of quasiparticle words ------------------
#
# Letters: 0 = gamma, 1 = gamma^+.  On |alpha>, gamma = <gamma> + delta where
# delta = c b - s b^+ and b annihilates the state, so fluctuations are Gaussian
# with the ordered contractions below.

_MOMENT_WORDS = ((0,), (1,), (0, 0), (1, 1), (1, 0), ())


def _contraction(x: int, y: int, c: float, s: float) -> float:
    if x == y:
        return -c * s
    if x == 0:  # <delta delta^+>
        return c * c
    return s * s  # <delta^+ delta>


def _wick(word, c, s) -> float:
    if not word:
        return 1.0
    if len(word) % 2:
        return 0.0
    first, rest = word[0], word[1:]
    total = 0.0
    for k in range(len(rest)):
        total += _contraction(first, rest[k], c, s) * _wick(rest[:k] + rest[k + 1:], c, s)
    return total


def coherent_word_expectation(word, alpha: complex, mf: MeanField) -> complex:
    """``<alpha| w_1 w_2 ... |alpha>`` for a word in ``gamma`` (0) and ``gamma^+`` (1)."""
    beta = complex(alpha) - mf.nu
    c, s = np.cosh(mf.theta), np.sinh(mf.theta)
    m0 = c * beta - s * beta.conjugate()
    means = (m0, m0.conjugate())
    word = tuple(word)
    idx = range(len(word))
    total = 0j
    for k in range(0, len(word) + 1, 2):
        for fl in combinations(idx, k):
            coef = 1.0 + 0j
            for i in idx:
                if i not in fl:
                    coef *= means[word[i]]
            total += coef * _wick(tuple(word[i] for i in fl), c, s)
    return total


def coherent_moment_matrix(alpha: complex, mf: MeanField) -> np.ndarray:
    """6x6 matrix ``<Gamma_j Gamma_k>`` with ``Gamma = (g, g^+, g^2, g^+2, g^+g, 1)``."""
    out = np.empty((6, 6), dtype=complex)
    for j, wj in enumerate(_MOMENT_WORDS):
        for k, wk in enumerate(_MOMENT_WORDS):
            out[j, k] = coherent_word_expectation(wj + wk, alpha, mf)
    return out
