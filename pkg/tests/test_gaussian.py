import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosepd import MeanField, ModelParams, solve_bogoliubov_nu, solve_hfb
from bosepd import fock, gaussian

P = ModelParams(1.0, 2.0, 0.1, 0.0)


def test_flow_matrix_bogoliubov_lam0():
    nu = solve_bogoliubov_nu(P).solution.nu
    h = gaussian.bogoliubov_quadratic(P, nu)
    assert h.d_coef == pytest.approx(h.c_coef, abs=1e-14)
    k = gaussian.flow_matrix(h)
    assert k[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert k[1, 0] == pytest.approx(-4 * P.g * nu**2)
    assert h.is_parabolic()


def test_uncoupled_form_rotates_at_d():
    h = gaussian.QuadraticH(1.7, 0.0)
    assert gaussian.gap(h) == pytest.approx(1.7)
    f = gaussian.propagator_matrix(h, 2 * np.pi / 1.7)
    assert np.allclose(f, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("d, c", [(1.0, 0.0), (0.5, 0.5), (0.4, 0.9), (-1.2, 0.3), (1e-3, 1e-3 * (1 + 1e-14))])
def test_closed_form_matches_matrix_exponential(d, c):
    from scipy.linalg import expm

    h = gaussian.QuadraticH(d, c)
    k = gaussian.flow_matrix(h)
    for t in (0.0, 0.3, 2.0, 7.5):
        assert np.abs(gaussian.propagator_matrix(h, t) - expm(t * k)).max() < 1e-10 * max(1.0, np.abs(expm(t * k)).max())


def test_gap_cases():
    assert gaussian.gap(gaussian.QuadraticH(2.0, 0.0)) == 2.0
    assert gaussian.gap(gaussian.QuadraticH(0.3, 0.3)) == 0.0
    assert gaussian.gap(gaussian.QuadraticH(0.3, 0.5)) == 0.0
    assert gaussian.QuadraticH(0.3, 0.5).dynamically_unstable


def test_hfb_gap_positive_with_finite_limit():
    gaps = []
    for lam in (1e-2, 1e-4, 1e-6, 0.0):
        m = P.with_lambda(lam)
        gaps.append(gaussian.gap(gaussian.hfb_quadratic(m, solve_hfb(m).solution)))
    assert min(gaps) > 0.1
    assert gaps[-1] == pytest.approx(gaps[-2], rel=1e-3)


def test_hfb_gap_formula_at_lam0():
    mf = solve_hfb(P).solution
    h = gaussian.hfb_quadratic(P, mf)
    sc = np.sinh(mf.theta) * np.cosh(mf.theta)
    assert h.discriminant == pytest.approx(16 * P.g**2 * mf.nu**2 * abs(sc), rel=1e-9)


def test_propagate_identity_at_zero_time():
    s0 = gaussian.GaussianState.coherent(0.3 - 0.2j)
    s = gaussian.propagate(gaussian.QuadraticH(0.7, 0.2), s0, 0.0)
    assert np.allclose(s.cov, s0.cov) and np.allclose(s.means, s0.means)


def test_bogoliubov_phase_diffusion():
    nu = solve_bogoliubov_nu(P).solution.nu
    h = gaussian.bogoliubov_quadratic(P, nu)
    x0 = 0.4
    s0 = gaussian.GaussianState.coherent(x0 / np.sqrt(2))
    for t in (0.5, 3.0, 10.0):
        s = gaussian.propagate(h, s0, t)
        assert s.x_mean == pytest.approx(x0, abs=1e-12)
        assert s.p_mean == pytest.approx(-4 * P.g * nu**2 * x0 * t, abs=1e-12)
        assert s.cov[1, 1] == pytest.approx(0.5 + 8 * P.g**2 * nu**4 * t**2, rel=1e-12)


def test_gaussian_matches_fock_quadratic_oracle():
    h = gaussian.QuadraticH(0.6, 0.25)
    beta = 0.5 + 0.4j
    times = np.linspace(0, 8, 9)
    orc = fock.run_converged(lambda d: fock.build_quadratic_h(h.d_coef, h.c_coef, d), beta, times, dim=64)
    s0 = gaussian.GaussianState.coherent(beta)
    for t, q in zip(times, orc.stats):
        s = gaussian.propagate(h, s0, t)
        assert s.x_mean == pytest.approx(q.x_mean, abs=1e-8)
        assert s.p_mean == pytest.approx(q.p_mean, abs=1e-8)
        assert s.cov[1, 1] == pytest.approx(q.p_var, abs=1e-8)
        assert s.cov[0, 0] == pytest.approx(q.x_var, abs=1e-8)


def test_hfb_variance_bounded_and_periodic():
    mf = solve_hfb(P).solution
    h = gaussian.hfb_quadratic(P, mf)
    period = 2 * np.pi / gaussian.gap(h)
    s0 = gaussian.GaussianState.coherent(0.5)
    times = np.linspace(0, 5 * period, 201)
    var = [gaussian.propagate(h, s0, t).cov[1, 1] for t in times]
    assert max(var) < 10.0
    s = gaussian.propagate(h, s0, period)
    assert np.allclose(s.cov, s0.cov, atol=1e-10)


def test_number_rate_matches_finite_difference():
    m = P.with_lambda(0.05)
    nu = solve_bogoliubov_nu(m).solution.nu
    h = gaussian.bogoliubov_quadratic(m, nu)
    s0 = gaussian.GaussianState.coherent(1.2 - nu + 0.3j)
    eps = 1e-5
    n = lambda t: gaussian.to_quadratures(gaussian.propagate(h, s0, t), nu).n_mean
    fd = (n(1.0 + eps) - n(1.0 - eps)) / (2 * eps)
    assert gaussian.number_rate(h, gaussian.propagate(h, s0, 1.0), nu) == pytest.approx(fd, abs=1e-7)


@settings(max_examples=80, deadline=None)
@given(d=st.floats(-2, 2), c=st.floats(-2, 2), t=st.floats(0, 10),
       re=st.floats(-2, 2), im=st.floats(-2, 2))
def test_symplectic_and_uncertainty(d, c, t, re, im):
    h = gaussian.QuadraticH(d, c)
    f = gaussian.propagator_matrix(h, t)
    scale = max(1.0, np.abs(f).max() ** 2)
    assert np.linalg.det(f) == pytest.approx(1.0, abs=1e-10 * scale)
    s = gaussian.propagate(h, gaussian.GaussianState.coherent(complex(re, im)), t)
    assert s.uncertainty_det() >= 0.25 - 1e-10 * scale**2


def test_mean_field_frame_quadratures():
    s = gaussian.GaussianState.coherent(0.0)
    q = gaussian.to_quadratures(s, 2.0)
    assert q.x_mean == pytest.approx(2 * np.sqrt(2))
    assert q.n_mean == pytest.approx(4.0)
    assert q.p_var == pytest.approx(0.5)


def test_hfb_quadratic_reduces_to_bogoliubov_at_theta0():
    nu = 1.3
    a = gaussian.hfb_quadratic(P, MeanField(nu, 0.0))
    b = gaussian.bogoliubov_quadratic(P, nu)
    assert (a.d_coef, a.c_coef) == pytest.approx((b.d_coef, b.c_coef))
