import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import ALL_SPACES, NONCOMPACT, mp_a, mp_h, mp_tau, mp_theta
from steklov.errors import DomainError, UnsupportedSpaceError
from steklov.model_spaces import (
    Family,
    ModelSpace,
    ball_volume,
    berger_frame,
    boundary_volume,
    calibration_G,
    calibration_G_derivative,
    density,
    energy_density_H,
    energy_density_H_derivative,
    integrated_density,
    inverse_volume,
    jacobi_eigs,
    log_ball_volume,
    mean_curvature,
    mean_curvature_derivative,
    radial_functions,
    sff_eigs,
    stability_g,
    stability_g_third,
    weight_a,
    weight_a_derivative,
    weight_a_second_derivative,
)

E3 = ModelSpace(Family.EUCLIDEAN, 3)
RH2 = ModelSpace(Family.REAL_HYPERBOLIC, 2)
RH3 = ModelSpace(Family.REAL_HYPERBOLIC, 3)
CH2 = ModelSpace(Family.COMPLEX_HYPERBOLIC, 2)
S2 = ModelSpace(Family.ROUND_SPHERE, 2)


# --- descriptor -----------------------------------------------------------


@pytest.mark.parametrize(
    "code,n,d,m,eps",
    [("E", 3, 1, 3, 0), ("RH", 4, 1, 4, -1), ("CH", 3, 2, 6, -1), ("HH", 2, 4, 8, -1), ("OH", 2, 8, 16, -1),
     ("S", 3, 1, 3, 1)],
)
def test_descriptor_fields(code, n, d, m, eps):
    sp = ModelSpace.parse(code, n)
    assert (sp.d, sp.m, sp.eps) == (d, m, eps)
    assert sp.diam == (math.pi if code == "S" else math.inf)


@pytest.mark.parametrize("code,n", [("OH", 1), ("OH", 3), ("RH", 1), ("E", 0), ("XX", 2)])
def test_invalid_descriptors(code, n):
    with pytest.raises(DomainError):
        ModelSpace.parse(code, n)


@pytest.mark.parametrize("sp", ALL_SPACES, ids=lambda s: s.label)
def test_json_round_trip(sp):
    assert ModelSpace.from_json(sp.to_json()) == sp
    assert set(sp.to_json()) == {"family", "n"}


def test_json_malformed():
    with pytest.raises(DomainError):
        ModelSpace.from_json({"family": "RealHyperbolic"})


@pytest.mark.parametrize("r", [0.0, -1.0, math.nan, math.inf])
def test_density_domain(r):
    with pytest.raises(DomainError):
        density(RH3, r)


def test_sphere_radius_limit():
    with pytest.raises(DomainError):
        density(S2, math.pi)


# --- closed-form examples -------------------------------------------------


def test_density_examples():
    assert_allclose(density(RH3, 1.0), math.sinh(1) ** 2, rtol=1e-15)
    assert_allclose(density(S2, math.pi / 2), 1.0, rtol=1e-15)
    assert_allclose(density(CH2, 1.0), math.cosh(1) * math.sinh(1) ** 3, rtol=1e-15)
    assert_allclose(density(E3, 2.0), 4.0, rtol=1e-15)


def test_mean_curvature_examples():
    r = np.linspace(0.1, 5, 20)
    assert_allclose(mean_curvature(RH3, r), 1 / np.tanh(r), rtol=1e-14)
    assert abs(mean_curvature(S2, math.pi / 2)) < 1e-15
    for n in (2, 3):
        sp = ModelSpace(Family.COMPLEX_HYPERBOLIC, n)
        assert_allclose(sp.h0, 2 * n / (2 * n - 1), rtol=1e-15)
        assert_allclose(mean_curvature(sp, 30.0), sp.h0, rtol=1e-12)
        assert_allclose(sp.volume_entropy, 2 * n, rtol=1e-15)


def test_ball_volume_examples():
    assert_allclose(ball_volume(E3, 1.0), 4 * math.pi / 3, rtol=1e-15)
    assert_allclose(ball_volume(RH2, 1.0), 2 * math.pi * (math.cosh(1) - 1), rtol=1e-14)
    assert_allclose(ball_volume(S2, math.pi * (1 - 1e-12)), 4 * math.pi, rtol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_complex_hyperbolic_volume_bergman_ball(n):
    # Bergman ball of holomorphic curvature -4: |B_r| = pi^n sinh(r)^(2n) / n!
    sp = ModelSpace(Family.COMPLEX_HYPERBOLIC, n)
    r = np.array([0.05, 0.5, 1.0, 2.0, 6.0])
    assert_allclose(ball_volume(sp, r), math.pi**n * np.sinh(r) ** (2 * n) / math.factorial(n), rtol=1e-13)


def test_weight_a_examples():
    r = np.array([1e-6, 1e-3, 0.1, 0.5, 1, 2, 5, 20])
    for m in (2, 3, 5):
        assert_allclose(weight_a(ModelSpace(Family.EUCLIDEAN, m), r), r / m, rtol=1e-15)
    assert_allclose(weight_a(RH2, r), np.tanh(r / 2), rtol=1e-14)
    for m in (2, 3, 4):
        assert_allclose(weight_a(ModelSpace(Family.REAL_HYPERBOLIC, m), 40.0), 1 / (m - 1), rtol=1e-12)
    assert weight_a(RH3, 0.0) == 0.0


def test_calibration_and_energy_examples():
    r = np.linspace(0.1, 3, 7)
    m = 3
    assert_allclose(calibration_G(E3, r), (r / m) * (1 + 1 / m), rtol=1e-15)
    assert_allclose(energy_density_H(E3, r), 1 / m, rtol=1e-14)
    a = np.tanh(r / 2)
    da = 0.5 / np.cosh(r / 2) ** 2
    assert_allclose(energy_density_H(RH2, r), da**2 + a**2 / np.sinh(r) ** 2, rtol=1e-13)
    assert energy_density_H(CH2, 0.5) >= energy_density_H(CH2, 1.0)
    assert calibration_G(RH2, 1e-9) < 1e-8


def test_calibration_antiderivative_finite_difference():
    # d/dR of int_0^R G theta equals G theta at R
    R, h = 1.0, 1e-5
    F = lambda t: mp_a(RH3, t) * mp_tau(RH3, t)  # noqa: E731
    deriv = (F(R + h) - F(R - h)) / (2 * h)
    assert_allclose(calibration_G(RH3, R) * density(RH3, R), float(deriv), rtol=1e-8)
    # same with a quadrature of G theta itself
    from scipy.integrate import quad

    val, _ = quad(lambda t: calibration_G(RH3, t) * density(RH3, t), 0, R, epsabs=0, epsrel=1e-13)
    assert_allclose(val, weight_a(RH3, R) * integrated_density(RH3, R), rtol=1e-11)


@pytest.mark.parametrize("fn", [calibration_G, energy_density_H, calibration_G_derivative,
                                energy_density_H_derivative])
def test_sphere_rejected(fn):
    with pytest.raises(UnsupportedSpaceError):
        fn(S2, 1.0)


def test_stability_sphere_rejected():
    with pytest.raises(UnsupportedSpaceError):
        stability_g(S2, 1.0)


# --- mpmath oracles -------------------------------------------------------


@pytest.mark.parametrize("sp", ALL_SPACES, ids=lambda s: s.label)
def test_against_high_precision(sp):
    radii = [1e-5, 0.01, 0.3, 1.0, 2.2] + ([5.0, 9.0] if not sp.is_compact else [2.9])
    for r in radii:
        assert_allclose(density(sp, r), float(mp_theta(sp, r)), rtol=1e-13)
        assert_allclose(integrated_density(sp, r), float(mp_tau(sp, r)), rtol=1e-12)
        assert_allclose(weight_a(sp, r), float(mp_a(sp, r)), rtol=1e-12)
        assert_allclose(mean_curvature(sp, r), float(mp_h(sp, r)), rtol=1e-12)


@pytest.mark.parametrize("sp", ALL_SPACES, ids=lambda s: s.label)
def test_derivatives_against_high_precision(sp):
    with mp.workdps(25):
        _check_derivatives(sp)


def _check_derivatives(sp):
    for r in [0.2, 1.0, 2.5]:
        r_ = mp.mpf(r)
        dh = mp.diff(lambda t: mp_h(sp, t), r_)
        assert_allclose(mean_curvature_derivative(sp, r), float(dh), rtol=1e-10, atol=1e-14)
        ddh = mp.diff(lambda t: mp_h(sp, t), r_, 2)
        assert_allclose(mean_curvature_derivative(sp, r, order=2), float(ddh), rtol=1e-8, atol=1e-12)
        da = mp.diff(lambda t: mp_a(sp, t), r_)
        assert_allclose(weight_a_derivative(sp, r), float(da), rtol=1e-10)
        dda = mp.diff(lambda t: mp_a(sp, t), r_, 2)
        assert_allclose(weight_a_second_derivative(sp, r), float(dda), rtol=1e-7, atol=1e-12)


# --- identities and monotonicity ----------------------------------------


@pytest.mark.parametrize("sp", ALL_SPACES, ids=lambda s: s.label)
def test_ode_identities(sp):
    top = 2.9 if sp.is_compact else 10.0
    r = np.linspace(0.01, top, 200)
    h = mean_curvature(sp, r)
    a = weight_a(sp, r)
    da = weight_a_derivative(sp, r)
    assert_allclose(da, 1 - (sp.m - 1) * h * a, rtol=1e-12, atol=1e-13)
    eps = 1e-6 * np.maximum(r, 1)
    dlog = (np.log(density(sp, r + eps)) - np.log(density(sp, r - eps))) / (2 * eps)
    assert_allclose((sp.m - 1) * h, dlog, rtol=1e-8)
    fd = (weight_a(sp, r + eps) - weight_a(sp, r - eps)) / (2 * eps)
    assert_allclose(da, fd, rtol=1e-8, atol=1e-10)


def test_small_radius_limits(any_space):
    sp = any_space
    r = np.array([1e-8, 1e-6, 5e-5, 2e-4])
    assert_allclose(weight_a(sp, r) / r, 1 / sp.m, rtol=1e-7)
    assert_allclose(density(sp, r) / r ** (sp.m - 1), 1, rtol=1e-6)
    # both sides of the small-radius switch
    for x in (0.99e-4, 1.01e-4):
        assert_allclose(weight_a(sp, x), float(mp_a(sp, x)), rtol=1e-14)


def test_monotonicity(noncompact):
    sp = noncompact
    r = np.linspace(0.01, 10, 400)
    h = mean_curvature(sp, r)
    assert np.all(np.diff(h) < 0)
    assert np.all(h > sp.h0)
    assert (sp.h0 == 0) == (sp.family is Family.EUCLIDEAN)
    assert np.all(np.diff(weight_a(sp, r)) > 0)
    assert np.all(calibration_G_derivative(sp, r) > 0)
    assert np.all(energy_density_H_derivative(sp, r) <= 1e-15)
    assert np.all(np.diff(energy_density_H(sp, r)) <= 1e-15)


@pytest.mark.parametrize("sp", [s for s in NONCOMPACT if s.family is not Family.EUCLIDEAN], ids=lambda s: s.label)
def test_volume_entropy(sp):
    # log v(r) / r tends to (m-1) h0; the growth rate between r = 20 and 40 is already within 5%
    slope = float(log_ball_volume(sp, 40.0) - log_ball_volume(sp, 20.0)) / 20.0
    assert abs(slope / sp.volume_entropy - 1) < 0.05
    assert abs(float(log_ball_volume(sp, 40.0)) / 40.0 / sp.volume_entropy - 1) < 0.05
    assert np.isfinite(log_ball_volume(sp, 800.0))


@pytest.mark.parametrize("sp", ALL_SPACES, ids=lambda s: s.label)
def test_eigen_data(sp):
    r = 0.7
    (k1, m1), (k2, m2) = sff_eigs(sp, r)
    assert (m1, m2) == (sp.d - 1, sp.m - sp.d)
    # trace of the second fundamental form is (m-1) h
    assert_allclose(m1 * k1 + m2 * k2, (sp.m - 1) * mean_curvature(sp, r), rtol=1e-14)
    (a1, n1), (a2, n2) = jacobi_eigs(sp, r)
    assert (n1, n2) == (sp.d - 1, sp.m - sp.d)
    # the density is the product of the Jacobi eigenvalues
    assert_allclose(a1**n1 * a2**n2, density(sp, r), rtol=1e-14)


def test_radial_functions_bundle():
    rf = radial_functions(CH2)
    assert_allclose(rf.a(1.0), weight_a(CH2, 1.0))
    assert_allclose(rf.theta(0.5), density(CH2, 0.5))
    assert_allclose(rf.v(0.5), ball_volume(CH2, 0.5))


# --- inverse volume and g -------------------------------------------------


@given(st.floats(min_value=1e-3, max_value=30.0))
@settings(max_examples=40, deadline=None)
def test_inverse_volume_round_trip(r):
    for sp in (RH3, CH2, E3):
        assert_allclose(inverse_volume(sp, ball_volume(sp, r)), r, rtol=1e-12)


def test_inverse_volume_sphere_and_errors():
    assert_allclose(inverse_volume(S2, ball_volume(S2, 3.0)), 3.0, rtol=1e-12)
    with pytest.raises(DomainError):
        inverse_volume(S2, 5 * math.pi)
    with pytest.raises(DomainError):
        inverse_volume(RH3, -1.0)
    out = inverse_volume(RH2, np.array([1.0, 2.0]))
    assert out.shape == (2,)


def test_stability_g_euclidean_closed_form():
    # g(s) = s a(v^{-1}(s)) = s^(1+1/m) (m/omega)^(1/m) / m
    m, om = 3, E3.sphere_area
    for s in (0.5, 2.0, 9.0):
        c = (m / om) ** (1 / m) / m
        g, g1, g2 = stability_g(E3, s)
        assert_allclose(g, c * s ** (1 + 1 / m), rtol=1e-13)
        assert_allclose(g1, c * (1 + 1 / m) * s ** (1 / m), rtol=1e-13)
        assert_allclose(g2, c * (1 + 1 / m) / m * s ** (1 / m - 1), rtol=1e-13)
        assert g2 > 0


def test_stability_g_finite_difference():
    s = float(ball_volume(RH3, 1.0))
    hstep = 1e-3 * s
    g = lambda x: stability_g(RH3, x)[0]  # noqa: E731
    fd2 = (g(s + hstep) - 2 * g(s) + g(s - hstep)) / hstep**2
    assert abs(fd2 / stability_g(RH3, s)[2] - 1) < 1e-6
    fd1 = (g(s + hstep) - g(s - hstep)) / (2 * hstep)
    assert_allclose(fd1, stability_g(RH3, s)[1], rtol=1e-6)
    g2 = lambda x: stability_g(RH3, x)[2]  # noqa: E731
    assert_allclose(stability_g_third(RH3, s), (g2(s + hstep) - g2(s - hstep)) / (2 * hstep), rtol=1e-5)


@pytest.mark.parametrize("sp", [s for s in NONCOMPACT if s.is_noncompact_ross], ids=lambda s: s.label)
def test_g_second_positive_nonincreasing(sp):
    vols = np.geomspace(1e-3, 1e4, 60)
    g2 = np.array([stability_g(sp, v)[2] for v in vols])
    assert np.all(g2 > 0)
    assert np.all(np.diff(g2) <= 1e-14 * g2[:-1])


def test_boundary_volume_is_derivative():
    r, h = 1.3, 1e-6
    fd = (ball_volume(CH2, r + h) - ball_volume(CH2, r - h)) / (2 * h)
    assert_allclose(boundary_volume(CH2, r), fd, rtol=1e-8)


# --- complex structures ---------------------------------------------------


@pytest.mark.parametrize("code,n", [("CH", 2), ("CH", 3), ("HH", 1), ("HH", 2), ("OH", 2)])
def test_berger_frame(code, n):
    sp = ModelSpace.parse(code, n)
    fr = berger_frame(sp)
    I = np.eye(sp.m)
    for J in fr.matrices:
        assert_allclose(J @ J, -I, atol=1e-14)
        assert_allclose(J.T @ J, I, atol=1e-14)
    rng = np.random.default_rng(0)
    w = rng.standard_normal((1000, sp.m))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    vecs = np.concatenate([w[:, None, :], fr.apply_all(w)], axis=1)
    gram = np.einsum("nim,njm->nij", vecs, vecs)
    assert_allclose(gram, np.broadcast_to(np.eye(sp.d), gram.shape), atol=1e-12)
    assert_allclose(fr.j_apply(1, w[0]), fr.matrices[0] @ w[0])
    with pytest.raises(IndexError):
        fr.j_apply(sp.d, w[0])


def test_berger_frame_trivial_for_real_families():
    assert berger_frame(RH3).matrices.shape == (0, 3, 3)
