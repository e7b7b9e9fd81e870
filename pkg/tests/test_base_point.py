import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from steklov.base_point import (
    BoundarySample,
    ManifoldPoint,
    PointModel,
    boost,
    distance,
    exp_map,
    find_base_point,
    gradient_B,
    log_map,
    minkowski,
    orthogonality_residual,
    potential_B,
    radial_b,
    solve_base_point,
)
from steklov.errors import DomainError, UnsupportedSpaceError
from steklov.model_spaces import ModelSpace, weight_a
from steklov.star_domains import StarDomain, random_star_domain

E2 = ModelSpace.parse("E", 2)
E3 = ModelSpace.parse("E", 3)
RH2 = ModelSpace.parse("RH", 2)
RH3 = ModelSpace.parse("RH", 3)
CH2 = ModelSpace.parse("CH", 2)
HYP = PointModel.HYPERBOLOID


def _hyp_point(v):
    v = np.asarray(v, dtype=float)
    return np.concatenate([[math.sqrt(1 + v @ v)], v])


def _perturbed(space, eta=0.1, L=32):
    xi = np.zeros(space.m)
    xi[0] = 1.0
    return StarDomain.from_function(space, L, lambda x: 1.0 + eta * (x @ xi) + 0.5 * eta * (x @ xi) ** 2)


# --- geometry -------------------------------------------------------------


def test_hyperboloid_exp_log_distance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = _hyp_point(rng.standard_normal(3))
        x = _hyp_point(rng.standard_normal(3))
        v = log_map(HYP, y, x)
        assert_allclose(minkowski(v, y), 0, atol=1e-12 * y[0] ** 2)
        assert_allclose(math.sqrt(minkowski(v, v)), distance(HYP, x, y), rtol=1e-11)
        assert_allclose(exp_map(HYP, y, v), x, rtol=1e-10, atol=1e-10)
        # arccosh form of the distance
        assert_allclose(distance(HYP, x, y), math.acosh(-minkowski(x, y)), rtol=1e-10)


def test_boost_is_lorentz_and_maps_pole():
    p = _hyp_point([0.3, -1.2, 0.5])
    L = boost(p)
    eta = np.diag([-1.0, 1, 1, 1])
    assert_allclose(L.T @ eta @ L, eta, atol=1e-13)
    assert_allclose(L[:, 0], p, rtol=1e-15)


def test_manifold_point_validation():
    with pytest.raises(DomainError):
        ManifoldPoint(HYP, np.array([2.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        ManifoldPoint(HYP, np.array([-1.0, 0.0, 0.0]))
    p = ManifoldPoint(HYP, _hyp_point([1e3, 2e3]))
    assert_allclose(minkowski(p.coords, p.coords), -1, rtol=1e-12 * p.coords[0] ** 2)
    assert ManifoldPoint.pole(RH3).coords.tolist() == [1.0, 0, 0, 0]
    with pytest.raises(UnsupportedSpaceError):
        ManifoldPoint.pole(CH2)


def test_radial_b_is_integral_of_a():
    for sp in (E3, RH2, RH3):
        for r in (0.1, 1.0, 3.0):
            val, _ = quad(lambda t: float(weight_a(sp, t)), 0, r, epsabs=0, epsrel=1e-13)
            assert_allclose(radial_b(sp, r), val, rtol=1e-12)
    assert radial_b(E2, 0.0) == 0.0
    assert_allclose(radial_b(E3, 2.0), 4.0 / 6.0, rtol=1e-14)


# --- samples --------------------------------------------------------------


def test_sample_weights_are_boundary_area():
    R = 1.3
    s = BoundarySample.from_star_domain(StarDomain.ball(RH2, R, 16))
    assert_allclose(s.total_weight, 2 * math.pi * math.sinh(R), rtol=1e-13)
    s = BoundarySample.from_star_domain(StarDomain.ball(E3, R, 8))
    assert_allclose(s.total_weight, 4 * math.pi * R**2, rtol=1e-13)
    assert np.all(s.weights > 0)


def test_sample_validation_and_json():
    with pytest.raises(UnsupportedSpaceError):
        BoundarySample.from_star_domain(StarDomain.ball(CH2, 0.5, 4))
    with pytest.raises(DomainError):
        BoundarySample(RH2, np.array([[2.0, 0.0, 0.0]]), np.ones(1))
    with pytest.raises(DomainError):
        BoundarySample(E2, np.zeros((2, 2)), np.array([1.0, -1.0]))
    s = BoundarySample.from_star_domain(random_star_domain(RH2, 3, 16))
    back = BoundarySample.from_json(json.dumps(s.to_json()))
    assert_allclose(back.points, s.points, rtol=0)
    assert_allclose(back.weights, s.weights, rtol=0)
    with pytest.raises(DomainError):
        BoundarySample.from_json({"points": []})


# --- potential and gradient ------------------------------------------------


def test_potential_single_point_and_mismatch():
    x = _hyp_point([0.4, 0.1])
    s = BoundarySample(RH2, x[None], np.array([2.0]))
    assert potential_B(s, ManifoldPoint(HYP, x)) == 0.0
    with pytest.raises(DomainError):
        gradient_B(s, ManifoldPoint(HYP, x))
    with pytest.raises(DomainError):
        potential_B(s, ManifoldPoint(PointModel.EUCLIDEAN, np.zeros(2)))


def test_two_point_midpoint_euclidean():
    pts = np.array([[1.0, 2.0, 0.0], [3.0, -2.0, 4.0]])
    s = BoundarySample(E3, pts, np.array([1.5, 1.5]))
    mid = ManifoldPoint(PointModel.EUCLIDEAN, pts.mean(axis=0))
    assert_allclose(gradient_B(s, mid), 0, atol=1e-14)
    y = find_base_point(s, ManifoldPoint(PointModel.EUCLIDEAN, np.array([5.0, 5.0, 5.0])))
    assert_allclose(y.coords, mid.coords, atol=1e-8)


def test_symmetric_sample_gradient_vanishes():
    s = BoundarySample.from_star_domain(StarDomain.ball(RH2, 1.0, 16))
    g = gradient_B(s, ManifoldPoint.pole(RH2))
    assert np.max(np.abs(g)) < 1e-10 * s.total_weight


@pytest.mark.parametrize("sp", [E3, RH2, RH3], ids=lambda s: s.label)
def test_gradient_matches_finite_differences(sp):
    rng = np.random.default_rng(1)
    dom = random_star_domain(sp, 5, 16 if sp.m == 2 else 8)
    s = BoundarySample.from_star_domain(dom)
    h = 1e-5
    for _ in range(20):
        v = 0.3 * rng.standard_normal(sp.m)
        if sp.family.name == "EUCLIDEAN":
            y = v
            basis = np.eye(sp.m)
        else:
            y = _hyp_point(v)
            basis = boost(y)[:, 1:].T
        p = ManifoldPoint(s.model, y)
        g = gradient_B(s, p)
        for e in basis:
            fd = (potential_B(s, ManifoldPoint(s.model, exp_map(s.model, y, h * e)))
                  - potential_B(s, ManifoldPoint(s.model, exp_map(s.model, y, -h * e)))) / (2 * h)
            inner = float(minkowski(g, e)) if s.model is HYP else float(g @ e)
            assert_allclose(inner, fd, rtol=1e-6, atol=1e-6 * s.total_weight)


def test_displaced_gradient_points_back():
    s = BoundarySample.from_star_domain(StarDomain.ball(RH2, 1.0, 16))
    xi = np.array([0.6, 0.8])
    for t in (1e-3, 1e-2):
        y = _hyp_point(t * xi)
        g = gradient_B(s, ManifoldPoint(HYP, y))
        # the outward displacement direction at y is log_y of a point further along xi
        out = log_map(HYP, y, _hyp_point(2 * t * xi))
        cos = float(minkowski(g, out)) / math.sqrt(minkowski(g, g) * minkowski(out, out))
        assert cos > 1 - 1e-8
        h = 1e-6
        fd = (potential_B(s, ManifoldPoint(HYP, exp_map(HYP, y, h * out / t)))
              - potential_B(s, ManifoldPoint(HYP, exp_map(HYP, y, -h * out / t)))) / (2 * h)
        assert_allclose(float(minkowski(g, out / t)), fd, rtol=1e-4)


# --- base point -----------------------------------------------------------


def test_sphere_about_point_recovers_center():
    p = _hyp_point([0.5, -0.3])
    s = BoundarySample.from_star_domain(StarDomain.ball(RH2, 1.0, 16), center=p)
    y = find_base_point(s)
    assert distance(HYP, y.coords, p) < 1e-8
    s3 = BoundarySample.from_star_domain(StarDomain.ball(RH3, 0.8, 8), center=_hyp_point([0.1, 0.2, -0.7]))
    y3 = find_base_point(s3)
    assert distance(HYP, y3.coords, _hyp_point([0.1, 0.2, -0.7])) < 1e-8


def test_perturbed_sphere_orthogonality():
    s = BoundarySample.from_star_domain(_perturbed(RH2))
    res = solve_base_point(s)
    pole = ManifoldPoint.pole(RH2)
    assert distance(HYP, res.point.coords, pole.coords) > 1e-3
    assert res.grad_norm < 1e-9 * s.total_weight
    assert orthogonality_residual(s, res.point) < 1e-8 * s.total_weight
    assert orthogonality_residual(s, pole) > 1e-3 * s.total_weight


def test_descent_history():
    s = BoundarySample.from_star_domain(_perturbed(RH3, 0.2, 8), center=_hyp_point([1.0, 0.0, 0.5]))
    res = solve_base_point(s, ManifoldPoint(HYP, _hyp_point([-1.0, 2.0, 0.0])))
    h = np.array(res.history)
    assert len(h) == res.iterations + 1
    assert np.all(np.diff(h) <= 1e-15 * np.abs(h[1:]))
    assert h[-1] < h[0]
    assert res.to_json()["iterations"] == res.iterations


def test_uniqueness_over_initialisations():
    s = BoundarySample.from_star_domain(random_star_domain(RH2, 9, 32))
    rng = np.random.default_rng(2)
    ys = [find_base_point(s, ManifoldPoint(HYP, _hyp_point(rng.uniform(-2, 2, 2)))) for _ in range(10)]
    for y in ys[1:]:
        assert distance(HYP, y.coords, ys[0].coords) < 1e-7


def _fixed_point_oracle(points, weights, m, y0, n=500):
    y = y0
    for _ in range(n):
        d = np.linalg.norm(points - y, axis=1)
        c = weights * (d / m) / d
        y = c @ points / c.sum()
    return y


def test_euclidean_matches_fixed_point_oracle():
    dom = random_star_domain(E3, 4, 8)
    s = BoundarySample.from_star_domain(dom, center=np.array([0.3, -0.1, 2.0]))
    y = find_base_point(s)
    oracle = _fixed_point_oracle(s.points, s.weights, 3, np.zeros(3))
    assert_allclose(y.coords, oracle, atol=1e-8)
    assert orthogonality_residual(s, y) < 1e-8 * s.total_weight


def test_isometry_equivariance():
    s = BoundarySample.from_star_domain(random_star_domain(RH2, 6, 32))
    y = find_base_point(s)
    L = boost(_hyp_point([0.7, 0.2]))
    y2 = find_base_point(s.transformed(L))
    assert distance(HYP, y2.coords, L @ y.coords) < 1e-7
