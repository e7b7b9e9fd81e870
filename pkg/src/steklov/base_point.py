"""Base point of a boundary: the minimiser of ``B(y) = int_{dOmega} b(d(x, y))``.

At the minimiser the transplanted first harmonics ``F_{y,xi} = a(r_y) <xi, w_y>``
integrate to zero over the boundary.  Euclidean space uses plain
coordinates; real hyperbolic space uses the hyperboloid model
``{x : <x, x>_L = -1, x_0 > 0}`` with the Minkowski form ``<x, y>_L = -x_0 y_0 + x . y``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, NumericalError, UnsupportedSpaceError
from .model_spaces import Family, ModelSpace, weight_a
from .star_domains import StarDomain, boundary_area_element

__all__ = [
    "PointModel",
    "ManifoldPoint",
    "BoundarySample",
    "BasePointResult",
    "potential_B",
    "gradient_B",
    "find_base_point",
    "solve_base_point",
    "orthogonality_residual",
    "distance",
    "log_map",
    "exp_map",
    "minkowski",
    "boost",
    "radial_b",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(96)


class PointModel(str, Enum):
    EUCLIDEAN = "EuclideanCoords"
    HYPERBOLOID = "HyperboloidCoords"


def _model_for(space: ModelSpace) -> PointModel:
    if space.family is Family.EUCLIDEAN:
        return PointModel.EUCLIDEAN
    if space.family is Family.REAL_HYPERBOLIC:
        return PointModel.HYPERBOLOID
    raise UnsupportedSpaceError(f"base points are implemented for Euclidean and real hyperbolic spaces, not {space.label}")


def minkowski(x, y):
    """``<x, y>_L`` along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x * y, axis=-1) - 2 * x[..., 0] * y[..., 0]


def _project(x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
    return x


@dataclass(frozen=True)
class ManifoldPoint:
    model: PointModel
    coords: np.ndarray

    def __post_init__(self):
        model = PointModel(self.model)
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        if model is PointModel.HYPERBOLOID:
            if c.size < 3:
                raise DomainError("hyperboloid points need at least 3 coordinates")
            if abs(minkowski(c, c) + 1) > 1e-8 * max(1.0, c[0] ** 2) or c[0] <= 0:
                raise DomainError("point is not on the upper sheet of the hyperboloid")
            c = _project(c)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "coords", c)

    @classmethod
    def pole(cls, space: ModelSpace) -> "ManifoldPoint":
        model = _model_for(space)
        if model is PointModel.EUCLIDEAN:
            return cls(model, np.zeros(space.m))
        e = np.zeros(space.m + 1)
        e[0] = 1.0
        return cls(model, e)

    def to_json(self) -> dict:
        return {"model": self.model.value, "coords": [float(x) for x in self.coords]}


# ---------------------------------------------------------------------------
# geometry of the two models


def distance(model: PointModel, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model is PointModel.EUCLIDEAN:
        return np.linalg.norm(x - y, axis=-1)
    diff = x - y
    q = np.maximum(minkowski(diff, diff), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(q))


def log_map(model: PointModel, y, x):
    """``log_y(x)`` for points ``x`` (leading axes) and base ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model is PointModel.EUCLIDEAN:
        return x - y
    u = x + minkowski(x, y)[..., None] * y
    nu = np.sqrt(np.maximum(minkowski(u, u), 0.0))
    d = distance(model, x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(nu > 0, d / nu, 1.0)
    return scale[..., None] * u


def exp_map(model: PointModel, y, v):
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    if model is PointModel.EUCLIDEAN:
        return y + v
    nv = math.sqrt(max(float(minkowski(v, v)), 0.0))
    if nv == 0.0:
        return y.copy()
    return _project(math.cosh(nv) * y + math.sinh(nv) * v / nv)


def _tangent_norm(model: PointModel, v) -> float:
    if model is PointModel.EUCLIDEAN:
        return float(np.linalg.norm(v))
    return math.sqrt(max(float(minkowski(v, v)), 0.0))


def boost(p) -> np.ndarray:
    """Lorentz transformation of ``R^{1,m}`` mapping the pole ``(1, 0, ..., 0)`` to ``p``."""
    p = np.asarray(p, dtype=float)
    p0, ps = p[0], p[1:]
    m = len(ps)
    L = np.empty((m + 1, m + 1))
    L[0, 0] = p0
    L[0, 1:] = ps
    L[1:, 0] = ps
    L[1:, 1:] = np.eye(m) + np.outer(ps, ps) / (1 + p0)
    return L


def radial_b(space: ModelSpace, r):
    """``b(r) = int_0^r a`` by 96-point Gauss-Legendre quadrature."""
    r = np.asarray(r, dtype=float)
    t = 0.5 * r[..., None] * (1 + _GL_X)
    vals = np.asarray(weight_a(space, t))
    out = 0.5 * r * np.sum(vals * _GL_W, axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# boundary samples


@dataclass(frozen=True, eq=False)
class BoundarySample:
    """Weighted points on a boundary, in the coordinates of ``space`` (E^m or RH^m)."""

    space: ModelSpace
    points: np.ndarray
    weights: np.ndarray
    model: PointModel = field(init=False)

    def __post_init__(self):
        model = _model_for(self.space)
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        dim = self.space.m + (model is PointModel.HYPERBOLOID)
        if pts.shape[1] != dim or len(w) != len(pts) or len(w) == 0:
            raise DomainError(f"expected a nonempty ({len(w)}, {dim}) point array with matching weights")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise DomainError("weights must be positive and finite")
        if model is PointModel.HYPERBOLOID:
            if np.any(np.abs(minkowski(pts, pts) + 1) > 1e-8 * np.maximum(1.0, pts[:, 0] ** 2)):
                raise DomainError("sample points are not on the hyperboloid")
            pts = _project(pts)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    @classmethod
    def from_star_domain(cls, domain: StarDomain, center: np.ndarray | None = None) -> "BoundarySample":
        """Boundary nodes of a star domain with area weights, optionally moved so the pole sits at ``center``."""
        sp, grid = domain.space, domain.grid
        model = _model_for(sp)
        w = grid.nodes
        rho = domain.rho
        area = grid.weights * boundary_area_element(sp, w, rho, domain.grad_rho)
        if model is PointModel.EUCLIDEAN:
            pts = rho[:, None] * w
            if center is not None:
                pts = pts + np.asarray(center, dtype=float)
        else:
            pts = np.column_stack([np.cosh(rho), np.sinh(rho)[:, None] * w])
            if center is not None:
                pts = pts @ boost(center).T
        return cls(sp, pts, area)

    def transformed(self, matrix: np.ndarray, shift: np.ndarray | None = None) -> "BoundarySample":
        pts = self.points @ np.asarray(matrix, dtype=float).T
        if shift is not None:
            pts = pts + shift
        return BoundarySample(self.space, pts, self.weights)

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "BoundarySample":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(ModelSpace.from_json(obj["space"]), np.asarray(obj["points"]), np.asarray(obj["weights"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed boundary sample: {exc}") from exc


def _check_model(sample: BoundarySample, y: ManifoldPoint) -> np.ndarray:
    if y.model is not sample.model or y.coords.shape != sample.points.shape[1:]:
        raise DomainError(f"point in {y.model.value} does not match the sample model {sample.model.value}")
    return y.coords


def potential_B(sample: BoundarySample, y: ManifoldPoint) -> float:
    """``B(y) = sum_i w_i b(d(x_i, y))`` with ``b = int_0^r a``."""
    yc = _check_model(sample, y)
    d = distance(sample.model, sample.points, yc)
    return float(np.sum(sample.weights * radial_b(sample.space, d)))


def gradient_B(sample: BoundarySample, y: ManifoldPoint) -> np.ndarray:
    """``grad B(y) = -sum_i w_i a(d_i) log_y(x_i) / d_i``, a tangent vector at ``y``.

    Parameters
    ----------
    sample : BoundarySample
    y : ManifoldPoint
        Must lie farther than 1e-10 from every sample point.

    Returns
    -------
    numpy.ndarray
        Shape ``(m,)`` (Euclidean) or ``(m+1,)`` with ``<grad, y>_L = 0`` (hyperboloid).
    """
    yc = _check_model(sample, y)
    d = distance(sample.model, sample.points, yc)
    if np.any(d <= 1e-10):
        raise DomainError("y coincides with a sample point")
    lg = log_map(sample.model, yc, sample.points)
    coef = sample.weights * np.asarray(weight_a(sample.space, d)) / d
    g = -coef @ lg
    if sample.model is PointModel.HYPERBOLOID:
        g = g + minkowski(g, yc) * yc
    return g


def _tangent_basis(model: PointModel, y: np.ndarray) -> np.ndarray:
    if model is PointModel.EUCLIDEAN:
        return np.eye(len(y))
    return boost(y)[:, 1:].T


def orthogonality_residual(sample: BoundarySample, y: ManifoldPoint) -> float:
    """``max_xi |sum_i w_i a(d_i) <xi, w_y(x_i)>|`` over an orthonormal basis of ``T_y``."""
    yc = _check_model(sample, y)
    d = distance(sample.model, sample.points, yc)
    lg = log_map(sample.model, yc, sample.points)
    wy = lg / np.where(d > 0, d, 1.0)[:, None]
    basis = _tangent_basis(sample.model, yc)
    if sample.model is PointModel.HYPERBOLOID:
        proj = np.stack([minkowski(wy, xi) for xi in basis], axis=1)
    else:
        proj = wy @ basis.T
    f = (sample.weights * np.asarray(weight_a(sample.space, d))) @ proj
    return float(np.max(np.abs(f)))


@dataclass
class BasePointResult:
    point: ManifoldPoint
    iterations: int
    grad_norm: float
    potential: float
    history: list = field(repr=False, default_factory=list)

    def to_json(self) -> dict:
        return {
            "point": self.point.to_json(),
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "potential": self.potential,
        }


def _centroid(sample: BoundarySample) -> np.ndarray:
    c = sample.weights @ sample.points / sample.total_weight
    if sample.model is PointModel.EUCLIDEAN:
        return c
    return c / math.sqrt(-float(minkowski(c, c)))


def solve_base_point(
    sample: BoundarySample,
    init: ManifoldPoint | None = None,
    *,
    rel_tol: float = 1e-9,
    max_iter: int = 5000,
) -> BasePointResult:
    """Geodesic gradient descent with Armijo backtracking, started at the (Minkowski) centroid.

    Stops when ``|grad B| < rel_tol * |dOmega|``.
    """
    model = sample.model
    y = _check_model(sample, init) if init is not None else _centroid(sample)
    area = sample.total_weight
    point = ManifoldPoint(model, y)
    B = potential_B(sample, point)
    history = [B]
    step = 1.0 / area
    g = gradient_B(sample, point)
    gn = _tangent_norm(model, g)
    for it in range(max_iter):
        if gn < rel_tol * area:
            return BasePointResult(point, it, gn, B, history)
        slack = 1e-15 * abs(B)
        while True:
            trial = ManifoldPoint(model, exp_map(model, point.coords, -step * g))
            Bt = potential_B(sample, trial)
            if Bt <= B + slack:
                gt = gradient_B(sample, trial)
                gtn = _tangent_norm(model, gt)
                # below the roundoff floor of B only a shrinking gradient counts as progress
                if Bt <= B - 1e-4 * step * gn**2 or gtn < gn:
                    break
            step *= 0.5
            if step * gn < 1e-18 * max(1.0, float(np.max(np.abs(point.coords)))):
                raise NumericalError(f"line search stalled at |grad| = {gn:.3e}")
        point, B, g, gn = trial, Bt, gt, gtn
        history.append(Bt)
        step *= 2.0
    raise NumericalError(f"base point search did not converge in {max_iter} iterations")


def find_base_point(sample: BoundarySample, init: ManifoldPoint | None = None, **kw) -> ManifoldPoint:
    """Point ``o`` at which the transplanted first harmonics integrate to zero over the boundary."""
    return solve_base_point(sample, init, **kw).point
