"""Closed-form radial geometry of the harmonic model spaces.

Supported spaces are Euclidean space, the four non-compact rank-one symmetric
spaces RH^n, CH^n, HH^n, OH^2 (sectional curvature in [-4, -1]) and the round
sphere S^m.  Every radial function accepts a scalar or an array of radii and
returns the same shape; scalars come back as ``float``.

Notation: ``s``/``c`` are sinh/cosh (non-compact), sin/cos (sphere) or r/1
(Euclidean); ``d`` is the real dimension of the scalar algebra, ``m = d n``;
``tau(r)`` is the integrated density, so the ball volume is
``|S^{m-1}| tau(r)`` and the weight is ``a = tau / theta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special
from scipy.optimize import brentq

from .errors import DomainError, NumericalError, UnsupportedSpaceError

__all__ = [
    "Family",
    "ModelSpace",
    "RadialFunctions",
    "BergerFrame",
    "berger_frame",
    "radial_functions",
    "density",
    "mean_curvature",
    "mean_curvature_derivative",
    "integrated_density",
    "ball_volume",
    "log_ball_volume",
    "boundary_volume",
    "weight_a",
    "weight_a_derivative",
    "weight_a_second_derivative",
    "calibration_G",
    "calibration_G_derivative",
    "energy_density_H",
    "energy_density_H_derivative",
    "sff_eigs",
    "jacobi_eigs",
    "inverse_volume",
    "stability_g",
    "stability_g_third",
]


class Family(str, Enum):
    EUCLIDEAN = "Euclidean"
    REAL_HYPERBOLIC = "RealHyperbolic"
    COMPLEX_HYPERBOLIC = "ComplexHyperbolic"
    QUATERNIONIC_HYPERBOLIC = "QuaternionicHyperbolic"
    OCTONIONIC_HYPERBOLIC = "OctonionicHyperbolic"
    ROUND_SPHERE = "RoundSphere"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip()
        if key in _CODES:
            return _CODES[key]
        for fam in cls:
            if key.lower() == fam.value.lower():
                return fam
        raise DomainError(f"unknown space family: {value!r}")

    @property
    def code(self) -> str:
        return _CODE_OF[self]


_CODES = {
    "E": Family.EUCLIDEAN,
    "RH": Family.REAL_HYPERBOLIC,
    "CH": Family.COMPLEX_HYPERBOLIC,
    "HH": Family.QUATERNIONIC_HYPERBOLIC,
    "OH": Family.OCTONIONIC_HYPERBOLIC,
    "S": Family.ROUND_SPHERE,
}
_CODE_OF = {fam: code for code, fam in _CODES.items()}
_FIELD_DIM = {
    Family.EUCLIDEAN: 1,
    Family.REAL_HYPERBOLIC: 1,
    Family.COMPLEX_HYPERBOLIC: 2,
    Family.QUATERNIONIC_HYPERBOLIC: 4,
    Family.OCTONIONIC_HYPERBOLIC: 8,
    Family.ROUND_SPHERE: 1,
}


@dataclass(frozen=True)
class ModelSpace:
    """A harmonic model space, identified by its family and K-dimension ``n``.

    For the Euclidean space, real hyperbolic space and the round sphere the
    K-dimension is the real dimension.  The curvature normalisation is fixed
    (no scale parameter).
    """

    family: Family
    n: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.family is Family.OCTONIONIC_HYPERBOLIC and self.n != 2:
            raise DomainError("the octonionic hyperbolic space only exists for n = 2")
        if self.m < 2:
            raise DomainError(f"{self.label} has dimension {self.m} < 2")

    @classmethod
    def parse(cls, code: str, n: int) -> "ModelSpace":
        return cls(Family.parse(code), n)

    @property
    def d(self) -> int:
        return _FIELD_DIM[self.family]

    @property
    def m(self) -> int:
        return self.d * self.n

    @property
    def eps(self) -> int:
        if self.family is Family.EUCLIDEAN:
            return 0
        return 1 if self.family is Family.ROUND_SPHERE else -1

    @property
    def diam(self) -> float:
        return math.pi if self.is_compact else math.inf

    @property
    def is_compact(self) -> bool:
        return self.family is Family.ROUND_SPHERE

    @property
    def is_ross(self) -> bool:
        """Rank-one symmetric (Euclidean space is harmonic but not a ROSS)."""
        return self.family is not Family.EUCLIDEAN

    @property
    def is_noncompact_ross(self) -> bool:
        return self.is_ross and not self.is_compact

    @property
    def constant_curvature(self) -> bool:
        return self.d == 1

    @property
    def code(self) -> str:
        return self.family.code

    @property
    def label(self) -> str:
        return f"{self.code}^{self.n}"

    def __str__(self) -> str:
        return self.label

    @property
    def sphere_area(self) -> float:
        """Area of the unit sphere S^{m-1} of the tangent space."""
        m = self.m
        return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)

    @property
    def total_volume(self) -> float:
        if not self.is_compact:
            return math.inf
        return self.sphere_area * special.beta(self.m / 2, 0.5)

    @property
    def h0(self) -> float:
        """Limit of the sphere mean curvature (horosphere mean curvature)."""
        if self.is_compact:
            raise UnsupportedSpaceError("h0 is only defined on non-compact spaces")
        if self.family is Family.EUCLIDEAN:
            return 0.0
        return 1.0 + (self.d - 1) / (self.m - 1)

    @property
    def volume_entropy(self) -> float:
        return (self.m - 1) * self.h0

    def require_noncompact(self, what: str) -> None:
        if self.is_compact:
            raise UnsupportedSpaceError(f"{what} is only available on non-compact spaces, not {self.label}")

    def to_json(self) -> dict:
        return {"family": self.family.value, "n": self.n}

    @classmethod
    def from_json(cls, obj: dict) -> "ModelSpace":
        try:
            return cls(Family.parse(obj["family"]), int(obj["n"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed space description: {obj!r}") from exc


# ---------------------------------------------------------------------------
# helpers


def _ret(value, like):
    if np.ndim(like) == 0:
        return float(np.asarray(value).reshape(()))
    return value


def _radius(space: ModelSpace, r, *, allow_zero: bool = False) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    low = arr < 0 if allow_zero else arr <= 0
    if np.any(~np.isfinite(arr)) or np.any(low) or np.any(arr >= space.diam):
        bound = "[0" if allow_zero else "(0"
        raise DomainError(f"radius outside {bound}, {space.diam}) on {space.label}: {r!r}")
    return arr


def _sc(space: ModelSpace, r: np.ndarray):
    if space.eps < 0:
        return np.sinh(r), np.cosh(r)
    if space.eps > 0:
        return np.sin(r), np.cos(r)
    return r, np.ones_like(r)


def _log_sinh(r):
    r = np.asarray(r, dtype=float)
    big = r > 1.0
    rb = np.where(big, r, 1.0)
    rs = np.where(big, 1.0, r)
    return np.where(big, rb + np.log1p(-np.exp(-2 * rb)) - math.log(2), np.log(np.sinh(rs)))


def _log_cosh(r):
    r = np.abs(np.asarray(r, dtype=float))
    return r + np.log1p(np.exp(-2 * r)) - math.log(2)


def _small_r_coefficient(space: ModelSpace) -> float:
    # a(r) = r/m * (1 + k2 r^2 + O(r^4))
    m, d = space.m, space.d
    return 2.0 * space.eps * ((m - 1) / 6 + (d - 1) / 2) / (m + 2)


_SMALL_R = 1e-4


# ---------------------------------------------------------------------------
# density, mean curvature and curvature eigen-data


def density(space: ModelSpace, r):
    """Volume density ``theta(r) = c(r)^(d-1) s(r)^(m-1)`` in geodesic polar coordinates."""
    rr = _radius(space, r)
    s, c = _sc(space, rr)
    return _ret(c ** (space.d - 1) * s ** (space.m - 1), r)


def mean_curvature(space: ModelSpace, r):
    """Normalised mean curvature of the geodesic sphere of radius ``r``."""
    rr = _radius(space, r)
    s, c = _sc(space, rr)
    k = (space.d - 1) / (space.m - 1)
    return _ret(c / s - space.eps * k * s / c, r)


def mean_curvature_derivative(space: ModelSpace, r, order: int = 1):
    """Closed-form ``h'`` (order 1) or ``h''`` (order 2)."""
    rr = _radius(space, r)
    s, c = _sc(space, rr)
    k = (space.d - 1) / (space.m - 1)
    if order == 1:
        out = -1.0 / s**2 - space.eps * k / c**2
    elif order == 2:
        out = 2.0 * c / s**3 - 2.0 * space.eps**2 * k * s / c**3
    else:
        raise ValueError("order must be 1 or 2")
    return _ret(out, r)


def sff_eigs(space: ModelSpace, r):
    """Second fundamental form eigenvalues of S_r with multiplicities.

    Returns ``((2 c(2r)/s(2r), d-1), (c(r)/s(r), m-d))``.
    """
    rr = _radius(space, r)
    s, c = _sc(space, rr)
    s2, c2 = _sc(space, 2 * rr)
    return (_ret(2 * c2 / s2, r), space.d - 1), (_ret(c / s, r), space.m - space.d)


def jacobi_eigs(space: ModelSpace, r):
    """Eigenvalues of the Jacobi tensor: ``((s c, d-1), (s, m-d))``."""
    rr = _radius(space, r)
    s, c = _sc(space, rr)
    return (_ret(s * c, r), space.d - 1), (_ret(s, r), space.m - space.d)


# ---------------------------------------------------------------------------
# volumes and the weight a = v / v'


def _weight_closed(space: ModelSpace, r: np.ndarray) -> np.ndarray:
    """a(r) for r > 0 from closed forms (no small-r switch)."""
    m, d = space.m, space.d
    fam = space.family
    if fam is Family.EUCLIDEAN:
        return r / m
    if fam is Family.ROUND_SPHERE:
        return _sphere_tau(m, r) / (np.sin(r) ** (m - 1))
    t = np.tanh(r)
    y = t * t
    if d == 1:
        return np.where(r > 1.0, _real_hyperbolic_weight(m, np.maximum(r, 1.0)),
                        t / m * special.hyp2f1(0.5, 1.0, m / 2 + 1.0, np.minimum(y, 0.6)))
    # even d: tau = 1/2 int_0^X x^(b-1) (1+x)^e dx with X = sinh^2, b = m/2, e = d/2 - 1
    b, e = m / 2, d // 2 - 1
    sech2 = 1.0 - y
    acc = np.zeros_like(r)
    for k in range(e + 1):
        acc = acc + math.comb(e, k) / (b + k) * y**k * sech2 ** (e - k)
    return 0.5 * t * acc


def _real_hyperbolic_weight(m: int, r: np.ndarray) -> np.ndarray:
    # A_k = int_0^r sinh^k / sinh^k(r) obeys A_k = (coth r - (k-1) A_{k-2} / sinh^2 r) / k;
    # forward recursion is stable for r >= 1, where tanh^2 r is too close to 1 for the 2F1 form
    k = (m - 1) % 2
    A = np.tanh(r / 2) if k else r.astype(float)
    coth = 1.0 / np.tanh(r)
    with np.errstate(over="ignore"):
        csch2 = 1.0 / np.sinh(r) ** 2
    while k < m - 1:
        k += 2
        A = (coth - (k - 1) * A * csch2) / k
    return A


def _sphere_tau(m: int, r: np.ndarray) -> np.ndarray:
    a = m / 2
    half = 0.5 * special.beta(a, 0.5)
    low = r <= math.pi / 2
    s_low = np.sin(np.where(low, r, math.pi / 2)) ** 2
    s_high = np.sin(np.where(low, 0.0, math.pi - r)) ** 2
    return np.where(low, half * special.betainc(a, 0.5, s_low), 2 * half - half * special.betainc(a, 0.5, s_high))


def integrated_density(space: ModelSpace, r):
    """``tau(r) = int_0^r theta``; zero at ``r = 0``."""
    rr = _radius(space, r, allow_zero=True)
    if space.family is Family.ROUND_SPHERE:
        return _ret(_sphere_tau(space.m, rr), r)
    if space.family is Family.EUCLIDEAN:
        return _ret(rr**space.m / space.m, r)
    pos = rr > 0
    safe = np.where(pos, rr, 1.0)
    s, c = _sc(space, safe)
    tau = _weight_closed(space, safe) * c ** (space.d - 1) * s ** (space.m - 1)
    return _ret(np.where(pos, tau, 0.0), r)


def ball_volume(space: ModelSpace, r):
    """Volume of the geodesic ball of radius ``r``."""
    return _ret(space.sphere_area * np.asarray(integrated_density(space, r)), r)


def boundary_volume(space: ModelSpace, r):
    """``v'(r) = |S^{m-1}| theta(r)``, the area of the geodesic sphere."""
    return _ret(space.sphere_area * np.asarray(density(space, r)), r)


def log_ball_volume(space: ModelSpace, r):
    """``log v(r)``, finite even where ``v`` itself overflows."""
    rr = _radius(space, r)
    m, d = space.m, space.d
    if space.family is Family.EUCLIDEAN:
        out = m * np.log(rr) - math.log(m)
    elif space.family is Family.ROUND_SPHERE:
        out = np.log(_sphere_tau(m, rr))
    else:
        log_theta = (d - 1) * _log_cosh(rr) + (m - 1) * _log_sinh(rr)
        out = np.log(_weight_closed(space, rr)) + log_theta
    return _ret(out + math.log(space.sphere_area), r)


def weight_a(space: ModelSpace, r):
    """The weight ``a(r) = v(r)/v'(r)``; ``a(0) = 0``."""
    rr = _radius(space, r, allow_zero=True)
    small = rr < _SMALL_R
    k2 = _small_r_coefficient(space)
    series = rr / space.m * (1.0 + k2 * rr**2)
    closed = _weight_closed(space, np.where(small, 1.0, rr))
    return _ret(np.where(small, series, closed), r)


def weight_a_derivative(space: ModelSpace, r):
    """``a'(r) = 1 - (m-1) h(r) a(r)``; equals ``1/m`` at ``r = 0``."""
    rr = _radius(space, r, allow_zero=True)
    small = rr < _SMALL_R
    k2 = _small_r_coefficient(space)
    series = (1.0 + 3 * k2 * rr**2) / space.m
    safe = np.where(small, 1.0, rr)
    closed = 1.0 - (space.m - 1) * np.asarray(mean_curvature(space, safe)) * _weight_closed(space, safe)
    return _ret(np.where(small, series, closed), r)


def weight_a_second_derivative(space: ModelSpace, r):
    """``a'' = -(m-1) (h' a + h a')``."""
    rr = _radius(space, r)
    a = np.asarray(weight_a(space, rr))
    da = np.asarray(weight_a_derivative(space, rr))
    h = np.asarray(mean_curvature(space, rr))
    dh = np.asarray(mean_curvature_derivative(space, rr))
    return _ret(-(space.m - 1) * (dh * a + h * da), r)


def calibration_G(space: ModelSpace, r):
    """Calibration function ``G = div(a^2 d/dr) = a (1 + a')``; increasing in ``r``."""
    space.require_noncompact("the calibration G")
    a = np.asarray(weight_a(space, r))
    da = np.asarray(weight_a_derivative(space, r))
    return _ret(a * (1 + da), r)


def calibration_G_derivative(space: ModelSpace, r):
    space.require_noncompact("the calibration G")
    rr = _radius(space, r)
    a = np.asarray(weight_a(space, rr))
    da = np.asarray(weight_a_derivative(space, rr))
    dh = np.asarray(mean_curvature_derivative(space, rr))
    return _ret(2 * da**2 - (space.m - 1) * dh * a**2, r)


def energy_density_H(space: ModelSpace, r):
    """Radial energy density ``H = a'^2 - (m-1) h' a^2`` of the first harmonics."""
    space.require_noncompact("the energy density H")
    rr = _radius(space, r)
    a = np.asarray(weight_a(space, rr))
    da = np.asarray(weight_a_derivative(space, rr))
    dh = np.asarray(mean_curvature_derivative(space, rr))
    return _ret(da**2 - (space.m - 1) * dh * a**2, r)


def energy_density_H_derivative(space: ModelSpace, r):
    space.require_noncompact("the energy density H")
    rr = _radius(space, r)
    m1 = space.m - 1
    a = np.asarray(weight_a(space, rr))
    da = np.asarray(weight_a_derivative(space, rr))
    dda = np.asarray(weight_a_second_derivative(space, rr))
    dh = np.asarray(mean_curvature_derivative(space, rr))
    ddh = np.asarray(mean_curvature_derivative(space, rr, order=2))
    return _ret(2 * da * dda - m1 * ddh * a**2 - 2 * m1 * dh * a * da, r)


# ---------------------------------------------------------------------------
# inverse volume and the stability profile g(s) = s a(v^{-1}(s))


def _inverse_volume_scalar(space: ModelSpace, s: float) -> float:
    if not np.isfinite(s) or s <= 0:
        raise DomainError(f"volume must be positive and finite, got {s!r}")
    if s >= space.total_volume:
        raise DomainError(f"volume {s} exceeds the total volume of {space.label}")
    log_target = math.log(s)
    if space.family is Family.EUCLIDEAN:
        return (space.m * s / space.sphere_area) ** (1.0 / space.m)

    def f(r):
        return float(log_ball_volume(space, r)) - log_target

    guess = (space.m * s / space.sphere_area) ** (1.0 / space.m)
    if space.is_compact:
        lo = min(guess, 1.0)
        while f(lo) > 0:
            lo *= 0.5
        hi = math.pi * (1 - 1e-15)
        if f(hi) < 0:
            raise DomainError(f"volume {s} too close to the total volume of {space.label}")
    else:
        hi = max(guess, 1e-300)
        while f(hi) < 0:
            hi *= 2.0
        lo = hi
        while f(lo) > 0:
            lo *= 0.5
    if lo == hi:
        return lo
    try:
        return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise NumericalError(f"volume inversion failed for s={s} on {space.label}") from exc


def inverse_volume(space: ModelSpace, s):
    """Radius ``R`` with ``v(R) = s``."""
    if np.ndim(s) == 0:
        return _inverse_volume_scalar(space, float(s))
    flat = [_inverse_volume_scalar(space, float(x)) for x in np.ravel(s)]
    return np.reshape(flat, np.shape(s))


def stability_g(space: ModelSpace, s: float) -> tuple[float, float, float]:
    """``(g, g', g'')`` at volume ``s`` for ``g(s) = s a(v^{-1}(s))``.

    ``g'(s) = G(t)`` and ``g''(s) = G'(t) / v'(t)`` with ``t = v^{-1}(s)``.
    """
    space.require_noncompact("the stability profile g")
    t = inverse_volume(space, s)
    g = s * weight_a(space, t)
    return g, calibration_G(space, t), calibration_G_derivative(space, t) / boundary_volume(space, t)


def stability_g_third(space: ModelSpace, s: float) -> float:
    space.require_noncompact("the stability profile g")
    t = inverse_volume(space, s)
    m1 = space.m - 1
    a, da = weight_a(space, t), weight_a_derivative(space, t)
    dda = weight_a_second_derivative(space, t)
    h = mean_curvature(space, t)
    dh = mean_curvature_derivative(space, t)
    ddh = mean_curvature_derivative(space, t, order=2)
    num = 6 * da * dda + m1**2 * a**2 * h * dh - m1 * a**2 * ddh
    return num / boundary_volume(space, t) ** 2


# ---------------------------------------------------------------------------
# callable bundle


@dataclass(frozen=True)
class RadialFunctions:
    theta: Callable
    h: Callable
    dh: Callable
    v: Callable
    a: Callable
    da: Callable
    sff_eigs: Callable
    jacobi_eigs: Callable


@lru_cache(maxsize=None)
def radial_functions(space: ModelSpace) -> RadialFunctions:
    def bind(fn):
        return lambda r: fn(space, r)

    return RadialFunctions(
        theta=bind(density),
        h=bind(mean_curvature),
        dh=bind(mean_curvature_derivative),
        v=bind(ball_volume),
        a=bind(weight_a),
        da=bind(weight_a_derivative),
        sff_eigs=bind(sff_eigs),
        jacobi_eigs=bind(jacobi_eigs),
    )


# ---------------------------------------------------------------------------
# complex structures at the pole


def _cd_conj(x: np.ndarray) -> np.ndarray:
    out = -x
    out[0] = x[0]
    return out


def _cd_mult(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product on R^(2^k): (a,b)(c,d) = (ac - d*b, da + bc*)."""
    n = len(x)
    if n == 1:
        return x * y
    h = n // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    return np.concatenate([_cd_mult(a, c) - _cd_mult(_cd_conj(d), b), _cd_mult(d, a) + _cd_mult(b, _cd_conj(c))])


def _left_multiplication(dim: int, unit: int) -> np.ndarray:
    e = np.eye(dim)
    return np.column_stack([_cd_mult(e[unit], e[j]) for j in range(dim)])


@dataclass(frozen=True)
class BergerFrame:
    """The ``d-1`` orthogonal complex structures ``J_k`` on the tangent space at the pole.

    Realised by left multiplication by the imaginary units of C, H or O acting
    on each K-coordinate of ``K^n = R^m``.
    """

    space: ModelSpace
    matrices: np.ndarray  # (d-1, m, m)

    def j_apply(self, k: int, w: np.ndarray) -> np.ndarray:
        if not 1 <= k <= self.space.d - 1:
            raise IndexError(f"complex structure index {k} outside 1..{self.space.d - 1}")
        return np.asarray(w) @ self.matrices[k - 1].T

    def apply_all(self, w: np.ndarray) -> np.ndarray:
        """``J_k w`` for all ``k``: shape ``(..., d-1, m)``."""
        return np.einsum("kij,...j->...ki", self.matrices, np.asarray(w, dtype=float))


@lru_cache(maxsize=None)
def berger_frame(space: ModelSpace) -> BergerFrame:
    d, n = space.d, space.n
    if d == 1:
        mats = np.zeros((0, space.m, space.m))
    else:
        block = [_left_multiplication(d, k) for k in range(1, d)]
        mats = np.stack([np.kron(np.eye(n), b) for b in block])
    mats.setflags(write=False)
    return BergerFrame(space, mats)
