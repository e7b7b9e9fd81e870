"""Frobenius series for the radial Steklov profiles of geodesic balls.

A mode of spherical-harmonic degree ``p`` has a radial profile ``a_p`` solving

    a'' + (m-1) h a' - lambda(r) a = 0,    a_p(r) ~ r^p  (r -> 0),

and the Steklov eigenvalue of the ball ``B_R`` carried by the mode is
``sigma_p(R) = a_p'(R) / a_p(R)``.  Writing ``alpha = r theta'/theta`` and
``beta = r^2 lambda`` as even power series, the coefficients ``xi_i`` of
``a_p`` obey

    xi_i D_i + sum_{j<i} (j alpha_{i-j} - beta_{i-j}) xi_j = 0,
    D_i = i (i + m - 2) - p (p + m - 2),

with ``xi_p = 1``.  A majorant argument bounds ``|xi_i| R'^i`` uniformly,
which certifies the truncation error.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError, TruncationError, UnsupportedModeError
from .model_spaces import (
    Family,
    ModelSpace,
    mean_curvature,
    mean_curvature_derivative,
    weight_a,
    weight_a_derivative,
)

logger = logging.getLogger(__name__)

__all__ = [
    "PowerSeries",
    "ModeSpec",
    "SteklovMode",
    "alpha_beta_series",
    "build_profile",
    "get_mode",
    "sigma_first_ball",
    "sigma_ode_integrate",
    "comparison_check",
    "singular_radius",
    "profile_to_csv",
    "sigma_scan_to_csv",
]

TAIL_TOL = 1e-10
N_START = 32
N_CAP = 512
R0_ODE = 1e-3


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series ``sum_i coeffs[i] r^i``.

    ``radius_hint`` is the largest radius at which the truncation was
    certified; ``tail_bound`` is the certified bound there (0 when exact).
    """

    coeffs: np.ndarray
    radius_hint: float
    tail_bound: float = 0.0

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, r):
        return self.derivative(r, 0)

    def derivative(self, r, order: int = 1):
        c = np.polynomial.polynomial.polyder(self.coeffs, order) if order else self.coeffs
        out = np.polynomial.polynomial.polyval(np.asarray(r, dtype=float), c)
        return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class ModeSpec:
    """Radial mode attached to spherical harmonics of degree ``p``.

    ``lambda_r(r)`` is the eigenvalue of the geodesic-sphere Laplacian at
    radius ``r`` on the harmonics of this mode; ``lambda_c = p (p+m-2)``.
    """

    k: int
    p: int
    m: int
    lambda_c: float
    lambda_r: Callable = field(compare=False, repr=False)

    @classmethod
    def for_space(cls, space: ModelSpace, p: int, k: int | None = None) -> "ModeSpec":
        if isinstance(p, bool) or int(p) != p or p < 0:
            raise DomainError(f"degree p must be a nonnegative integer, got {p!r}")
        p = int(p)
        k = p if k is None else int(k)
        if k >= 1 and p < 1:
            raise DomainError("modes with k >= 1 need p >= 1")
        lam_c = float(p * (p + space.m - 2))
        if p == 0:
            lam = _lambda_zero
        elif space.constant_curvature:
            lam = _LambdaConstant(space, lam_c)
        elif p == 1:
            lam = _LambdaFirst(space)
        else:
            raise UnsupportedModeError(
                f"no closed-form sphere eigenvalue for degree {p} on {space.label}; only p <= 1 is supported"
            )
        return cls(k=k, p=p, m=space.m, lambda_c=lam_c, lambda_r=lam)


def _lambda_zero(r):
    return np.zeros_like(np.asarray(r, dtype=float)) if np.ndim(r) else 0.0


@dataclass(frozen=True)
class _LambdaConstant:
    space: ModelSpace
    lam_c: float

    def __call__(self, r):
        rr = np.asarray(r, dtype=float)
        s = {-1: np.sinh, 1: np.sin}.get(self.space.eps, lambda x: x)(rr)
        out = self.lam_c / s**2
        return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class _LambdaFirst:
    space: ModelSpace

    def __call__(self, r):
        out = -(self.space.m - 1) * np.asarray(mean_curvature_derivative(self.space, r))
        return float(out) if np.ndim(r) == 0 else out


# ---------------------------------------------------------------------------
# coefficient series of r coth r, r tanh r, r^2/sinh^2 r, ... in powers of r^2


def _zeta_terms(n: np.ndarray, base: float) -> np.ndarray:
    # 2 zeta(2n) / base^(2n), n >= 1
    return 2.0 * special.zeta(2.0 * n) * np.exp(-2.0 * n * math.log(base))


def _even_coeffs(kind: str, n_max: int) -> np.ndarray:
    """Coefficients c_0..c_{n_max} of the named function in powers of r^2."""
    n = np.arange(1, n_max + 1, dtype=float)
    out = np.zeros(n_max + 1)
    sign = np.where(n % 2 == 1, 1.0, -1.0)  # (-1)^(n+1)
    if kind in ("rcoth", "rcot", "r2/sinh2", "r2/sin2"):
        k = _zeta_terms(n, math.pi)
        base = sign * k if kind in ("rcoth", "r2/sinh2") else -k
        if kind.startswith("r2"):
            out[0], out[1:] = 1.0, -(2 * n - 1) * base
        else:
            out[0], out[1:] = 1.0, base
    elif kind in ("rtanh", "r2/cosh2"):
        base = sign * _zeta_terms(n, math.pi / 2) * (1.0 - 4.0**-n)
        out[1:] = base if kind == "rtanh" else (2 * n - 1) * base
    else:
        raise ValueError(kind)
    return out


def _spread(even: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    k = min(len(even), (length + 1) // 2)
    out[: 2 * k : 2] = even[:k]
    return out


def singular_radius(space: ModelSpace) -> float:
    """Radius of convergence of the coefficient series of the radial ODE."""
    if space.family is Family.EUCLIDEAN:
        return math.inf
    return math.pi if space.d == 1 else math.pi / 2


def _check_spec(space: ModelSpace, spec: ModeSpec) -> None:
    if spec.m != space.m:
        raise DomainError(f"mode built for dimension {spec.m}, space {space.label} has {space.m}")
    if spec.p >= 2 and not space.constant_curvature:
        raise UnsupportedModeError(f"degree {spec.p} is not supported on {space.label}")


def _alpha_beta_arrays(space: ModelSpace, spec: ModeSpec, length: int):
    m, d = space.m, space.d
    ne = (length + 1) // 2
    alpha = np.zeros(length)
    beta = np.zeros(length)
    fam = space.family
    if fam is Family.EUCLIDEAN:
        alpha[0] = m - 1
        beta[0] = spec.lambda_c
        return alpha, beta
    if fam is Family.ROUND_SPHERE:
        alpha = (m - 1) * _spread(_even_coeffs("rcot", ne), length)
        if spec.p:
            beta = spec.lambda_c * _spread(_even_coeffs("r2/sin2", ne), length)
        return alpha, beta
    alpha = (m - 1) * _spread(_even_coeffs("rcoth", ne), length)
    if d > 1:
        alpha = alpha + (d - 1) * _spread(_even_coeffs("rtanh", ne), length)
    if spec.p and d == 1:
        beta = spec.lambda_c * _spread(_even_coeffs("r2/sinh2", ne), length)
    elif spec.p:
        beta = (m - 1) * _spread(_even_coeffs("r2/sinh2", ne), length) - (d - 1) * _spread(
            _even_coeffs("r2/cosh2", ne), length
        )
    return alpha, beta


def alpha_beta_series(space: ModelSpace, spec: ModeSpec, N: int):
    """Power series of ``alpha = r theta'/theta`` and ``beta = r^2 lambda(r)``.

    Parameters
    ----------
    space : ModelSpace
    spec : ModeSpec
    N : int
        Truncation order (highest power kept), at least 2.

    Returns
    -------
    alpha, beta : PowerSeries
        Coefficients of ``r^0 .. r^N``; both series are even.

    Raises
    ------
    UnsupportedModeError
        For ``p >= 2`` on a space of non-constant curvature.
    """
    if N < 2:
        raise DomainError("truncation N must be at least 2")
    _check_spec(space, spec)
    alpha, beta = _alpha_beta_arrays(space, spec, N + 1)
    rad = singular_radius(space)
    return PowerSeries(alpha, rad), PowerSeries(beta, rad)


def _majorant(space: ModelSpace, spec: ModeSpec, R: float) -> float:
    """``sum_{i>=1} (|alpha_i| + |beta_i|) R^i`` in closed form."""
    m, d = space.m, space.d
    fam = space.family
    if fam is Family.EUCLIDEAN:
        return 0.0
    coth_abs = 1.0 - R / math.tan(R)  # same for cot
    a_sum = (m - 1) * coth_abs
    if d > 1:
        a_sum += (d - 1) * R * math.tan(R)
    b_sum = 0.0
    if spec.p:
        sin2 = (R / math.sin(R)) ** 2 - 1.0
        if d == 1:
            b_sum = spec.lambda_c * sin2
        else:
            b_sum = (m - 1) * sin2 + (d - 1) * (R / math.cos(R)) ** 2
    return a_sum + b_sum


def _frobenius(alpha: np.ndarray, beta: np.ndarray, m: int, p: int, N: int) -> np.ndarray:
    xi = np.zeros(N + 1)
    xi[p] = 1.0
    lam_c = p * (p + m - 2)
    j = np.arange(N + 1, dtype=float)
    for i in range(p + 1, N + 1):
        js = slice(p, i)
        lag = i - np.arange(p, i)
        s = np.dot(j[js] * alpha[lag] - beta[lag], xi[js])
        xi[i] = -s / (i * (i + m - 2) - lam_c)
    return xi


def _tail_bounds(space: ModelSpace, spec: ModeSpec, xi: np.ndarray, r: float):
    """Certified bounds on the truncation error of ``a`` and ``a'`` at ``r``."""
    if space.family is Family.EUCLIDEAN:
        return 0.0, 0.0
    N = len(xi) - 1
    m, p = space.m, spec.p
    rho = singular_radius(space)
    if r >= rho:
        return math.inf, math.inf
    i = np.arange(N + 2, dtype=float)
    D_over_i = np.full_like(i, -np.inf)
    D_over_i[p + 1 :] = (i[p + 1 :] * (i[p + 1 :] + m - 2) - spec.lambda_c) / i[p + 1 :]
    with np.errstate(divide="ignore"):
        log_xi = np.log(np.abs(xi))
    best0 = best1 = math.inf
    for u in np.concatenate([np.linspace(0.02, 0.98, 49), 1 - np.geomspace(1e-3, 1e-8, 11)]):
        Rp = r + (rho - r) * u
        C = _majorant(space, spec, Rp)
        # induction starts at N + 1 only if D_i >= i C for every i > N
        if not D_over_i[N + 1] >= C:
            continue
        log_A = np.max(log_xi + np.arange(N + 1) * math.log(Rp))
        q = r / Rp
        logq = (N + 1) * math.log(q)
        t0 = math.exp(log_A + logq) / (1 - q)
        t1 = math.exp(log_A + logq) / r * ((N + 1) - N * q) / (1 - q) ** 2
        best0, best1 = min(best0, t0), min(best1, t1)
    return best0, best1


def _certified(space, spec, xi, r) -> tuple[bool, float]:
    t0, t1 = _tail_bounds(space, spec, xi, r)
    poly = np.polynomial.polynomial
    a = abs(poly.polyval(r, xi))
    da = abs(poly.polyval(r, poly.polyder(xi)))
    ok = t0 <= TAIL_TOL * a and t1 <= TAIL_TOL * da
    return ok, t0


def _max_certified_radius(space, spec, xi) -> tuple[float, float]:
    rho = singular_radius(space)
    if not math.isfinite(rho):
        return math.inf, 0.0
    lo, hi = 0.0, rho
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _certified(space, spec, xi, mid)[0]:
            lo = mid
        else:
            hi = mid
    return lo, _tail_bounds(space, spec, xi, lo)[0] if lo > 0 else 0.0


def build_profile(space: ModelSpace, spec: ModeSpec, N: int | None = None, *, R: float | None = None) -> "SteklovMode":
    """Build the Frobenius profile ``a_p`` with ``xi_p = 1``.

    Parameters
    ----------
    space : ModelSpace
    spec : ModeSpec
    N : int, optional
        Truncation order.  If omitted and ``R`` is given, ``N`` doubles from
        32 up to 512 until the tail bound at ``R`` is certified; if both are
        omitted ``N = 128``.
    R : float, optional
        Radius at which the truncation must be certified to relative 1e-10.

    Returns
    -------
    SteklovMode

    Raises
    ------
    TruncationError
        If the tail at ``R`` cannot be certified within the truncation cap.
    """
    _check_spec(space, spec)
    if R is not None and not 0 < R < space.diam:
        raise DomainError(f"radius {R} outside (0, {space.diam})")
    if N is not None and N < spec.p + 2:
        raise DomainError(f"truncation N={N} must be at least p + 2 = {spec.p + 2}")
    if N is None and R is None:
        N = 128
    if N is not None:
        candidates = [N]
    else:
        candidates, n = [], N_START
        while n <= N_CAP:
            candidates.append(max(n, spec.p + 2))
            n *= 2
    for n in candidates:
        alpha, beta = _alpha_beta_arrays(space, spec, n + 1)
        xi = _frobenius(alpha, beta, space.m, spec.p, n)
        if R is None or _certified(space, spec, xi, R)[0]:
            break
    else:
        raise TruncationError(
            f"mode p={spec.p} on {space.label}: tail at R={R} not certified to {TAIL_TOL} with N={candidates[-1]}"
        )
    hint, tail = _max_certified_radius(space, spec, xi)
    rad = singular_radius(space)
    return SteklovMode(
        space=space,
        spec=spec,
        profile=PowerSeries(xi, hint, tail),
        alpha=PowerSeries(alpha, rad),
        beta=PowerSeries(beta, rad),
    )


@lru_cache(maxsize=256)
def get_mode(space: ModelSpace, p: int, N: int = 128) -> "SteklovMode":
    """Cached mode of degree ``p`` with truncation ``N``."""
    return build_profile(space, ModeSpec.for_space(space, p), N)


@dataclass(frozen=True)
class SteklovMode:
    """A radial Steklov mode: its degree data, series profile and eigenvalue function.

    Inside ``0.9 * radius_hint`` values come from the series; beyond it the
    pair ``(sigma, log a)`` is continued from the series by a high-order
    integrator up to the requested radius.
    """

    space: ModelSpace
    spec: ModeSpec
    profile: PowerSeries
    alpha: PowerSeries = field(repr=False)
    beta: PowerSeries = field(repr=False)

    @property
    def switch_radius(self) -> float:
        return 0.9 * self.profile.radius_hint

    def values(self, r):
        """``(a_p(r), a_p'(r))`` for scalar or array ``r``."""
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(rr < 0) or np.any(rr >= self.space.diam) or np.any(~np.isfinite(rr)):
            raise DomainError(f"radius outside [0, {self.space.diam}) on {self.space.label}")
        a = np.empty_like(rr)
        da = np.empty_like(rr)
        near = rr <= self.switch_radius
        a[near] = self.profile(rr[near])
        da[near] = self.profile.derivative(rr[near])
        if np.any(~near):
            far = np.unique(rr[~near])
            a_far, da_far = self._continue(far)
            idx = np.searchsorted(far, rr[~near])
            a[~near], da[~near] = a_far[idx], da_far[idx]
        if np.ndim(r) == 0:
            return float(a[0]), float(da[0])
        return a.reshape(np.shape(r)), da.reshape(np.shape(r))

    def _continue(self, targets: np.ndarray):
        r1 = self.switch_radius
        a1 = float(self.profile(r1))
        s1 = float(self.profile.derivative(r1)) / a1
        space, m1, lam = self.space, self.space.m - 1, self.spec.lambda_r

        def rhs(t, y):
            return [lam(t) - y[0] ** 2 - m1 * mean_curvature(space, t) * y[0], y[0]]

        sol = solve_ivp(rhs, (r1, targets[-1]), [s1, math.log(a1)], method="DOP853",
                        t_eval=targets, rtol=1e-13, atol=1e-14)
        if not sol.success or not np.all(np.isfinite(sol.y)):
            raise NumericalError(f"continuation of mode p={self.spec.p} failed: {sol.message}")
        a = np.exp(sol.y[1])
        return a, sol.y[0] * a

    def a(self, r):
        return self.values(r)[0]

    def da(self, r):
        return self.values(r)[1]

    def d2a(self, r):
        """Second derivative from the ODE ``a'' = lambda a - (m-1) h a'``."""
        a, da = self.values(r)
        return self.spec.lambda_r(r) * a - (self.space.m - 1) * np.asarray(mean_curvature(self.space, r)) * da

    def sigma(self, r):
        """``sigma_p(r) = a_p'(r) / a_p(r)``."""
        a, da = self.values(r)
        return da / a


def sigma_first_ball(space: ModelSpace, R: float) -> float:
    """First Steklov eigenvalue ``a'(R)/a(R)`` of the geodesic ball ``B_R``.

    On the sphere the value is the degree-one mode only; it is not claimed
    to be the first eigenvalue there.
    """
    if not 0 < R < space.diam:
        raise DomainError(f"radius {R} outside (0, {space.diam}) on {space.label}")
    if space.is_compact:
        logger.info("sigma_first_ball on %s returns the degree-one mode value only", space.label)
    return float(weight_a_derivative(space, R) / weight_a(space, R))


def sigma_ode_integrate(space: ModelSpace, spec: ModeSpec, R, *, mode: "SteklovMode | None" = None):
    """Integrate the Riccati equation ``sigma' + sigma^2 + (m-1) h sigma = lambda`` to ``R``.

    Starts at ``r0 = 1e-3`` from the series value and uses an adaptive
    Runge-Kutta 4(5) pair (rtol 1e-10, atol 1e-12).  ``R`` may be an array,
    in which case a single integration reports every radius.
    """
    radii = np.atleast_1d(np.asarray(R, dtype=float))
    if np.any(~(radii > 0)) or np.any(radii >= space.diam):
        raise DomainError(f"radius outside (0, {space.diam}) on {space.label}: {R!r}")
    mode = mode or build_profile(space, spec, 64)
    s0 = mode.sigma(R0_ODE)
    m1, lam = space.m - 1, spec.lambda_r

    def rhs(t, y):
        return [lam(t) - y[0] ** 2 - m1 * mean_curvature(space, t) * y[0]]

    out = np.full(radii.shape, s0)
    hi = radii > R0_ODE
    lo = radii < R0_ODE
    for mask, end in ((hi, radii.max()), (lo, radii.min())):
        if not np.any(mask):
            continue
        order = np.argsort(radii[mask])
        t_eval = radii[mask][order] if end > R0_ODE else radii[mask][order][::-1]
        sol = solve_ivp(rhs, (R0_ODE, end), [s0], method="RK45", t_eval=t_eval, rtol=1e-10, atol=1e-12)
        if not sol.success or sol.y.shape[1] != len(t_eval) or not np.all(np.isfinite(sol.y)):
            raise NumericalError(f"Riccati solution escaped for p={spec.p} on {space.label}: {sol.message}")
        vals = sol.y[0] if end > R0_ODE else sol.y[0][::-1]
        sub = np.empty(len(order))
        sub[order] = vals
        out[mask] = sub
    return float(out[0]) if np.ndim(R) == 0 else out.reshape(np.shape(R))


def comparison_check(space: ModelSpace, specA: ModeSpec, specB: ModeSpec, grid: Iterable[float]) -> bool:
    """Check ``sigma_A <= sigma_B + 1e-10`` on ``grid`` given ``lambda_A <= lambda_B`` there."""
    r = np.asarray(list(grid), dtype=float)
    if np.any(specA.lambda_r(r) > specB.lambda_r(r) + 1e-12 * np.abs(specB.lambda_r(r))):
        raise DomainError("comparison needs lambda_A <= lambda_B on the grid")
    sa = get_mode(space, specA.p).sigma(r)
    sb = get_mode(space, specB.p).sigma(r)
    return bool(np.all(sa <= sb + 1e-10))


def profile_to_csv(mode: SteklovMode, fh: io.TextIOBase | None = None) -> str:
    """Write ``(i, xi_i)`` rows; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "xi_i"])
    for i, x in enumerate(mode.profile.coeffs):
        w.writerow([i, "%.17g" % x])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def sigma_scan_to_csv(mode: SteklovMode, radii, fh: io.TextIOBase | None = None) -> str:
    """Write ``(r, sigma)`` rows; returns the CSV text."""
    r = np.asarray(radii, dtype=float)
    s = np.atleast_1d(mode.sigma(r))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "sigma"])
    for ri, si in zip(np.atleast_1d(r), s):
        w.writerow(["%.17g" % ri, "%.17g" % si])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
