"""Steklov spectrum of the symmetric strip ``Omega_R = B_R(o+) & B_R(o-)`` in the round sphere ``S^m``.

For a degree-``p`` mode with profile ``a_p`` (series normalisation ``a_p ~ r^p``)
the even and odd combinations ``F^- +- F^+`` have eigenvalues

    C_p^+ = (a_p'(R) - a_p'(pi-R)) / (a_p(R) + a_p(pi-R)),
    C_p^- = (a_p'(R) + a_p'(pi-R)) / (a_p(R) - a_p(pi-R)).

Degree zero needs separate treatment: ``a_0 = 1`` gives only the constant
(``C_0^+ = 0``), and the odd degree-zero eigenfunction comes from the second
radial solution ``u' = sin^{1-m}``, with eigenvalue

    sigma_0^- = 1 / (sin^{m-1}(R) int_{pi/2}^R sin^{1-m}).

``sigma1`` below is ``C_1^+``; ``sigma1_full`` also accounts for ``sigma_0^-``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ClaimViolation, DomainError, NumericalError
from .model_spaces import Family, ModelSpace, integrated_density
from .radial_series import get_mode

__all__ = [
    "StripSpectrum",
    "ScanResult",
    "strip_mode_values",
    "strip_sigma1",
    "matched_ball",
    "odd_radial_eigenvalue",
    "strip_volume",
    "counterexample_scan",
    "default_grid",
]

P_MAX = 12
CLAIM_TOL = 1e-10
COEFF_TOL = 1e-14


def _check(m: int, R) -> np.ndarray:
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise DomainError(f"dimension m must be an integer >= 2, got {m!r}")
    r = np.asarray(R, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= math.pi / 2) or np.any(r >= math.pi):
        raise DomainError(f"strip radius must lie in (pi/2, pi), got {R!r}")
    return r


def _sphere(m: int) -> ModelSpace:
    return ModelSpace(Family.ROUND_SPHERE, int(m))


def default_grid(n: int = 50) -> np.ndarray:
    return np.linspace(math.pi / 2 + 0.01, math.pi - 0.01, n)


def strip_mode_values(m: int, R, p: int):
    """``(C_plus, C_minus)`` of the degree-``p`` mode (``p >= 1``); ``R`` may be an array."""
    r = _check(m, R)
    if isinstance(p, bool) or int(p) != p or p < 1:
        raise DomainError(f"degree p must be an integer >= 1, got {p!r}")
    mode = get_mode(_sphere(m), int(p))
    aR, daR = mode.values(r)
    aS, daS = mode.values(math.pi - r)
    cp = (daR - daS) / (aR + aS)
    cm = (daR + daS) / (aR - aS)
    if np.ndim(R) == 0:
        return float(cp), float(cm)
    return cp, cm


def odd_radial_eigenvalue(m: int, R: float) -> float:
    """``sigma_0^-``: eigenvalue of the odd degree-zero eigenfunction of the strip."""
    _check(m, R)
    s = math.sin(R)
    # substitute t = pi - x to integrate sin^{1-m} over [pi - R, pi/2]
    val, _ = quad(lambda x: math.sin(x) ** (1 - m), math.pi - R, math.pi / 2, epsabs=0, epsrel=1e-13, limit=200)
    return 1.0 / (s ** (m - 1) * val)


def strip_volume(m: int, R: float) -> float:
    sp = _sphere(m)
    return float(sp.total_volume - 2 * sp.sphere_area * integrated_density(sp, math.pi - R))


def matched_ball(m: int, R: float) -> tuple[float, float]:
    """Radius ``S`` with ``|B_S| = |Omega_R|`` and the degree-one value ``sigma_1(B_S)``.

    Solves ``int_0^{pi-S} sin^{m-1} = 2 int_0^{pi-R} sin^{m-1}`` by Brent's
    method; ``sigma_1(B_S) = sin^{m-1}(S) / int_0^S sin^{m-1} - (m-1) cot S``, since
    ``a_1' = m - (m-1) h a_1`` with ``a_1 ~ r`` forces ``a_1 = m tau / theta``.
    """
    _check(m, R)
    sp = _sphere(m)
    target = 2 * integrated_density(sp, math.pi - R)
    try:
        beta = brentq(lambda b: integrated_density(sp, b) - target, 0.0, np.nextafter(math.pi, 0), xtol=1e-15, rtol=1e-15)
    except ValueError as exc:
        raise NumericalError(f"volume matching failed for m={m}, R={R}") from exc
    S = math.pi - beta
    sig = math.sin(S) ** (m - 1) / integrated_density(sp, S) - (m - 1) / math.tan(S)
    return S, sig


@dataclass
class StripSpectrum:
    m: int
    R: float
    modes: list  # (p, C_plus, C_minus)
    sigma1: float
    volume: float
    S: float
    sigma1_ball: float
    sigma0_odd: float
    sigma1_full: float

    @property
    def ratio(self) -> float:
        return self.sigma1 / self.sigma1_ball

    @property
    def ratio_full(self) -> float:
        return self.sigma1_full / self.sigma1_ball

    def to_json(self) -> dict:
        d = asdict(self)
        d["ratio"], d["ratio_full"] = self.ratio, self.ratio_full
        return d


def strip_sigma1(m: int, R: float, p_max: int = P_MAX) -> StripSpectrum:
    """Strip spectrum over degrees ``1..p_max`` with the claim checks.

    Raises
    ------
    ClaimViolation
        If some ``C_plus(p) > C_minus(p)`` or the minimum over modes is not
        ``C_plus(1)`` (relative tolerance 1e-10).
    """
    _check(m, R)
    if p_max < 1:
        raise DomainError("p_max must be at least 1")
    modes = [(p, *strip_mode_values(m, R, p)) for p in range(1, p_max + 1)]
    c1 = modes[0][1]
    tol = CLAIM_TOL * max(1.0, abs(c1))
    for p, cp, cm in modes:
        if cp > cm + tol:
            raise ClaimViolation(f"C_plus > C_minus for p={p}, m={m}, R={R}")
    lowest = min(min(cp, cm) for _, cp, cm in modes)
    if lowest < c1 - tol:
        raise ClaimViolation(f"minimum over modes below C_plus(1) for m={m}, R={R}")
    S, sb = matched_ball(m, R)
    s0 = odd_radial_eigenvalue(m, R)
    return StripSpectrum(m=m, R=float(R), modes=modes, sigma1=c1, volume=strip_volume(m, R), S=S,
                         sigma1_ball=sb, sigma0_odd=s0, sigma1_full=min(c1, s0))


@dataclass
class ScanResult:
    m: int
    rows: list = field(repr=False)  # dicts: m, R, sigma1_strip, S, sigma1_ball, ratio, sigma0_odd, ratio_full
    first_above: float | None
    ratio_near_pi: float
    crossing: tuple | None
    max_ratio_full: float

    COLUMNS = ("m", "R", "sigma1_strip", "S", "sigma1_ball", "ratio", "sigma0_odd", "sigma1_full", "ratio_full")


def _ratio(m: int, R: float) -> float:
    c1, _ = strip_mode_values(m, R, 1)
    return c1 / matched_ball(m, R)[1]


def counterexample_scan(m: int, grid=None, *, p_max: int = P_MAX, find_crossing: bool = True,
                        xtol: float = 1e-6) -> ScanResult:
    """Compare ``sigma_1(Omega_R)`` with ``sigma_1(B_S)`` over a grid of ``R``.

    The claim checks run on every grid point; the first grid crossing of
    ``ratio = 1`` is refined by bisection to ``xtol``.
    """
    R = _check(m, default_grid() if grid is None else np.sort(np.asarray(grid, dtype=float)))
    R = np.atleast_1d(R)
    for p in range(1, p_max + 1):
        xi = get_mode(_sphere(m), p).profile.coeffs
        if np.any(xi < -COEFF_TOL * np.max(np.abs(xi))):
            raise ClaimViolation(f"negative series coefficient for p={p}, m={m}")
    table = {p: strip_mode_values(m, R, p) for p in range(1, p_max + 1)}
    c1 = table[1][0]
    tol = CLAIM_TOL * np.maximum(1.0, np.abs(c1))
    for p, (cp, cm) in table.items():
        if np.any(cp > cm + tol):
            raise ClaimViolation(f"C_plus > C_minus for p={p}, m={m}")
        if np.any(np.minimum(cp, cm) < c1 - tol):
            raise ClaimViolation(f"mode p={p} falls below C_plus(1) for m={m}")
    rows = []
    for i, r in enumerate(R):
        S, sb = matched_ball(m, r)
        s0 = odd_radial_eigenvalue(m, r)
        full = min(c1[i], s0)
        rows.append({"m": int(m), "R": float(r), "sigma1_strip": float(c1[i]), "S": S, "sigma1_ball": sb,
                     "ratio": float(c1[i] / sb), "sigma0_odd": s0, "sigma1_full": full, "ratio_full": full / sb})
    ratios = np.array([row["ratio"] for row in rows])
    above = np.nonzero(ratios > 1)[0]
    first = float(R[above[0]]) if above.size else None
    crossing = None
    if find_crossing and above.size and above[0] > 0:
        lo, hi = float(R[above[0] - 1]), float(R[above[0]])
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            if _ratio(m, mid) > 1:
                hi = mid
            else:
                lo = mid
        crossing = (lo, hi)
    return ScanResult(m=int(m), rows=rows, first_above=first, ratio_near_pi=float(ratios[np.argmax(R)]),
                      crossing=crossing, max_ratio_full=max(row["ratio_full"] for row in rows))
