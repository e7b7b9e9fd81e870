"""Numerical checks of the weighted isoperimetric inequality, its stability and the Steklov bound chain.

All checks use the relative tolerance ``tol = 1e-6 * max(|lhs|, |rhs|, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedSpaceError
from .model_spaces import (
    ModelSpace,
    ball_volume,
    boundary_volume,
    calibration_G,
    energy_density_H,
    inverse_volume,
    stability_g,
    weight_a,
    weight_a_derivative,
)
from .star_domains import DomainReport, StarDomain, measure_domain, random_star_domain

__all__ = [
    "InequalityVerdict",
    "check_weighted_isoperimetric",
    "check_stability",
    "check_bound_chain",
    "quantitative_bw_constant",
    "continuity_probe",
    "ProbeRow",
    "SweepRow",
    "falsification_sweep",
    "local_stability_radius",
    "first_harmonics_energy",
]

REL_TOL = 1e-6


def _tol(*vals: float) -> float:
    return REL_TOL * max(1.0, *(abs(v) for v in vals))


@dataclass
class InequalityVerdict:
    """Outcome of one check; ``passed`` iff ``margin >= -tolerance`` (and any auxiliary check there passes)."""

    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _require_noncompact(space: ModelSpace, what: str) -> None:
    if space.is_compact:
        raise UnsupportedSpaceError(f"{what} is a non-compact statement; {space.label} is compact")


def check_weighted_isoperimetric(domain: StarDomain, report: DomainReport | None = None) -> InequalityVerdict:
    """Check ``P_o(Omega) >= P_o(B)`` and the calibration lower bound on the gap.

    Parameters
    ----------
    domain : StarDomain
        Domain in a non-compact space.
    report : DomainReport, optional
        Precomputed ``measure_domain(domain)``.

    Returns
    -------
    InequalityVerdict
        ``margin = P_o(Omega) - P_o(B)``; ``details['calibration_bound']`` is
        ``int_{Omega \\ B} |G - G(R)| + int_{B \\ Omega} |G - G(R)|``, which the
        gap must also dominate.
    """
    _require_noncompact(domain.space, "the weighted isoperimetric inequality")
    rep = report or measure_domain(domain)
    lhs, rhs = rep.weighted_perimeter, rep.ball_perimeter
    margin = lhs - rhs
    tol = _tol(lhs, rhs)
    calib = rep.calibration_bound
    calib_ok = margin >= calib - tol
    return InequalityVerdict(
        "weighted_isoperimetric", lhs, rhs, margin, tol, bool(margin >= -tol and calib_ok),
        {"calibration_bound": calib, "calibration_margin": margin - calib, "calibration_pass": bool(calib_ok)},
    )


def local_stability_radius(space: ModelSpace, vol: float) -> float:
    """Largest ``delta_bar <= vol`` with ``g''(s) >= g''(vol)/2`` at ``s = vol +- delta_bar``."""
    half = 0.5 * stability_g(space, vol)[2]

    def ok(dl):
        lo = max(vol - dl, vol * 1e-12)
        return min(stability_g(space, lo)[2], stability_g(space, vol + dl)[2]) >= half

    if ok(vol * (1 - 1e-12)):
        return vol
    a, b = 0.0, vol
    for _ in range(60):
        mid = 0.5 * (a + b)
        a, b = (mid, b) if ok(mid) else (a, mid)
    return a


def check_stability(domain: StarDomain, report: DomainReport | None = None) -> InequalityVerdict:
    """Check ``P_o(Omega) - P_o(B) >= C |Omega \\ B|^2``.

    On a non-compact ROSS ``C = g''(2|Omega|)`` (``g''`` is non-increasing
    there).  Euclidean inputs follow the two-regime argument: the local
    constant ``g''(|Omega|)/2`` when ``delta < delta_bar`` and the
    continuity-lemma constant ``(G(rho) - G(R)) delta_bar / (2 |Omega|^2)``
    otherwise, with ``|B_rho \\ B| = delta_bar / 2``.  The second-difference
    bound ``g(V+delta) - 2 g(V) + g(V-delta) <= P_o(Omega) - P_o(B)`` is checked
    in all cases.
    """
    sp = domain.space
    _require_noncompact(sp, "the quantitative isoperimetric inequality")
    rep = report or measure_domain(domain)
    V, delta = rep.volume, rep.sym_diff
    gap = rep.weighted_perimeter - rep.ball_perimeter
    local_c = 0.5 * stability_g(sp, V)[2]
    if sp.is_noncompact_ross:
        C, regime, dbar = stability_g(sp, 2 * V)[2], "global", None
    else:
        dbar = local_stability_radius(sp, V)
        if delta < dbar:
            C, regime = local_c, "local"
        else:
            rho = inverse_volume(sp, V + 0.5 * dbar)
            C = (calibration_G(sp, rho) - calibration_G(sp, rep.ball_radius)) * dbar / (2 * V**2)
            regime = "far"
    rhs = C * delta**2
    tol = _tol(gap, rhs, rep.weighted_perimeter)
    # a(R_ext)|B_ext| - 2 a(R)|B| + a(R_int)|B_int|
    R, Re, Ri = rep.ball_radius, rep.R_ext, rep.R_int
    second = (weight_a(sp, Re) * (V + delta) - 2 * weight_a(sp, R) * V + weight_a(sp, Ri) * (V - delta))
    second_ok = second <= gap + tol
    margin = gap - rhs
    return InequalityVerdict(
        "stability", gap, rhs, margin, tol, bool(margin >= -tol and second_ok),
        {
            "constant": C,
            "regime": regime,
            "local_constant": local_c,
            "delta_bar": dbar,
            "second_difference": second,
            "second_difference_pass": bool(second_ok),
        },
    )


def check_bound_chain(domain: StarDomain, report: DomainReport | None = None) -> InequalityVerdict:
    """Check ``Q(Omega) <= Q(B)`` and ``Q(Omega)/P_o(Omega) <= sigma_1(B)``.

    ``margin = sigma_1(B) - Q/P_o``.  ``Q/P_o`` is a certified upper bound
    for ``sigma_1(Omega)`` when the pole is the base point of the boundary.
    """
    _require_noncompact(domain.space, "the Steklov bound chain")
    rep = report or measure_domain(domain)
    ratio = rep.rayleigh_upper
    tol = _tol(ratio, rep.sigma1_ball)
    e_tol = _tol(rep.energy, rep.ball_energy)
    energy_ok = rep.energy <= rep.ball_energy + e_tol
    margin = rep.sigma1_ball - ratio
    return InequalityVerdict(
        "bound_chain", ratio, rep.sigma1_ball, margin, tol, bool(margin >= -tol and energy_ok),
        {
            "energy": rep.energy,
            "ball_energy": rep.ball_energy,
            "energy_margin": rep.ball_energy - rep.energy,
            "energy_pass": bool(energy_ok),
            "rayleigh_upper": ratio,
        },
    )


def quantitative_bw_constant(space: ModelSpace, vol: float) -> float:
    """Constant ``C`` in ``sigma_1(Omega) (1 + C |Omega \\ B|^2) <= sigma_1(B)``: ``g''(2 vol) / (a(R)^2 v'(R))``."""
    _require_noncompact(space, "the quantitative Steklov bound")
    if not (vol > 0 and math.isfinite(vol)):
        raise DomainError(f"volume must be positive, got {vol!r}")
    R = inverse_volume(space, vol)
    return float(stability_g(space, 2 * vol)[2] / (weight_a(space, R) ** 2 * boundary_volume(space, R)))


@dataclass
class ProbeRow:
    P_gap: float
    sym_diff: float
    bound: float
    rho: float
    within_bound: bool


def continuity_probe(
    space: ModelSpace,
    vol: float,
    domain_sequence: Iterable[StarDomain],
    *,
    rescale: bool = True,
    rhos: Sequence[float] | None = None,
) -> list[ProbeRow]:
    """Pair perimeter gaps with symmetric differences at fixed volume.

    Each row also carries ``min_rho [P_gap / (G(rho) - G(R)) + |B_rho \\ B|]``
    over ``rho`` in ``R + rhos`` (default offsets 0.1, 0.2 and a geometric
    set), which bounds ``sym_diff`` from above.
    """
    _require_noncompact(space, "the continuity lemma")
    R = inverse_volume(space, vol)
    offsets = np.asarray(rhos if rhos is not None else np.concatenate([[0.1, 0.2], np.geomspace(1e-3, 2.0, 40)]))
    rho_grid = R + offsets
    G_gap = np.asarray(calibration_G(space, rho_grid)) - calibration_G(space, R)
    shell = np.asarray(ball_volume(space, rho_grid)) - vol
    rows = []
    for dom in domain_sequence:
        if dom.space != space:
            raise DomainError("domain space does not match the probe space")
        if rescale:
            dom = dom.with_volume(vol)
        rep = measure_domain(dom)
        if abs(rep.volume - vol) > 1e-6 * max(1.0, vol):
            raise DomainError(f"domain volume {rep.volume} differs from {vol}")
        gap = max(rep.weighted_perimeter - rep.ball_perimeter, 0.0)
        b = gap / G_gap + shell
        k = int(np.argmin(b))
        tol = _tol(rep.sym_diff, b[k])
        rows.append(ProbeRow(rep.weighted_perimeter - rep.ball_perimeter, rep.sym_diff, float(b[k]), float(rho_grid[k]),
                             bool(rep.sym_diff <= b[k] + tol)))
    return rows


# ---------------------------------------------------------------------------
# transplanted first harmonics on RH^m


def first_harmonics_energy(space: ModelSpace, y: np.ndarray):
    """``sum_i |grad F_i|^2`` for ``F_i = a(r) <e_i, w>`` on ``RH^m`` at chart points ``y``.

    The chart is ``y -> (sqrt(1 + |y|^2), y)`` on the hyperboloid, where the
    inverse metric is ``I + y y^T`` and ``sinh r = |y|``.  Returns the energy
    and ``H(r)`` for comparison.
    """
    if space.code != "RH":
        raise UnsupportedSpaceError("the explicit chart is only set up for real hyperbolic space")
    y = np.atleast_2d(np.asarray(y, dtype=float))
    ny = np.linalg.norm(y, axis=1)
    if np.any(ny == 0):
        raise DomainError("the pole itself is excluded")
    r = np.arcsinh(ny)
    a = np.asarray(weight_a(space, r))
    da = np.asarray(weight_a_derivative(space, r))
    w = y / ny[:, None]
    dr = y / (ny * np.sqrt(1 + ny**2))[:, None]
    eye = np.eye(space.m)
    # J[n, i, j] = d F_i / d y_j
    dw = (eye[None] - w[:, :, None] * w[:, None, :]) / ny[:, None, None]
    J = (da[:, None, None] * w[:, :, None] * dr[:, None, :]) + a[:, None, None] * dw
    ginv = eye[None] + y[:, :, None] * y[:, None, :]
    energy = np.einsum("nij,njk,nik->n", J, ginv, J)
    return energy, np.asarray(energy_density_H(space, r))


# ---------------------------------------------------------------------------
# falsification sweep


@dataclass
class SweepRow:
    seed: int
    space: str
    volume: float
    P_gap: float
    sym_diff: float
    stability_slack: float
    ratio_bound: float
    sigma1_ball: float
    passed_isoperimetric: bool
    passed_stability: bool
    passed_energy: bool
    passed_ratio: bool

    FIELDS = ("seed", "space", "volume", "P_gap", "sym_diff", "stability_slack", "ratio_bound", "sigma1_ball",
              "pass_flags")

    @property
    def passed(self) -> bool:
        return self.passed_isoperimetric and self.passed_stability and self.passed_energy and self.passed_ratio

    @property
    def pass_flags(self) -> str:
        f = (self.passed_isoperimetric, self.passed_stability, self.passed_energy, self.passed_ratio)
        return "iso={};stab={};energy={};ratio={}".format(*(int(x) for x in f))

    def csv_row(self) -> list[str]:
        nums = (self.volume, self.P_gap, self.sym_diff, self.stability_slack, self.ratio_bound, self.sigma1_ball)
        return [str(self.seed), self.space, *("%.17g" % x for x in nums), self.pass_flags]


def falsification_sweep(space: ModelSpace, seeds: Iterable[int], grid_order: int, **domain_kw) -> list[SweepRow]:
    """Run the three checks on seeded random star domains, in seed order."""
    _require_noncompact(space, "the falsification sweep")
    rows = []
    for seed in seeds:
        dom = random_star_domain(space, int(seed), grid_order, **domain_kw)
        rep = measure_domain(dom)
        iso = check_weighted_isoperimetric(dom, rep)
        stab = check_stability(dom, rep)
        chain = check_bound_chain(dom, rep)
        rows.append(SweepRow(
            seed=int(seed),
            space=space.label,
            volume=rep.volume,
            P_gap=iso.margin,
            sym_diff=rep.sym_diff,
            stability_slack=stab.margin,
            ratio_bound=chain.lhs,
            sigma1_ball=rep.sigma1_ball,
            passed_isoperimetric=iso.passed,
            passed_stability=stab.passed,
            passed_energy=chain.details["energy_pass"],
            passed_ratio=bool(chain.margin >= -chain.tolerance),
        ))
    return rows
