"""Command-line entry point: ``steklov --command {spectrum,verify,strip,basepoint,measure} ...``.

Every run writes its full configuration as a header (``# config: {...}`` for
CSV, a ``"config"`` key for JSON) so that ``--config`` on that file reproduces
the run.  Output is buffered and written once at the end; nothing is written
when validation fails.

Exit codes: 0 ok, 1 violation found, 2 bad input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ClaimViolation, DomainError, NumericalError, SteklovError, TruncationError
from .model_spaces import Family, ModelSpace

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VIOLATION, EXIT_BAD_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("spectrum", "verify", "strip", "basepoint", "measure")
GRID_ORDERS = {2: 32, 3: 12, 4: 8}
CONFIG_PREFIX = "# config: "


class BadInput(Exception):
    """Raised for invalid command-line input."""


@dataclass
class RunConfig:
    command: str
    space: str = "RH"
    n: int = 2
    R: list | None = None
    p: list = field(default_factory=lambda: [1])
    grid_order: int | None = None
    seeds: int = 100
    seed: int = 0
    p_max: int = 12
    find_crossing: bool = False
    domain: str | None = None
    samples: str | None = None
    format: str = "csv"
    out: str | None = None

    def header(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d

    def model_space(self) -> ModelSpace:
        try:
            return ModelSpace.parse(self.space, self.n)
        except DomainError as exc:
            raise BadInput(str(exc)) from exc


def _int(name, value, lo):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < lo:
        raise BadInput(f"--{name.replace('_', '-')} must be an integer >= {lo}, got {value!r}")


def validate(cfg: RunConfig) -> None:
    """Check every parameter against the preconditions of ``cfg.command``."""
    if cfg.command not in COMMANDS:
        raise BadInput(f"unknown command {cfg.command!r}")
    if cfg.format not in ("csv", "json"):
        raise BadInput(f"unknown format {cfg.format!r}")
    _int("n", cfg.n, 1)
    _int("seeds", cfg.seeds, 1)
    _int("seed", cfg.seed, 0)
    _int("p_max", cfg.p_max, 1)
    for p in cfg.p:
        _int("p", p, 1)
    if cfg.grid_order is not None:
        _int("grid_order", cfg.grid_order, 2)
    if cfg.R is not None:
        if not cfg.R or not all(isinstance(r, (int, float)) and math.isfinite(r) for r in cfg.R):
            raise BadInput("--R values must be finite numbers")
    if cfg.command == "strip":
        _int("n", cfg.n, 2)
        if cfg.R is not None and any(not math.pi / 2 < r < math.pi for r in cfg.R):
            raise BadInput("strip radii must lie in (pi/2, pi)")
        return
    space = cfg.model_space()
    if cfg.R is not None and any(not 0 < r < space.diam for r in cfg.R):
        raise BadInput(f"radii must lie in (0, {space.diam}) on {space.label}")
    if cfg.command == "spectrum":
        if space.d > 1 and any(p != 1 for p in cfg.p):
            raise BadInput(f"only p = 1 is available on {space.label}")
    if cfg.command in ("verify", "measure", "basepoint"):
        if cfg.domain is None and cfg.samples is None and space.m not in GRID_ORDERS:
            raise BadInput(f"star-domain grids exist for dimensions 2, 3, 4, not {space.m}")
    if cfg.command == "verify" and space.is_compact:
        raise BadInput(f"the falsification sweep needs a non-compact space, not {space.label}")
    if cfg.command == "basepoint" and space.family not in (Family.EUCLIDEAN, Family.REAL_HYPERBOLIC):
        raise BadInput(f"base points are available on E and RH only, not {space.label}")


# ---------------------------------------------------------------------------
# output


@dataclass
class Table:
    columns: tuple
    rows: list
    trailer: dict = field(default_factory=dict)
    status: int = EXIT_OK


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def render(cfg: RunConfig, table: Table) -> str:
    header = json.dumps(cfg.header(), sort_keys=True)
    if cfg.format == "json":
        doc = {"config": cfg.header(), "columns": list(table.columns),
               "rows": [dict(zip(table.columns, r)) for r in table.rows], **table.trailer}
        return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(CONFIG_PREFIX + header + "\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    for key, val in table.trailer.items():
        buf.write(f"# {key}: {json.dumps(_jsonable(val), sort_keys=True)}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig) -> Table:
    """``sigma_p(R)`` from the series profile and from the Riccati ODE, with their discrepancy."""
    from .radial_series import ModeSpec, get_mode, sigma_ode_integrate

    space = cfg.model_space()
    radii = np.asarray(cfg.R if cfg.R is not None else [1.0], dtype=float)
    rows = []
    for p in cfg.p:
        mode = get_mode(space, p)
        series = np.atleast_1d(mode.sigma(radii))
        ode = np.atleast_1d(sigma_ode_integrate(space, ModeSpec.for_space(space, p), radii, mode=mode))
        for r, s, o in zip(radii, series, ode):
            rows.append((space.code, space.n, p, float(r), float(s), float(o), abs(float(s) - float(o))))
    return Table(("space", "n", "p", "R", "sigma_series", "sigma_ode", "discrepancy"), rows)


def _grid_order(cfg: RunConfig, space: ModelSpace) -> int:
    return cfg.grid_order if cfg.grid_order is not None else GRID_ORDERS[space.m]


def cmd_verify(cfg: RunConfig) -> Table:
    """Falsification sweep over seeds ``seed .. seed + seeds - 1``; status 1 on any violation."""
    from .inequalities import SweepRow, falsification_sweep

    space = cfg.model_space()
    rows = falsification_sweep(space, range(cfg.seed, cfg.seed + cfg.seeds), _grid_order(cfg, space))
    failed = [r.seed for r in rows if not r.passed]
    out = Table(SweepRow.FIELDS, [r.csv_row() for r in rows], {"violations": len(failed)})
    if failed:
        logger.warning("inequality violations for seeds %s", failed)
        out.status = EXIT_VIOLATION
    return out


def cmd_strip(cfg: RunConfig) -> Table:
    """Strip-versus-ball scan on ``S^n``; claim failures give status 1."""
    from .strip import ScanResult, counterexample_scan

    try:
        res = counterexample_scan(cfg.n, cfg.R, p_max=cfg.p_max, find_crossing=cfg.find_crossing)
    except ClaimViolation as exc:
        logger.warning("%s", exc)
        return Table(ScanResult.COLUMNS, [], {"claim_violation": str(exc)}, EXIT_VIOLATION)
    rows = [tuple(r[c] for c in ScanResult.COLUMNS) for r in res.rows]
    trailer = {"first_above": res.first_above}
    if cfg.find_crossing:
        trailer["crossing"] = list(res.crossing) if res.crossing else None
    return Table(ScanResult.COLUMNS, rows, trailer)


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise BadInput(f"cannot read {path}: {exc}") from exc


def _domain(cfg: RunConfig, space: ModelSpace):
    from .star_domains import StarDomain, random_star_domain

    if cfg.domain is not None:
        dom = StarDomain.from_json(_load_json(cfg.domain))
        if dom.space != space:
            raise BadInput(f"domain lives on {dom.space.label}, not {space.label}")
        return dom
    order = _grid_order(cfg, space)
    if cfg.R is not None:
        return StarDomain.ball(space, float(cfg.R[0]), order)
    return random_star_domain(space, cfg.seed, order)


def cmd_measure(cfg: RunConfig) -> Table:
    """Domain functionals of one star domain (``--domain`` file, ball of radius ``--R`` or seeded)."""
    from .inequalities import check_bound_chain, check_stability, check_weighted_isoperimetric
    from .star_domains import measure_domain

    space = cfg.model_space()
    dom = _domain(cfg, space)
    rep = measure_domain(dom)
    cols = ("volume", "weighted_perimeter", "energy", "sym_diff", "ball_radius", "R_ext", "R_int",
            "ball_perimeter", "ball_energy", "sigma1_ball", "boundary_area")
    row = [getattr(rep, c) for c in cols]
    out = Table(cols, [tuple(row)])
    if not space.is_compact:
        verdicts = [check_weighted_isoperimetric(dom, rep), check_stability(dom, rep), check_bound_chain(dom, rep)]
        out.columns = cols + tuple(v.name for v in verdicts)
        out.rows = [tuple(row + [v.passed for v in verdicts])]
        if not all(v.passed for v in verdicts):
            out.status = EXIT_VIOLATION
    return out


def cmd_basepoint(cfg: RunConfig) -> Table:
    """Weighted barycenter of a boundary sample (``--samples``, ``--domain`` or seeded domain)."""
    from .base_point import BoundarySample, orthogonality_residual, solve_base_point

    space = cfg.model_space()
    if cfg.samples is not None:
        sample = BoundarySample.from_json(_load_json(cfg.samples))
        if sample.space != space:
            raise BadInput(f"sample lives on {sample.space.label}, not {space.label}")
    else:
        sample = BoundarySample.from_star_domain(_domain(cfg, space))
    res = solve_base_point(sample)
    resid = orthogonality_residual(sample, res.point)
    cols = ("model", "coords", "iterations", "grad_norm", "potential", "orthogonality_residual", "boundary_area")
    coords = " ".join("%.17g" % c for c in res.point.coords)
    row = (res.point.model.value, coords, res.iterations, res.grad_norm, res.potential, resid, sample.total_weight)
    return Table(cols, [row])


HANDLERS = {"spectrum": cmd_spectrum, "verify": cmd_verify, "strip": cmd_strip,
            "basepoint": cmd_basepoint, "measure": cmd_measure}


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steklov", description="Steklov spectra of geodesic balls and star domains.")
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--space", choices=[f.code for f in Family])
    ap.add_argument("--n", type=int, help="space parameter n (dimension m = d n); sphere dimension for strip")
    ap.add_argument("--R", type=float, nargs="+", help="radius or radii")
    ap.add_argument("--p", type=int, nargs="+", help="mode degrees for spectrum")
    ap.add_argument("--grid-order", type=int)
    ap.add_argument("--seeds", type=int, help="number of seeds for verify")
    ap.add_argument("--seed", type=int, help="first seed, or the seed of a single random domain")
    ap.add_argument("--p-max", type=int)
    ap.add_argument("--find-crossing", action="store_true", default=None)
    ap.add_argument("--domain", help="star domain JSON file")
    ap.add_argument("--samples", help="boundary sample JSON file")
    ap.add_argument("--config", help="JSON config, or an output file whose header holds one")
    ap.add_argument("--out", help="output path (stdout if omitted)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _read_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc}") from exc
    try:
        if text.startswith(CONFIG_PREFIX):
            obj = json.loads(text.splitlines()[0][len(CONFIG_PREFIX):])
        else:
            obj = json.loads(text)
            obj = obj.get("config", obj)
    except (ValueError, AttributeError) as exc:
        raise BadInput(f"no config found in {path}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(obj) - known
    if unknown:
        raise BadInput(f"unknown config keys: {sorted(unknown)}")
    return obj


def make_config(args: argparse.Namespace) -> RunConfig:
    base = _read_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            base[f.name] = val
    if "command" not in base:
        raise BadInput("--command is required")
    try:
        return RunConfig(**base)
    except TypeError as exc:
        raise BadInput(str(exc)) from exc


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    with open(cfg.out, "w", newline="") as fh:
        fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        validate(cfg)
        table = HANDLERS[cfg.command](cfg)
    except (BadInput, DomainError) as exc:
        print(f"steklov: bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (NumericalError, TruncationError, FloatingPointError) as exc:
        print(f"steklov: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ClaimViolation as exc:
        print(f"steklov: violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except SteklovError as exc:
        print(f"steklov: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    _emit(cfg, render(cfg, table))
    return table.status


if __name__ == "__main__":
    sys.exit(main())
