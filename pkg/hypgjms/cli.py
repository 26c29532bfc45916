"""
Command-Line Interface
======================

One subcommand per experiment. Every run writes its CSV/JSON outputs and a
manifest.json into --out, the manifest listing each output with its SHA-256
digest, the parameters, the tool version and the exit status.

Commands:
    - kelvin: phi_lambda, both Jacobian forms, ODE and involution residuals
    - shoot: One radial shooting trajectory
    - separatrix: Bisection for the separatrix value of Delta u(0), k = 2
    - verify-family: P_k u = c u^p residuals and the fitted power
    - green: Green's function table, decay rate and the bound check
    - hls: Sharp constant and the inequality on the test family
    - msphere: Moving-sphere scan of the family about an offset center

Exit codes:
    0 ok, 2 invalid flags or bracket, 3 numerical failure, 4 coverage or
    domain failure while computing.
"""

import argparse
import csv
import hashlib
import json
import logging
import re
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from config import settings
from dtos.manifestDto import OutputFile, RunManifest, RunStatus
from dtos.resultsDto import (
    FamilyResult,
    GreenResult,
    HlsResult,
    MsphereResult,
    SeparatrixResult,
    ShootResult,
)

from . import __version__
from .classify import FamilyParams, family_critical_lambda, family_profile, infer_power, residual_Q
from .gjms import GreenParams, bound_bracket, green_bound_check, green_decay_rate, green_pk
from .hgeom import Dimensions
from .hls import HlsParams, hls_constant, hls_constant_direct, hls_fixture_rows
from .kelvin import KelvinSphere, jacobian, jacobian_alt, phi_lambda, phi_ode_residual
from .msphere import (
    SphereScan,
    Verdict,
    asymptotic_charge,
    critical_lambda,
    default_lambdas,
    kelvin_charge,
    scan_rows,
)
from .shoot import (
    SHOOT_DEFAULTS,
    ShootParams,
    hyperbolic_shoot,
    ivp_integrate,
    separatrix_bisect,
    separatrix_exact,
)
from .validation import EXIT_CODES, DomainError, GJMSError, exit_code_for

logger = logging.getLogger(__name__)

DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
INTEGER = re.compile(r"^[+-]?\d+$")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

GREEN_TABLE = {"rho_min": 1e-3, "samples": 301, "decay_rho": 40.0}
KELVIN_SAMPLES = 201
MSPHERE_GRID = {"samples": 801, "min_extent": 40.0, "step": 0.05}


class FlagError(Exception):
    """A flag value failed domain validation."""


def decimal(text: str) -> float:
    """argparse type accepting decimal literals only."""
    text = text.strip()
    if not DECIMAL.match(text):
        raise argparse.ArgumentTypeError(f"not a decimal literal: {text!r}")
    return float(text)


def integer(text: str) -> int:
    text = text.strip()
    if not INTEGER.match(text):
        raise argparse.ArgumentTypeError(f"not an integer literal: {text!r}")
    return int(text)


def bracket(text: str) -> tuple:
    """'lo,hi' as two decimal literals."""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"bracket must be 'lo,hi', got {text!r}")
    return decimal(parts[0]), decimal(parts[1])


@contextmanager
def _flags():
    """Report DomainError raised while building inputs as a flag error."""
    try:
        yield
    except DomainError as exc:
        raise FlagError(str(exc)) from exc


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class Run:
    """Output directory of one command; records every written file."""

    def __init__(self, out: Path):
        self.out = out
        self.outputs: List[OutputFile] = []

    def _record(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.outputs.append(OutputFile(path=path.name, sha256=digest))
        logger.info("wrote %s (%s)", path, digest[:12])

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
        path = self.out / name
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        self._record(path)

    def write_json(self, name: str, model: BaseModel) -> None:
        path = self.out / name
        text = json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2)
        path.write_text(text + "\n", encoding="utf-8")
        self._record(path)


# -----------------------------
# Commands
# -----------------------------

def cmd_kelvin(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        s = KelvinSphere(args.lam, Dimensions(args.n, args.k))
        if not args.rmax > args.lam:
            raise DomainError(f"--rmax must exceed --lambda, got {args.rmax}")
    r = np.linspace(args.lam, args.rmax, args.samples)
    phi = phi_lambda(s, r)
    involution = np.abs(phi_lambda(s, phi) - r) / r
    rows = zip(r, phi, jacobian(s, r), jacobian_alt(s, r), phi_ode_residual(s, r), involution)
    run.write_csv("kelvin.csv", ["r", "phi", "jacobian", "jacobian_alt", "ode_residual",
                                 "involution_error"], rows)


def cmd_shoot(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        dims = Dimensions(args.n, args.k)
        params = ShootParams(dims, args.alpha, tuple(args.beta or ()), args.rmax, args.tol,
                             args.blow_cap)
        if args.p_exp is not None and not 1.0 < args.p_exp <= dims.critical_exponent:
            raise DomainError(f"--p-exp must lie in (1, {dims.critical_exponent}]")
    if args.p_exp is None:
        trajectory, outcome = ivp_integrate(params)
    else:
        trajectory, outcome = hyperbolic_shoot(params, args.p_exp)
    run.write_csv("trajectory.csv", trajectory.header(), trajectory.to_rows())
    run.write_json("shoot.json", ShootResult(
        n=dims.n, k=dims.k, alpha=params.alpha, betas=list(params.betas), p_exp=args.p_exp,
        outcome=outcome.kind.value, radius=outcome.radius, steps=int(trajectory.r.size),
    ))


def cmd_separatrix(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        dims = Dimensions(args.n, args.k)
        if dims.k != 2:
            raise DomainError(f"separatrix needs --k 2, got {dims.k}")
        if not args.alpha > 0:
            raise DomainError(f"--alpha must be positive, got {args.alpha}")
    result = separatrix_bisect(dims, args.alpha, args.bracket, args.iters, args.rmax, args.tol,
                               args.blow_cap)
    run.write_json("separatrix.json", SeparatrixResult(
        n=dims.n, k=dims.k, alpha=args.alpha, beta1_hat=result.beta1_hat, width=result.width,
        iterations=result.iterations, beta1_exact=separatrix_exact(dims, args.alpha),
    ))


def cmd_verify_family(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        fp = FamilyParams(args.alpha, args.beta, Dimensions(args.n, args.k))
    q = residual_Q(fp)
    fit = infer_power(fp) if fp.beta != 0.0 else None
    run.write_json("family.json", FamilyResult(
        n=fp.dims.n, k=fp.dims.k, alpha=fp.alpha, beta=fp.beta,
        c_hat=q.c_hat, c_hat_euclid=q.c_hat_euclid, c_exact=q.c_exact,
        constancy=q.constancy, two_route=q.two_route, q_hat=q.q_hat,
        p_hat=fit.p if fit else None, p_expected=fp.dims.critical_exponent,
        sign_mixed=fit.sign_mixed if fit else False,
    ))


def cmd_green(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        p = GreenParams(Dimensions(args.n, args.k), args.cosh_power)
        if not args.rmax > GREEN_TABLE["rho_min"]:
            raise DomainError(f"--rmax must exceed {GREEN_TABLE['rho_min']}")
    rhos = np.geomspace(GREEN_TABLE["rho_min"], args.rmax, GREEN_TABLE["samples"])
    g = green_pk(rhos, p)
    run.write_csv("green.csv", ["rho", "green", "bound_bracket"], zip(rhos, g, bound_bracket(rhos, p.dims)))
    bound = green_bound_check(p, rhos)
    n, k = p.dims.n, p.dims.k
    run.write_json("green.json", GreenResult(
        n=n, k=k, cosh_power=p.power,
        decay_rate=green_decay_rate(p, GREEN_TABLE["decay_rho"]),
        expected_decay=0.5 * (p.power + n - 2 * k),
        decreasing=bool(np.all(np.diff(g) < 0)),
        gamma_calibrated=bound.gamma_calibrated, gamma_min=bound.gamma_min,
        bound_holds=bound.holds,
    ))


def cmd_hls(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        h = HlsParams(args.n, args.lam)
    rows = hls_fixture_rows(h.n, h.lam, threads=args.threads, theta_order=args.theta_order,
                            grading_levels=args.grading_levels)
    run.write_csv("hls.csv", ["profile_id", "lam", "lhs", "rhs", "ratio"], [row.to_row() for row in rows])
    run.write_json("hls.json", HlsResult(
        n=h.n, lam=h.lam, C=hls_constant(h), C_direct=hls_constant_direct(h),
        max_ratio=max(row.ratio for row in rows), profiles=len(rows),
    ))


def cmd_msphere(args: argparse.Namespace, run: Run) -> None:
    with _flags():
        fp = FamilyParams(args.alpha, args.beta, Dimensions(args.n, args.k))
        scan = SphereScan(fp.dims, args.offset, default_lambdas(args.cap, MSPHERE_GRID["step"]),
                          theta_order=args.theta_order, cap=args.cap, threads=args.threads)
    extent = max(MSPHERE_GRID["min_extent"], args.offset + args.cap + scan.radial_extent + 1.0)
    u = family_profile(fp, np.linspace(0.0, extent, MSPHERE_GRID["samples"]))
    result = critical_lambda(u, scan)
    run.write_csv("msphere.csv", ["lambda", "max_w", "sigma_minus_measure", "verdict"], scan_rows(result))
    charge = asymptotic_charge(u, fp.dims)
    finite = result.verdict is Verdict.FINITE
    run.write_json("msphere.json", MsphereResult(
        n=fp.dims.n, k=fp.dims.k, alpha=fp.alpha, beta=fp.beta, offset=args.offset,
        verdict=result.verdict.value, lambda0=result.lambda0, width=result.width,
        lambda0_exact=family_critical_lambda(fp, args.offset),
        charge=charge.value, charge_converged=charge.converged,
        kelvin_charge=kelvin_charge(u, result.lambda0, fp.dims) if finite and args.offset == 0 else None,
    ))


# -----------------------------
# Parser
# -----------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=settings.OUT_DIR, help="Output directory")
    common.add_argument("--threads", type=integer, default=settings.THREADS,
                        help="Worker threads for scans and convolutions")

    def dims(p: argparse.ArgumentParser, k: int = 2) -> None:
        p.add_argument("--n", type=integer, required=True)
        p.add_argument("--k", type=integer, default=k)

    def shooting(p: argparse.ArgumentParser, rmax: float) -> None:
        p.add_argument("--alpha", type=decimal, default=1.0, help="u(0)")
        p.add_argument("--rmax", type=decimal, default=rmax)
        p.add_argument("--tol", type=decimal, default=settings.TOL)
        p.add_argument("--blow-cap", type=decimal, default=settings.BLOW_CAP)

    parser = argparse.ArgumentParser(prog="hypgjms", description="GJMS equations on hyperbolic space")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kelvin", parents=[common], help="Kelvin map table")
    dims(p)
    p.add_argument("--lambda", dest="lam", type=decimal, required=True)
    p.add_argument("--rmax", type=decimal, default=10.0)
    p.add_argument("--samples", type=integer, default=KELVIN_SAMPLES)
    p.set_defaults(handler=cmd_kelvin)

    p = sub.add_parser("shoot", parents=[common], help="One shooting trajectory")
    dims(p)
    shooting(p, 10.0)
    p.add_argument("--beta", type=decimal, action="append",
                   help="(-Delta)^m u(0) for m = 1..k-1, repeated in order")
    p.add_argument("--p-exp", type=decimal, default=None,
                   help="Shoot the hyperbolic problem with this exponent")
    p.set_defaults(handler=cmd_shoot)

    p = sub.add_parser("separatrix", parents=[common], help="Separatrix value of Delta u(0)")
    dims(p)
    shooting(p, SHOOT_DEFAULTS["bisect_horizon"])
    p.add_argument("--bracket", type=bracket, required=True, help="'lo,hi' for Delta u(0)")
    p.add_argument("--iters", type=integer, default=50)
    p.set_defaults(handler=cmd_separatrix)

    p = sub.add_parser("verify-family", parents=[common], help="Residuals of the solution family")
    dims(p)
    p.add_argument("--alpha", type=decimal, default=1.0)
    p.add_argument("--beta", type=decimal, required=True)
    p.set_defaults(handler=cmd_verify_family)

    p = sub.add_parser("green", parents=[common], help="Green's function of P_k")
    dims(p)
    p.add_argument("--rmax", type=decimal, default=30.0)
    p.add_argument("--cosh-power", type=decimal, default=None)
    p.set_defaults(handler=cmd_green)

    p = sub.add_parser("hls", parents=[common], help="Hardy-Littlewood-Sobolev check")
    p.add_argument("--n", type=integer, required=True)
    p.add_argument("--lam", type=decimal, required=True)
    p.add_argument("--theta-order", type=integer, default=settings.THETA_ORDER)
    p.add_argument("--grading-levels", type=integer, default=settings.GRADING_LEVELS)
    p.set_defaults(handler=cmd_hls)

    p = sub.add_parser("msphere", parents=[common], help="Moving-sphere scan of the family")
    dims(p)
    p.add_argument("--alpha", type=decimal, default=1.0)
    p.add_argument("--beta", type=decimal, required=True)
    p.add_argument("--offset", type=decimal, default=0.0, help="Distance of the sphere center from O")
    p.add_argument("--cap", type=decimal, default=20.0)
    p.add_argument("--theta-order", type=integer, default=settings.THETA_ORDER,
                   help="Angular order for an offset center")
    p.set_defaults(handler=cmd_msphere)
    return parser


def _params(args: argparse.Namespace) -> dict:
    return {key: (list(value) if isinstance(value, tuple) else value)
            for key, value in sorted(vars(args).items()) if key not in ("handler", "command")}


def _now() -> datetime:
    return datetime.now(timezone.utc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CODES["ok"] if exc.code in (0, None) else EXIT_CODES["flags"]

    logging.basicConfig(level=settings.LOG_LEVEL, format=LOG_FORMAT)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run = Run(out)
    manifest = RunManifest(command=args.command, params=_params(args), tool_version=__version__,
                           started=_now())
    try:
        args.handler(args, run)
    except FlagError as exc:
        logger.error("invalid flags: %s", exc)
        manifest.exit_code, manifest.error = EXIT_CODES["flags"], str(exc)
    except GJMSError as exc:
        logger.error("%s failed: %s", args.command, exc)
        manifest.exit_code, manifest.error = exit_code_for(exc), f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        logger.exception("%s failed unexpectedly", args.command)
        manifest.exit_code, manifest.error = exit_code_for(exc), f"{type(exc).__name__}: {exc}"
    if manifest.exit_code != EXIT_CODES["ok"]:
        manifest.status = RunStatus.FAILED
    manifest.finished = _now()
    manifest.outputs = run.outputs
    text = json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=2)
    (out / "manifest.json").write_text(text + "\n", encoding="utf-8")
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
