"""
Moving Sphere Module
====================

Scans of w_lambda = u_lambda - u outside geodesic spheres of radius lambda
centered at a point P at distance d from the center O of a radial profile.

A point x at polar coordinates (r, theta) about P (theta measured from the
ray P -> O) has Kelvin image x^lambda at (phi_lambda(r), theta), so

    w_lambda(x) = |J(r)|^((n-2k)/(2n)) u(rho(x^lambda, O)) - u(rho(x, O)),

with both distances from the hyperbolic law of cosines. Sigma_lambda^- is
the part of the exterior where w_lambda > tol_sign, and the critical radius
lambda_0 is the largest lambda for which it is empty.

Classes:
    - SphereScan: Center offset, candidate radii and grid settings
    - WField: Samples of w_lambda and the Sigma^- mask
    - CriticalLambda: Verdict, lambda_0 and the scan rows
    - ChargeEstimate: Extrapolated asymptotic charge with its diagnostic

Functions:
    - w_lambda: w on the exterior (r, theta) grid
    - w_lambda_radial: w at arbitrary radii for a centered sphere
    - sigma_minus_measure: Hyperbolic volume of Sigma^- on the grid
    - critical_lambda: Scan plus bisection for lambda_0
    - asymptotic_charge: lim (sinh(r/2))^(n-2k) u(r)
    - kelvin_charge: The same limit read off the limit sphere
    - scan_rows: CSV rows of a scan
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .hgeom import Dimensions, law_of_cosines, sphere_area
from .kelvin import KelvinSphere, RadialProfile, jacobian, limit_sphere_charge_factor, phi_lambda
from .quadrature import gauss_legendre_interval
from .validation import DomainError, NonMonotoneScanWarning, NumericalError

logger = logging.getLogger(__name__)

SCAN_DEFAULTS = {
    "radial_extent": 10.0,    # exterior grid reaches lambda + extent
    "radial_samples": 200,
    "theta_order": 32,
    "tol_sign": 1e-9,         # relative to max |u|
    "cap": 20.0,
    "refine_width": 1e-7,
}

CHARGE_SETTINGS = {
    "spacing": 1.0,
    "rel_tol": 1e-4,
}


class Verdict(Enum):
    """Outcome of a critical-radius scan."""
    FINITE = "finite"
    EXCEEDS_CAP = "exceeds_cap"
    NON_MONOTONE = "non_monotone"


@dataclass(frozen=True, eq=False)
class SphereScan:
    """Settings of a moving-sphere scan about a center at distance center_offset."""
    dims: Dimensions
    center_offset: float
    lambdas: np.ndarray
    radial_extent: float = SCAN_DEFAULTS["radial_extent"]
    radial_samples: int = SCAN_DEFAULTS["radial_samples"]
    theta_order: int = SCAN_DEFAULTS["theta_order"]
    tol_sign: Optional[float] = None
    cap: float = SCAN_DEFAULTS["cap"]
    refine_width: float = SCAN_DEFAULTS["refine_width"]
    threads: int = 1

    def __post_init__(self):
        lambdas = np.array(self.lambdas, dtype=float)
        if self.center_offset < 0:
            raise DomainError(f"center offset must be nonnegative, got {self.center_offset}")
        if lambdas.ndim != 1 or lambdas.size < 2:
            raise DomainError("a scan needs at least two candidate radii")
        if np.any(lambdas <= 0) or np.any(np.diff(lambdas) <= 0):
            raise DomainError("candidate radii must be positive and increasing")
        if self.radial_extent <= 0 or self.radial_samples < 2:
            raise DomainError("exterior grid needs a positive extent and at least two radii")
        lambdas.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)

    def radii(self, lam: float) -> np.ndarray:
        """Exterior radii lambda + extent t^2, clustered toward the sphere."""
        t = np.linspace(0.0, 1.0, self.radial_samples)
        return lam + self.radial_extent * t * t

    def thetas(self):
        """(theta nodes, weights); a single direction when the center is O."""
        if self.center_offset == 0.0:
            return np.array([0.0]), np.array([math.pi])
        nodes, weights = gauss_legendre_interval(0.0, math.pi, self.theta_order)
        return np.concatenate([[0.0], nodes, [math.pi]]), np.concatenate([[0.0], weights, [0.0]])

    def threshold(self, u: RadialProfile) -> float:
        if self.tol_sign is not None:
            return self.tol_sign
        return SCAN_DEFAULTS["tol_sign"] * u.max_abs


@dataclass
class WField:
    """w_lambda on the exterior grid with the Sigma^- mask {w > tol}."""
    lam: float
    radii: np.ndarray
    thetas: np.ndarray
    theta_weights: np.ndarray
    w: np.ndarray             # shape (radii, thetas)
    tol: float
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mask = self.w > self.tol

    @property
    def max_w(self) -> float:
        return float(self.w.max())

    @property
    def max_abs_w(self) -> float:
        return float(np.abs(self.w).max())

    @property
    def empty(self) -> bool:
        """Sigma^- is empty on the grid."""
        return not bool(self.mask.any())


def w_lambda(u: RadialProfile, scan: SphereScan, lam: float) -> WField:
    """
    w_lambda on the exterior grid of the sphere of radius lam about P.

    Raises:
        CoverageError: u's range does not reach the needed center distances
    """
    s = KelvinSphere(lam, scan.dims)
    radii = scan.radii(lam)
    thetas, weights = scan.thetas()
    d = scan.center_offset
    r = radii[:, None]
    th = thetas[None, :]
    image = law_of_cosines(d, phi_lambda(s, radii)[:, None], th)
    direct = law_of_cosines(d, r, th)
    w = jacobian(s, radii, s.kelvin_exponent)[:, None] * u(image) - u(direct)
    return WField(lam, radii, thetas, weights, np.atleast_2d(w), scan.threshold(u))


def w_lambda_radial(u: RadialProfile, dims: Dimensions, lam: float, r):
    """w_lambda(r) = |J(r)|^e u(phi_lambda(r)) - u(r) for a sphere centered at O, any r > lambda_sharp."""
    s = KelvinSphere(lam, dims)
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    out = jacobian(s, r, s.kelvin_exponent) * u(phi_lambda(s, r)) - u(r)
    return float(out) if scalar else out


def sigma_minus_measure(f: WField, dims: Dimensions) -> float:
    """
    Hyperbolic volume of Sigma^- on the evaluation grid.

    Uses trapezoid weights in r and the angular weights of the scan, with
    dV = omega_(n-2) sinh^(n-1)(r) sin^(n-2)(theta) dr dtheta.
    """
    n = dims.n
    dr = np.zeros_like(f.radii)
    steps = np.diff(f.radii)
    dr[:-1] += 0.5 * steps
    dr[1:] += 0.5 * steps
    radial = dr * np.sinh(f.radii) ** (n - 1)
    if f.thetas.size == 1:
        return float(sphere_area(n) * radial @ f.mask[:, 0])
    angular = f.theta_weights * np.sin(f.thetas) ** (n - 2)
    return float(sphere_area(n - 1) * radial @ f.mask @ angular)


@dataclass
class ScanRow:
    """One candidate radius of a scan."""
    lam: float
    max_w: float
    measure: float
    empty: bool
    resolved: bool = True    # max |w| exceeds tol_sign

    @property
    def verdict(self) -> str:
        return "empty" if self.empty else "nonempty"

    def to_row(self) -> list:
        return [self.lam, self.max_w, self.measure, self.verdict]


@dataclass
class CriticalLambda:
    """Result of critical_lambda."""
    verdict: Verdict
    lambda0: Optional[float]
    width: Optional[float]
    rows: List[ScanRow]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "lambda0": self.lambda0, "width": self.width}


def _row(u: RadialProfile, scan: SphereScan, lam: float) -> ScanRow:
    f = w_lambda(u, scan, lam)
    return ScanRow(lam, f.max_w, sigma_minus_measure(f, scan.dims), f.empty, f.max_abs_w > f.tol)


def critical_lambda(u: RadialProfile, scan: SphereScan) -> CriticalLambda:
    """
    Largest lambda with Sigma_lambda^- empty.

    The candidate radii up to the cap are scanned first. The bracket between
    the last empty and the first nonempty radius is bisected down to
    refine_width; lambda_0 is its midpoint.

    Returns:
        CriticalLambda with verdict finite, exceeds_cap (no nonempty radius
        up to the cap) or non_monotone (empty and nonempty radii interleave)

    Raises:
        NumericalError: Sigma^- is already nonempty at the smallest radius
    """
    lambdas = [lam for lam in scan.lambdas if lam <= scan.cap]
    if not lambdas:
        raise DomainError(f"no candidate radius below the cap {scan.cap}")
    if scan.threads > 1:
        with ThreadPoolExecutor(max_workers=scan.threads) as pool:
            rows = list(pool.map(lambda lam: _row(u, scan, lam), lambdas))
    else:
        rows = [_row(u, scan, lam) for lam in lambdas]
    for row in rows:
        logger.debug("lambda %.6g: max w %.3e, measure %.3e", row.lam, row.max_w, row.measure)

    if not rows[0].empty:
        raise NumericalError(f"Sigma^- is nonempty at the smallest radius {rows[0].lam}")
    first_bad = next((i for i, row in enumerate(rows) if not row.empty), None)
    if first_bad is None:
        return CriticalLambda(Verdict.EXCEEDS_CAP, None, None, rows)
    # rows whose whole signal sits below tol_sign decide nothing
    if any(row.empty and row.resolved for row in rows[first_bad:]):
        logger.warning("empty and nonempty radii interleave; scan aborted")
        warnings.warn("moving-sphere scan is not monotone in lambda", NonMonotoneScanWarning, stacklevel=2)
        return CriticalLambda(Verdict.NON_MONOTONE, None, None, rows)

    lo, hi = rows[first_bad - 1].lam, rows[first_bad].lam
    while hi - lo > scan.refine_width:
        mid = 0.5 * (lo + hi)
        if w_lambda(u, scan, mid).empty:
            lo = mid
        else:
            hi = mid
    return CriticalLambda(Verdict.FINITE, 0.5 * (lo + hi), hi - lo, rows)


@dataclass
class ChargeEstimate:
    """Extrapolated limit with a convergence flag."""
    value: float
    previous: float
    converged: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "previous": self.previous, "converged": self.converged}


def asymptotic_charge(u: RadialProfile, dims: Dimensions,
                      spacing: float = CHARGE_SETTINGS["spacing"]) -> ChargeEstimate:
    """
    lim (sinh(r/2))^(n-2k) u(r), extrapolated from the end of u's range.

    With f sampled at R - 2h, R - h, R and a correction decaying like
    e^-r, the limit is f(R) - (f(R-h) - f(R)) / (e^h - 1). The same formula
    one step earlier gives a second estimate; the result is flagged as not
    converged when the two differ by more than 1e-4 relative or the limit is
    not positive.

    Raises:
        DomainError: u's range ends before r = 30
    """
    end = u.domain[1]
    if end < 30.0:
        raise DomainError(f"asymptotic charge needs u up to r >= 30, got {end}")
    r = end - spacing * np.arange(2, -1, -1)
    f = np.sinh(0.5 * r) ** (dims.n - 2 * dims.k) * u(r)
    growth = math.expm1(spacing)
    value = float(f[2] - (f[1] - f[2]) / growth)
    previous = float(f[1] - (f[0] - f[1]) / growth)
    converged = bool(math.isfinite(value) and value > 0
                     and abs(value - previous) <= CHARGE_SETTINGS["rel_tol"] * abs(value))
    if not converged:
        logger.info("asymptotic charge did not converge: %.6e vs %.6e", value, previous)
    return ChargeEstimate(value, previous, converged)


def kelvin_charge(u: RadialProfile, lam0: float, dims: Dimensions) -> float:
    """Lambda_lambda0 * u(lambda0_sharp), the charge of a profile fixed by the sphere of radius lam0."""
    s = KelvinSphere(lam0, dims)
    return limit_sphere_charge_factor(s) * u(s.lambda_sharp)


def scan_rows(result: CriticalLambda) -> List[list]:
    """(lambda, max_w, measure_of_sigma_minus, verdict) per scanned radius."""
    return [row.to_row() for row in result.rows]


def default_lambdas(cap: float = SCAN_DEFAULTS["cap"], step: float = 0.05,
                    start: float = 0.05) -> Sequence[float]:
    """Evenly spaced candidate radii from start to cap."""
    count = int(math.floor((cap - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)
