"""
Hardy-Littlewood-Sobolev Module
===============================

The sharp constant of the hyperbolic HLS inequality

    int int f(x) g(y) / (2 sinh(rho(x, y)/2))^lam dV_x dV_y <= C_{n,lam} ||f||_p ||g||_p,

with 0 < lam < n and p = 2n / (2n - lam), and a quadrature checker of the
inequality on radial profiles.

Functions:
    - hls_constant: C_{n,lam} in log space
    - hls_constant_direct: The same product of Gamma values, unlogged
    - lp_norm: Hyperbolic L^p norm of a radial profile
    - hls_lhs: The double integral for radial f and g
    - hls_test_family: Deterministic exponential and bump profiles
    - hls_fixture_rows: (profile_id, lam, lhs, rhs, ratio) per profile
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import special

from .gjms import radial_kernel_convolve, tail_estimate
from .hgeom import sphere_area
from .kelvin import RadialProfile
from .quadrature import composite_gauss_legendre, uniform_breaks
from .specfun import log_gamma
from .validation import DomainError, TailDominanceWarning, ensure, validate_hls_params

logger = logging.getLogger(__name__)

HLS_QUADRATURE = {
    "panel_width": 1.0,
    "radial_order": 16,
    "theta_order": 32,
    "grading_levels": 8,
    "norm_panel_width": 0.5,
    "norm_order": 16,
    "tail_tol": 1e-8,
}

TEST_FAMILY = {
    "exponential_multiples": (1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0),
    "bump_radii": (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0),
    "max_radius": 30.0,
    "decay_budget": 36.0,   # integrand of ||f||_p^p falls by e^-36 at the cutoff
    "samples": 65,
}


@dataclass(frozen=True)
class HlsParams:
    """Dimension n and kernel exponent lam in (0, n)."""
    n: int
    lam: float

    def __post_init__(self):
        ensure(validate_hls_params(self.n, self.lam))

    @property
    def p(self) -> float:
        return 2.0 * self.n / (2.0 * self.n - self.lam)


def hls_constant(h: HlsParams) -> float:
    """
    C_{n,lam} = pi^(lam/2) Gamma(n/2 - lam/2) / Gamma(n - lam/2) (Gamma(n/2) / Gamma(n))^(-1 + lam/n).

    Example:
        >>> round(hls_constant(HlsParams(3, 1.0)), 4)
        2.294
    """
    n, lam = h.n, h.lam
    log_c = (0.5 * lam * math.log(math.pi)
             + log_gamma(0.5 * (n - lam)) - log_gamma(n - 0.5 * lam)
             + (lam / n - 1.0) * (log_gamma(0.5 * n) - log_gamma(n)))
    return math.exp(log_c)


def hls_constant_direct(h: HlsParams) -> float:
    """C_{n,lam} from Gamma values directly; overflows for large n."""
    n, lam = h.n, h.lam
    g = special.gamma
    return float(math.pi ** (0.5 * lam) * g(0.5 * (n - lam)) / g(n - 0.5 * lam)
                 * (g(0.5 * n) / g(n)) ** (lam / n - 1.0))


def _radial_nodes(f: RadialProfile, panel_width: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    lo, hi = f.domain
    return composite_gauss_legendre(uniform_breaks(lo, hi, panel_width), order)


def lp_norm(f: RadialProfile, p: float, n: int) -> float:
    """(omega_(n-1) int |f|^p sinh^(n-1)(r) dr)^(1/p) over f's domain."""
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}")
    nodes, weights = _radial_nodes(f, HLS_QUADRATURE["norm_panel_width"], HLS_QUADRATURE["norm_order"])
    integral = sphere_area(n) * float(weights @ (np.abs(f(nodes)) ** p * np.sinh(nodes) ** (n - 1)))
    return integral ** (1.0 / p)


def hls_lhs(f: RadialProfile, g: RadialProfile, h: HlsParams,
            radial_order: int = HLS_QUADRATURE["radial_order"],
            theta_order: int = HLS_QUADRATURE["theta_order"],
            grading_levels: int = HLS_QUADRATURE["grading_levels"], threads: int = 1) -> float:
    """
    Double integral of f(x) g(y) (2 sinh(rho/2))^-lam for radial f and g.

    The inner integral over y is radial_kernel_convolve evaluated at the
    outer radial nodes; the outer integral runs over f's domain.
    """
    n, lam = h.n, h.lam
    nodes, weights = _radial_nodes(f, HLS_QUADRATURE["panel_width"], radial_order)
    fx = f(nodes)
    if not np.any(fx):
        return 0.0
    inner = radial_kernel_convolve(
        g, lambda rho: (2.0 * np.sinh(0.5 * rho)) ** (-lam), n, nodes,
        panel_width=HLS_QUADRATURE["panel_width"], radial_order=radial_order,
        theta_order=theta_order, grading_levels=grading_levels,
        threads=threads, tail_tol=math.inf,
    )
    outer = sphere_area(n) * fx * np.sinh(nodes) ** (n - 1) * inner
    total = float(weights @ outer)
    tail = tail_estimate(nodes, outer, f(f.domain[1]))
    if tail > HLS_QUADRATURE["tail_tol"] * abs(total):
        logger.warning("HLS integral tail %.3e is not negligible against %.6e", tail, total)
        warnings.warn(f"HLS integral tail {tail:.3e} against {total:.6e}", TailDominanceWarning,
                      stacklevel=2)
    return total


def _exponential(a: float):
    return lambda r: np.exp(-a * np.asarray(r, dtype=float))


def _bump(radius: float):
    def bump(r):
        x = np.asarray(r, dtype=float) / radius
        return np.where(x < 1.0, (1.0 - x * x) ** 3, 0.0)
    return bump


def hls_test_family(n: int, lam: float) -> List[Tuple[str, RadialProfile]]:
    """
    Twenty deterministic nonnegative profiles for the inequality check.

    Ten exponentials e^(-a r) with a = c (n-1)/p for the multiples c in
    TEST_FAMILY, cut off where the L^p integrand has decayed by e^-36, and
    ten C^2 bumps (1 - (r/R)^2)^3 supported on [0, R].
    """
    h = HlsParams(n, lam)
    family = []
    for c in TEST_FAMILY["exponential_multiples"]:
        a = c * (n - 1) / h.p
        cutoff = min(TEST_FAMILY["max_radius"], TEST_FAMILY["decay_budget"] / (a * h.p - (n - 1)))
        grid = np.linspace(0.0, cutoff, TEST_FAMILY["samples"])
        family.append((f"exp_{c:g}", RadialProfile.from_function(_exponential(a), grid)))
    for radius in TEST_FAMILY["bump_radii"]:
        grid = np.linspace(0.0, radius, TEST_FAMILY["samples"])
        family.append((f"bump_{radius:g}", RadialProfile.from_function(_bump(radius), grid)))
    return family


@dataclass
class HlsRow:
    """One line of the HLS fixture table."""
    profile_id: str
    lam: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    def to_row(self) -> list:
        return [self.profile_id, self.lam, self.lhs, self.rhs, self.ratio]


def hls_fixture_rows(n: int, lam: float, threads: int = 1,
                     theta_order: int = HLS_QUADRATURE["theta_order"],
                     grading_levels: int = HLS_QUADRATURE["grading_levels"]) -> List[HlsRow]:
    """lhs = hls_lhs(f, f) and rhs = C ||f||_p^2 for every profile of the test family."""
    h = HlsParams(n, lam)
    constant = hls_constant(h)

    def one(item: Tuple[str, RadialProfile]) -> HlsRow:
        profile_id, f = item
        lhs = hls_lhs(f, f, h, theta_order=theta_order, grading_levels=grading_levels)
        rhs = constant * lp_norm(f, h.p, n) ** 2
        logger.debug("%s: lhs %.10g rhs %.10g", profile_id, lhs, rhs)
        return HlsRow(profile_id, lam, lhs, rhs)

    family = hls_test_family(n, lam)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, family))
    return [one(item) for item in family]
