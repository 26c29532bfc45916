"""
Radial Shooting Module
======================

Initial-value problems for the radial polyharmonic equation

    (-Delta)^k u = weight(r) * u^p,   u(0) = alpha, (-Delta)^m u(0) = beta_m (m = 1..k-1),

on Euclidean balls, with weight = 1 for the critical exponent
p = (n+2k)/(n-2k). The state vector is (v_0, w_0, ..., v_{k-1}, w_{k-1})
with v_m = (-Delta)^m u and w_m = v_m', so that

    w_m' = -v_{m+1} - (n-1)/r * w_m,   v_k = weight * u^p.

Integration starts at r0 from the even Taylor seed and stops when u
crosses zero, when u climbs through the blow-up cap, or at the horizon.

Also provides the explicit bubbles U = (2a/(a^2+r^2))^((n-2k)/2) and
V = (2a/(a^2-r^2))^((n-2k)/2) with ratio-constancy residuals, and the
separatrix bisection in the initial Laplacian for k = 2.

Classes:
    - ShootParams: Initial data and integrator settings
    - OutcomeKind / TrajectoryOutcome: Blow-up, zero crossing or survival
    - Trajectory: Accepted integrator steps with dense output
    - BubbleRatio: Pointwise (-Delta)^k B / B^p on a grid

Functions:
    - ivp_integrate: Euclidean radial IVP
    - hyperbolic_shoot: Radial P_k u = u^p through the ball-model weight
    - bubble_U / residual_U, bubble_V / residual_V: Explicit bubbles
    - bubble_constant: c_{n,k} = Gamma(n/2+k) / Gamma(n/2-k)
    - normalized_bubble: Entire solution with unit PDE constant and u(0) = alpha
    - separatrix_bisect: Bisection for the separatrix value of Delta u(0)
    - beta_scan / subcritical_scan: Outcomes over a grid of Delta u(0)
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .gjms import euclid_radial_polyharmonic
from .hgeom import Dimensions
from .kelvin import RadialProfile
from .specfun import gamma_ratio
from .validation import (
    DomainError,
    IntegrationFailure,
    InvalidBracketError,
    ensure,
    validate_shoot_params,
)

logger = logging.getLogger(__name__)

SHOOT_DEFAULTS = {
    "tol": 1e-10,
    "blow_cap": 1e8,
    "r0": 1e-4,
    "method": "DOP853",
    "horizon_margin": 1e-3,    # hyperbolic shooting stops at s = 1 - margin
    "bisect_horizon": 200.0,
}

BUBBLE_GRIDS = {
    "U": {"extent": 3.0, "count": 240},    # [0, extent * a]
    "V": {"extent": 0.8, "count": 161},
    "order": 6,
}


class OutcomeKind(Enum):
    """How a shooting trajectory ends."""
    BLOW_UP = "blow_up"
    HITS_ZERO = "hits_zero"
    GLOBAL_POSITIVE = "global_positive"


@dataclass(frozen=True)
class TrajectoryOutcome:
    """Outcome kind with the radius at which it was decided."""
    kind: OutcomeKind
    radius: float

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "radius": self.radius}


@dataclass(frozen=True)
class ShootParams:
    """Initial data (alpha, betas) and integrator settings."""
    dims: Dimensions
    alpha: float
    betas: Tuple[float, ...] = ()
    r_max: float = 10.0
    tol: float = SHOOT_DEFAULTS["tol"]
    blow_cap: float = SHOOT_DEFAULTS["blow_cap"]
    r0: float = SHOOT_DEFAULTS["r0"]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        ensure(validate_shoot_params(self.alpha, self.r_max, self.tol, self.blow_cap))
        if len(self.betas) != self.dims.k - 1:
            raise DomainError(f"need {self.dims.k - 1} betas for k = {self.dims.k}, got {len(self.betas)}")
        if not 0 < self.r0 < self.r_max:
            raise DomainError(f"seed radius r0 = {self.r0} must lie in (0, r_max)")

    @property
    def exponent(self) -> float:
        return self.dims.critical_exponent

    def with_betas(self, betas: Sequence[float]) -> "ShootParams":
        return ShootParams(self.dims, self.alpha, tuple(betas), self.r_max, self.tol, self.blow_cap,
                           self.r0)


@dataclass
class Trajectory:
    """Accepted steps of an integration, one row of states per radius."""
    r: np.ndarray
    states: np.ndarray
    dense: Optional[Callable] = field(default=None, repr=False)

    def header(self) -> List[str]:
        k = self.states.shape[1] // 2
        names = ["r", "u", "du"]
        for m in range(1, k):
            names += [f"v{m}", f"w{m}"]
        return names

    def to_rows(self) -> List[List[float]]:
        return [[float(r), *map(float, row)] for r, row in zip(self.r, self.states)]

    def u(self, r):
        """u at radius r from the dense interpolant."""
        if self.dense is None:
            raise IntegrationFailure("trajectory has no dense output")
        return self.dense(r)[0]


Weight = Tuple[Callable[[float], float], float, float]   # (weight(r), weight(0), r^2 coefficient)


def _taylor_seed(p: ShootParams, power: float, weight: Optional[Weight]) -> np.ndarray:
    """State at r0 from u = sum c_{2i} r^{2i} through order r^4."""
    n, k = p.dims.n, p.dims.k
    w0, w2 = (1.0, 0.0) if weight is None else (weight[1], weight[2])
    a = [p.alpha, *p.betas, w0 * p.alpha ** power]
    b = [-a[m + 1] / (2.0 * n) for m in range(k)]
    b.append(w0 * power * p.alpha ** (power - 1.0) * b[0] + w2 * p.alpha ** power)
    c = [-b[m + 1] / (4.0 * (n + 2)) for m in range(k)]
    r0 = p.r0
    state = []
    for m in range(k):
        state.append(a[m] + b[m] * r0 ** 2 + c[m] * r0 ** 4)
        state.append(2.0 * b[m] * r0 + 4.0 * c[m] * r0 ** 3)
    return np.array(state)


def _integrate(p: ShootParams, power: float, weight: Optional[Weight],
               horizon: float) -> Tuple[Trajectory, TrajectoryOutcome]:
    n, k = p.dims.n, p.dims.k
    wfun = None if weight is None else weight[0]

    def rhs(r, y):
        u = y[0]
        source = math.copysign(abs(u) ** power, u)
        if wfun is not None:
            source *= wfun(r)
        dy = np.empty_like(y)
        for m in range(k):
            v_next = y[2 * m + 2] if m < k - 1 else source
            dy[2 * m] = y[2 * m + 1]
            dy[2 * m + 1] = -v_next - (n - 1) / r * y[2 * m + 1]
        return dy

    def hits_zero(r, y):
        return y[0]

    def blows_up(r, y):
        return y[0] - p.blow_cap

    hits_zero.terminal = True
    hits_zero.direction = -1
    blows_up.terminal = True
    blows_up.direction = 1

    sol = solve_ivp(
        rhs, (p.r0, horizon), _taylor_seed(p, power, weight),
        method=SHOOT_DEFAULTS["method"], rtol=p.tol, atol=p.tol * 1e-3,
        dense_output=True, events=[hits_zero, blows_up],
    )
    if sol.status == -1:
        raise IntegrationFailure(f"integration stopped at r = {sol.t[-1]:.6g}: {sol.message}")
    trajectory = Trajectory(sol.t, sol.y.T, sol.sol)
    if sol.status == 1:
        if sol.t_events[0].size:
            outcome = TrajectoryOutcome(OutcomeKind.HITS_ZERO, float(sol.t_events[0][0]))
        else:
            outcome = TrajectoryOutcome(OutcomeKind.BLOW_UP, float(sol.t_events[1][0]))
    else:
        outcome = TrajectoryOutcome(OutcomeKind.GLOBAL_POSITIVE, float(sol.t[-1]))
    return trajectory, outcome


def ivp_integrate(p: ShootParams) -> Tuple[Trajectory, TrajectoryOutcome]:
    """
    Integrate (-Delta)^k u = u^p with p = (n+2k)/(n-2k) on [r0, r_max].

    Args:
        p: Shooting parameters

    Returns:
        (trajectory, outcome)

    Raises:
        IntegrationFailure: The integrator could not continue (step collapse)
    """
    return _integrate(p, p.exponent, None, p.r_max)


def pullback_exponent(dims: Dimensions, p_exp: float) -> float:
    """E = p(n/2 - k) - (n/2 + k); zero exactly at the critical exponent."""
    return p_exp * (0.5 * dims.n - dims.k) - (0.5 * dims.n + dims.k)


def pullback_weight(dims: Dimensions, p_exp: float, s):
    """((1 - s^2) / 2)^E, the ball-model weight of radial P_k u = u^p."""
    e = pullback_exponent(dims, p_exp)
    s = np.asarray(s, dtype=float)
    return (0.5 * (1.0 - s) * (1.0 + s)) ** e


def hyperbolic_shoot(p: ShootParams, p_exp: float) -> Tuple[Trajectory, TrajectoryOutcome]:
    """
    Radial P_k u = u^p_exp on H^n, shot in the ball radius s.

    Solves (-Delta)^k U = ((1-s^2)/2)^E U^p_exp on s in [r0, min(r_max, 1 - 1e-3)],
    where U = (2/(1-s^2))^(n/2-k) u. At the critical exponent E = 0 and the
    trajectory is the Euclidean one.
    """
    critical = p.dims.critical_exponent
    if not 1.0 < p_exp <= critical * (1.0 + 1e-15):
        raise DomainError(f"p_exp must lie in (1, {critical}], got {p_exp}")
    horizon = min(p.r_max, 1.0 - SHOOT_DEFAULTS["horizon_margin"])
    if p.r0 >= horizon:
        raise DomainError("seed radius lies beyond the ball-model horizon")
    e = pullback_exponent(p.dims, p_exp)
    if abs(e) < 1e-14:
        return _integrate(p, critical, None, horizon)
    weight = (
        lambda s: (0.5 * (1.0 - s) * (1.0 + s)) ** e,
        2.0 ** (-e),
        -e * 2.0 ** (-e),
    )
    return _integrate(p, p_exp, weight, horizon)


def bubble_constant(dims: Dimensions) -> float:
    """c_{n,k} = Gamma(n/2 + k) / Gamma(n/2 - k), the constant of (-Delta)^k U = c U^p."""
    return gamma_ratio([0.5 * dims.n + dims.k], [0.5 * dims.n - dims.k])


def bubble_U(dims: Dimensions, a: float, r):
    """U(r) = (2a / (a^2 + r^2))^((n-2k)/2)."""
    if a <= 0:
        raise DomainError(f"bubble scale must be positive, got {a}")
    r = np.asarray(r, dtype=float)
    out = (2.0 * a / (a * a + r * r)) ** dims.half_gap
    return float(out) if out.ndim == 0 else out


def bubble_V(dims: Dimensions, a: float, r):
    """
    V(r) = (2a / (a^2 - r^2))^((n-2k)/2) on [0, a).

    The exponent is (n-4)/2 at k = 2; other k use the same (n-2k)/2 form.
    """
    if a <= 0:
        raise DomainError(f"bubble scale must be positive, got {a}")
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= a):
        raise DomainError(f"V is singular at r >= a = {a}")
    out = (2.0 * a / ((a - r) * (a + r))) ** dims.half_gap
    return float(out) if out.ndim == 0 else out


@dataclass
class BubbleRatio:
    """(-Delta)^k B / B^p on the valid grid, with the constant read near r = a."""
    grid: np.ndarray
    lhs: np.ndarray          # (-Delta)^k B
    power: np.ndarray        # B^p
    constant: float
    constancy: float         # max |ratio / constant - 1|
    residual: float          # max |lhs - constant * B^p| / max |constant * B^p|


def _bubble_ratio(dims: Dimensions, bubble: Callable, a: float, extent: float, count: int,
                  order: int, probe: float) -> BubbleRatio:
    h = extent * a / (count - 0.5)
    grid = (np.arange(count) + 0.5) * h
    profile = RadialProfile.from_function(lambda r: bubble(dims, a, r), grid, even=True)
    out = euclid_radial_polyharmonic(profile, dims.n, dims.k, order)
    power = profile.values[: out.grid.size] ** dims.critical_exponent
    ratio = out.values / power
    constant = float(ratio[int(np.argmin(np.abs(out.grid - probe)))])
    scale = float(np.max(np.abs(constant * power)))
    return BubbleRatio(
        grid=out.grid,
        lhs=out.values,
        power=power,
        constant=constant,
        constancy=float(np.max(np.abs(ratio / constant - 1.0))),
        residual=float(np.max(np.abs(out.values - constant * power)) / scale),
    )


def bubble_ratio_U(dims: Dimensions, a: float, order: int = BUBBLE_GRIDS["order"]) -> BubbleRatio:
    """Ratio table for U on a staggered grid over [0, 3a]."""
    cfg = BUBBLE_GRIDS["U"]
    return _bubble_ratio(dims, bubble_U, a, cfg["extent"], cfg["count"], order, probe=a)


def bubble_ratio_V(dims: Dimensions, a: float, order: int = BUBBLE_GRIDS["order"]) -> BubbleRatio:
    """Ratio table for V on a staggered grid over [0, 0.8a]."""
    cfg = BUBBLE_GRIDS["V"]
    return _bubble_ratio(dims, bubble_V, a, cfg["extent"], cfg["count"], order, probe=0.5 * a)


def residual_U(dims: Dimensions, a: float) -> float:
    """max |(-Delta)^k U - c_U U^p| / max |c_U U^p|, with c_U estimated near r = a."""
    return bubble_ratio_U(dims, a).residual


def residual_V(dims: Dimensions, a: float) -> float:
    """Same residual for V on [0, 0.8a]; c_V is estimated near r = a/2."""
    return bubble_ratio_V(dims, a).residual


def normalized_bubble(dims: Dimensions, alpha: float) -> Tuple[float, float]:
    """
    (kappa, a) such that u = kappa U_a solves (-Delta)^k u = u^p with u(0) = alpha.

    kappa = c_{n,k}^(1/(p-1)) and a = 2 (kappa / alpha)^(2/(n-2k)).

    Example:
        >>> kappa, a = normalized_bubble(Dimensions(6, 2), 1.0)
        >>> round(a, 4)
        4.4267
    """
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    kappa = bubble_constant(dims) ** (1.0 / (dims.critical_exponent - 1.0))
    a = 2.0 * (kappa / alpha) ** (1.0 / dims.half_gap)
    return kappa, a


def separatrix_exact(dims: Dimensions, alpha: float) -> float:
    """Delta u(0) of the normalized entire bubble: -2n (n-2k)/2 alpha / a^2."""
    _, a = normalized_bubble(dims, alpha)
    return -2.0 * dims.n * dims.half_gap * alpha / (a * a)


def _params_for(dims: Dimensions, alpha: float, beta: float, r_max: float, tol: float,
                blow_cap: float) -> ShootParams:
    # beta is Delta u(0); the state carries (-Delta) u(0)
    return ShootParams(dims, alpha, (-beta,), r_max, tol, blow_cap)


def _side(outcome: TrajectoryOutcome, trajectory: Trajectory) -> OutcomeKind:
    if outcome.kind is not OutcomeKind.GLOBAL_POSITIVE:
        return outcome.kind
    # survivors are assigned by the final slope of u
    return OutcomeKind.BLOW_UP if trajectory.states[-1, 1] > 0 else OutcomeKind.HITS_ZERO


@dataclass
class SeparatrixResult:
    """Bisection estimate of the separatrix value of Delta u(0)."""
    beta1_hat: float
    width: float
    iterations: int
    lo: float
    hi: float

    def to_dict(self) -> dict:
        return {"beta1_hat": self.beta1_hat, "width": self.width, "iterations": self.iterations}


def separatrix_bisect(dims: Dimensions, alpha: float, bracket: Tuple[float, float], iters: int = 50,
                      r_max: float = SHOOT_DEFAULTS["bisect_horizon"], tol: float = SHOOT_DEFAULTS["tol"],
                      blow_cap: float = SHOOT_DEFAULTS["blow_cap"]) -> SeparatrixResult:
    """
    Bisect for the separatrix value beta_1 of beta = Delta u(0), k = 2.

    Args:
        dims: Dimensions with k = 2
        alpha: u(0)
        bracket: (beta_lo, beta_hi) with beta_lo hitting zero and beta_hi blowing up
        iters: Number of halvings

    Returns:
        SeparatrixResult with the final midpoint and bracket width

    Raises:
        InvalidBracketError: The bracket ends do not classify as HitsZero / BlowUp
    """
    if dims.k != 2:
        raise DomainError(f"separatrix bisection needs k = 2, got k = {dims.k}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise InvalidBracketError(f"bracket must be increasing, got ({lo}, {hi})")

    def side(beta: float) -> OutcomeKind:
        trajectory, outcome = ivp_integrate(_params_for(dims, alpha, beta, r_max, tol, blow_cap))
        return _side(outcome, trajectory)

    lo_side, hi_side = side(lo), side(hi)
    if lo_side is not OutcomeKind.HITS_ZERO or hi_side is not OutcomeKind.BLOW_UP:
        raise InvalidBracketError(
            f"bracket ends classify as {lo_side.value} / {hi_side.value}, need hits_zero / blow_up"
        )
    taken = 0
    for step in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        taken = step + 1
        if side(mid) is OutcomeKind.HITS_ZERO:
            lo = mid
        else:
            hi = mid
        logger.debug("bisection step %d: [%.17g, %.17g]", step, lo, hi)
    return SeparatrixResult(0.5 * (lo + hi), hi - lo, taken, lo, hi)


@dataclass
class ScanRow:
    beta: float
    outcome: TrajectoryOutcome
    u_end: float

    def to_dict(self) -> dict:
        return {"beta": self.beta, **self.outcome.to_dict(), "u_end": self.u_end}


def beta_scan(dims: Dimensions, alpha: float, betas: Sequence[float], r_max: float,
              p_exp: Optional[float] = None, tol: float = SHOOT_DEFAULTS["tol"],
              blow_cap: float = SHOOT_DEFAULTS["blow_cap"], threads: int = 1) -> List[ScanRow]:
    """
    Outcomes over a grid of beta = Delta u(0) for k = 2.

    With p_exp the shot is hyperbolic (ball radius, pullback weight);
    otherwise Euclidean.
    """
    if dims.k != 2:
        raise DomainError(f"beta scans need k = 2, got k = {dims.k}")

    def one(beta: float) -> ScanRow:
        params = _params_for(dims, alpha, float(beta), r_max, tol, blow_cap)
        if p_exp is None:
            trajectory, outcome = ivp_integrate(params)
        else:
            trajectory, outcome = hyperbolic_shoot(params, p_exp)
        return ScanRow(float(beta), outcome, float(trajectory.states[-1, 0]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, betas))
    return [one(b) for b in betas]


def subcritical_scan(dims: Dimensions, alpha: float, p_exp: float, betas: Sequence[float],
                     threads: int = 1) -> List[ScanRow]:
    """Hyperbolic shooting over a beta grid for a subcritical exponent, up to s = 1 - 1e-3."""
    if not p_exp < dims.critical_exponent:
        raise DomainError(f"p_exp = {p_exp} is not subcritical")
    rows = beta_scan(dims, alpha, betas, r_max=1.0, p_exp=p_exp, threads=threads)
    survivors = sum(row.outcome.kind is OutcomeKind.GLOBAL_POSITIVE for row in rows)
    logger.info("subcritical scan p = %.6g: %d of %d trajectories reach the horizon",
                p_exp, survivors, len(rows))
    return rows
