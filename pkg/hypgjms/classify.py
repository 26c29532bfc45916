"""
Solution Family Module
======================

The closed-form family of positive radial solutions

    u(r) = alpha / (cosh^2(r/2) + beta)^((n-2k)/2),   alpha > 0, beta > -1,

and the checks built on it: P_k u / u^p is constant (the Q-curvature
equation P_k u = (n-2k)/2 Q u^p), the exponent can be recovered from the
numbers alone, and perturbed profiles are detected by a non-constant
Q-tilde. In ball coordinates the weighted family W^((n-2k)/2) u is a
Euclidean bubble, which gives the closed form

    c_hat = c_{n,k} alpha^(-4k/(n-2k)) (-beta (1 + beta))^k.

Classes:
    - FamilyParams: (alpha, beta, dims)
    - PurePower / Tabulated: Nonlinearities f(t)
    - QResidual: Both-route ratio statistics
    - PowerFit: Fitted (c, p)

Functions:
    - family_eval / family_profile: Evaluate the family
    - family_constant / family_q: Closed-form c_hat and Q
    - family_critical_lambda: Radius of the sphere fixing the family
    - residual_Q: Ratio constancy by both operator routes
    - infer_power: Log-log fit of P_k u against u
    - qtilde_profile / qtilde_constancy: Q-tilde of an arbitrary profile
    - constant_q: Q of the Poincare metric itself (u = 1)
    - apply_nonlinearity: f(u) as a profile
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .gjms import OperatorStencil, apply_Pk, euclid_pullback_Pk
from .hgeom import Dimensions
from .kelvin import RadialProfile
from .shoot import bubble_constant
from .validation import DomainError, SignMixingWarning, ensure, validate_family_params

logger = logging.getLogger(__name__)

RESIDUAL_GRID = {
    "r_max": 4.0,
    "spacing": 0.01,        # geodesic spacing at k = 1, doubled per extra factor
    "s_spacing": 0.005,     # ball-radius spacing at k = 1, doubled per extra factor
    "order": 6,
    "core_fraction": 0.5,   # compare where u >= fraction * max u
}

# Profiles below this are not divided by
U_FLOOR = 1e-300


@dataclass(frozen=True)
class FamilyParams:
    """(alpha, beta) of the solution family in dimensions dims."""
    alpha: float
    beta: float
    dims: Dimensions

    def __post_init__(self):
        ensure(validate_family_params(self.alpha, self.beta))

    @property
    def peak(self) -> float:
        """u(0) = alpha / (1 + beta)^((n-2k)/2)."""
        return self.alpha / (1.0 + self.beta) ** self.dims.half_gap

    def scaled(self, mu: float) -> "FamilyParams":
        return FamilyParams(mu * self.alpha, self.beta, self.dims)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, **self.dims.to_dict()}


def family_eval(fp: FamilyParams, r):
    """
    u(r) = alpha / (cosh^2(r/2) + beta)^((n-2k)/2), evaluated in log space.

    Example:
        >>> family_eval(FamilyParams(1.0, 0.0, Dimensions(6, 2)), 0.0)
        1.0
    """
    scalar = np.ndim(r) == 0
    r = np.abs(np.asarray(r, dtype=float))
    half = 0.5 * r
    log_cosh = half + np.log1p(np.exp(-2.0 * half)) - math.log(2.0)
    log_denom = 2.0 * log_cosh + np.log1p(fp.beta * np.exp(-2.0 * log_cosh))
    out = fp.alpha * np.exp(-fp.dims.half_gap * log_denom)
    return float(out) if scalar else out


def family_profile(fp: FamilyParams, grid) -> RadialProfile:
    """The family as an exact, even profile on ``grid``."""
    return RadialProfile.from_function(lambda r: family_eval(fp, r), grid, even=True)


def family_constant(fp: FamilyParams) -> float:
    """Closed-form c_hat with P_k u = c_hat u^p."""
    dims = fp.dims
    return (bubble_constant(dims) * fp.alpha ** (1.0 - dims.critical_exponent)
            * (-fp.beta * (1.0 + fp.beta)) ** dims.k)


def family_q(fp: FamilyParams) -> float:
    """Q = 2 c_hat / (n - 2k)."""
    return 2.0 * family_constant(fp) / (fp.dims.n - 2 * fp.dims.k)


def family_critical_lambda(fp: FamilyParams, d: float = 0.0) -> Optional[float]:
    """
    Radius of the Kelvin sphere, centered at distance d from the family's
    center, that leaves the family unchanged.

    cosh(lambda_0) = cosh(d) (1 + a^2) / (1 - a^2) with a^2 = (1 + beta) / (-beta),
    which requires beta < -1/2. Returns None otherwise.
    """
    if d < 0:
        raise DomainError(f"center offset must be nonnegative, got {d}")
    if not fp.beta < -0.5:
        return None
    a2 = (1.0 + fp.beta) / (-fp.beta)
    return math.acosh(math.cosh(d) * (1.0 + a2) / (1.0 - a2))


def constant_q(dims: Dimensions) -> float:
    """
    Q of u = 1: P_k 1 = prod_j (j(j-1) - n(n-2)/4) = (-1)^k c_{n,k}, times 2/(n-2k).
    """
    return (-1) ** dims.k * bubble_constant(dims) * 2.0 / (dims.n - 2 * dims.k)


@dataclass
class QResidual:
    """Ratio P_k u / u^p measured by both operator routes on the core region."""
    c_hat: float             # geodesic route
    c_hat_euclid: float      # ball-model route
    c_exact: float
    constancy: float         # max deviation of either ratio from its mean, over norm
    two_route: float         # |c_hat - c_hat_euclid| / norm
    norm: float
    q_hat: float             # 2 c_hat / (n - 2k)

    def to_dict(self) -> dict:
        return {
            "c_hat": self.c_hat,
            "c_hat_euclid": self.c_hat_euclid,
            "c_exact": self.c_exact,
            "constancy": self.constancy,
            "two_route": self.two_route,
            "q_hat": self.q_hat,
        }


def _stencil(r_max: float, spacing: float, order: int) -> OperatorStencil:
    count = int(round(r_max / spacing + 0.5))
    return OperatorStencil.staggered(r_max, count, order)


def _spacings(k: int, spacing: Optional[float], s_spacing: Optional[float]):
    factor = 2.0 ** (k - 1)
    return (
        spacing if spacing is not None else RESIDUAL_GRID["spacing"] * factor,
        s_spacing if s_spacing is not None else RESIDUAL_GRID["s_spacing"] * factor,
    )


def geodesic_ratio(fp: FamilyParams, r_max: float, spacing: float, order: int):
    """(grid, P_k u, u) by the geodesic route on a staggered grid."""
    u = family_profile(fp, _stencil(r_max, spacing, order).grid())
    pk = apply_Pk(u, fp.dims, order)
    return pk.grid, pk.values, u.values[: pk.grid.size]


def euclid_ratio(fp: FamilyParams, r_max: float, s_spacing: float, order: int):
    """(ball grid, P_k u, u) by the ball-model route up to s = tanh(r_max / 2)."""
    s_max = math.tanh(0.5 * r_max)
    u_s = RadialProfile.from_function(
        lambda s: family_eval(fp, 2.0 * np.arctanh(s)), _stencil(s_max, s_spacing, order).grid(), even=True
    )
    pk = euclid_pullback_Pk(u_s, fp.dims, order)
    return pk.grid, pk.values, u_s.values[: pk.grid.size]


def residual_Q(fp: FamilyParams, r_max: float = RESIDUAL_GRID["r_max"], spacing: Optional[float] = None,
               s_spacing: Optional[float] = None, order: int = RESIDUAL_GRID["order"],
               core_fraction: float = RESIDUAL_GRID["core_fraction"]) -> QResidual:
    """
    Constancy of P_k u / u^p for the family, by both operator routes.

    Ratios are compared where u >= core_fraction * u(0). Deviations are
    normalized by max(|c_hat|, 1e-6 c_{n,k} alpha^(1-p)) so that the
    beta = 0 case, where c_hat vanishes, is measured on the natural scale.

    Args:
        fp: Family parameters
        r_max: Geodesic extent of the grids
        spacing: Geodesic grid spacing (default 0.01 * 2^(k-1))
        s_spacing: Ball-radius grid spacing (default 0.005 * 2^(k-1))
        order: Finite-difference order
        core_fraction: Core threshold relative to the peak

    Returns:
        QResidual
    """
    dims = fp.dims
    p = dims.critical_exponent
    h, hs = _spacings(dims.k, spacing, s_spacing)
    threshold = core_fraction * fp.peak

    _, pk_r, u_r = geodesic_ratio(fp, r_max, h, order)
    core_r = u_r >= threshold
    ratio_r = pk_r[core_r] / u_r[core_r] ** p

    _, pk_s, u_s = euclid_ratio(fp, r_max, hs, order)
    core_s = u_s >= threshold
    ratio_s = pk_s[core_s] / u_s[core_s] ** p

    c_hat = float(np.mean(ratio_r))
    c_hat_euclid = float(np.mean(ratio_s))
    natural = 1e-6 * abs(bubble_constant(dims)) * fp.alpha ** (1.0 - p)
    norm = max(abs(c_hat), natural)
    constancy = max(
        float(np.max(np.abs(ratio_r - c_hat))),
        float(np.max(np.abs(ratio_s - c_hat_euclid))),
    ) / norm
    result = QResidual(
        c_hat=c_hat,
        c_hat_euclid=c_hat_euclid,
        c_exact=family_constant(fp),
        constancy=constancy,
        two_route=abs(c_hat - c_hat_euclid) / norm,
        norm=norm,
        q_hat=2.0 * c_hat / (dims.n - 2 * dims.k),
    )
    logger.debug("residual_Q %s: %s", fp.to_dict(), result.to_dict())
    return result


@dataclass
class PowerFit:
    """Least-squares fit log|P_k u| = log|c| + p log u."""
    c: float
    p: float
    sign_mixed: bool
    points: int

    def to_dict(self) -> dict:
        return {"c": self.c, "p": self.p, "sign_mixed": self.sign_mixed, "points": self.points}


def infer_power(fp: FamilyParams, r_max: float = RESIDUAL_GRID["r_max"], spacing: Optional[float] = None,
                order: int = RESIDUAL_GRID["order"], core_fraction: float = 0.2) -> PowerFit:
    """
    Recover (c, p) in P_k u = c u^p from the discrete operator alone.

    Raises:
        DomainError: beta = 0, where P_k u vanishes identically
    """
    if fp.beta == 0.0:
        raise DomainError("beta = 0 gives P_k u = 0; there is no power to fit")
    h, _ = _spacings(fp.dims.k, spacing, None)
    _, pk, u = geodesic_ratio(fp, r_max, h, order)
    core = u >= core_fraction * fp.peak
    pk, u = pk[core], u[core]
    signs = np.sign(pk)
    sign_mixed = bool(np.any(signs != signs[0]))
    if sign_mixed:
        logger.warning("P_k u changes sign on the fit region; fitting |P_k u|")
        warnings.warn("P_k u changes sign on the fit region", SignMixingWarning, stacklevel=2)
    slope, intercept = np.polyfit(np.log(u), np.log(np.abs(pk)), 1)
    sign = float(np.sign(np.sum(pk)))
    return PowerFit(c=sign * float(np.exp(intercept)), p=float(slope), sign_mixed=sign_mixed,
                    points=int(u.size))


def qtilde_profile(u: RadialProfile, dims: Dimensions,
                   order: int = RESIDUAL_GRID["order"]) -> RadialProfile:
    """
    Q-tilde(r) = P_k u / ((n-2k)/2 u^p) for a positive profile on a uniform grid.

    Raises:
        DomainError: u drops below 1e-300 on the grid
    """
    if np.any(u.values < U_FLOOR):
        raise DomainError("Q-tilde needs a positive profile above 1e-300")
    pk = apply_Pk(u, dims, order)
    base = u.values[np.searchsorted(u.grid, pk.grid[0]):][: pk.grid.size]
    values = pk.values / (dims.half_gap * base ** dims.critical_exponent)
    return pk.with_values(pk.grid, values)


def qtilde_constancy(q: Union[RadialProfile, np.ndarray]) -> float:
    """max |Q| / min |Q| - 1."""
    values = np.abs(q.values if isinstance(q, RadialProfile) else np.asarray(q, dtype=float))
    return float(values.max() / values.min() - 1.0)


class NonlinearityKind(Enum):
    PURE_POWER = "pure_power"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class PurePower:
    """f(t) = c t^p."""
    c: float
    p: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise DomainError(f"c must be finite, got {self.c}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")

    @property
    def kind(self) -> NonlinearityKind:
        return NonlinearityKind.PURE_POWER

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.c * np.sign(t) * np.abs(t) ** self.p


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear nondecreasing f with f(0) = 0, constant beyond the table."""
    t: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        f = np.array(self.f, dtype=float)
        if t.ndim != 1 or t.shape != f.shape or t.size < 2:
            raise DomainError("tabulated nonlinearity needs matching 1-D tables")
        if np.any(np.diff(t) <= 0):
            raise DomainError("tabulated t must be strictly increasing")
        if np.any(np.diff(f) < 0):
            raise DomainError("tabulated f must be nondecreasing")
        if t[0] != 0.0 or f[0] != 0.0:
            raise DomainError("tabulated f must start at f(0) = 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "f", f)

    @property
    def kind(self) -> NonlinearityKind:
        return NonlinearityKind.TABULATED

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.t, self.f)


NonlinearitySpec = Union[PurePower, Tabulated]


def apply_nonlinearity(spec: NonlinearitySpec, u: RadialProfile) -> RadialProfile:
    """f(u) on u's grid; exact profiles stay exact."""
    values = spec(u.values)
    if u.interp == "exact":
        inner = u.func
        return RadialProfile(u.grid, values, interp="exact", even=u.even,
                             func=lambda r, _f=inner: spec(_f(r)))
    return u.with_values(u.grid, values)
