"""
Hyperbolic Geometry Module
==========================

Geometry primitives for hyperbolic space H^n in the Poincare ball model,
which is the model of record, and in the hyperboloid model, which hosts the
foliation isometries (boosts A_t and the reflections I_t = A_t o I o A_{-t}).

Distances are computed in half-angle form,

    rho = 2 asinh( |x - y| / sqrt((1 - |x|^2)(1 - |y|^2)) ),

which equals the textbook arccosh expression but keeps full relative
accuracy when the points are close.

Classes:
    - Dimensions: The (n, k) pair with n > 2k
    - BallPoint: A point of the open unit ball
    - HyperboloidPoint: A point of the upper sheet of -x0^2 + |xs|^2 = -1

Functions:
    - ball_distance: Geodesic distance in the ball model
    - law_of_cosines: Distance to the origin of a point in polar coordinates
      about an offset center
    - ball_to_hyperboloid / hyperboloid_to_ball: Model conversion
    - minkowski_form: The Lorentzian bilinear form g
    - hyperboloid_distance: arccosh(-g(X, Y))
    - boost: Hyperbolic rotation A_t in the (x0, x1) plane
    - reflect_foliation: Reflection I_t across the leaf U_t
    - leaf_coordinate / on_leaf: Locate a point in the foliation
    - sphere_area: Area of the unit sphere S^(n-1)
    - euclidean_ball_volume: Volume of a Euclidean ball
    - volume_ball: Volume of a geodesic ball of radius r
    - ball_volume_density: Ball-model volume element (2 / (1 - |x|^2))^n
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .quadrature import composite_gauss_legendre, uniform_breaks
from .specfun import log_gamma
from .validation import (
    HYPERBOLOID_TOL,
    DomainError,
    ensure,
    validate_ball_point,
    validate_dimensions,
)

VOLUME_QUADRATURE = {
    "order": 64,
    "panel_width": 4.0,
}


@dataclass(frozen=True)
class Dimensions:
    """The dimension n and operator order parameter k, with n > 2k."""
    n: int
    k: int

    def __post_init__(self):
        ensure(validate_dimensions(self.n, self.k))

    @property
    def half_gap(self) -> float:
        """(n - 2k) / 2, the decay exponent of the solution family."""
        return (self.n - 2 * self.k) / 2.0

    @property
    def critical_exponent(self) -> float:
        """(n + 2k) / (n - 2k)."""
        return (self.n + 2 * self.k) / (self.n - 2 * self.k)

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k}


@dataclass(frozen=True, eq=False)
class BallPoint:
    """Euclidean coordinates of a point with norm < 1 - 1e-12."""
    coords: np.ndarray

    def __post_init__(self):
        ensure(validate_ball_point(self.coords))
        arr = np.array(self.coords, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    @classmethod
    def origin(cls, n: int) -> "BallPoint":
        return cls(np.zeros(n))


@dataclass(frozen=True, eq=False)
class HyperboloidPoint:
    """A point (x0, xs) with x0 > 0 and -x0^2 + |xs|^2 = -1."""
    x0: float
    xs: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        x0 = float(self.x0)
        if not (np.isfinite(x0) and np.all(np.isfinite(xs))):
            raise DomainError("hyperboloid point has non-finite coordinates")
        if x0 <= 0:
            raise DomainError(f"hyperboloid point needs x0 > 0, got {x0}")
        defect = -x0 * x0 + float(xs @ xs) + 1.0
        if abs(defect) > HYPERBOLOID_TOL * max(1.0, x0 * x0):
            raise DomainError(f"point is off the hyperboloid (defect {defect:.3e})")
        xs.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xs", xs)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.x0], self.xs])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "HyperboloidPoint":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[0], vec[1:])


def _coords(point: Union[BallPoint, np.ndarray]) -> np.ndarray:
    if isinstance(point, BallPoint):
        return point.coords
    return BallPoint(point).coords


def _one_minus_norm_sq(x: np.ndarray) -> float:
    r = float(np.linalg.norm(x))
    return (1.0 - r) * (1.0 + r)


def ball_distance(x: Union[BallPoint, np.ndarray], y: Union[BallPoint, np.ndarray]) -> float:
    """
    Geodesic distance between two points of the Poincare ball.

    Args:
        x: First point
        y: Second point

    Returns:
        rho(x, y) >= 0

    Raises:
        DomainError: A point is not strictly inside the ball

    Example:
        >>> round(ball_distance(np.array([0.5, 0.0]), np.zeros(2)), 10)
        1.0986122887
    """
    xc = _coords(x)
    yc = _coords(y)
    if xc.shape != yc.shape:
        raise DomainError(f"points have different dimensions {xc.shape} and {yc.shape}")
    chord = float(np.linalg.norm(xc - yc))
    scale = math.sqrt(_one_minus_norm_sq(xc) * _one_minus_norm_sq(yc))
    return 2.0 * math.asinh(chord / scale)


def law_of_cosines(d, r, theta):
    """
    Distance from the origin O to the point at polar coordinates (r, theta)
    about a center P with rho(O, P) = d.

    theta is measured at P from the geodesic ray P -> O, so theta = 0 puts
    the point between P and O (distance |d - r|) and theta = pi puts it on
    the far side (distance d + r). Computed as

        sinh^2(rho/2) = sinh^2((d - r)/2) + sinh(d) sinh(r) sin^2(theta/2),

    the half-angle form of cosh rho = cosh d cosh r - sinh d sinh r cos theta.
    Arguments broadcast against each other.
    """
    d = np.asarray(d, dtype=float)
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(d < 0) or np.any(r < 0):
        raise DomainError("law_of_cosines needs nonnegative radii")
    if np.any(theta < -1e-15) or np.any(theta > math.pi + 1e-15):
        raise DomainError("law_of_cosines needs theta in [0, pi]")
    half = np.sinh(0.5 * (d - r))
    inner = half * half + np.sinh(d) * np.sinh(r) * np.sin(0.5 * theta) ** 2
    rho = 2.0 * np.arcsinh(np.sqrt(np.maximum(inner, 0.0)))
    if rho.ndim == 0:
        return float(rho)
    return rho


def ball_to_hyperboloid(x: Union[BallPoint, np.ndarray]) -> HyperboloidPoint:
    """Map a ball point to the hyperboloid: x0 = (1+|x|^2)/(1-|x|^2), xs = 2x/(1-|x|^2)."""
    xc = _coords(x)
    denom = _one_minus_norm_sq(xc)
    x0 = (1.0 + float(xc @ xc)) / denom
    return HyperboloidPoint(x0, 2.0 * xc / denom)


def hyperboloid_to_ball(p: HyperboloidPoint) -> BallPoint:
    """Inverse of ball_to_hyperboloid: x = xs / (1 + x0)."""
    return BallPoint(p.xs / (1.0 + p.x0))


def minkowski_form(p: HyperboloidPoint, q: HyperboloidPoint) -> float:
    """g(X, Y) = -x0 y0 + xs . ys."""
    return -p.x0 * q.x0 + float(p.xs @ q.xs)


def hyperboloid_distance(p: HyperboloidPoint, q: HyperboloidPoint) -> float:
    """Geodesic distance arccosh(-g(X, Y))."""
    return math.acosh(max(1.0, -minkowski_form(p, q)))


def boost(t: float, p: HyperboloidPoint) -> HyperboloidPoint:
    """
    Apply the hyperbolic rotation A_t acting on (x0, x1).

    A_t maps the vertex (1, 0, ..., 0) to (cosh t, sinh t, 0, ..., 0) and
    fixes the remaining coordinates.
    """
    if p.xs.size < 1:
        raise DomainError("boost needs at least one space-like coordinate")
    ch, sh = math.cosh(t), math.sinh(t)
    xs = np.array(p.xs)
    x0 = ch * p.x0 + sh * xs[0]
    xs[0] = sh * p.x0 + ch * p.xs[0]
    return HyperboloidPoint(x0, xs)


def _reflect(p: HyperboloidPoint) -> HyperboloidPoint:
    xs = np.array(p.xs)
    xs[0] = -xs[0]
    return HyperboloidPoint(p.x0, xs)


def reflect_foliation(t: float, p: HyperboloidPoint) -> HyperboloidPoint:
    """Reflection I_t = A_t o I o A_{-t} across the leaf U_t, with I flipping x1."""
    return boost(t, _reflect(boost(-t, p)))


def leaf_coordinate(p: HyperboloidPoint) -> float:
    """The t with p in U_t = A_t({x1 = 0}), i.e. x1 / x0 = tanh t."""
    return math.atanh(p.xs[0] / p.x0)


def on_leaf(t: float, p: HyperboloidPoint, tol: float = 1e-12) -> bool:
    """Whether p lies on the leaf U_t, to a tolerance relative to x0."""
    return abs(p.xs[0] * math.cosh(t) - p.x0 * math.sinh(t)) <= tol * p.x0 * math.cosh(t)


def sphere_area(n: int) -> float:
    """Area of the unit sphere S^(n-1) in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.exp(0.5 * n * math.log(math.pi) - log_gamma(0.5 * n))


def euclidean_ball_volume(n: int, r: float) -> float:
    """Volume of the Euclidean ball of radius r in R^n."""
    return math.exp(0.5 * n * math.log(math.pi) - log_gamma(0.5 * n + 1.0)) * r ** n


def volume_ball(r: float, dims: Union[Dimensions, int], order: int = VOLUME_QUADRATURE["order"]) -> float:
    """
    Hyperbolic volume of a geodesic ball of radius r.

    vol(B_r) = omega_(n-1) * integral_0^r sinh^(n-1)(t) dt, integrated with
    fixed-order Gauss-Legendre panels.

    Args:
        r: Geodesic radius, r >= 0
        dims: Dimensions, or a bare integer dimension n >= 2

    Returns:
        Volume of B_r
    """
    n = dims.n if isinstance(dims, Dimensions) else int(dims)
    if n < 2:
        raise DomainError(f"volume_ball needs n >= 2, got {n}")
    if r < 0 or not math.isfinite(r):
        raise DomainError(f"volume_ball needs a finite radius r >= 0, got {r}")
    if r == 0:
        return 0.0
    nodes, weights = composite_gauss_legendre(
        uniform_breaks(0.0, r, VOLUME_QUADRATURE["panel_width"]), order
    )
    return sphere_area(n) * float(weights @ np.sinh(nodes) ** (n - 1))


def ball_volume_density(x: Union[BallPoint, np.ndarray]) -> float:
    """Ball-model volume element (2 / (1 - |x|^2))^n relative to Lebesgue measure."""
    xc = _coords(x)
    return (2.0 / _one_minus_norm_sq(xc)) ** xc.size
