"""
Kelvin Transform Module
=======================

The hyperbolic Kelvin transform across a geodesic sphere of radius lambda,
acting on radial profiles about the sphere's center.

With T = tanh(lambda/2) the inversion radius map is

    phi_lambda(r) = 2 artanh( T^2 / tanh(r/2) ),   r > lambda_sharp,

where lambda_sharp = 2 artanh(T^2) is the limit sphere. phi is evaluated in
the cancellation-free form

    phi = lambda_sharp + log(1 - e^-(r + lambda_sharp)) - log(1 - e^-(r - lambda_sharp)).

The Jacobian is |J| = b(r)^n with

    b(r) = T^2 csch^2(r/2) / (1 - T^4 coth^2(r/2)) = sinh(lambda_sharp) / (cosh r - cosh lambda_sharp),

and the transform of u is u_lambda(r) = |J(r)|^((n-2k)/(2n)) u(phi_lambda(r)).

Classes:
    - RadialProfile: Immutable sampled radial function with interpolation
    - KelvinSphere: Inversion radius with derived limit sphere

Functions:
    - phi_lambda: Inversion radius map
    - phi_ode_residual: Finite-difference residual of phi' = -sinh(phi)/sinh(r)
    - jacobian: |J| from the closed form with the factored denominator
    - jacobian_alt: |J| = (T cosh(phi/2) / sinh(r/2))^(2n)
    - limit_sphere_charge_factor: (sinh(lambda_sharp)/2)^((n-2k)/2)
    - kelvin_transform: u -> u_lambda on radial profiles
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .hgeom import Dimensions
from .validation import CoverageError, DomainError

logger = logging.getLogger(__name__)

INTERP_RULES = ("cubic", "exact")

# Evaluation this far outside the sampled range (relative) is clipped, not rejected
COVERAGE_SLACK = 1e-9

# Default ODE-residual step, relative to max(1, r)
ODE_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """
    A sampled radial function r -> u(r).

    ``interp`` selects how off-grid values are produced: "cubic" uses a
    cubic spline through the samples, "exact" calls ``func``, the analytic
    function the samples were taken from. Even profiles are mirrored about
    r = 0, so they evaluate down to the origin and supply ghost values to
    finite differences. Evaluation outside the range raises CoverageError.
    """
    grid: np.ndarray
    values: np.ndarray
    interp: str = "cubic"
    even: bool = False
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _spline: Optional[CubicSpline] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise DomainError("profile grid and values must be 1-D arrays of equal length")
        if grid.size < 2:
            raise DomainError("profile needs at least two samples")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("profile grid must be strictly increasing")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(grid)):
            raise DomainError("profile samples must be finite")
        if self.interp not in INTERP_RULES:
            raise DomainError(f"interp must be one of {INTERP_RULES}, got {self.interp!r}")
        if self.interp == "exact" and self.func is None:
            raise DomainError("an exact profile needs its analytic function")
        if self.even and grid[0] < 0:
            raise DomainError("an even profile is sampled on r >= 0")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.interp == "cubic":
            object.__setattr__(self, "_spline", self._build_spline())

    def _build_spline(self) -> CubicSpline:
        if not self.even:
            return CubicSpline(self.grid, self.values)
        start = 1 if self.grid[0] == 0.0 else 0
        mirrored_r = np.concatenate([-self.grid[start:][::-1], self.grid])
        mirrored_u = np.concatenate([self.values[start:][::-1], self.values])
        return CubicSpline(mirrored_r, mirrored_u)

    @property
    def domain(self) -> Tuple[float, float]:
        """Closed interval on which the profile may be evaluated."""
        lo = 0.0 if self.even else float(self.grid[0])
        return lo, float(self.grid[-1])

    @property
    def spacing(self) -> Optional[float]:
        """Grid spacing if the grid is uniform (relative tolerance 1e-9), else None."""
        steps = np.diff(self.grid)
        h = float(steps.mean())
        if np.all(np.abs(steps - h) <= 1e-9 * h):
            return h
        return None

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __len__(self) -> int:
        return int(self.grid.size)

    def covers(self, r) -> bool:
        lo, hi = self.domain
        r = np.asarray(r, dtype=float)
        return bool(np.all(r >= lo - self._slack(lo)) and np.all(r <= hi + self._slack(hi)))

    @staticmethod
    def _slack(bound: float) -> float:
        return COVERAGE_SLACK * max(1.0, abs(bound))

    def __call__(self, r):
        """Evaluate the profile; raises CoverageError outside the domain."""
        scalar = np.ndim(r) == 0
        r = np.asarray(r, dtype=float)
        lo, hi = self.domain
        if not self.covers(r):
            raise CoverageError(
                f"profile on [{lo:.6g}, {hi:.6g}] evaluated on "
                f"[{float(np.min(r)):.6g}, {float(np.max(r)):.6g}]"
            )
        r = np.clip(r, lo, hi)
        if self.interp == "exact":
            out = np.asarray(self.func(r), dtype=float)
        else:
            out = self._spline(r)
        return float(out) if scalar else out

    def with_values(self, grid: np.ndarray, values: np.ndarray,
                    even: Optional[bool] = None) -> "RadialProfile":
        """New cubic profile on a sub-grid, keeping the parity flag by default."""
        return RadialProfile(grid, values, interp="cubic", even=self.even if even is None else even)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], grid, even: bool = False,
                      exact: bool = True) -> "RadialProfile":
        """Sample ``func`` on ``grid``; keep it for exact evaluation unless exact=False."""
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(func(grid), dtype=float)
        if exact:
            return cls(grid, values, interp="exact", even=even, func=func)
        return cls(grid, values, interp="cubic", even=even)

    @classmethod
    def constant(cls, value: float, grid, even: bool = True) -> "RadialProfile":
        """The constant profile u = value."""
        value = float(value)
        return cls.from_function(lambda r: np.full(np.shape(r), value), grid, even=even)


@dataclass(frozen=True)
class KelvinSphere:
    """Inversion sphere of geodesic radius ``radius`` for a given (n, k)."""
    radius: float
    dims: Dimensions

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"inversion radius must be positive, got {self.radius}")

    @property
    def tanh_half_sq(self) -> float:
        """T^2 = tanh^2(lambda/2)."""
        return math.tanh(0.5 * self.radius) ** 2

    @property
    def lambda_sharp(self) -> float:
        """Limit-sphere radius 2 artanh(T^2) = log cosh(lambda)."""
        return math.log1p(2.0 * math.sinh(0.5 * self.radius) ** 2)

    @property
    def kelvin_exponent(self) -> float:
        """(n - 2k) / (2n), the exponent of |J| in the transform."""
        return (self.dims.n - 2 * self.dims.k) / (2.0 * self.dims.n)

    @property
    def operator_exponent(self) -> float:
        """(n + 2k) / (2n), the exponent of |J| in the covariance of P_k."""
        return (self.dims.n + 2 * self.dims.k) / (2.0 * self.dims.n)

    def to_dict(self) -> dict:
        return {"lambda": self.radius, "lambda_sharp": self.lambda_sharp, **self.dims.to_dict()}


def _outside_limit_sphere(s: KelvinSphere, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= s.lambda_sharp):
        raise DomainError(
            f"Kelvin map is only defined for r > lambda_sharp = {s.lambda_sharp:.17g}"
        )
    return r


def _log_one_minus_exp(x: np.ndarray) -> np.ndarray:
    """log(1 - e^-x) for x > 0."""
    return np.log(-np.expm1(-x))


def phi_lambda(s: KelvinSphere, r):
    """
    Inversion radius map phi_lambda(r) for r > lambda_sharp.

    Example:
        >>> s = KelvinSphere(1.0, Dimensions(6, 2))
        >>> abs(phi_lambda(s, 1.0) - 1.0) < 1e-14
        True
    """
    scalar = np.ndim(r) == 0
    r = _outside_limit_sphere(s, r)
    ls = s.lambda_sharp
    out = ls + _log_one_minus_exp(r + ls) - _log_one_minus_exp(r - ls)
    return float(out) if scalar else out


def phi_ode_residual(s: KelvinSphere, r, step: Optional[float] = None):
    """
    Residual phi'_num(r) + sinh(phi(r)) / sinh(r) with a central difference.

    The default step is 1e-6 * max(1, r).
    """
    scalar = np.ndim(r) == 0
    r = _outside_limit_sphere(s, r)
    h = step if step is not None else ODE_STEP * np.maximum(1.0, r)
    if np.any(r - h <= s.lambda_sharp):
        raise DomainError("finite-difference step crosses the limit sphere")
    slope = (phi_lambda(s, r + h) - phi_lambda(s, r - h)) / (2.0 * h)
    out = slope + np.sinh(phi_lambda(s, r)) / np.sinh(r)
    return float(out) if scalar else out


def _jacobian_base(s: KelvinSphere, r: np.ndarray) -> np.ndarray:
    # T^2 csch^2(r/2) / ((1 - x)(1 + x)) with x = T^2 coth(r/2); the two
    # factors are written as sinh((r -/+ lambda_sharp)/2) / (sinh(r/2) cosh(lambda_sharp/2))
    ls = s.lambda_sharp
    half = np.sinh(0.5 * r)
    ch = math.cosh(0.5 * ls)
    one_minus = np.sinh(0.5 * (r - ls)) / (half * ch)
    one_plus = np.sinh(0.5 * (r + ls)) / (half * ch)
    return s.tanh_half_sq / (half * half) / (one_minus * one_plus)


def jacobian(s: KelvinSphere, r, power: float = 1.0):
    """
    |J_lambda(r)|^power from the closed form of the Jacobian.

    Args:
        s: Kelvin sphere
        r: Radius or array of radii, r > lambda_sharp
        power: Exponent applied to |J| (the transform uses (n-2k)/(2n))

    Returns:
        |J|^power
    """
    scalar = np.ndim(r) == 0
    r = _outside_limit_sphere(s, r)
    out = _jacobian_base(s, r) ** (s.dims.n * power)
    return float(out) if scalar else out


def jacobian_alt(s: KelvinSphere, r, power: float = 1.0):
    """|J|^power from (T cosh(phi/2) / sinh(r/2))^(2n)."""
    scalar = np.ndim(r) == 0
    r = _outside_limit_sphere(s, r)
    t = math.sqrt(s.tanh_half_sq)
    base = t * np.cosh(0.5 * phi_lambda(s, r)) / np.sinh(0.5 * r)
    out = base ** (2.0 * s.dims.n * power)
    return float(out) if scalar else out


def limit_sphere_charge_factor(s: KelvinSphere) -> float:
    """
    Lambda_lambda = (T^2 / (1 - T^4))^((n-2k)/2) = (sinh(lambda_sharp)/2)^((n-2k)/2).

    For a profile fixed by the transform, (sinh(r/2))^(n-2k) u(r) tends to
    Lambda_lambda * u(lambda_sharp) as r grows.
    """
    # T^2 / (1 - T^4) = sinh^2(lambda) / (4 cosh(lambda))
    lam = s.radius
    return (math.sinh(lam) * math.tanh(lam) / 4.0) ** s.dims.half_gap


def kelvin_transform(s: KelvinSphere, u: RadialProfile, grid: Optional[np.ndarray] = None) -> RadialProfile:
    """
    Kelvin transform u_lambda(r) = |J(r)|^((n-2k)/(2n)) u(phi_lambda(r)).

    Args:
        s: Kelvin sphere centered at the profile's center
        u: Profile to transform
        grid: Output radii (> lambda_sharp). By default, the images under
            phi of the input nodes outside the limit sphere, so every output
            node maps onto an input node.

    Returns:
        The transformed profile; exact inputs give exact outputs

    Raises:
        CoverageError: phi maps an output radius outside u's range
    """
    ls = s.lambda_sharp
    if grid is None:
        sources = u.grid[u.grid > ls]
        if sources.size < 2:
            raise CoverageError("profile has fewer than two samples outside the limit sphere")
        out_grid = phi_lambda(s, sources)[::-1]
        if np.any(np.diff(out_grid) <= 0):
            # distinct far-out nodes can collapse onto one image
            keep = np.concatenate([[True], np.diff(out_grid) > 0])
            out_grid = out_grid[keep]
    else:
        out_grid = _outside_limit_sphere(s, grid)
    images = phi_lambda(s, out_grid)
    if not u.covers(images):
        raise CoverageError(
            f"phi_lambda maps the output grid to [{images.min():.6g}, {images.max():.6g}], "
            f"outside the profile range {u.domain}"
        )
    power = s.kelvin_exponent
    values = jacobian(s, out_grid, power) * u(images)
    if u.interp == "exact":
        inner = u.func

        def transformed(r, _s=s, _inner=inner, _power=power):
            r = np.asarray(r, dtype=float)
            return jacobian(_s, r, _power) * _inner(phi_lambda(_s, r))

        return RadialProfile(out_grid, values, interp="exact", func=transformed)
    return RadialProfile(out_grid, values, interp="cubic")
