"""
Input Validation Module
=======================

Validates numerical inputs before they reach the geometry, operator and
shooting code, and defines the exception hierarchy every module raises.

Validators return ``(is_valid, error_message)`` pairs so callers can decide
whether to raise or report. ``ensure`` turns a failed check into the right
exception type.

Functions:
    - validate_dimensions: Check the (n, k) pair
    - validate_ball_point: Check a point of the open unit ball
    - validate_hypergeometric_args: Check (a, b, c, z) for the Gauss series
    - validate_hls_params: Check (n, lam) for the HLS inequality
    - validate_shoot_params: Check initial data and integrator settings
    - validate_family_params: Check (alpha, beta) of the solution family
    - ensure: Raise the given exception type when a check fails
    - exit_code_for: Map an exception to a CLI exit code
"""

import math
from typing import Optional, Sequence, Tuple, Type

import numpy as np

# Points closer than this to the unit sphere are rejected, never clamped
BALL_EDGE_MARGIN = 1e-12

# Relative tolerance for the hyperboloid constraint -x0^2 + |xs|^2 = -1
HYPERBOLOID_TOL = 1e-12

SHOOT_LIMITS = {
    "tol_max": 1e-6,
    "blow_cap_min": 1e6,
}

EXIT_CODES = {
    "ok": 0,
    "flags": 2,
    "numerical": 3,
    "coverage": 4,
}


class GJMSError(Exception):
    """Base class for every error raised by hypgjms."""


class DomainError(GJMSError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """A Gamma-type function was evaluated at a pole."""


class DivergenceError(DomainError):
    """A series was requested where it diverges."""


class GridTooCoarseError(DomainError):
    """Too few grid points to apply the requested stencils."""


class BoundaryProximityError(DomainError):
    """A ball-radius grid reaches too close to the conformal boundary."""


class CoverageError(GJMSError):
    """A profile was evaluated outside its sampled range."""


class NumericalError(GJMSError):
    """A numerical procedure failed to produce a trustworthy result."""


class IntegrationFailure(NumericalError):
    """The ODE integrator stopped before reaching an outcome."""


class SingularCellError(NumericalError):
    """A quadrature cell landed on a kernel singularity."""


class InvalidBracketError(GJMSError, ValueError):
    """Both ends of a bisection bracket classify the same way."""


class TailDominanceWarning(UserWarning):
    """The truncated tail of an integral is not negligible."""


class NonMonotoneScanWarning(UserWarning):
    """A parameter scan crossed a sign threshold more than once."""


class SignMixingWarning(UserWarning):
    """A quantity expected to keep one sign changed sign."""


def _is_finite_number(value) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def validate_dimensions(n, k) -> Tuple[bool, Optional[str]]:
    """
    Validate the (n, k) pair that fixes every exponent in the toolkit.

    Args:
        n: Spatial dimension
        k: Operator order parameter (P_k has order 2k)

    Returns:
        Tuple of (is_valid, error_message)
    """
    for name, value in (("n", n), ("k", k)):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return False, f"{name} must be an integer, got {value!r}"
    if n < 3:
        return False, f"n must be at least 3, got {n}"
    if k < 1:
        return False, f"k must be at least 1, got {k}"
    if n <= 2 * k:
        return False, f"need n > 2k, got n={n}, k={k}"
    return True, None


def validate_ball_point(coords: Sequence[float]) -> Tuple[bool, Optional[str]]:
    """
    Validate Euclidean coordinates of a point in the open unit ball.

    Args:
        coords: Coordinate vector

    Returns:
        Tuple of (is_valid, error_message)
    """
    arr = np.asarray(coords, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        return False, "ball point must be a non-empty 1-D vector"
    if not np.all(np.isfinite(arr)):
        return False, "ball point has non-finite coordinates"
    norm = float(np.linalg.norm(arr))
    if norm >= 1.0 - BALL_EDGE_MARGIN:
        return False, f"ball point norm {norm!r} is not below 1 - {BALL_EDGE_MARGIN}"
    return True, None


def validate_hypergeometric_args(a, b, c, z) -> Tuple[bool, Optional[str]]:
    """
    Validate arguments of the Gauss series on the real segment [0, 1].

    Returns:
        Tuple of (is_valid, error_message)
    """
    for name, value in (("a", a), ("b", b), ("c", c), ("z", z)):
        if not _is_finite_number(value):
            return False, f"{name} must be a finite real, got {value!r}"
    if _is_nonpositive_integer(c):
        return False, f"c must not be a nonpositive integer, got {c}"
    if z < 0.0 or z > 1.0:
        return False, f"z must lie in [0, 1], got {z}"
    if z == 1.0 and c - a - b <= 0:
        return False, f"series diverges at z = 1 when c - a - b = {c - a - b} <= 0"
    return True, None


def validate_hls_params(n, lam) -> Tuple[bool, Optional[str]]:
    """
    Validate the dimension and kernel exponent of the HLS inequality.

    Returns:
        Tuple of (is_valid, error_message)
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        return False, f"n must be a positive integer, got {n!r}"
    if not _is_finite_number(lam):
        return False, f"lam must be a finite real, got {lam!r}"
    if not 0.0 < lam < n:
        return False, f"lam must lie in (0, n) = (0, {n}), got {lam}"
    return True, None


def validate_shoot_params(alpha, r_max, tol, blow_cap) -> Tuple[bool, Optional[str]]:
    """
    Validate initial value and integrator settings for radial shooting.

    Returns:
        Tuple of (is_valid, error_message)
    """
    for name, value in (("alpha", alpha), ("r_max", r_max), ("tol", tol), ("blow_cap", blow_cap)):
        if not _is_finite_number(value):
            return False, f"{name} must be a finite real, got {value!r}"
    if alpha <= 0:
        return False, f"alpha must be positive, got {alpha}"
    if r_max <= 0:
        return False, f"r_max must be positive, got {r_max}"
    if not 0 < tol <= SHOOT_LIMITS["tol_max"]:
        return False, f"tol must lie in (0, {SHOOT_LIMITS['tol_max']}], got {tol}"
    if blow_cap < SHOOT_LIMITS["blow_cap_min"]:
        return False, f"blow_cap must be at least {SHOOT_LIMITS['blow_cap_min']}, got {blow_cap}"
    return True, None


def validate_family_params(alpha, beta) -> Tuple[bool, Optional[str]]:
    """
    Validate (alpha, beta) of u = alpha / (cosh^2(r/2) + beta)^((n-2k)/2).

    beta must exceed -1 so the denominator stays positive at r = 0.

    Returns:
        Tuple of (is_valid, error_message)
    """
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not _is_finite_number(value):
            return False, f"{name} must be a finite real, got {value!r}"
    if alpha <= 0:
        return False, f"alpha must be positive, got {alpha}"
    if beta <= -1:
        return False, f"beta must exceed -1, got {beta}"
    return True, None


def ensure(check: Tuple[bool, Optional[str]], error: Type[Exception] = DomainError) -> None:
    """
    Raise ``error`` with the check's message when the check failed.

    Example:
        >>> ensure(validate_dimensions(6, 2))
        >>> ensure(validate_dimensions(4, 2))
        Traceback (most recent call last):
        ...
        hypgjms.validation.DomainError: need n > 2k, got n=4, k=2
    """
    is_valid, message = check
    if not is_valid:
        raise error(message)


def exit_code_for(exc: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    2 for bad flags or brackets, 3 for numerical failures, 4 for coverage and
    domain failures raised while computing.
    """
    if isinstance(exc, InvalidBracketError):
        return EXIT_CODES["flags"]
    if isinstance(exc, NumericalError):
        return EXIT_CODES["numerical"]
    if isinstance(exc, (CoverageError, DomainError)):
        return EXIT_CODES["coverage"]
    return EXIT_CODES["numerical"]
