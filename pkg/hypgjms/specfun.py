"""
Special Functions Module
========================

Log-Gamma and the Gauss hypergeometric function 2F1 on the real segment
z in [0, 1], as needed by the GJMS Green's function and the HLS constant.

2F1 is summed as a power series with term-ratio stopping and compensated
(Neumaier) accumulation. Terminating series (a or b a nonpositive integer)
are exact polynomials. For z > 0.9 the series is re-expanded around z = 1
with the 1 - z connection formula when c - a - b is not an integer; at z = 1
Gauss's summation theorem is used.

Contiguous relation satisfied by the implementation (checked in the tests):

    c(1-z) F(a,b;c;z) - c F(a-1,b;c;z) + (c-b) z F(a,b;c+1;z) = 0

Functions:
    - log_gamma: log|Gamma(x)| with pole detection
    - gamma_ratio: Product/quotient of Gamma values computed in log space
    - gauss_2f1: 2F1 for validated HypergeometricArgs
    - hyp2f1: Scalar convenience wrapper
    - hyp2f1_array: Vectorized 2F1 over an array of z values
    - hyp2f1_partial_sum: Truncated series, for convergence studies
    - euler_transform_2f1: (1-z)^(c-a-b) F(c-a, c-b; c; z)
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import special

from .validation import (
    DivergenceError,
    DomainError,
    PoleError,
    ensure,
    validate_hypergeometric_args,
)

logger = logging.getLogger(__name__)

SERIES_SETTINGS = {
    "rel_stop": 1e-17,      # stop when |term| < rel_stop * |sum|
    "max_terms": 100_000,
    "direct_limit": 0.9,    # above this z the series is re-expanded at z = 1
}


@dataclass(frozen=True)
class HypergeometricArgs:
    """Validated arguments of F(a, b; c; z) with z in [0, 1]."""
    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        if _is_nonpositive_integer(self.c):
            raise PoleError(f"c must not be a nonpositive integer, got {self.c}")
        if self.z == 1.0 and self.c - self.a - self.b <= 0:
            raise DivergenceError(
                f"2F1 diverges at z = 1 when c - a - b = {self.c - self.a - self.b} <= 0"
            )
        ensure(validate_hypergeometric_args(self.a, self.b, self.c, self.z))


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def log_gamma(x: float) -> float:
    """
    Natural log of |Gamma(x)|.

    Args:
        x: Real argument, not a nonpositive integer

    Returns:
        log|Gamma(x)|

    Raises:
        PoleError: x is 0, -1, -2, ...

    Example:
        >>> round(float(np.exp(log_gamma(5.0))), 10)
        24.0
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if not np.isfinite(x):
        raise DomainError(f"log_gamma needs a finite argument, got {x}")
    return float(special.gammaln(x))


def gamma_ratio(numer: Iterable[float], denom: Iterable[float] = ()) -> float:
    """
    Evaluate prod Gamma(numer) / prod Gamma(denom) in log space.

    A pole in the denominator makes the ratio zero; a pole in the numerator
    raises.
    """
    numer = [float(v) for v in numer]
    denom = [float(v) for v in denom]
    if any(_is_nonpositive_integer(v) for v in denom):
        return 0.0
    log_value = 0.0
    sign = 1.0
    for v in numer:
        log_value += log_gamma(v)
        sign *= float(special.gammasgn(v))
    for v in denom:
        log_value -= log_gamma(v)
        sign *= float(special.gammasgn(v))
    return sign * float(np.exp(log_value))


def _series(a: float, b: float, c: float, z: np.ndarray, max_terms: Optional[int] = None,
            exact_terms: Optional[int] = None) -> np.ndarray:
    """
    Sum F(a, b; c; z) term by term for every entry of z.

    Entries drop out of the active set once their last term is below the
    relative stopping threshold. With ``exact_terms`` the first that many
    terms are summed with no early stop.
    """
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    comp = np.zeros_like(z)
    term = np.ones_like(z)
    active = np.arange(z.size)
    flat_z = z.ravel()
    flat_total = total.ravel()
    flat_comp = comp.ravel()
    flat_term = term.ravel()
    limit = max_terms if max_terms is not None else SERIES_SETTINGS["max_terms"]
    if exact_terms is not None:
        limit = exact_terms - 1
    j = 0
    while active.size and j < limit:
        coef = (a + j) * (b + j) / ((c + j) * (1.0 + j))
        t = flat_term[active] * coef * flat_z[active]
        flat_term[active] = t
        s = flat_total[active]
        new = s + t
        # Neumaier compensation
        flat_comp[active] += np.where(np.abs(s) >= np.abs(t), (s - new) + t, (t - new) + s)
        flat_total[active] = new
        j += 1
        if coef == 0.0:
            break
        if exact_terms is None:
            keep = np.abs(t) >= SERIES_SETTINGS["rel_stop"] * np.abs(new + flat_comp[active])
            active = active[keep]
    if exact_terms is None and active.size and j >= limit:
        logger.warning("2F1 series hit the %d-term cap for %d argument(s)", limit, active.size)
    return (flat_total + flat_comp).reshape(z.shape)


def _gauss_sum(a: float, b: float, c: float) -> float:
    """F(a, b; c; 1) by Gauss's summation theorem, c - a - b > 0."""
    if c - a - b <= 0:
        raise DivergenceError(f"2F1 diverges at z = 1 when c - a - b = {c - a - b} <= 0")
    return gamma_ratio([c, c - a - b], [c - a, c - b])


def _connection(a: float, b: float, c: float, z: np.ndarray) -> np.ndarray:
    """Re-expand around z = 1; requires c - a - b not an integer."""
    s = c - a - b
    w = 1.0 - z
    first = gamma_ratio([c, s], [c - a, c - b])
    second = gamma_ratio([c, -s], [a, b])
    out = first * _series(a, b, 1.0 - s, w)
    if second != 0.0:
        out = out + second * np.power(w, s) * _series(c - a, c - b, s + 1.0, w)
    return out


def hyp2f1_array(a: float, b: float, c: float, z) -> np.ndarray:
    """
    Vectorized F(a, b; c; z) for scalar parameters and an array of z in [0, 1].

    Args:
        a, b, c: Real parameters, c not a nonpositive integer
        z: Array-like of arguments in [0, 1]

    Returns:
        Array of the same shape as z
    """
    z = np.asarray(z, dtype=float)
    if _is_nonpositive_integer(c):
        raise PoleError(f"c must not be a nonpositive integer, got {c}")
    if z.size and (np.any(z < 0.0) or np.any(z > 1.0) or not np.all(np.isfinite(z))):
        raise DomainError("2F1 arguments must lie in [0, 1]")
    out = np.ones_like(z)
    if not z.size:
        return out

    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    at_one = z == 1.0
    if np.any(at_one):
        out[at_one] = _gauss_sum(a, b, c)

    rest = (z > 0.0) & ~at_one
    if terminating:
        out[rest] = _series(a, b, c, z[rest])
        return out

    s = c - a - b
    near_one = rest & (z > SERIES_SETTINGS["direct_limit"])
    direct = rest & ~near_one
    out[direct] = _series(a, b, c, z[direct])
    if np.any(near_one):
        if float(s).is_integer():
            # no connection formula for integer c - a - b; sum directly
            out[near_one] = _series(a, b, c, z[near_one])
        else:
            out[near_one] = _connection(a, b, c, z[near_one])
    return out


def gauss_2f1(args: HypergeometricArgs) -> float:
    """
    Gauss hypergeometric function F(a, b; c; z) for validated arguments.

    Example:
        >>> gauss_2f1(HypergeometricArgs(1.0, 1.0, 2.0, 0.0))
        1.0
    """
    if args.z == 0.0:
        return 1.0
    return float(hyp2f1_array(args.a, args.b, args.c, np.array([args.z]))[0])


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Scalar F(a, b; c; z) with argument validation."""
    return gauss_2f1(HypergeometricArgs(float(a), float(b), float(c), float(z)))


def hyp2f1_partial_sum(a: float, b: float, c: float, z: float, terms: int) -> float:
    """Sum of the first ``terms`` terms of the 2F1 series at z."""
    if terms < 1:
        raise DomainError(f"terms must be at least 1, got {terms}")
    return float(_series(a, b, c, np.array([float(z)]), exact_terms=terms)[0])


def euler_transform_2f1(a: float, b: float, c: float, z: float) -> float:
    """
    Evaluate F(a, b; c; z) through Euler's transformation.

    F(a, b; c; z) = (1 - z)^(c-a-b) F(c - a, c - b; c; z), z < 1.
    """
    if not 0.0 <= z < 1.0:
        raise DomainError(f"Euler transformation needs z in [0, 1), got {z}")
    return float((1.0 - z) ** (c - a - b) * hyp2f1(c - a, c - b, c, z))
