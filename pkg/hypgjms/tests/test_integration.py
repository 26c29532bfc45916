"""
Integration Tests
=================

Checks that run through several modules: the solution family as the
pullback of the Euclidean bubble, and the family's Kelvin symmetry as seen
by the moving-sphere scan.
"""

import math

import pytest
import numpy as np
from hypgjms.hgeom import Dimensions
from hypgjms.gjms import conformal_weight
from hypgjms.kelvin import KelvinSphere, kelvin_transform
from hypgjms.shoot import bubble_U, normalized_bubble
from hypgjms.classify import FamilyParams, family_constant, family_eval, family_profile, residual_Q
from hypgjms.msphere import (
    SphereScan,
    Verdict,
    asymptotic_charge,
    critical_lambda,
    default_lambdas,
    kelvin_charge,
)

CASES = [(6, 2, -0.75), (5, 1, -0.4), (9, 3, -0.2), (7, 2, -0.9)]


def bubble_scale(beta):
    return math.sqrt((1.0 + beta) / -beta)


def normalized_family(dims, beta):
    """Family member with P_k u = u^p."""
    kappa, _ = normalized_bubble(dims, 1.0)
    return FamilyParams(kappa * (-beta * bubble_scale(beta)) ** dims.half_gap, beta, dims)


class TestConformalPullback:
    """Family members with beta in (-1, 0) are pulled-back bubbles."""

    @pytest.mark.parametrize("n,k,beta", CASES)
    def test_pointwise(self, n, k, beta):
        """u(r) = alpha (-beta a)^(-(n-2k)/2) W(s)^(-(n-2k)/2) U_a(s) with s = tanh(r/2)."""
        dims = Dimensions(n, k)
        fp = FamilyParams(1.3, beta, dims)
        a = bubble_scale(beta)
        s = np.linspace(0.0, 0.99, 100)
        pulled = (fp.alpha * (-beta * a) ** -dims.half_gap
                  * conformal_weight(s) ** -dims.half_gap * bubble_U(dims, a, s))
        assert np.allclose(family_eval(fp, 2.0 * np.arctanh(s)), pulled, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("n,k,beta", CASES)
    def test_normalized_constant(self, n, k, beta):
        """Pulling back the normalized bubble gives P_k u = u^p exactly."""
        assert family_constant(normalized_family(Dimensions(n, k), beta)) == pytest.approx(1.0, rel=1e-12)

    def test_normalized_residual(self):
        """Both operator routes see the unit constant."""
        q = residual_Q(normalized_family(Dimensions(6, 2), -0.75))
        assert q.c_hat == pytest.approx(1.0, rel=1e-4)
        assert q.c_hat_euclid == pytest.approx(1.0, rel=1e-4)


class TestKelvinSymmetry:
    """The scan, the Kelvin transform and both charges agree on one family member."""

    DIMS = Dimensions(7, 2)
    FAMILY = FamilyParams(2.5, -0.9, DIMS)

    def profile(self):
        return family_profile(self.FAMILY, np.linspace(0.0, 40.0, 801))

    def test_scan_finds_fixed_sphere(self):
        """The critical radius is log 2, where the family is Kelvin invariant."""
        u = self.profile()
        result = critical_lambda(u, SphereScan(self.DIMS, 0.0, default_lambdas(cap=2.0)))
        assert result.verdict is Verdict.FINITE
        assert result.lambda0 == pytest.approx(math.log(2.0), abs=1e-5)

        s = KelvinSphere(result.lambda0, self.DIMS)
        grid = np.linspace(0.5, 10.0, 40)
        v = kelvin_transform(s, u, grid=grid)
        assert np.max(np.abs(v.values / family_eval(self.FAMILY, grid) - 1.0)) <= 1e-4

    def test_charges(self):
        """The limit-sphere value and the far-field limit both equal alpha."""
        u = self.profile()
        charge = asymptotic_charge(u, self.DIMS)
        assert charge.converged
        assert charge.value == pytest.approx(2.5, rel=1e-8)
        assert kelvin_charge(u, math.log(2.0), self.DIMS) == pytest.approx(2.5, rel=1e-12)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
