"""
Tests for Radial Shooting Module
"""

import math

import pytest
import numpy as np
from hypgjms import shoot
from hypgjms.hgeom import Dimensions
from hypgjms.shoot import (
    OutcomeKind,
    ShootParams,
    ivp_integrate,
    hyperbolic_shoot,
    pullback_exponent,
    pullback_weight,
    bubble_constant,
    bubble_U,
    bubble_V,
    bubble_ratio_U,
    bubble_ratio_V,
    residual_U,
    residual_V,
    normalized_bubble,
    separatrix_exact,
    separatrix_bisect,
    beta_scan,
    subcritical_scan,
)
from hypgjms.validation import DomainError, InvalidBracketError

DIMS = Dimensions(6, 2)


class TestBubbles:
    """Tests for the explicit bubbles and their constants."""

    def test_bubble_constant(self):
        """c_{n,k} = Gamma(n/2+k) / Gamma(n/2-k)."""
        assert bubble_constant(DIMS) == pytest.approx(24.0, rel=1e-14)
        assert bubble_constant(Dimensions(5, 1)) == pytest.approx(3.75, rel=1e-14)
        assert bubble_constant(Dimensions(7, 2)) == pytest.approx(4.5 * 3.5 * 2.5 * 1.5, rel=1e-14)

    def test_bubble_values(self):
        """U(0) = (2/a)^((n-2k)/2) and V(0) the same."""
        assert bubble_U(Dimensions(7, 2), 2.0, 0.0) == pytest.approx(1.0)
        assert bubble_V(Dimensions(7, 2), 0.5, 0.0) == pytest.approx(4.0 ** 1.5)

    def test_bubble_scale_positive(self):
        """a must be positive."""
        with pytest.raises(DomainError):
            bubble_U(DIMS, 0.0, 1.0)

    def test_V_singular_at_a(self):
        """V is only defined inside r < a."""
        with pytest.raises(DomainError):
            bubble_V(DIMS, 1.0, np.array([0.5, 1.0]))

    @pytest.mark.parametrize("n,k", [(5, 1), (6, 2), (7, 2)])
    def test_U_ratio_constant(self, n, k):
        """(-Delta)^k U / U^p is constant and equals c_{n,k}."""
        dims = Dimensions(n, k)
        ratio = bubble_ratio_U(dims, 1.0)
        assert ratio.constant == pytest.approx(bubble_constant(dims), rel=1e-6)
        assert residual_U(dims, 1.0) <= 1e-5

    @pytest.mark.parametrize("n,k", [(5, 1), (6, 2), (7, 2)])
    def test_V_ratio_constant(self, n, k):
        """(-Delta)^k V / V^p is constant and equals (-1)^k c_{n,k}."""
        dims = Dimensions(n, k)
        ratio = bubble_ratio_V(dims, 1.0)
        assert ratio.constant == pytest.approx((-1) ** k * bubble_constant(dims), rel=1e-6)
        assert residual_V(dims, 1.0) <= 1e-5

    def test_U_scale_invariance(self):
        """The constant does not depend on a."""
        assert bubble_ratio_U(DIMS, 3.0).constant == pytest.approx(24.0, rel=1e-6)


class TestNormalizedBubble:
    """Tests for normalized_bubble and separatrix_exact."""

    def test_six_two(self):
        """n = 6, k = 2, alpha = 1: a = 2 * 24^(1/4)."""
        kappa, a = normalized_bubble(DIMS, 1.0)
        assert kappa == pytest.approx(24.0 ** 0.25, rel=1e-14)
        assert a == pytest.approx(4.4267, abs=1e-4)

    def test_k1_kappa(self):
        """n = 5, k = 1: kappa = (15/4)^(3/4)."""
        kappa, _ = normalized_bubble(Dimensions(5, 1), 1.0)
        assert kappa == pytest.approx(3.75 ** 0.75, rel=1e-14)

    def test_starts_at_alpha(self):
        """kappa U_a(0) = alpha."""
        for alpha in (0.3, 1.0, 4.0):
            kappa, a = normalized_bubble(Dimensions(7, 2), alpha)
            assert kappa * bubble_U(Dimensions(7, 2), a, 0.0) == pytest.approx(alpha, rel=1e-13)

    def test_separatrix_value(self):
        """Delta u(0) of the entire solution with u(0) = 1."""
        assert separatrix_exact(DIMS, 1.0) == pytest.approx(-0.612372, abs=1e-6)

    def test_separatrix_scaling(self):
        """For n = 6, k = 2 the separatrix scales like alpha^3."""
        assert separatrix_exact(DIMS, 2.0) / separatrix_exact(DIMS, 1.0) == pytest.approx(8.0, rel=1e-13)

    def test_rejects_nonpositive_alpha(self):
        """alpha must be positive."""
        with pytest.raises(DomainError):
            normalized_bubble(DIMS, 0.0)


class TestShootParams:
    """Tests for ShootParams validation."""

    def test_beta_count(self):
        """k - 1 initial Laplacians are required."""
        with pytest.raises(DomainError):
            ShootParams(DIMS, 1.0, ())
        with pytest.raises(DomainError):
            ShootParams(Dimensions(5, 1), 1.0, (0.1,))

    def test_seed_radius(self):
        """r0 must lie inside (0, r_max)."""
        with pytest.raises(DomainError):
            ShootParams(DIMS, 1.0, (0.0,), r_max=1e-5)

    def test_alpha_positive(self):
        """alpha must be positive."""
        with pytest.raises(DomainError):
            ShootParams(DIMS, -1.0, (0.0,))

    def test_betas_are_floats(self):
        """betas are normalized to a tuple of floats."""
        p = ShootParams(Dimensions(9, 3), 1.0, [1, 2])
        assert p.betas == (1.0, 2.0)
        assert p.with_betas([3.0, 4.0]).betas == (3.0, 4.0)


class TestIvpIntegrate:
    """Tests for ivp_integrate."""

    def test_k1_follows_bubble(self):
        """For k = 1 every alpha gives the entire bubble."""
        dims = Dimensions(5, 1)
        kappa, a = normalized_bubble(dims, 2.0)
        trajectory, outcome = ivp_integrate(ShootParams(dims, 2.0, r_max=20.0))
        assert outcome.kind is OutcomeKind.GLOBAL_POSITIVE
        assert outcome.radius == pytest.approx(20.0)
        r = np.linspace(0.01, 20.0, 50)
        assert np.max(np.abs(trajectory.u(r) / (kappa * bubble_U(dims, a, r)) - 1.0)) <= 1e-6

    def test_separatrix_follows_bubble(self):
        """For k = 2 the exact separatrix value reproduces the bubble."""
        kappa, a = normalized_bubble(DIMS, 1.0)
        p = ShootParams(DIMS, 1.0, (-separatrix_exact(DIMS, 1.0),), r_max=5.0)
        trajectory, outcome = ivp_integrate(p)
        assert outcome.kind is OutcomeKind.GLOBAL_POSITIVE
        r = np.linspace(0.5, 5.0, 20)
        assert np.max(np.abs(trajectory.u(r) / (kappa * bubble_U(DIMS, a, r)) - 1.0)) <= 1e-6

    def test_above_separatrix_blows_up(self):
        """Delta u(0) above the separatrix blows up."""
        beta = separatrix_exact(DIMS, 1.0) + 0.2
        _, outcome = ivp_integrate(ShootParams(DIMS, 1.0, (-beta,), r_max=200.0))
        assert outcome.kind is OutcomeKind.BLOW_UP

    def test_below_separatrix_hits_zero(self):
        """Delta u(0) below the separatrix crosses zero."""
        beta = separatrix_exact(DIMS, 1.0) - 0.2
        trajectory, outcome = ivp_integrate(ShootParams(DIMS, 1.0, (-beta,), r_max=200.0))
        assert outcome.kind is OutcomeKind.HITS_ZERO
        assert trajectory.u(outcome.radius) == pytest.approx(0.0, abs=1e-8)

    def test_seed_radius_independence(self):
        """Halving the Taylor seed radius leaves u(1) unchanged."""
        coarse, o1 = ivp_integrate(ShootParams(DIMS, 1.0, (0.6,), r_max=1.5))
        fine, o2 = ivp_integrate(ShootParams(DIMS, 1.0, (0.6,), r_max=1.5, r0=5e-5))
        assert o1.kind is o2.kind is OutcomeKind.GLOBAL_POSITIVE
        assert fine.u(1.0) == pytest.approx(coarse.u(1.0), rel=1e-9)

    def test_scaling_symmetry(self):
        """mu^((n-2k)/2) u(mu r) solves the problem with rescaled initial data."""
        mu, gap = 2.0, DIMS.half_gap
        base, o1 = ivp_integrate(ShootParams(DIMS, 1.0, (0.3,), r_max=1.0))
        scaled, o2 = ivp_integrate(ShootParams(DIMS, mu ** gap, (0.3 * mu ** (gap + 2),), r_max=0.5))
        assert o1.kind is o2.kind is OutcomeKind.GLOBAL_POSITIVE
        for r in np.linspace(0.05, 0.5, 10):
            assert scaled.u(r) == pytest.approx(mu ** gap * base.u(mu * r), rel=1e-7)

    def test_trajectory_table(self):
        """Rows carry r followed by (u, u', v_1, w_1)."""
        trajectory, _ = ivp_integrate(ShootParams(DIMS, 1.0, (0.5,), r_max=1.0))
        assert trajectory.header() == ["r", "u", "du", "v1", "w1"]
        rows = trajectory.to_rows()
        assert all(len(row) == 5 for row in rows)
        assert rows[0][1] == pytest.approx(1.0, abs=1e-6)


class TestHyperbolicShoot:
    """Tests for hyperbolic_shoot and the pullback weight."""

    def test_pullback_exponent(self):
        """E vanishes at the critical exponent."""
        assert pullback_exponent(DIMS, 5.0) == 0.0
        assert pullback_exponent(DIMS, 3.0) == pytest.approx(-2.0)

    def test_pullback_weight(self):
        """((1 - s^2) / 2)^E."""
        assert pullback_weight(DIMS, 3.0, 0.0) == pytest.approx(4.0)
        assert pullback_weight(DIMS, 3.0, 0.5) == pytest.approx((0.375) ** -2)

    def test_critical_matches_euclidean(self):
        """At the critical exponent the hyperbolic shot is the Euclidean one."""
        p = ShootParams(DIMS, 1.0, (0.3,), r_max=0.9)
        t1, o1 = hyperbolic_shoot(p, 5.0)
        t2, o2 = ivp_integrate(p)
        assert o1 == o2
        assert np.array_equal(t1.states, t2.states)

    def test_horizon(self):
        """Survivors stop at s = 1 - 1e-3."""
        p = ShootParams(Dimensions(5, 1), 0.1, r_max=2.0)
        _, outcome = hyperbolic_shoot(p, 2.0)
        if outcome.kind is OutcomeKind.GLOBAL_POSITIVE:
            assert outcome.radius == pytest.approx(0.999)
        else:
            assert outcome.radius < 0.999

    @pytest.mark.parametrize("p_exp", [1.0, 5.5])
    def test_exponent_range(self, p_exp):
        """p_exp must lie in (1, critical]."""
        with pytest.raises(DomainError):
            hyperbolic_shoot(ShootParams(DIMS, 1.0, (0.0,)), p_exp)


class TestSeparatrixBisect:
    """Tests for separatrix_bisect."""

    def test_recovers_exact_value(self):
        """Bisection converges to the entire-solution value."""
        result = separatrix_bisect(DIMS, 1.0, (-10.0, 0.0), iters=30)
        assert result.beta1_hat == pytest.approx(separatrix_exact(DIMS, 1.0), abs=1e-4)
        assert result.width == pytest.approx(10.0 / 2 ** 30)
        assert result.lo < result.hi

    def test_default_iterations_and_scaling(self):
        """Fifty halvings match the exact value and the alpha^3 law between alpha = 1 and 2."""
        one = separatrix_bisect(DIMS, 1.0, (-10.0, 0.0))
        two = separatrix_bisect(DIMS, 2.0, (-10.0, 0.0))
        assert one.iterations == 50
        assert one.beta1_hat == pytest.approx(separatrix_exact(DIMS, 1.0), rel=1e-6)
        assert two.beta1_hat == pytest.approx(separatrix_exact(DIMS, 2.0), rel=1e-6)
        assert two.beta1_hat / one.beta1_hat == pytest.approx(8.0, abs=1e-4)

    def test_stops_at_adjacent_floats(self, monkeypatch):
        """Once the bracket ends are adjacent doubles the reported count is the steps taken."""
        monkeypatch.setattr(shoot, "ivp_integrate", lambda p: (None, -p.betas[0]))
        monkeypatch.setattr(
            shoot, "_side",
            lambda beta, _: OutcomeKind.HITS_ZERO if beta < 0.3 else OutcomeKind.BLOW_UP,
        )
        result = separatrix_bisect(DIMS, 1.0, (0.0, 1.0), iters=200)
        assert result.iterations < 200
        assert np.nextafter(result.lo, result.hi) == result.hi
        assert result.lo < 0.3 <= result.hi

    def test_bad_bracket(self):
        """Both ends blowing up is not a bracket."""
        with pytest.raises(InvalidBracketError):
            separatrix_bisect(DIMS, 1.0, (-0.1, 0.0), iters=5)

    def test_reversed_bracket(self):
        """The bracket must increase."""
        with pytest.raises(InvalidBracketError):
            separatrix_bisect(DIMS, 1.0, (0.0, -10.0))

    def test_needs_k2(self):
        """Only k = 2 has a single initial Laplacian."""
        with pytest.raises(DomainError):
            separatrix_bisect(Dimensions(9, 3), 1.0, (-10.0, 0.0))

    def test_to_dict(self):
        """Serialized fields."""
        result = separatrix_bisect(DIMS, 1.0, (-10.0, 0.0), iters=3)
        assert set(result.to_dict()) == {"beta1_hat", "width", "iterations"}


class TestScans:
    """Tests for beta_scan and subcritical_scan."""

    def test_scan_sides(self):
        """The scan separates hitting zero from blowing up around the separatrix."""
        exact = separatrix_exact(DIMS, 1.0)
        rows = beta_scan(DIMS, 1.0, [exact - 0.3, exact + 0.3], r_max=200.0)
        assert [row.outcome.kind for row in rows] == [OutcomeKind.HITS_ZERO, OutcomeKind.BLOW_UP]
        assert rows[1].to_dict()["kind"] == "blow_up"

    def test_single_crossover(self):
        """A dense scan switches from hitting zero to blowing up exactly once, at the separatrix."""
        exact = separatrix_exact(DIMS, 1.0)
        rows = beta_scan(DIMS, 1.0, exact + np.linspace(-1.0, 1.0, 16), r_max=200.0, threads=2)
        decided = [row for row in rows if row.outcome.kind is not OutcomeKind.GLOBAL_POSITIVE]
        kinds = [row.outcome.kind for row in decided]
        switches = sum(1 for a, b in zip(kinds, kinds[1:]) if a is not b)
        assert switches == 1
        assert kinds[0] is OutcomeKind.HITS_ZERO and kinds[-1] is OutcomeKind.BLOW_UP
        assert all((row.beta < exact) == (row.outcome.kind is OutcomeKind.HITS_ZERO) for row in decided)

    def test_threads_deterministic(self):
        """Threaded scans give identical rows."""
        betas = [-2.0, -1.0, -0.5, 0.0]
        serial = beta_scan(DIMS, 1.0, betas, r_max=50.0)
        threaded = beta_scan(DIMS, 1.0, betas, r_max=50.0, threads=2)
        assert [r.to_dict() for r in serial] == [r.to_dict() for r in threaded]

    def test_subcritical_hits_zero(self):
        """A steep negative Laplacian hits zero before the horizon."""
        rows = subcritical_scan(DIMS, 1.0, 3.0, [-50.0])
        assert rows[0].outcome.kind is OutcomeKind.HITS_ZERO
        assert rows[0].outcome.radius < 0.999

    def test_subcritical_rejects_critical(self):
        """The critical exponent is not subcritical."""
        with pytest.raises(DomainError):
            subcritical_scan(DIMS, 1.0, 5.0, [0.0])

    def test_scan_needs_k2(self):
        """beta scans are for k = 2."""
        with pytest.raises(DomainError):
            beta_scan(Dimensions(5, 1), 1.0, [0.0], r_max=1.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
