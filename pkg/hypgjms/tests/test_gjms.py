"""
Tests for GJMS Operator Module
"""

import math

import pytest
import numpy as np
from hypgjms.hgeom import Dimensions
from hypgjms.kelvin import KelvinSphere, RadialProfile
from hypgjms.gjms import (
    OperatorStencil,
    radial_laplace_beltrami,
    apply_P1,
    apply_Pk,
    pk_factor_shifts,
    euclid_radial_polyharmonic,
    euclid_pullback_Pk,
    conformal_weight,
    to_ball_profile,
    to_geodesic_profile,
    covariance_residual,
)
from hypgjms.classify import FamilyParams, family_profile
from hypgjms.validation import BoundaryProximityError, DomainError, GridTooCoarseError


def ones(r):
    return np.ones_like(np.asarray(r, dtype=float))


class TestOperatorStencil:
    """Tests for the OperatorStencil grid."""

    def test_staggered_grid(self):
        """Staggered grids start at half a spacing."""
        st = OperatorStencil.staggered(3.0, 301)
        grid = st.grid()
        assert grid[0] == pytest.approx(0.5 * st.spacing)
        assert grid[-1] == pytest.approx(3.0)
        assert np.allclose(np.diff(grid), st.spacing)

    def test_rejects_nonpositive_start(self):
        """r_min must be positive."""
        with pytest.raises(DomainError):
            OperatorStencil(0.0, 1.0, 50)

    def test_rejects_unknown_order(self):
        """Only orders 2, 4 and 6 are tabulated."""
        with pytest.raises(DomainError):
            OperatorStencil(0.1, 1.0, 50, order=8)

    def test_check_needs_points_per_factor(self):
        """k nested factors need 2 (order/2) k + 5 points."""
        st = OperatorStencil(0.1, 1.0, 12, order=4)
        with pytest.raises(GridTooCoarseError):
            st.check(Dimensions(6, 2))
        OperatorStencil(0.1, 1.0, 13, order=4).check(Dimensions(6, 2))

    def test_sample_is_even(self):
        """Sampled profiles are even and exact by default."""
        u = OperatorStencil.staggered(2.0, 50).sample(np.cos)
        assert u.even and u.interp == "exact"


class TestHyperbolicRoute:
    """Tests for the Laplace-Beltrami operator and P_k on geodesic radii."""

    def test_laplacian_of_cosh(self):
        """Delta_H cosh(r) = n cosh(r), including next to the origin."""
        dims = Dimensions(5, 1)
        u = OperatorStencil.staggered(3.0, 301).sample(np.cosh)
        lap = radial_laplace_beltrami(u, dims)
        assert lap.grid[0] == u.grid[0]
        assert np.max(np.abs(lap.values / (5.0 * np.cosh(lap.grid)) - 1.0)) <= 1e-5

    def test_off_origin_grid_trims_both_ends(self):
        """Grids away from the origin lose half a stencil at each end."""
        dims = Dimensions(5, 1)
        grid = np.linspace(1.0, 2.0, 101)
        u = RadialProfile.from_function(np.cosh, grid)
        lap = radial_laplace_beltrami(u, dims, order=4)
        assert lap.grid[0] == pytest.approx(grid[2])
        assert lap.grid[-1] == pytest.approx(grid[-3])
        assert np.max(np.abs(lap.values / (5.0 * np.cosh(lap.grid)) - 1.0)) <= 1e-7

    def test_p1_of_constant(self):
        """P_1 1 = -n(n-2)/4."""
        u = OperatorStencil.staggered(2.0, 101).sample(ones)
        out = apply_P1(u, Dimensions(5, 1))
        assert np.allclose(out.values, -15.0 / 4.0, rtol=1e-10)

    @pytest.mark.parametrize("n,k,expected", [(6, 2, 24.0), (7, 2, 35.0 / 4.0 * 27.0 / 4.0),
                                              (9, 3, -15.75 * -13.75 * -9.75)])
    def test_pk_of_constant(self, n, k, expected):
        """P_k 1 = prod_j (j(j-1) - n(n-2)/4)."""
        u = OperatorStencil.staggered(3.0, 200).sample(ones)
        out = apply_Pk(u, Dimensions(n, k))
        assert np.allclose(out.values, expected, rtol=1e-6)

    def test_factor_shifts(self):
        """Shifts are j(j-1) for j = 1..k."""
        assert pk_factor_shifts(3) == (0, 2, 6)

    def test_factor_order_commutes(self):
        """Applying the factors in reverse order gives the same result."""
        dims = Dimensions(7, 3)
        u = OperatorStencil.staggered(4.0, 201).sample(lambda r: 1.0 / np.cosh(0.5 * r) ** 3)
        forward = apply_Pk(u, dims)
        backward = apply_Pk(u, dims, reverse=True)
        scale = np.max(np.abs(forward.values))
        assert np.max(np.abs(forward.values - backward.values)) <= 1e-7 * scale

    def test_pk_trims_each_factor(self):
        """Off-origin grids lose order/2 points per factor at each end."""
        grid = np.linspace(1.0, 3.0, 201)
        u = RadialProfile.from_function(np.cosh, grid)
        out = apply_Pk(u, Dimensions(7, 3), order=2)
        assert len(out) == 201 - 2 * 3

    def test_too_coarse(self):
        """Short grids raise GridTooCoarseError."""
        u = OperatorStencil.staggered(1.0, 12).sample(ones)
        with pytest.raises(GridTooCoarseError):
            apply_Pk(u, Dimensions(6, 2))

    def test_nonuniform_grid(self):
        """Finite differences need a uniform grid."""
        grid = np.linspace(0.0, 1.0, 30) ** 2 + 0.1
        u = RadialProfile.from_function(np.cosh, grid)
        with pytest.raises(DomainError):
            radial_laplace_beltrami(u, Dimensions(5, 1))


class TestEuclideanRoute:
    """Tests for the ball-model route to P_k."""

    def test_polyharmonic_of_power(self):
        """-Delta s^4 = -4 (n + 2) s^2 in R^n."""
        U = OperatorStencil.staggered(1.0, 101).sample(lambda s: s ** 4)
        out = euclid_radial_polyharmonic(U, 5, 1)
        assert np.allclose(out.values, -28.0 * out.grid ** 2, atol=1e-9)

    def test_bilaplacian_of_power(self):
        """Delta^2 s^4 = 8 (n + 2) n in R^n."""
        U = OperatorStencil.staggered(1.0, 101).sample(lambda s: s ** 4)
        out = euclid_radial_polyharmonic(U, 6, 2)
        assert np.allclose(out.values, 8.0 * 8.0 * 6.0, rtol=1e-8)

    def test_conformal_weight(self):
        """W(0) = 2 and W(s) = 2 / (1 - s^2)."""
        assert conformal_weight(0.0) == 2.0
        assert conformal_weight(0.5) == pytest.approx(8.0 / 3.0)

    @pytest.mark.parametrize("n,k", [(5, 1), (6, 2), (7, 2)])
    def test_pullback_of_constant(self, n, k):
        """Both routes give the same P_k 1."""
        dims = Dimensions(n, k)
        expected = float(np.prod([j * (j - 1) - n * (n - 2) / 4.0 for j in range(1, k + 1)]))
        u_s = OperatorStencil.staggered(0.8, 321).sample(ones)
        out = euclid_pullback_Pk(u_s, dims)
        assert np.max(np.abs(out.values / expected - 1.0)) <= 1e-5

    def test_boundary_proximity(self):
        """Ball-radius grids may not approach s = 1."""
        u_s = RadialProfile.constant(1.0, np.linspace(0.0, 0.9995, 100))
        with pytest.raises(BoundaryProximityError):
            euclid_pullback_Pk(u_s, Dimensions(5, 1))


class TestReparameterization:
    """Tests for to_ball_profile and to_geodesic_profile."""

    def test_ball_profile_values(self):
        """u_s(tanh(r/2)) = u(r)."""
        u = RadialProfile.from_function(np.cosh, np.linspace(0.0, 3.0, 31), even=True)
        u_s = to_ball_profile(u)
        assert u_s.grid[-1] == pytest.approx(math.tanh(1.5))
        assert u_s(math.tanh(0.5)) == pytest.approx(math.cosh(1.0), rel=1e-14)

    def test_round_trip_keeps_exactness(self):
        """Geodesic -> ball -> geodesic recovers exact profiles."""
        u = RadialProfile.from_function(np.cosh, np.linspace(0.0, 3.0, 31), even=True)
        back = to_geodesic_profile(to_ball_profile(u))
        assert back.interp == "exact" and back.even
        assert back(2.2) == pytest.approx(math.cosh(2.2), rel=1e-13)

    def test_rejects_boundary(self):
        """Ball radii must stay below 1."""
        u = RadialProfile.constant(1.0, np.linspace(0.0, 3.0, 31))
        with pytest.raises(DomainError):
            to_ball_profile(u, grid=np.array([0.5, 1.0]))


class TestCovariance:
    """Tests for conformal covariance under the Kelvin transform."""

    @pytest.mark.parametrize("lam", [0.8, 1.5])
    def test_family_covariance(self, lam):
        """P_k(u_lambda) matches |J|^((n+2k)/(2n)) (P_k u) o phi_lambda."""
        dims = Dimensions(6, 2)
        st = OperatorStencil.staggered(14.0, 1401)
        u = family_profile(FamilyParams(1.0, 0.5, dims), st.grid())
        assert covariance_residual(KelvinSphere(lam, dims), u, dims) <= 1e-4

    def test_k1_covariance(self):
        """The same identity holds for the conformal Laplacian."""
        dims = Dimensions(5, 1)
        st = OperatorStencil.staggered(14.0, 1401)
        u = st.sample(lambda r: np.exp(-0.25 * r * r) + 0.1 / np.cosh(r))
        assert covariance_residual(KelvinSphere(1.0, dims), u, dims) <= 1e-4


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
