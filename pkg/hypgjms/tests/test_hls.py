"""
Tests for Hardy-Littlewood-Sobolev Module
"""

import math

import pytest
import numpy as np
from hypgjms import hls
from hypgjms.kelvin import RadialProfile
from hypgjms.hls import (
    HlsParams,
    HlsRow,
    hls_constant,
    hls_constant_direct,
    lp_norm,
    hls_lhs,
    hls_test_family,
    hls_fixture_rows,
)
from hypgjms.validation import DomainError


def bump(radius):
    def f(r):
        x = np.asarray(r, dtype=float) / radius
        return np.where(x < 1.0, (1.0 - x * x) ** 3, 0.0)
    return RadialProfile.from_function(f, np.linspace(0.0, radius, 65))


class TestHlsConstant:
    """Tests for hls_constant."""

    def test_three_one(self):
        """C_{3,1} = (4/3) (4 / sqrt(pi))^(2/3) = 2.29401..."""
        c = hls_constant(HlsParams(3, 1.0))
        assert c == pytest.approx(4.0 / 3.0 * (4.0 / math.sqrt(math.pi)) ** (2.0 / 3.0), rel=1e-13)
        assert c == pytest.approx(2.29401, abs=1e-5)

    @pytest.mark.parametrize("n,lam", [(3, 0.5), (3, 2.5), (5, 2.0), (8, 7.9)])
    def test_log_form_matches_direct(self, n, lam):
        """The log-space product equals the Gamma product."""
        h = HlsParams(n, lam)
        assert hls_constant(h) == pytest.approx(hls_constant_direct(h), rel=1e-12)

    def test_large_dimension(self):
        """The log form stays finite where the direct product does not."""
        h = HlsParams(400, 3.0)
        assert math.isfinite(hls_constant(h))
        with np.errstate(all="ignore"):
            direct = hls_constant_direct(h)
        assert not math.isfinite(direct) or direct == 0.0

    def test_conjugate_exponent(self):
        """p = 2n / (2n - lam)."""
        assert HlsParams(3, 1.0).p == pytest.approx(1.2)

    @pytest.mark.parametrize("n,lam", [(3, 0.0), (3, 3.0), (3, -1.0), (2.5, 1.0)])
    def test_invalid(self, n, lam):
        """n is a positive integer and lam lies in (0, n)."""
        with pytest.raises(DomainError):
            HlsParams(n, lam)


class TestLpNorm:
    """Tests for lp_norm."""

    def test_exponential(self):
        """||e^(-2r)||_2 on H^3 is sqrt(pi / 6)."""
        f = RadialProfile.from_function(lambda r: np.exp(-2.0 * r), np.linspace(0.0, 20.0, 41))
        assert lp_norm(f, 2.0, 3) == pytest.approx(math.sqrt(math.pi / 6.0), rel=1e-12)

    def test_homogeneous(self):
        """||c f|| = c ||f||."""
        f = bump(2.0)
        g = RadialProfile.from_function(lambda r: 3.0 * f.func(r), f.grid)
        assert lp_norm(g, 1.2, 3) == pytest.approx(3.0 * lp_norm(f, 1.2, 3), rel=1e-13)

    def test_rejects_small_p(self):
        """p must be at least 1."""
        with pytest.raises(DomainError):
            lp_norm(bump(1.0), 0.5, 3)


class TestHlsLhs:
    """Tests for hls_lhs and the inequality."""

    def test_zero_profile(self):
        """f = 0 gives 0."""
        f = RadialProfile.constant(0.0, np.linspace(0.0, 2.0, 5), even=False)
        assert hls_lhs(f, bump(1.0), HlsParams(3, 1.0)) == 0.0

    def test_linear_in_f(self):
        """The double integral is linear in f."""
        h = HlsParams(3, 1.0)
        f, g = bump(1.0), bump(1.5)
        f2 = RadialProfile.from_function(lambda r: 2.0 * f.func(r), f.grid)
        assert hls_lhs(f2, g, h) == pytest.approx(2.0 * hls_lhs(f, g, h), rel=1e-13)

    def test_symmetric(self):
        """Swapping f and g leaves the integral unchanged."""
        h = HlsParams(3, 1.0)
        f, g = bump(1.0), bump(2.0)
        assert hls_lhs(f, g, h) == pytest.approx(hls_lhs(g, f, h), rel=1e-5)

    @pytest.mark.parametrize("radius", [0.5, 2.0])
    def test_inequality_holds(self, radius):
        """0 < lhs <= C ||f||_p^2 for bumps."""
        h = HlsParams(3, 1.0)
        f = bump(radius)
        lhs = hls_lhs(f, f, h)
        rhs = hls_constant(h) * lp_norm(f, h.p, 3) ** 2
        assert 0.0 < lhs < rhs

    def test_threads_match(self):
        """Worker threads do not change the result."""
        h = HlsParams(3, 1.0)
        f = bump(1.0)
        assert hls_lhs(f, f, h, threads=3) == hls_lhs(f, f, h)


class TestFixture:
    """Tests for the deterministic profile family and rows."""

    def test_family_layout(self):
        """Ten exponentials and ten bumps, all nonnegative."""
        family = hls_test_family(3, 1.0)
        ids = [profile_id for profile_id, _ in family]
        assert len(family) == 20
        assert ids[0] == "exp_1.5" and ids[-1] == "bump_5"
        assert sum(i.startswith("exp_") for i in ids) == 10
        for _, f in family:
            assert np.all(f.values >= 0.0)
            assert f.domain[1] <= 30.0

    def test_exponential_cutoff(self):
        """The L^p integrand has decayed by e^-36 at the cutoff."""
        n, lam = 3, 1.0
        p = HlsParams(n, lam).p
        _, f = hls_test_family(n, lam)[4]
        a = -math.log(f(1.0))
        cutoff = f.domain[1]
        assert (a * p - (n - 1)) * cutoff == pytest.approx(36.0, rel=1e-12)

    def test_fixture_rows(self, monkeypatch):
        """Each row pairs the HLS integral with C ||f||_p^2."""
        monkeypatch.setattr(hls, "hls_test_family", lambda n, lam: [("bump_1", bump(1.0)), ("bump_2", bump(2.0))])
        h = HlsParams(3, 1.0)
        rows = hls_fixture_rows(3, 1.0, threads=2)
        assert [row.profile_id for row in rows] == ["bump_1", "bump_2"]
        for row, radius in zip(rows, (1.0, 2.0)):
            assert row.rhs == pytest.approx(hls_constant(h) * lp_norm(bump(radius), h.p, 3) ** 2, rel=1e-12)
            assert 0.0 < row.ratio < 1.0

    def test_row(self):
        """ratio = lhs / rhs."""
        row = HlsRow("bump_1", 1.0, 0.5, 2.0)
        assert row.ratio == 0.25
        assert row.to_row() == ["bump_1", 1.0, 0.5, 2.0, 0.25]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
