"""Grid, transform, multiplier and norm tests for the spectral kernel."""

import math

import numpy as np
import pytest

from ewinlse.spectral import (
    Grid,
    Multiplier,
    SpectralField,
    forward_transform,
    fractional_laplacian,
    free_flow,
    identity_multiplier,
    inverse_transform,
    low_pass_filter,
    make_grid,
    norm,
    phi1,
    phi1_multiplier,
    smooth_cutoff,
)


class TestMakeGrid:
    def test_1d_spacings(self):
        g = make_grid(1, (-16, 16), 512)
        assert g.h == (1.0 / 16.0,)
        # wave-number spacing is 2 pi / (b - a)
        mu = np.sort(g.axis_mu[0])
        assert np.allclose(np.diff(mu), np.pi / 16.0)

    def test_2d_reference_spacing(self):
        g = make_grid(2, (-8, 8), (512, 512))
        assert g.h == (2.0 ** -5, 2.0 ** -5)
        assert g.volume == 256.0

    def test_unit_frequency_box(self):
        g = make_grid(1, (0.0, 2.0 * np.pi), 8)
        # on a 2 pi box the wave numbers are the integers -4..3
        assert np.allclose(np.sort(g.axis_mu[0]), np.arange(-4, 4))

    def test_wave_number_symmetry(self):
        g = make_grid(1, (-16, 16), 64)
        mu = g.axis_mu[0]
        # symmetric about zero except the single unmatched Nyquist mode
        pairs = np.sort(np.abs(mu))[1:-1]
        assert np.allclose(pairs[::2], pairs[1::2])
        assert np.min(mu) == pytest.approx(-np.pi / g.h[0], rel=1e-12)

    @pytest.mark.parametrize("bad", [0, 4, -1])
    def test_dimension_rejected(self, bad):
        with pytest.raises(ValueError):
            make_grid(bad, (-1, 1), 8)

    @pytest.mark.parametrize("n", [7, 6, 2, 48])
    def test_bad_point_counts_rejected(self, n):
        with pytest.raises(ValueError):
            make_grid(1, (-1, 1), n)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            make_grid(1, (2.0, 2.0), 8)
        with pytest.raises(ValueError):
            make_grid(1, (3.0, -3.0), 8)

    def test_arrays_read_only(self, grid1d):
        with pytest.raises(ValueError):
            grid1d.mu_squared[0] = 1.0


class TestTransforms:
    def test_constant_field(self, grid1d):
        f = SpectralField.from_values(grid1d, np.ones(grid1d.shape, complex))
        assert f.coeffs[0] == pytest.approx(1.0)
        assert np.max(np.abs(f.coeffs[1:])) == 0.0

    def test_plane_wave_single_coefficient(self, grid1d):
        k = 9
        x = grid1d.axis_nodes[0]
        a = grid1d.bounds[0][0]
        wave = np.exp(1j * grid1d.axis_mu[0][k] * (x - a))
        f = SpectralField.from_values(grid1d, wave)
        coeffs = f.coeffs.copy()
        assert coeffs[k] == pytest.approx(1.0, abs=1e-13)
        coeffs[k] = 0.0
        assert np.max(np.abs(coeffs)) < 1e-13

    def test_round_trip(self, random_field):
        back = inverse_transform(random_field.grid,
                                 forward_transform(random_field.grid,
                                                   random_field.values))
        scale = np.max(np.abs(random_field.values))
        assert np.max(np.abs(back - random_field.values)) < 1e-12 * scale

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_round_trip_all_dims(self, dim, rng):
        g = make_grid(dim, (-2.0, 3.0), 16)
        vals = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        f = SpectralField.from_values(g, vals)
        assert np.max(np.abs(f.coeffs - forward_transform(g, f.values))) == 0
        back = inverse_transform(g, f.coeffs)
        assert np.max(np.abs(back - vals)) < 1e-12

    def test_parseval_against_direct_sum(self, rng):
        # independent oracle: coefficients by explicit DFT summation
        g = make_grid(1, (-3.0, 5.0), 16)
        vals = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        x = g.axis_nodes[0] - g.bounds[0][0]
        direct = np.array([np.sum(vals * np.exp(-1j * mu * x)) / 16
                           for mu in g.axis_mu[0]])
        f = SpectralField.from_values(g, vals)
        assert np.max(np.abs(f.coeffs - direct)) < 1e-12
        lhs = g.cell_volume * np.sum(np.abs(vals) ** 2)
        rhs = g.volume * np.sum(np.abs(direct) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_size_mismatch_rejected(self, grid1d):
        with pytest.raises(ValueError):
            SpectralField.from_values(grid1d, np.ones(7, complex))
        with pytest.raises(ValueError):
            forward_transform(grid1d, np.ones(7, complex))


class TestFilter:
    def test_passband_and_stopband_exact(self, grid1d):
        tau = 0.04
        chi = low_pass_filter(grid1d, tau).symbol.real
        r = np.sqrt(tau * grid1d.mu_squared)
        assert np.all(chi[r <= 1.0] == 1.0)
        assert np.all(chi[r >= 2.0] == 0.0)
        assert np.all((chi >= 0.0) & (chi <= 1.0))

    def test_transition_value_against_closed_form(self):
        mpmath = pytest.importorskip("mpmath")
        # chi(r) = S(2 - r) with S(t) = rho(t)/(rho(t)+rho(1-t)), rho = e^{-1/t}
        for r in (1.25, 1.5, 1.75):
            t = mpmath.mpf(2) - mpmath.mpf(str(r))
            rho = lambda u: mpmath.e ** (-1 / u) if u > 0 else mpmath.mpf(0)
            expected = float(rho(t) / (rho(t) + rho(1 - t)))
            assert smooth_cutoff(np.array([r]))[0] == pytest.approx(expected, abs=1e-14)
        assert smooth_cutoff(np.array([1.5]))[0] == pytest.approx(0.5, abs=1e-15)

    def test_monotone_nonincreasing(self):
        r = np.linspace(0.0, 2.5, 2001)
        chi = smooth_cutoff(r)
        assert np.all(np.diff(chi) <= 1e-15)

    def test_sharp_shape(self, grid1d):
        chi = low_pass_filter(grid1d, 0.04, "sharp").symbol.real
        r = np.sqrt(0.04 * grid1d.mu_squared)
        assert set(np.unique(chi)) <= {0.0, 1.0}
        assert np.all(chi[r <= 1.0] == 1.0)
        assert np.all(chi[r > 1.0] == 0.0)

    def test_invalid_args(self, grid1d):
        with pytest.raises(ValueError):
            low_pass_filter(grid1d, 0.0)
        with pytest.raises(ValueError):
            low_pass_filter(grid1d, 0.1, "boxcar")

    def test_passband_field_unchanged(self, grid1d):
        tau = 1e-4  # passband covers the whole grid band
        f = SpectralField.from_coeffs(grid1d, np.eye(512, dtype=complex)[3])
        out = low_pass_filter(grid1d, tau).apply(f)
        assert np.array_equal(out.coeffs, f.coeffs)


class TestFreeFlow:
    def test_identity_at_zero_time(self, grid1d, random_field):
        out = free_flow(grid1d, 0.0).apply(random_field)
        assert np.array_equal(out.coeffs, random_field.coeffs)

    def test_plane_wave_phase(self, grid1d):
        k, t = 17, 0.3
        f = SpectralField.from_coeffs(grid1d, np.eye(512, dtype=complex)[k])
        out = free_flow(grid1d, t).apply(f)
        expected = np.exp(-1j * t * grid1d.axis_mu[0][k] ** 2)
        assert out.coeffs[k] == pytest.approx(expected, abs=1e-14)

    def test_group_property(self, grid1d):
        a = free_flow(grid1d, 0.2)
        b = free_flow(grid1d, 0.55)
        ab = a.compose(b)
        c = free_flow(grid1d, 0.75)
        assert np.max(np.abs(ab.symbol - c.symbol)) < 1e-12

    def test_isometry(self, grid1d, random_field):
        out = free_flow(grid1d, 1.7).apply(random_field)
        assert norm(out, "l2") == pytest.approx(norm(random_field, "l2"), rel=1e-12)

    def test_unit_modulus(self, grid2d):
        sym = free_flow(grid2d, -0.83).symbol
        assert np.max(np.abs(np.abs(sym) - 1.0)) < 1e-14


class TestPhi1:
    def test_value_at_zero(self, grid1d):
        m = phi1_multiplier(grid1d, 0.05)
        assert m.symbol[0] == 1.0 + 0.0j
        assert phi1(np.array([0.0]))[0] == 1.0 + 0.0j

    def test_value_at_minus_i_pi(self):
        val = phi1(np.array([-1j * np.pi]))[0]
        assert abs(val) == pytest.approx(2.0 / np.pi, abs=1e-14)

    def test_series_branch_against_extended_precision(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        for z in (1e-6j, -1e-6j, (0.7e-6 - 0.7e-6j)):
            ours = phi1(np.array([z]))[0]
            exact = mpmath.expm1(mpmath.mpc(z)) / mpmath.mpc(z)
            assert abs(ours - complex(exact)) < 1e-13

    def test_magnitude_bounded_by_one(self, grid1d):
        for tau in (1e-4, 1e-2, 1.0):
            sym = phi1_multiplier(grid1d, tau).symbol
            assert np.max(np.abs(sym)) <= 1.0 + 1e-15

    def test_nonpositive_tau_rejected(self, grid1d):
        with pytest.raises(ValueError):
            phi1_multiplier(grid1d, 0.0)


class TestMultiplier:
    def test_identity(self, grid1d, random_field):
        out = identity_multiplier(grid1d).apply(random_field)
        assert np.array_equal(out.coeffs, random_field.coeffs)

    def test_linearity(self, grid1d, rng):
        m = free_flow(grid1d, 0.4)
        f = SpectralField.from_values(
            grid1d, rng.standard_normal(512) + 1j * rng.standard_normal(512))
        g = SpectralField.from_values(
            grid1d, rng.standard_normal(512) + 1j * rng.standard_normal(512))
        lhs = m.apply(SpectralField.from_coeffs(grid1d, 2.0 * f.coeffs + 3j * g.coeffs))
        rhs = 2.0 * m.apply(f).coeffs + 3j * m.apply(g).coeffs
        assert np.max(np.abs(lhs.coeffs - rhs)) < 1e-12

    def test_composition_commutes(self, grid1d):
        tau = 0.02
        a = low_pass_filter(grid1d, tau)
        b = free_flow(grid1d, tau)
        ab = a.compose(b).symbol
        ba = b.compose(a).symbol
        assert np.max(np.abs(ab - ba)) < 1e-13

    def test_grid_mismatch_rejected(self, grid1d, grid2d):
        m = identity_multiplier(grid1d)
        f = SpectralField.from_values(grid2d, np.ones(grid2d.shape, complex))
        with pytest.raises(ValueError):
            m.apply(f)

    def test_fractional_laplacian_symbol(self, grid1d):
        m = fractional_laplacian(grid1d, 0.5)
        k = 11
        mu2 = grid1d.axis_mu[0][k] ** 2
        assert m.symbol[k] == pytest.approx(mu2 ** 0.5)
        assert m.symbol[0] == 0.0


class TestNorms:
    def test_constant_l2(self, grid1d):
        f = SpectralField.from_values(grid1d, np.ones(512, complex))
        assert norm(f, "l2") == pytest.approx(math.sqrt(32.0), rel=1e-13)

    def test_plane_wave_h1(self, grid1d):
        k = 21
        f = SpectralField.from_coeffs(grid1d, np.eye(512, dtype=complex)[k])
        expected = math.sqrt((1.0 + grid1d.axis_mu[0][k] ** 2) * 32.0)
        assert norm(f, "h1") == pytest.approx(expected, rel=1e-13)

    def test_gaussian_l2_analytic(self):
        g = make_grid(1, (-16, 16), 1024)
        f = SpectralField.from_values(g, np.exp(-g.axis_nodes[0] ** 2 / 2.0) + 0j)
        assert norm(f, "l2") == pytest.approx(np.pi ** 0.25, abs=1e-8)

    def test_h1_equals_l2_of_sobolev_multiplier(self, grid1d, random_field):
        w = Multiplier(grid1d, np.sqrt(1.0 + grid1d.mu_squared).astype(complex))
        assert norm(random_field, "h1") == pytest.approx(
            norm(w.apply(random_field), "l2"), rel=1e-12)

    def test_lp_and_linf(self, grid1d, random_field):
        linf = norm(random_field, "linf")
        assert linf == pytest.approx(np.max(np.abs(random_field.values)))
        assert norm(random_field, math.inf) == linf
        l4 = norm(random_field, 4)
        direct = (grid1d.cell_volume
                  * np.sum(np.abs(random_field.values) ** 4)) ** 0.25
        assert l4 == pytest.approx(direct, rel=1e-13)

    def test_invalid_p_rejected(self, random_field):
        with pytest.raises(ValueError):
            norm(random_field, 0.5)
