"""Potential realization and de-aliased product tests."""

import numpy as np
import pytest
from scipy.integrate import quad

from ewinlse.potentials import (
    ConstantPotential,
    FourierDecay,
    InversePower,
    PotentialField,
    RandomFourier,
    SumPotential,
    apply_potential,
    realize,
    realize_fourier,
    realize_inverse_power,
)
from ewinlse.spectral import SpectralField, make_grid, norm


class TestInversePowerRealization:
    def test_pointwise_formula_away_from_singularity(self):
        spec = InversePower(((0.0,),), (-1.0,), 0.51)
        assert spec.evaluate(np.array([2.0]))[0] == pytest.approx(-2.0 ** -0.51,
                                                                  rel=1e-14)
        # realized samples approach the pointwise values away from the center
        g = make_grid(1, (-16, 16), 1024)
        P = realize(spec, g)
        x = P.fine_grid.axis_nodes[0]
        k = int(np.argmin(np.abs(x - 2.0)))
        assert abs(x[k] - 2.0) < 1e-12
        assert P.fine_values[k] == pytest.approx(-2.0 ** -0.51, abs=1e-6)

    def test_mean_coefficient_matches_adaptive_quadrature(self):
        # independent oracle: scipy adaptive quadrature of the integrable
        # singularity, mean over the box
        g = make_grid(1, (-16, 16), 512)
        P = realize(InversePower(((0.0,),), (-1.0,), 0.51), g)
        integral, err = quad(lambda x: -abs(x) ** -0.51, -16, 16,
                             points=[0.0], limit=200)
        assert err < 1e-9
        assert P.coeffs[0].real == pytest.approx(integral / 32.0, abs=1e-6)

    def test_3d_coulomb_realizes(self):
        g = make_grid(3, (-4, 4), 16)
        P = realize(InversePower(((0.0, 0.0, 0.0),), (-1.0,), 1.0), g,
                    oversample=2)
        assert np.all(np.isfinite(P.fine_values))
        assert P.fine_values.min() < -2.0  # attractive well present
        assert P.hermitian_defect() < 1e-12

    def test_non_integrable_alpha_rejected(self):
        g = make_grid(1, (-16, 16), 64)
        with pytest.raises(ValueError, match="not integrable"):
            realize(InversePower(((0.0,),), (-1.0,), 1.0), g)

    def test_center_outside_box_rejected(self):
        g = make_grid(1, (-16, 16), 64)
        with pytest.raises(ValueError, match="outside"):
            realize(InversePower(((20.0,),), (-1.0,), 0.5), g)

    def test_charge_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            InversePower(((0.0,), (1.0,)), (-1.0,), 0.5)

    def test_multi_center_equals_sum_of_singles(self):
        g = make_grid(1, (-16, 16), 256)
        both = realize(InversePower(((-2.0,), (3.0,)), (-1.0, 0.5), 0.6), g)
        one = realize(InversePower(((-2.0,),), (-1.0,), 0.6), g)
        two = realize(InversePower(((3.0,),), (0.5,), 0.6), g)
        assert np.max(np.abs(both.fine_values
                             - (one.fine_values + two.fine_values))) < 1e-12
        summed = one + two
        assert np.max(np.abs(both.coeffs - summed.coeffs)) < 1e-12

    def test_oversample_refinement_converges(self):
        # doubling the product lattice moves the lowest modes by less than
        # the quadrature tolerance; the heavy spectral tail of the potential
        # makes the band edge aliasing-limited, so the contraction claim is
        # asserted on the lower half of the band
        g = make_grid(1, (-16, 16), 512)
        spec = InversePower(((0.0,),), (-1.0,), 0.51)
        c2 = realize(spec, g, oversample=2).coeffs
        c4 = realize(spec, g, oversample=4).coeffs
        c8 = realize(spec, g, oversample=8).coeffs
        low = np.r_[0:5, -4:0]
        assert np.max(np.abs((c4 - c8)[low])) < 1e-6
        half = np.r_[0:128, -128:0]
        assert np.max(np.abs((c4 - c8)[half])) < 0.5 * np.max(np.abs((c2 - c4)[half]))

    def test_realness(self):
        g = make_grid(2, (-8, 8), 32)
        P = realize(InversePower(((0.5, -0.25),), (-1.0,), 1.0), g, oversample=2)
        assert P.fine_values.dtype.kind == "f"
        assert P.hermitian_defect() < 1e-12


class TestFourierRealization:
    def test_decay_rule_matches_formula(self, grid3d):
        P = realize(FourierDecay(1.0), grid3d)
        expected = (1.0 + grid3d.mu_squared) ** -1.0
        # matched modes carry the rule value; the unmatched Nyquist rows are
        # halved by the real-part construction
        interior = np.ones(grid3d.shape, dtype=bool)
        for axis, m in enumerate(grid3d.shape):
            sl = [slice(None)] * 3
            sl[axis] = m // 2
            interior[tuple(sl)] = False
        assert np.max(np.abs(P.coeffs - expected)[interior]) < 1e-12

    def test_constant_potential(self, grid1d):
        P = realize(ConstantPotential(2.5), grid1d)
        assert np.max(np.abs(P.fine_values - 2.5)) < 1e-12

    def test_seed_determinism(self, grid2d):
        a = realize(RandomFourier(seed=7), grid2d)
        b = realize(RandomFourier(seed=7), grid2d)
        assert np.array_equal(a.fine_values, b.fine_values)
        c = realize(RandomFourier(seed=8), grid2d)
        assert not np.array_equal(a.fine_values, c.fine_values)

    def test_random_rule_zero_mode_and_decay(self, grid2d):
        P = realize(RandomFourier(seed=3, decay=1.0, zero_mode=1.0), grid2d)
        assert P.coeffs[0, 0].real == pytest.approx(1.0, abs=1e-12)
        assert P.hermitian_defect() < 1e-12

    def test_realness_on_sample_grid(self, grid2d):
        # the stored samples are exactly real and their fine-grid transform
        # carries Hermitian symmetry on all matched modes
        P = realize(RandomFourier(seed=11), grid2d)
        assert P.fine_values.dtype.kind == "f"
        assert P.hermitian_defect() < 1e-12


class TestApplyPotential:
    def test_constant_multiplies(self, grid1d, rng):
        P = realize(ConstantPotential(0.7), grid1d)
        f = SpectralField.from_values(
            grid1d, rng.standard_normal(512) + 1j * rng.standard_normal(512))
        out = apply_potential(P, f)
        assert np.max(np.abs(out.coeffs - 0.7 * f.coeffs)) < 1e-12

    def test_trigonometric_identity(self, grid1d):
        # V = cos(mu_k x'), psi = e^{i mu_m x'} -> half-weight sidebands
        k, m = 5, 9
        x = grid1d.axis_nodes[0] - grid1d.bounds[0][0]
        mu = grid1d.axis_mu[0]
        fine = make_grid(1, grid1d.bounds[0], 1024)
        fine_x = fine.axis_nodes[0] - grid1d.bounds[0][0]
        V = PotentialField(grid1d, 2, np.cos(mu[k] * fine_x))
        psi = SpectralField.from_values(grid1d, np.exp(1j * mu[m] * x))
        out = apply_potential(V, psi)
        expected = np.zeros(512, complex)
        expected[m + k] = 0.5
        expected[m - k] = 0.5
        assert np.max(np.abs(out.coeffs - expected)) < 1e-13

    def test_matches_fine_grid_oracle(self, rng):
        # oracle: same band-limited product computed on a twice-finer grid,
        # then projected back to the base band
        g = make_grid(1, (-8, 8), 128)
        V = realize(RandomFourier(seed=5, decay=2.0), g)
        psi_coeffs = (rng.standard_normal(128) + 1j * rng.standard_normal(128))
        psi_coeffs *= np.exp(-0.05 * g.mu_squared)  # smooth datum
        psi = SpectralField.from_coeffs(g, psi_coeffs)
        out = apply_potential(V, psi)

        fine = make_grid(1, (-8, 8), 512)
        from ewinlse.spectral import embed_coeffs, restrict_coeffs
        v_fine = SpectralField.from_coeffs(fine, embed_coeffs(V.coeffs, fine.n))
        p_fine = SpectralField.from_coeffs(fine, embed_coeffs(psi.coeffs, fine.n))
        prod = SpectralField.from_values(fine, v_fine.values * p_fine.values)
        expected = restrict_coeffs(prod.coeffs, g.n)
        assert np.max(np.abs(out.coeffs - expected)) < 1e-10

    def test_linearity_and_additivity(self, grid1d, rng):
        V1 = realize(RandomFourier(seed=1, decay=2.0), grid1d)
        V2 = realize(RandomFourier(seed=2, decay=2.0), grid1d)
        f = SpectralField.from_values(
            grid1d, rng.standard_normal(512) + 1j * rng.standard_normal(512))
        g2 = SpectralField.from_values(
            grid1d, rng.standard_normal(512) + 1j * rng.standard_normal(512))
        lin = apply_potential(V1, SpectralField.from_coeffs(
            grid1d, 2.0 * f.coeffs - 1j * g2.coeffs))
        rhs = 2.0 * apply_potential(V1, f).coeffs - 1j * apply_potential(V1, g2).coeffs
        assert np.max(np.abs(lin.coeffs - rhs)) < 1e-12
        both = V1 + V2
        s = apply_potential(both, f).coeffs
        parts = apply_potential(V1, f).coeffs + apply_potential(V2, f).coeffs
        assert np.max(np.abs(s - parts)) < 1e-12

    def test_grid_mismatch_rejected(self, grid1d, rng):
        P = realize(ConstantPotential(1.0), grid1d)
        other = make_grid(1, (-16, 16), 256)
        f = SpectralField.from_values(other, np.ones(256, complex))
        with pytest.raises(ValueError):
            apply_potential(P, f)


class TestSumSpec:
    def test_mixed_sum(self, grid1d):
        spec = SumPotential((ConstantPotential(1.0),
                             RandomFourier(seed=4, decay=2.0)))
        P = realize(spec, grid1d)
        base = realize(RandomFourier(seed=4, decay=2.0), grid1d)
        assert np.max(np.abs(P.fine_values - (base.fine_values + 1.0))) < 1e-12

    def test_empty_sum_rejected(self):
        with pytest.raises(ValueError):
            SumPotential(())
