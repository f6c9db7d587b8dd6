"""Comb amplitudes, sideband intensities, analytic filtered g2 and its flags."""

import math

import numpy as np
import pytest

from combforge import comb, model
from combforge.errors import ResolutionError
from combforge.numerics import bessel_j


def harmonic_profile(amplitude, phase=0.0):
    return model.ModulationProfile("harmonic", amplitude, phase)


def sampled_from_harmonic(amplitude, phase=0.0, omega=1.0, points=512):
    t = np.arange(points) * (2 * math.pi / omega) / points
    return model.ModulationProfile(
        "sampled", samples=tuple(amplitude * np.cos(omega * t + phase))
    )


class TestCombCoefficients:
    def test_no_modulation(self):
        c = comb.comb_coefficients(harmonic_profile(0.0), 1.0)
        assert c.amplitude(0) == pytest.approx(1.0)
        assert all(c.amplitude(n) == 0.0 for n in range(1, c.n_max + 1))

    def test_harmonic_bessel_weights(self):
        c = comb.comb_coefficients(harmonic_profile(1.5), 1.0)
        for n in range(-5, 6):
            assert c.amplitude(n) == pytest.approx(bessel_j(n, 1.5), abs=1e-14)

    def test_phase_factors(self):
        alpha = 0.9
        c = comb.comb_coefficients(harmonic_profile(2.0, alpha), 1.0)
        for n in range(-4, 5):
            expected = bessel_j(n, 2.0) * np.exp(-1j * n * alpha)
            assert c.amplitude(n) == pytest.approx(expected, abs=1e-14)

    def test_sampled_matches_harmonic(self):
        alpha = 0.0
        omega = 2.0
        c_ref = comb.comb_coefficients(harmonic_profile(3.0, alpha), omega)
        c_num = comb.comb_coefficients(sampled_from_harmonic(3.0, alpha, omega), omega)
        for n in range(-8, 9):
            assert c_num.amplitude(n) == pytest.approx(c_ref.amplitude(n), abs=1e-8)

    def test_sampled_phase_convention_matches_harmonic(self):
        # The zero-mean antiderivative convention keeps the harmonic phases.
        alpha = 1.3
        omega = 1.0
        c_ref = comb.comb_coefficients(harmonic_profile(1.2, alpha), omega)
        c_num = comb.comb_coefficients(sampled_from_harmonic(1.2, alpha, omega), omega)
        for n in range(-6, 7):
            assert c_num.amplitude(n) == pytest.approx(c_ref.amplitude(n), abs=1e-8)

    def test_unitarity(self):
        for amp in (0.0, 0.7, 3.3, 12.0):
            c = comb.comb_coefficients(harmonic_profile(amp), 1.0)
            assert abs(c.total_weight - 1.0) < 1e-10
        c = comb.comb_coefficients(sampled_from_harmonic(2.4), 1.0)
        assert abs(c.total_weight - 1.0) < 1e-10

    def test_window_too_small_rejected(self):
        with pytest.raises(ResolutionError):
            comb.comb_coefficients(harmonic_profile(8.0), 1.0, n_max=4)


class TestIntensities:
    def test_one_photon_closed_form(self):
        z, alpha = 1.5, 0.7
        cfg_combs = [
            comb.comb_coefficients(harmonic_profile(z, 0.0), 1.0),
            comb.comb_coefficients(harmonic_profile(z, alpha), 1.0),
        ]
        for n in range(-4, 5):
            assert comb.intensity_one_photon(cfg_combs, n) == pytest.approx(
                comb.intensity_one_photon_harmonic(z, alpha, n), abs=1e-12
            )

    def test_one_photon_in_phase(self):
        combs = [comb.comb_coefficients(harmonic_profile(1.5), 1.0)] * 2
        for n in range(-3, 4):
            assert comb.intensity_one_photon(combs, n) == pytest.approx(
                4.0 * bessel_j(n, 1.5) ** 2, abs=1e-12
            )

    def test_one_photon_antiphase_parity(self):
        combs = [
            comb.comb_coefficients(harmonic_profile(1.5, 0.0), 1.0),
            comb.comb_coefficients(harmonic_profile(1.5, math.pi), 1.0),
        ]
        for n in (-3, -1, 1, 3):
            assert comb.intensity_one_photon_harmonic(1.5, math.pi, n) == 0.0
            assert comb.intensity_one_photon(combs, n) < 1e-25

    def test_one_photon_no_modulation_carrier(self):
        combs = [comb.comb_coefficients(harmonic_profile(0.0), 1.0)] * 2
        assert comb.intensity_one_photon(combs, 0) == pytest.approx(4.0)

    def test_two_photon_closed_form(self):
        z, alpha = 1.2, 2.1
        combs = [
            comb.comb_coefficients(harmonic_profile(z, 0.0), 1.0),
            comb.comb_coefficients(harmonic_profile(z, alpha), 1.0),
        ]
        for n1 in range(-3, 4):
            for n2 in range(-3, 4):
                assert comb.intensity_two_photon(combs, n1, n2) == pytest.approx(
                    comb.intensity_two_photon_harmonic(z, alpha, n1, n2), abs=1e-12
                )

    def test_two_photon_antiphase_selection(self):
        for n1 in range(-3, 4):
            for n2 in range(-3, 4):
                i2 = comb.intensity_two_photon_harmonic(1.5, math.pi, n1, n2)
                if (n1 - n2) % 2:
                    assert i2 == 0.0
                else:
                    assert i2 >= 0.0

    def test_two_photon_in_phase(self):
        assert comb.intensity_two_photon_harmonic(1.5, 0.0, 2, -1) == pytest.approx(
            4.0 * bessel_j(2, 1.5) ** 2 * bessel_j(-1, 1.5) ** 2
        )

    def test_two_photon_equal_sidebands_alpha_independent(self):
        for alpha in (0.0, 1.0, math.pi):
            assert comb.intensity_two_photon_harmonic(1.5, alpha, 2, 2) == pytest.approx(
                4.0 * bessel_j(2, 1.5) ** 4
            )


def two_combs(z, alpha):
    return [
        comb.comb_coefficients(harmonic_profile(z, 0.0), 1.0),
        comb.comb_coefficients(harmonic_profile(z, alpha), 1.0),
    ]


class TestFilteredG2Analytic:
    def test_uncorrelated_limit_is_one(self):
        combs = two_combs(1e-6, 0.0)
        cell = comb.filtered_g2_analytic(combs, 0, 0)
        assert cell.flag == comb.FLAG_FINITE
        assert cell.value == pytest.approx(1.0, abs=1e-9)

    def test_in_phase_all_finite(self):
        combs = two_combs(1.5, 0.0)
        for n1 in range(-3, 4):
            for n2 in range(-3, 4):
                assert comb.filtered_g2_analytic(combs, n1, n2).flag == comb.FLAG_FINITE

    def test_antiphase_odd_odd_bunching(self):
        combs = two_combs(1.5, math.pi)
        cell = comb.filtered_g2_analytic(combs, 1, 1)
        assert cell.flag == comb.FLAG_INF
        assert math.isinf(cell.value)

    def test_antiphase_mixed_parity_indeterminate(self):
        combs = two_combs(1.5, math.pi)
        assert comb.filtered_g2_analytic(combs, 2, 1).flag == comb.FLAG_INDET

    def test_map_checkerboard(self):
        cfg = model.SystemConfig(
            qubits=(model.QubitSpec(), model.QubitSpec()),
            modulations=(harmonic_profile(1.5, 0.0), harmonic_profile(1.5, math.pi)),
            drive=model.Drive(),
            modulation_frequency=1.0,
        )
        cells = comb.sideband_map(cfg, (-2, 2))
        for (n1, n2), cell in cells.items():
            if n1 % 2 and n2 % 2:
                assert cell.flag == comb.FLAG_INF
            elif (n1 - n2) % 2:
                assert cell.flag == comb.FLAG_INDET
            else:
                assert cell.flag == comb.FLAG_FINITE

    def test_quarter_phase_map_alternation(self):
        cfg = model.SystemConfig(
            qubits=(model.QubitSpec(), model.QubitSpec()),
            modulations=(harmonic_profile(1.5, 0.0), harmonic_profile(1.5, math.pi / 2)),
            drive=model.Drive(),
            modulation_frequency=1.0,
        )
        cells = comb.sideband_map(cfg, (-2, 2))
        flags = {k: v.flag for k, v in cells.items()}
        assert flags[(1, -1)] == comb.FLAG_FINITE
        assert cells[(1, -1)].value == pytest.approx(0.0, abs=1e-12)
        assert flags[(2, 1)] == comb.FLAG_INF
        assert flags[(2, 0)] == comb.FLAG_INDET
        values = [v.value for v in cells.values() if v.flag == comb.FLAG_FINITE]
        assert any(v > 1.0 for v in values) and any(v < 1.0 for v in values)


class TestCombInvariants:
    def test_sign_flip_equals_phase_shift(self):
        z = 1.3
        for alpha in (0.3, 1.0, 2.4):
            flipped = [
                comb.comb_coefficients(harmonic_profile(z, 0.0), 1.0),
                comb.comb_coefficients(harmonic_profile(-z, alpha), 1.0),
            ]
            shifted = [
                comb.comb_coefficients(harmonic_profile(z, 0.0), 1.0),
                comb.comb_coefficients(harmonic_profile(z, alpha + math.pi), 1.0),
            ]
            for n in range(-4, 5):
                assert comb.intensity_one_photon(flipped, n) == pytest.approx(
                    comb.intensity_one_photon(shifted, n), abs=1e-12
                )
                for n2 in range(-2, 3):
                    assert comb.intensity_two_photon(flipped, n, n2) == pytest.approx(
                        comb.intensity_two_photon(shifted, n, n2), abs=1e-12
                    )

    def test_sampled_antisymmetric_profiles_keep_selection_rules(self):
        # Negating the profile equals a half-period shift only when the
        # profile carries odd multiples of Omega; the parity selection rule
        # holds exactly for that class.
        omega = 1.0
        t = np.arange(512) * 2 * math.pi / 512
        wave = 1.1 * np.cos(t) + 0.4 * np.cos(3 * t + 0.3)
        combs = [
            comb.comb_coefficients(model.ModulationProfile("sampled", samples=tuple(wave)), omega),
            comb.comb_coefficients(model.ModulationProfile("sampled", samples=tuple(-wave)), omega),
        ]
        for n in (-3, -1, 1, 3):
            assert comb.intensity_one_photon(combs, n) < 1e-12

    def test_even_harmonic_content_breaks_negation_rule(self):
        # A profile with a 2 Omega component is not half-period antisymmetric;
        # its negation is not a time shift and odd sidebands survive.
        omega = 1.0
        t = np.arange(512) * 2 * math.pi / 512
        wave = 1.1 * np.cos(t) + 0.4 * np.cos(2 * t + 0.3)
        combs = [
            comb.comb_coefficients(model.ModulationProfile("sampled", samples=tuple(wave)), omega),
            comb.comb_coefficients(model.ModulationProfile("sampled", samples=tuple(-wave)), omega),
        ]
        assert max(comb.intensity_one_photon(combs, n) for n in (-1, 1)) > 1e-4
