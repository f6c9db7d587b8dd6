"""Photon wavefunctions, entanglement entropies, overlaps, orthogonality metric."""

import math

import numpy as np
import pytest

from combforge import comb, entangle, model, numerics
from combforge.errors import DegenerateStateError, DomainError

J0_ZERO = numerics.bessel_j0_zero(1)


def harmonic_comb(z, alpha=0.0):
    return comb.comb_coefficients(model.ModulationProfile("harmonic", z, alpha), 1.0)


def two_combs(z, alpha):
    return [harmonic_comb(z, 0.0), harmonic_comb(z, alpha)]


class TestPairWavefunction:
    def test_harmonic_closed_form(self):
        z, alpha = 1.1, 0.8
        psi = entangle.pair_wavefunction(two_combs(z, alpha))
        raw = np.zeros_like(psi.tensor)
        nm = psi.n_max
        for n1 in range(-nm, nm + 1):
            for n2 in range(-nm, nm + 1):
                raw[n1 + nm, n2 + nm] = (
                    numerics.bessel_j(n1, z)
                    * numerics.bessel_j(n2, z)
                    * (np.exp(-1j * n1 * alpha) + np.exp(-1j * n2 * alpha))
                )
        raw /= np.linalg.norm(raw)
        # Global phase free.
        overlap = abs(np.vdot(raw, psi.tensor))
        assert overlap == pytest.approx(1.0, abs=1e-12)

    def test_in_phase_factorizes(self):
        psi = entangle.pair_wavefunction(two_combs(1.4, 0.0))
        s = np.linalg.svd(psi.tensor, compute_uv=False)
        assert s[0] == pytest.approx(1.0, abs=1e-12)
        assert s[1] < 1e-12

    def test_no_modulation_concentrates_at_origin(self):
        psi = entangle.pair_wavefunction(two_combs(0.0, 1.0))
        assert abs(psi.amplitude(0, 0)) == pytest.approx(1.0, abs=1e-12)

    def test_bosonic_symmetry(self):
        psi = entangle.pair_wavefunction(two_combs(1.7, 2.0))
        assert np.linalg.norm(psi.tensor - psi.tensor.T) < 1e-12


class TestMultiphoton:
    def test_reduces_to_pair(self):
        combs = two_combs(1.2, 1.9)
        p2 = entangle.pair_wavefunction(combs)
        pm = entangle.multiphoton_wavefunction(combs, 2)
        assert abs(np.vdot(p2.tensor, pm.tensor)) == pytest.approx(1.0, abs=1e-12)

    def test_product_minus_diagonal_identity(self):
        combs = [harmonic_comb(1.0, k * 2.0) for k in range(3)]
        psi = entangle.multiphoton_wavefunction(combs, 2)
        nm = psi.n_max
        rows = np.stack([c.to_window(nm).amplitudes for c in combs])
        total = rows.sum(axis=0)
        direct = np.outer(total, total) - np.einsum("an,am->nm", rows, rows)
        direct /= np.linalg.norm(direct)
        assert abs(np.vdot(direct, psi.tensor)) == pytest.approx(1.0, abs=1e-12)

    def test_three_photons_all_permutations(self):
        combs = [harmonic_comb(1.3, k * 2 * math.pi / 3) for k in range(3)]
        psi = entangle.multiphoton_wavefunction(combs, 3)
        nm = psi.n_max
        rows = np.stack([c.to_window(nm).amplitudes for c in combs])
        import itertools

        direct = np.zeros_like(psi.tensor)
        for p in itertools.permutations(range(3)):
            direct += np.einsum("i,j,k->ijk", rows[p[0]], rows[p[1]], rows[p[2]])
        direct /= np.linalg.norm(direct)
        assert abs(np.vdot(direct, psi.tensor)) == pytest.approx(1.0, abs=1e-12)

    def test_photons_exceeding_qubits_rejected(self):
        with pytest.raises(DomainError, match="cannot be emitted"):
            entangle.multiphoton_wavefunction(two_combs(1.0, 1.0), 3)

    def test_identical_combs_lose_rank_not_error(self):
        # Identical combs leave a valid (symmetrized product) state.
        combs = [harmonic_comb(1.0, 0.0)] * 3
        psi = entangle.multiphoton_wavefunction(combs, 3)
        rep = entangle.entropy_hosvd(psi)
        assert rep.entropy == pytest.approx(0.0, abs=1e-10)


class TestEntropySvd:
    def test_rank_one(self):
        psi = entangle.pair_wavefunction(two_combs(2.2, 0.0))
        assert entangle.entropy_svd(psi).entropy == pytest.approx(0.0, abs=1e-12)

    def test_bell_state(self):
        f = np.zeros(5)
        f[2] = 1.0
        g = np.zeros(5)
        g[1] = g[3] = 1 / math.sqrt(2)
        tensor = (np.outer(f, f) + np.outer(g, g)) / math.sqrt(2)
        rep = entangle.entropy_svd(entangle.PhotonWavefunction(2, tensor))
        assert rep.entropy == pytest.approx(math.log(2), abs=1e-12)

    def test_bell_plateau_from_combs(self):
        psi = entangle.pair_wavefunction(two_combs(J0_ZERO / 2, math.pi))
        assert entangle.entropy_svd(psi).entropy == pytest.approx(math.log(2), abs=1e-8)

    def test_weights_normalized(self):
        rep = entangle.entropy_svd(entangle.pair_wavefunction(two_combs(1.9, 2.3)))
        assert np.sum(rep.weights) == pytest.approx(1.0, abs=1e-10)
        assert 0.0 <= rep.entropy <= math.log(rep.weights.size)

    def test_basis_rotation_invariance(self):
        psi = entangle.pair_wavefunction(two_combs(1.5, 1.1))
        rng = np.random.default_rng(10)
        dim = psi.tensor.shape[0]
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        rotated = entangle.PhotonWavefunction(psi.n_max, q @ psi.tensor @ q.T)
        s0 = entangle.entropy_svd(psi).entropy
        s1 = entangle.entropy_svd(rotated).entropy
        assert s1 == pytest.approx(s0, abs=1e-9)


class TestEntropyHosvd:
    def test_separable(self):
        combs = [harmonic_comb(0.9, 0.0)] * 3
        psi = entangle.multiphoton_wavefunction(combs, 3)
        assert entangle.entropy_hosvd(psi).entropy == pytest.approx(0.0, abs=1e-10)

    def test_three_orthogonal_combs_reach_ln3(self):
        z = J0_ZERO / math.sqrt(3.0)
        combs = [harmonic_comb(z, k * 2 * math.pi / 3) for k in range(3)]
        psi = entangle.multiphoton_wavefunction(combs, 3)
        rep = entangle.entropy_hosvd(psi)
        assert rep.exp_entropy == pytest.approx(3.0, abs=1e-6)

    def test_axis_choice_immaterial(self):
        combs = [harmonic_comb(1.2, k * 1.7) for k in range(3)]
        psi = entangle.multiphoton_wavefunction(combs, 3)
        entropies = [entangle.entropy_hosvd(psi, axis=a).entropy for a in range(3)]
        assert max(entropies) - min(entropies) < 1e-9

    def test_bound_ln_n(self):
        rng = np.random.default_rng(21)
        for _ in range(4):
            phases = rng.uniform(0, 2 * math.pi, size=4)
            combs = [harmonic_comb(1.8, p) for p in phases]
            psi = entangle.multiphoton_wavefunction(combs, 3)
            assert entangle.entropy_hosvd(psi).entropy <= math.log(4) + 1e-9


class TestOverlap:
    def test_identical(self):
        c = harmonic_comb(1.3, 0.4)
        assert entangle.comb_overlap(c, c) == pytest.approx(1.0, abs=1e-12)

    def test_no_modulation(self):
        assert entangle.comb_overlap(
            harmonic_comb(0.0), harmonic_comb(0.0, 2.0)
        ) == pytest.approx(1.0)

    def test_closed_form(self):
        for z, alpha in [(0.7, 0.5), (1.5, 2.0), (2.4, math.pi)]:
            x = entangle.comb_overlap(harmonic_comb(z, 0.0), harmonic_comb(z, alpha))
            assert x.imag == pytest.approx(0.0, abs=1e-12)
            assert x.real == pytest.approx(
                entangle.harmonic_overlap(z, alpha), abs=1e-10
            )

    def test_bell_condition_orthogonality(self):
        x = entangle.comb_overlap(
            harmonic_comb(J0_ZERO / 2, 0.0), harmonic_comb(J0_ZERO / 2, math.pi)
        )
        assert abs(x) < 1e-8


class TestSingularValuesFromOverlap:
    def test_orthogonal(self):
        lam = entangle.pair_singular_values_from_overlap(0.0)
        assert lam[0] == pytest.approx(2**-0.5)
        assert lam[1] == pytest.approx(2**-0.5)
        rep = entangle.pair_entropy_from_overlap(0.0)
        assert rep.entropy == pytest.approx(math.log(2))

    def test_identical(self):
        lam = entangle.pair_singular_values_from_overlap(1.0)
        assert lam == (pytest.approx(1.0), pytest.approx(0.0))

    def test_qutrit_bell_overlap_value(self):
        lam = entangle.pair_singular_values_from_overlap(-0.2)
        assert lam[0] ** 2 + lam[1] ** 2 == pytest.approx(1.0)

    def test_matches_svd_route_on_grid(self):
        # Closed-form Schmidt values against the constructed-state SVD.
        for z in np.linspace(0.05, 5.0, 21):
            for alpha in np.linspace(0.15, math.pi, 21):
                x = entangle.harmonic_overlap(z, alpha)
                psi = entangle.pair_wavefunction(two_combs(z, alpha))
                s = np.linalg.svd(psi.tensor, compute_uv=False)
                lam = entangle.pair_singular_values_from_overlap(x)
                assert abs(s[0] - lam[0]) < 1e-8
                assert abs(s[1] - lam[1]) < 1e-8

    def test_entropy_grid_matches_closed_form(self):
        for z in np.linspace(0.0, 5.0, 11):
            for alpha in np.linspace(0.0, math.pi, 11):
                if z * math.sin(alpha / 2) < 1e-9:
                    continue
                psi = entangle.pair_wavefunction(two_combs(z, alpha))
                s_num = entangle.entropy_svd(psi).entropy
                s_ana = entangle.pair_entropy_from_overlap(
                    entangle.harmonic_overlap(z, alpha)
                ).entropy
                assert s_num == pytest.approx(s_ana, abs=1e-8)


class TestOrthogonalityMetric:
    def test_no_modulation(self):
        combs = [harmonic_comb(0.0, k * 1.0) for k in range(4)]
        assert entangle.orthogonality_metric_x(combs) == pytest.approx(6.0, abs=1e-10)

    def test_bell_condition_zero(self):
        combs = two_combs(J0_ZERO / 2, math.pi)
        assert entangle.orthogonality_metric_x(combs) < 1e-10

    def test_matches_harmonic_closed_form(self):
        phases = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
        combs = [harmonic_comb(1.4, p) for p in phases]
        assert entangle.orthogonality_metric_x(combs) == pytest.approx(
            entangle.orthogonality_metric_harmonic(1.4, phases), abs=1e-10
        )

    def test_minimum_coincides_with_entropy_maximum(self):
        z_star = J0_ZERO / math.sqrt(3.0)
        phases = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
        x_star = entangle.orthogonality_metric_harmonic(z_star, phases)
        assert x_star < 1e-10
        combs = [harmonic_comb(z_star, p) for p in phases]
        psi = entangle.multiphoton_wavefunction(combs, 3)
        assert entangle.entropy_hosvd(psi).exp_entropy == pytest.approx(3.0, abs=1e-5)


class TestClusterCollapse:
    def test_measuring_one_photon_leaves_bell_pair(self):
        z = J0_ZERO / math.sqrt(3.0)
        combs = [harmonic_comb(z, k * 2 * math.pi / 3) for k in range(3)]
        psi = entangle.multiphoton_wavefunction(combs, 3)
        reduced = entangle.project_photon(psi, combs[0], axis=0)
        rep = entangle.entropy_svd(reduced)
        assert rep.entropy == pytest.approx(math.log(2), abs=1e-8)

    def test_projection_onto_missing_comb_errors(self):
        combs = two_combs(J0_ZERO / 2, math.pi)
        psi3 = entangle.multiphoton_wavefunction(
            [combs[0], combs[1], harmonic_comb(J0_ZERO / 2, math.pi / 2)], 3
        )
        with pytest.raises(DegenerateStateError):
            # Orthogonal complement of all three combs annihilates the state.
            dim = 2 * psi3.n_max + 1
            rows = np.stack([c.to_window(psi3.n_max).amplitudes for c in [combs[0], combs[1]]])
            dead = np.zeros(dim, dtype=complex)
            dead[0] = 1.0
            for r in rows:
                dead -= np.vdot(r, dead) * r
            third = harmonic_comb(J0_ZERO / 2, math.pi / 2).to_window(psi3.n_max).amplitudes
            dead -= np.vdot(third, dead) * third
            # Re-orthogonalize once more for numerical cleanliness.
            for r in list(rows) + [third]:
                dead -= np.vdot(r, dead) * r
            dead /= np.linalg.norm(dead)
            comb_dead = comb.FrequencyComb(psi3.n_max, dead)
            entangle.project_photon(psi3, comb_dead, axis=0)
