"""Numerical kernel contracts: Bessel, SVD/HOSVD, Takagi, ODE, Fourier."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from combforge import numerics
from combforge.errors import DomainError, ResolutionError, StiffnessError


def bessel_integral_oracle(n, x, points=20001):
    """J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt by composite trapezoid."""
    t = np.linspace(0.0, np.pi, points)
    return np.trapezoid(np.cos(n * t - x * np.sin(t)), t) / np.pi


class TestBessel:
    def test_j0_at_zero(self):
        assert numerics.bessel_j(0, 0.0) == 1.0

    def test_jn_at_zero(self):
        assert numerics.bessel_j(1, 0.0) == 0.0
        assert numerics.bessel_j(7, 0.0) == 0.0

    def test_first_root_bracket(self):
        # Bisection root of the integral definition, frozen to 2.404826.
        lo, hi = 2.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if bessel_integral_oracle(0, lo) * bessel_integral_oracle(0, mid) <= 0:
                hi = mid
            else:
                lo = mid
        root = 0.5 * (lo + hi)
        assert abs(root - 2.404826) < 1e-6
        assert abs(numerics.bessel_j(0, root)) < 1e-6

    @pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 60, 123, 200])
    @pytest.mark.parametrize("x", [0.1, 1.7, 2.5, 9.3, 47.0, 333.0, 1000.0])
    def test_against_integral_oracle(self, n, x):
        assert abs(numerics.bessel_j(n, x) - bessel_integral_oracle(n, x)) < 1e-9

    def test_negative_order_symmetry(self):
        for n in range(0, 9):
            for x in (0.3, 2.1, 8.7):
                assert numerics.bessel_j(-n, x) == pytest.approx(
                    (-1.0) ** n * numerics.bessel_j(n, x), abs=1e-14
                )

    def test_sum_rule(self):
        for x in np.linspace(0.0, 20.0, 9):
            window = int(x) + 40
            total = sum(
                numerics.bessel_j(n, x) ** 2 for n in range(-window, window + 1)
            )
            assert abs(total - 1.0) < 1e-10

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            numerics.bessel_j(201, 1.0)
        with pytest.raises(DomainError):
            numerics.bessel_j(0, 1001.0)

    def test_zeros(self):
        assert numerics.bessel_j0_zero(1) == pytest.approx(2.404825557695773, abs=1e-12)
        assert numerics.bessel_j0_zero(2) == pytest.approx(5.520078110286311, abs=1e-12)
        # Definitional round trip.
        root = numerics.bessel_j0_zero(1)
        assert abs(numerics.bessel_j(0, root)) < 1e-10
        with pytest.raises(DomainError):
            numerics.bessel_j0_zero(0)
        with pytest.raises(DomainError):
            numerics.bessel_j0_zero(21)


class TestSvd:
    def test_identity(self):
        s, _, _ = numerics.svd(np.eye(2))
        assert np.allclose(s, [1.0, 1.0])

    def test_rank_one(self):
        rng = np.random.default_rng(3)
        u = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        s, _, _ = numerics.svd(np.outer(u, v.conj()))
        assert s[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(s[1:] < 1e-12)

    def test_matches_hermitian_eigensolve(self):
        rng = np.random.default_rng(11)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        s, u, vh = numerics.svd(m)
        evals = np.linalg.eigvalsh(m.conj().T @ m)[::-1]
        assert np.allclose(s, np.sqrt(np.clip(evals, 0, None)), atol=1e-10)
        assert np.linalg.norm(u @ np.diag(s) @ vh - m) < 1e-10 * np.linalg.norm(m)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
        s1, *_ = numerics.svd(m)
        s2, *_ = numerics.svd(q @ m)
        assert np.allclose(s1, s2, atol=1e-10)

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            numerics.svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestHosvd:
    def test_order2_matches_svd(self):
        rng = np.random.default_rng(2)
        m = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
        core, _ = numerics.hosvd(m)
        s, *_ = numerics.svd(m)
        diag = np.abs(core[: min(m.shape), : min(m.shape)].diagonal())
        assert np.allclose(np.sort(diag)[::-1], s, atol=1e-10)

    def test_separable(self):
        rng = np.random.default_rng(9)
        u, v, w = (rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(3))
        t = np.einsum("i,j,k->ijk", u, v, w)
        core, _ = numerics.hosvd(t)
        mags = np.sort(np.abs(core).ravel())
        expected = np.linalg.norm(u) * np.linalg.norm(v) * np.linalg.norm(w)
        assert mags[-1] == pytest.approx(expected, rel=1e-10)
        assert mags[-2] < 1e-10 * expected

    def test_reconstruction_and_unitarity(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=(3, 4, 2, 3)) + 1j * rng.normal(size=(3, 4, 2, 3))
        core, factors = numerics.hosvd(t)
        assert (
            np.linalg.norm(numerics.hosvd_reconstruct(core, factors) - t)
            < 1e-10 * np.linalg.norm(t)
        )
        for u in factors:
            assert np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])) < 1e-10

    def test_core_all_orthogonality(self):
        rng = np.random.default_rng(6)
        t = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
        t = t + np.transpose(t, (1, 0, 2))  # partially symmetric input
        core, _ = numerics.hosvd(t)
        # Slices along each axis must be mutually orthogonal.
        for axis in range(3):
            unf = np.reshape(np.moveaxis(core, axis, 0), (3, -1))
            gram = unf @ unf.conj().T
            off = gram - np.diag(np.diag(gram))
            assert np.max(np.abs(off)) < 1e-10 * max(np.abs(np.diag(gram)))

    def test_order_guard(self):
        with pytest.raises(DomainError):
            numerics.hosvd(np.zeros(4))


class TestTakagi:
    def test_random_symmetric(self):
        rng = np.random.default_rng(13)
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        m = m + m.T
        s, u = numerics.takagi(m)
        assert np.linalg.norm(u @ np.diag(s) @ u.T - m) < 1e-10 * np.linalg.norm(m)
        assert np.linalg.norm(u.conj().T @ u - np.eye(6)) < 1e-10
        assert np.all(np.diff(s) <= 1e-12)

    def test_degenerate_pair(self):
        f = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
        g = np.array([0.0, 1.0, 0.0, 1.0, 0.0]) / math.sqrt(2.0)
        m = (np.outer(f, f) + np.outer(g, g)) / math.sqrt(2.0)
        s, u = numerics.takagi(m)
        assert np.allclose(s[:2], [2**-0.5, 2**-0.5], atol=1e-12)
        assert np.linalg.norm(u @ np.diag(s) @ u.T - m) < 1e-12


class TestOde:
    def test_exponential_decay(self):
        y = numerics.ode_propagate(lambda t, y: -y, np.array([1.0 + 0j]), 0, 1, rtol=1e-10)
        assert abs(y[0] - math.exp(-1)) < 1e-9

    def test_norm_preservation(self):
        y = numerics.ode_propagate(
            lambda t, y: 1j * 2.3 * y, np.array([1.0 + 0j]), 0, 5, rtol=1e-8
        )
        assert abs(abs(y[0]) - 1.0) < 10 * 1e-8

    def test_driven_two_level_vs_expm(self):
        h = np.array([[0.0, 0.4], [0.4, 1.1]], dtype=complex) - 1j * np.diag([0.0, 0.5])
        y0 = np.array([1.0, 0.0], dtype=complex)
        for rtol in (1e-6, 1e-8, 1e-10):
            y = numerics.ode_propagate(lambda t, y: -1j * (h @ y), y0, 0, 3.0, rtol=rtol)
            exact = expm(-1j * h * 3.0) @ y0
            assert np.linalg.norm(y - exact) < 10 * rtol

    def test_tightening_rtol_never_hurts(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        a = a - 3 * np.eye(5)
        y0 = rng.normal(size=5) + 1j * rng.normal(size=5)
        exact = expm(a * 2.0) @ y0
        errors = []
        for rtol in (1e-5, 1e-7, 1e-9, 1e-11):
            y = numerics.ode_propagate(lambda t, y: a @ y, y0, 0, 2.0, rtol=rtol)
            errors.append(np.linalg.norm(y - exact))
        floor = 1e-12 * np.linalg.norm(exact)
        for worse, better in zip(errors, errors[1:]):
            assert better <= worse * 1.5 + floor

    def test_t_eval_sampling(self):
        times = [0.0, 0.25, 1.0, 1.75, 2.0]
        ys = numerics.ode_propagate(
            lambda t, y: -y, np.array([1.0 + 0j]), 0, 2, rtol=1e-10, t_eval=times
        )
        for t, y in zip(times, ys):
            assert abs(y[0] - math.exp(-t)) < 1e-8

    def test_stiffness_error(self):
        def blow_up(t, y):
            return -1e14 * (y - np.cos(1e10 * t))

        with pytest.raises(StiffnessError):
            numerics.ode_propagate(
                blow_up, np.array([0.0 + 0j]), 0, 1.0, rtol=1e-6, max_steps=2000
            )

    def test_rtol_guard(self):
        with pytest.raises(DomainError):
            numerics.ode_propagate(lambda t, y: -y, np.array([1.0 + 0j]), 0, 1, rtol=1e-13)


class TestPeriodicFourier:
    def test_constant(self):
        c = numerics.periodic_fourier_harmonics(np.ones(32), 3)
        assert abs(c[numerics.harmonic_index(0, 3)] - 1.0) < 1e-14
        for n in (-3, -1, 1, 3):
            assert abs(c[numerics.harmonic_index(n, 3)]) < 1e-14

    def test_single_harmonic(self):
        t = np.arange(64) / 64 * 2 * np.pi
        c = numerics.periodic_fourier_harmonics(np.exp(-1j * t), 4)
        assert abs(c[numerics.harmonic_index(1, 4)] - 1.0) < 1e-12
        assert abs(c[numerics.harmonic_index(-1, 4)]) < 1e-12

    def test_cosine(self):
        t = np.arange(64) / 64 * 2 * np.pi
        c = numerics.periodic_fourier_harmonics(np.cos(2 * t), 4)
        assert abs(c[numerics.harmonic_index(2, 4)] - 0.5) < 1e-12
        assert abs(c[numerics.harmonic_index(-2, 4)] - 0.5) < 1e-12

    def test_resolution_guard(self):
        with pytest.raises(ResolutionError):
            numerics.periodic_fourier_harmonics(np.ones(8), 3)

    @given(st.integers(min_value=-5, max_value=5), st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_extracts_planted_harmonic(self, n, phase):
        t = np.arange(128) / 128 * 2 * np.pi
        signal = np.exp(-1j * n * t + 1j * phase)
        c = numerics.periodic_fourier_harmonics(signal, 6)
        assert abs(c[numerics.harmonic_index(n, 6)] - np.exp(1j * phase)) < 1e-10
