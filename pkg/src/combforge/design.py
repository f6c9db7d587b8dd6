"""Inverse design of qubit frequency modulations for a target photon pair.

Factorizes the target two-photon state (symmetric SVD), converts the two
factors into per-qubit comb states, and extracts the real frequency
modulation whose comb reproduces them.  The imaginary part of the exact
modulation (which would require gain modulation) is discarded and its norm
reported; the achieved state and its fidelity come from the forward model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comb import FrequencyComb, comb_coefficients
from .entangle import PhotonWavefunction, pair_wavefunction
from .errors import BranchCutError, DomainError, RankError
from .model import ModulationProfile
from .numerics import takagi

#: Singular values below this fraction of the leading one count as zero rank.
RANK_THRESHOLD = 1e-10


@dataclass(frozen=True)
class DesignResult:
    """Synthesized modulation profiles and the state they actually emit."""

    profiles: tuple[ModulationProfile, ModulationProfile]
    combs: tuple[FrequencyComb, FrequencyComb]
    achieved: PhotonWavefunction
    fidelity: float
    imag_residual: float  # rms of the discarded gain modulation, same units


def design_fidelity(target: PhotonWavefunction, achieved: PhotonWavefunction) -> float:
    """Squared overlap |sum conj(target) achieved|^2 of two normalized states."""
    n_max = max(target.n_max, achieved.n_max)
    a = _padded(target, n_max)
    b = _padded(achieved, n_max)
    return float(abs(np.vdot(a, b)) ** 2)


def _padded(psi: PhotonWavefunction, n_max: int) -> np.ndarray:
    if psi.n_max == n_max:
        return psi.tensor
    pad = n_max - psi.n_max
    if pad < 0:
        dim = 2 * n_max + 1
        sl = tuple(slice(psi.n_max - n_max, psi.n_max + n_max + 1) for _ in range(psi.tensor.ndim))
        return psi.tensor[sl]
    return np.pad(psi.tensor, [(pad, pad)] * psi.tensor.ndim)


def forward_emission(
    profiles: tuple[ModulationProfile, ModulationProfile],
    omega: float,
    n_max: int | None = None,
) -> PhotonWavefunction:
    """Photon pair emitted by two qubits carrying the given modulations."""
    combs = [comb_coefficients(p, omega, n_max) for p in profiles]
    widest = max(c.n_max for c in combs)
    return pair_wavefunction([c.to_window(widest) for c in combs])


def design_modulation(
    target: PhotonWavefunction,
    omega: float,
    samples_per_period: int = 1024,
) -> DesignResult:
    """Synthesize real periodic modulations whose emitted pair approximates target.

    Steps: symmetric-SVD factorize the (rank <= 2) target into two comb
    states; form a^{(1,2)} = C [sqrt(l1) v1 +/- i sqrt(l2) v2]; recover each
    modulation as the real part of i d/dt ln sum_n a_n e^{-i n Omega t}
    evaluated by exact spectral differentiation on the sample grid.
    """
    if target.photons != 2:
        raise DomainError("design targets must be two-photon states")
    if omega <= 0:
        raise DomainError("modulation frequency must be positive")
    psi = target.tensor / np.linalg.norm(target.tensor)
    s, u = takagi(psi)
    rank = int(np.sum(s > RANK_THRESHOLD * s[0]))
    if rank > 2:
        raise RankError(
            f"target has symmetric rank {rank}; emitting it needs {rank} qubits, "
            "two-qubit design supports rank <= 2",
            rank=rank,
        )
    lam1 = s[0]
    lam2 = s[1] if len(s) > 1 else 0.0
    base1 = math.sqrt(lam1) * u[:, 0]
    base2 = (
        1j * math.sqrt(lam2) * u[:, 1] if lam2 > RANK_THRESHOLD * lam1 else 0.0 * base1
    )
    combs = []
    profiles = []
    residuals = []
    for sign in (+1.0, -1.0):
        a = base1 + sign * base2
        a = a / np.linalg.norm(a)
        profile, residual = _profile_from_comb(a, target.n_max, omega, samples_per_period)
        profiles.append(profile)
        residuals.append(residual)
        combs.append(comb_coefficients(profile, omega))
    achieved = forward_emission(tuple(profiles), omega)
    return DesignResult(
        profiles=tuple(profiles),
        combs=tuple(combs),
        achieved=achieved,
        fidelity=design_fidelity(target, achieved),
        imag_residual=float(np.hypot(*residuals) / math.sqrt(2.0)),
    )


def _profile_from_comb(
    amplitudes: np.ndarray, n_max: int, omega: float, samples_per_period: int
) -> tuple[ModulationProfile, float]:
    """Real modulation table from comb amplitudes via i d/dt ln F(t)."""
    ns = np.arange(-n_max, n_max + 1)
    t = np.arange(samples_per_period) * (2.0 * math.pi / omega) / samples_per_period
    phases = np.exp(-1j * np.outer(ns, omega * t))
    f = amplitudes @ phases
    small = np.abs(f) < 1e-12 * np.max(np.abs(f))
    if np.any(small):
        bad = float(t[np.argmax(small)])
        raise BranchCutError(
            f"comb amplitude vanishes at t={bad:.6g}; the log derivative has a branch cut",
            t=bad,
        )
    fdot = (amplitudes * (-1j * ns * omega)) @ phases
    w_complex = 1j * fdot / f
    w_real = w_complex.real
    residual = float(np.sqrt(np.mean(w_complex.imag**2)))
    return ModulationProfile(kind="sampled", samples=tuple(w_real)), residual
