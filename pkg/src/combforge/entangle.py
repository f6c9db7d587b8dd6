"""Entanglement of frequency-binned photons emitted by the qubit array.

Two- and multi-photon sideband wavefunctions built from per-qubit combs,
Schmidt (SVD) and higher-order-SVD entanglement entropies, comb overlaps
with their closed-form consequences, and the orthogonality metric that
tracks how far a qubit set is from emitting a maximally entangled state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .comb import FrequencyComb
from .errors import DegenerateStateError, DomainError
from .numerics import bessel_j, hosvd

#: Squared singular values below this are treated as exact zeros (0 ln 0 = 0).
ENTROPY_VALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class PhotonWavefunction:
    """Normalized M-photon amplitude tensor over sideband indices.

    Axis k indexes the sideband number of photon k over -n_max..n_max.  The
    tensor is symmetric under any permutation of its axes (bosonic).
    """

    n_max: int
    tensor: np.ndarray

    @property
    def photons(self) -> int:
        return self.tensor.ndim

    def amplitude(self, *ns: int) -> complex:
        return complex(self.tensor[tuple(n + self.n_max for n in ns)])


@dataclass(frozen=True)
class EntropyReport:
    """Schmidt weights and the entanglement entropy they generate."""

    weights: np.ndarray  # |lambda_nu|^2, normalized to sum to 1
    entropy: float  # nats
    exp_entropy: float


def _aligned(combs: list[FrequencyComb]) -> tuple[int, np.ndarray]:
    if not combs:
        raise DomainError("need at least one comb")
    n_max = max(c.n_max for c in combs)
    rows = np.stack([c.to_window(n_max).amplitudes for c in combs])
    return n_max, rows


def pair_wavefunction(combs: list[FrequencyComb]) -> PhotonWavefunction:
    """Two-photon state psi_{n1,n2} = sum_{a != b} a_{n1}^{(a)} a_{n2}^{(b)}, normalized."""
    if len(combs) < 2:
        raise DomainError("pair emission needs at least two qubits")
    n_max, rows = _aligned(combs)
    total = rows.sum(axis=0)
    psi = np.outer(total, total) - np.einsum("an,am->nm", rows, rows)
    norm = np.linalg.norm(psi)
    if norm < 1e-14:
        raise DegenerateStateError("pair wavefunction is identically zero")
    return PhotonWavefunction(n_max, psi / norm)


def multiphoton_wavefunction(combs: list[FrequencyComb], photons: int) -> PhotonWavefunction:
    """M-photon state summed over ordered selections of M distinct qubits.

    psi_{n1..nM} = sum over injective label maps of prod_k a_{n_k}^{(label_k)},
    normalized.  A qubit cannot be excited twice, so M must not exceed the
    qubit count.
    """
    n = len(combs)
    if photons > n:
        raise DomainError(
            f"{photons} photons cannot be emitted by {n} qubits (no valid state)"
        )
    if not 2 <= photons <= 5:
        raise DomainError("supported photon numbers are 2..5")
    n_max, rows = _aligned(combs)
    dim = 2 * n_max + 1
    psi = np.zeros((dim,) * photons, dtype=complex)
    for labels in itertools.permutations(range(n), photons):
        term = rows[labels[0]]
        for lab in labels[1:]:
            term = np.multiply.outer(term, rows[lab])
        psi += term
    norm = np.linalg.norm(psi)
    if norm < 1e-14:
        raise DegenerateStateError("multi-photon wavefunction is identically zero")
    return PhotonWavefunction(n_max, psi / norm)


def _entropy_from_weights(weights: np.ndarray) -> EntropyReport:
    weights = np.asarray(weights, dtype=float)
    weights = weights / np.sum(weights)
    keep = weights[weights > ENTROPY_VALUE_FLOOR]
    entropy = float(-np.sum(keep * np.log(keep)))
    return EntropyReport(weights=weights, entropy=entropy, exp_entropy=math.exp(entropy))


def entropy_svd(psi: PhotonWavefunction) -> EntropyReport:
    """Schmidt entropy S = -sum |lambda|^2 ln |lambda|^2 of a photon pair."""
    if psi.photons != 2:
        raise DomainError("entropy_svd expects a two-photon state")
    s = np.linalg.svd(psi.tensor, compute_uv=False)
    return _entropy_from_weights(s**2)


def entropy_hosvd(psi: PhotonWavefunction, axis: int | None = None) -> EntropyReport:
    """Multi-photon entropy from the higher-order SVD core.

    |lambda_nu|^2 sums the squared core entries over all indices except the
    chosen axis (default: the last).  Bosonic symmetry of psi makes the axis
    choice immaterial; use the axis argument to verify.
    """
    if psi.photons < 3:
        raise DomainError("entropy_hosvd expects three or more photons")
    core, _ = hosvd(psi.tensor)
    ax = psi.photons - 1 if axis is None else axis
    other = tuple(i for i in range(psi.photons) if i != ax)
    weights = np.sum(np.abs(core) ** 2, axis=other)
    return _entropy_from_weights(weights)


def comb_overlap(c1: FrequencyComb, c2: FrequencyComb) -> complex:
    """Scalar product x = sum_n conj(a_n^{(1)}) a_n^{(2)} on a shared window."""
    n_max = max(c1.n_max, c2.n_max)
    a1 = c1.to_window(n_max).amplitudes
    a2 = c2.to_window(n_max).amplitudes
    return complex(np.vdot(a1, a2))


def harmonic_overlap(a_over_omega: float, alpha: float) -> float:
    """Closed-form overlap J_0(2 (A/Omega) sin(alpha/2)) of equal-amplitude combs."""
    return bessel_j(0, 2.0 * a_over_omega * math.sin(0.5 * alpha))


def pair_singular_values_from_overlap(x: float) -> tuple[float, float]:
    """Schmidt values of the two-qubit pair state from the comb overlap x.

    |lambda_{1,2}| = (1 +/- x) / sqrt(2 (1 + x^2)) for real x in [-1, 1].
    """
    if abs(x) > 1.0 + 1e-12:
        raise DomainError(f"overlap magnitude {abs(x)} exceeds 1")
    x = min(1.0, max(-1.0, float(x)))
    denom = math.sqrt(2.0 * (1.0 + x * x))
    return ((1.0 + x) / denom, abs(1.0 - x) / denom)


def pair_entropy_from_overlap(x: float) -> EntropyReport:
    """Entropy of the two-qubit pair state given the comb overlap."""
    lam1, lam2 = pair_singular_values_from_overlap(x)
    return _entropy_from_weights(np.array([lam1**2, lam2**2]))


def orthogonality_metric_x(combs: list[FrequencyComb]) -> float:
    """X = sum_{i<j} |(a^{(i)}, a^{(j)})|^2; zero when all combs are orthogonal."""
    total = 0.0
    for i in range(len(combs)):
        for j in range(i + 1, len(combs)):
            total += abs(comb_overlap(combs[i], combs[j])) ** 2
    return total


def orthogonality_metric_harmonic(
    a_over_omega: float, phases: list[float]
) -> float:
    """Closed form sum_{i<j} J_0^2(2 (A/Omega) sin((alpha_i - alpha_j)/2))."""
    total = 0.0
    for i in range(len(phases)):
        for j in range(i + 1, len(phases)):
            total += harmonic_overlap(a_over_omega, phases[i] - phases[j]) ** 2
    return total


def project_photon(
    psi: PhotonWavefunction, comb: FrequencyComb, axis: int = 0
) -> PhotonWavefunction:
    """Project one photon of a multi-photon state onto a comb state.

    Returns the normalized (M-1)-photon state of the remaining photons; used
    for the measurement-collapse property of cluster-like states.
    """
    if psi.photons < 3:
        raise DomainError("projection needs at least three photons")
    a = comb.to_window(psi.n_max).amplitudes
    reduced = np.tensordot(a.conj(), psi.tensor, axes=(0, axis))
    norm = np.linalg.norm(reduced)
    if norm < 1e-14:
        raise DegenerateStateError("projection annihilates the state")
    return PhotonWavefunction(psi.n_max, reduced / norm)
