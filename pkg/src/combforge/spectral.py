"""Static single-excitation physics of the qubit array.

Effective non-Hermitian Hamiltonian with the photon field traced out,
dressed Green function, elastic reflection, first-order anti-Stokes
reflection, and the Bessel-dressed sideband amplitudes for homogeneous
modulation.  Positions enter only through the phases phi_i = omega0 z_i / c
(Markovian approximation with the wave vector frozen at omega0 / c).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import SingularityError
from .model import SystemConfig
from .numerics import bessel_j

EIGENVALUE_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Dense N x N non-Hermitian Hamiltonian and the position phases."""

    matrix: np.ndarray
    phases: np.ndarray
    omega0: float
    gamma_1d: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class GreenFunction:
    """Dressed Green function G(omega) = (omega - H)^{-1} at one frequency."""

    omega: float
    matrix: np.ndarray
    phases: np.ndarray


def build_hamiltonian(cfg: SystemConfig) -> EffectiveHamiltonian:
    """H_ij = omega0 d_ij - i gamma_1d e^{i|phi_i - phi_j|} - i gamma_nr_i d_ij."""
    phi = np.array([q.phase for q in cfg.qubits], dtype=float)
    gnr = np.array([q.gamma_nr for q in cfg.qubits], dtype=float)
    g = cfg.gamma_1d
    h = -1j * g * np.exp(1j * np.abs(phi[:, None] - phi[None, :]))
    h += np.diag(cfg.omega0 - 1j * gnr)
    return EffectiveHamiltonian(matrix=h, phases=phi, omega0=cfg.omega0, gamma_1d=g)


def green(h: EffectiveHamiltonian, omega: float) -> GreenFunction:
    """Dense inverse G(omega) = (omega - H)^{-1} with residual check."""
    n = h.n
    a = omega * np.eye(n) - h.matrix
    try:
        g = np.linalg.solve(a, np.eye(n, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise SingularityError(
            f"omega={omega!r} coincides with a real eigenvalue of H"
        ) from exc
    residual = np.linalg.norm(a @ g - np.eye(n))
    if not np.isfinite(residual) or residual > 1e-8 * max(1.0, np.linalg.norm(g)):
        raise SingularityError(
            f"Green function at omega={omega!r} is numerically singular "
            f"(residual {residual:.2e})"
        )
    return GreenFunction(omega=omega, matrix=g, phases=h.phases)


def s_plus(g: GreenFunction) -> np.ndarray:
    """Collection vector s+_i(omega) = sum_j G_ij(omega) e^{i phi_j}."""
    return g.matrix @ np.exp(1j * g.phases)


def reflection(h: EffectiveHamiltonian, omega: float) -> complex:
    """Elastic reflection amplitude r(omega) = -i gamma sum_ij G_ij e^{i(phi_i+phi_j)}."""
    g = green(h, omega)
    v = np.exp(1j * h.phases)
    return complex(-1j * h.gamma_1d * (v @ g.matrix @ v))


def stokes_reflection_r1(
    h: EffectiveHamiltonian, omega: float, u: np.ndarray, big_omega: float
) -> complex:
    """First-order anti-Stokes reflection amplitude.

    r1(omega) = gamma sum_k u_k s+_k(omega + Omega) s+_k(omega), where u_k is
    the one-sided modulation weight of qubit k.  The overall phase of r1 is
    convention dependent; only |r1| and derived observables are contractual.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (h.n,):
        raise ValueError(f"expected {h.n} modulation weights, got shape {u.shape}")
    sp_up = s_plus(green(h, omega + big_omega))
    sp = s_plus(green(h, omega))
    return complex(h.gamma_1d * np.sum(u * sp_up * sp))


def homogeneous_sideband_matrix(
    r: Callable[[float], complex],
    u: float,
    big_omega: float,
    n: int,
    omega: float,
    tail_tol: float = 1e-12,
) -> complex:
    """Sideband amplitude S(omega + n Omega <- omega) for homogeneous modulation.

    S = sum_k J_{n+k}(2u/Omega) r(omega - k Omega) J_k(2u/Omega), truncated at
    |k| <= 2u/Omega + 40 with an assertion that the dropped Bessel tail weight
    stays below tail_tol.
    """
    z = 2.0 * u / big_omega
    kmax = int(np.ceil(abs(z))) + 40
    total = 0.0 + 0.0j
    for k in range(-kmax, kmax + 1):
        jk = bessel_j(k, z)
        jnk = bessel_j(n + k, z)
        if jk == 0.0 and jnk == 0.0:
            continue
        total += jnk * r(omega - k * big_omega) * jk
    tail = abs(bessel_j(kmax + 1, z)) + abs(bessel_j(-(kmax + 1), z))
    if tail > tail_tol:
        raise SingularityError(
            f"sideband truncation tail {tail:.2e} exceeds {tail_tol:.2e}"
        )
    return total


def eigenmodes(h: EffectiveHamiltonian) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigen-decomposition H = V diag(vals) V^{-1}; Im(vals) <= 0 asserted."""
    vals, vecs = np.linalg.eig(h.matrix)
    if np.any(vals.imag > EIGENVALUE_IMAG_TOL * max(1.0, h.gamma_1d)):
        raise SingularityError("effective Hamiltonian has a growing eigenmode")
    inv = np.linalg.inv(vecs)
    return vals, vecs, inv
