"""Real-time master-equation route for the modulated qubit array.

Time-dependent Liouvillian in the frame rotating at the drive frequency,
periodic steady state (monodromy fixed point, with plain stroboscopic
iteration available), quantum-regression two-time correlators, Fourier
harmonics of g2(t, t + tau), and frequency-filtered cross-correlations via
two auxiliary detector qubits.  A weak-drive pure-state cascade provides a
fast, numerically clean engine for large detector sweeps; it solves the
same generator to leading order in the drive and is cross-validated against
the density-matrix route in the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    RegimeWarning,
    UndefinedCorrelationError,
)
from .model import ModulationProfile, SystemConfig, modulation_value
from .numerics import harmonic_index, ode_propagate, periodic_fourier_harmonics

WEAK_DRIVE_LIMIT = 1e-2  # in units of gamma_1d
DETECTOR_SATURATION = 0.1
UNIT_EIGENVALUE_TOL = 1e-5
DEFAULT_RTOL = 1e-9
SWEEP_RTOL = 1e-7
DETECTION_FLOOR = 1e-10

FLAG_FINITE = "finite"
FLAG_INF = "inf"
FLAG_INDET = "indet"


class LiouvilleOperator:
    """Time-dependent Lindblad generator on a (possibly truncated) register.

    The Hilbert space holds the system qubits plus (optionally) two detector
    qubits, restricted to states with at most ``max_excitations`` excited
    qubits.  The Hamiltonian carries the modulated detunings, the coherent
    waveguide-mediated exchange, and the rotating-frame drive; the dissipator
    matrix is gamma_1d cos(phi_j - phi_k) plus nonradiative and detector
    decay on the diagonal.
    """

    def __init__(
        self,
        cfg: SystemConfig,
        include_detectors: bool = False,
        max_excitations: int | None = None,
    ):
        self.cfg = cfg
        n_sys = cfg.n_qubits
        if include_detectors:
            if cfg.detectors is None:
                raise ConfigError("detectors: requested but not configured")
            n_tot = n_sys + 2
        else:
            n_tot = n_sys
        if n_tot > 8:
            raise ConfigError(f"total qubit count {n_tot} exceeds 8")
        self.n_system = n_sys
        self.n_qubits = n_tot
        cap = n_tot if max_excitations is None else min(max_excitations, n_tot)
        if cap < 1:
            raise ConfigError("max_excitations must be at least 1")
        self.max_excitations = cap

        masks = [m for m in range(1 << n_tot) if bin(m).count("1") <= cap]
        masks.sort(key=lambda m: (bin(m).count("1"), m))
        self.basis = tuple(masks)
        self.index = {m: i for i, m in enumerate(masks)}
        self.excitations = np.array([bin(m).count("1") for m in masks])
        d = len(masks)
        self.dim = d

        self.sigma = []
        for j in range(n_tot):
            s = np.zeros((d, d), dtype=complex)
            for i, m in enumerate(masks):
                if m & (1 << j):
                    s[self.index[m & ~(1 << j)], i] = 1.0
            self.sigma.append(s)
        self.number = [s.conj().T @ s for s in self.sigma]

        phases = [q.phase for q in cfg.qubits]
        gnr = [q.gamma_nr for q in cfg.qubits]
        if include_detectors:
            phases += [cfg.detectors.phase, cfg.detectors.phase]
        phases = np.asarray(phases, dtype=float)
        self.phases = phases
        g1d = cfg.gamma_1d
        eps = cfg.drive.frequency
        omega = cfg.modulation_frequency

        # Rotating-frame detunings: system at omega0 - eps, detectors at n Omega.
        detuning = [cfg.omega0 - eps] * n_sys
        if include_detectors:
            detuning += [cfg.detectors.n1 * omega, cfg.detectors.n2 * omega]
        h = np.zeros((d, d), dtype=complex)
        for j, det in enumerate(detuning):
            h += det * self.number[j]
        for j in range(n_tot):
            for k in range(n_tot):
                if j != k:
                    coupling = g1d * math.sin(abs(phases[j] - phases[k]))
                    if coupling:
                        h += coupling * (self.sigma[j].conj().T @ self.sigma[k])
        rabi = cfg.drive.rabi_rate
        for j in range(n_sys):
            term = np.exp(-1j * phases[j]) * self.sigma[j].conj().T
            h += -0.5j * rabi * (term - term.conj().T)
        self.h_static = h
        self.rabi = rabi

        gamma = g1d * np.cos(phases[:, None] - phases[None, :])
        extra = np.array(
            gnr + ([cfg.detectors.gamma_d] * 2 if include_detectors else [])
        )
        if np.any(extra < 0):
            raise ConfigError("negative decay rate")
        gamma = gamma + np.diag(extra)
        self.gamma_matrix = gamma
        self.big_gamma = sum(
            gamma[j, k] * (self.sigma[k].conj().T @ self.sigma[j])
            for j in range(n_tot)
            for k in range(n_tot)
        )
        self.refill_ops = [
            (
                self.sigma[j],
                sum(gamma[j, k] * self.sigma[k].conj().T for k in range(n_tot)),
            )
            for j in range(n_tot)
        ]
        self.h_nh_static = self.h_static - 1j * self.big_gamma
        self.omega = omega
        self.period = 2.0 * math.pi / omega
        self.profiles: tuple[ModulationProfile, ...] = cfg.modulations
        self._matrix_cache: dict | None = None

    # -- time-dependent pieces -------------------------------------------
    def modulation_offsets(self, t: float) -> np.ndarray:
        """Per-system-qubit frequency offsets A_j(t)."""
        return np.array(
            [modulation_value(p, self.omega, t) for p in self.profiles], dtype=float
        )

    def hamiltonian(self, t: float) -> np.ndarray:
        h = self.h_static.copy()
        offs = self.modulation_offsets(t)
        for j in range(self.n_system):
            h += offs[j] * self.number[j]
        return h

    def apply(self, t: float, rho: np.ndarray) -> np.ndarray:
        """Lindblad right-hand side at time t."""
        hnh = self.h_nh_static.copy()
        offs = self.modulation_offsets(t)
        for j in range(self.n_system):
            hnh += offs[j] * self.number[j]
        out = -1j * (hnh @ rho - rho @ hnh.conj().T)
        for sig, kmat in self.refill_ops:
            out += 2.0 * (sig @ rho @ kmat)
        return out

    # -- vectorized superoperator ------------------------------------------
    def _matrices(self) -> dict:
        if self._matrix_cache is None:
            d = self.dim
            eye = np.eye(d)
            hnh = self.h_nh_static
            l0 = -1j * (np.kron(hnh, eye) - np.kron(eye, hnh.conj()))
            for sig, kmat in self.refill_ops:
                l0 += 2.0 * np.kron(sig, kmat.T)
            mod_diags = []
            for j in range(self.n_system):
                nj = np.real(np.diag(self.number[j]))
                mod_diags.append(-1j * (nj[:, None] - nj[None, :]).reshape(-1))
            exc_vec = (
                self.excitations[:, None] + self.excitations[None, :]
            ).reshape(-1)
            self._matrix_cache = {
                "l0": l0,
                "mod_diags": mod_diags,
                "exc_vec": exc_vec,
            }
        return self._matrix_cache

    def scaled_generator(self) -> tuple[np.ndarray, list[np.ndarray], np.ndarray]:
        """(L0_scaled, modulation diagonals, scale vector).

        Conjugating by diag(rabi^(exc_bra + exc_ket)) makes every component
        of the weak-drive steady state order unity, so fixed-point solves
        keep uniform relative accuracy across excitation sectors.
        """
        mats = self._matrices()
        exc = mats["exc_vec"].astype(float)
        s = self.rabi if 0.0 < self.rabi < 1.0 else 1.0
        scale = s**exc
        l0s = mats["l0"] * (scale[None, :] / scale[:, None])
        return l0s, mats["mod_diags"], scale

    def vec_rhs(self, l0s: np.ndarray, mod_diags: list[np.ndarray]):
        """Right-hand side for vectorized states or propagator matrices."""

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            out = l0s @ y
            offs = self.modulation_offsets(t)
            for a, diag in zip(offs, mod_diags):
                if a:
                    out += (a * diag)[:, None] * y if y.ndim == 2 else (a * diag) * y
            return out

        return rhs

    def ground_state(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def collection_operator(self) -> np.ndarray:
        """Output operator a = i sum_j e^{i phi_j} sigma_j over the system qubits."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(self.n_system):
            out += np.exp(1j * self.phases[j]) * self.sigma[j]
        return 1j * out

    def state_index(self, qubits: tuple[int, ...]) -> int:
        mask = 0
        for q in qubits:
            mask |= 1 << q
        return self.index[mask]


@dataclass(frozen=True)
class PeriodicTrajectory:
    """Periodic steady state sampled over one modulation period."""

    times: np.ndarray
    rhos: np.ndarray  # (n_samples, d, d)
    period: float
    residual: float

    def expectation(self, op: np.ndarray) -> np.ndarray:
        return np.einsum("tij,ji->t", self.rhos, op)

    def mean_expectation(self, op: np.ndarray) -> complex:
        return complex(np.mean(self.expectation(op)))

    def harmonic(self, op: np.ndarray, n: int) -> complex:
        signal = self.expectation(op)
        n_max = max(abs(n), 1)
        coeffs = periodic_fourier_harmonics(signal, n_max)
        return complex(coeffs[harmonic_index(n, n_max)])


def _trace_norm(mat: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def _fixed_point_from_monodromy(
    phi: np.ndarray, start_vec: np.ndarray
) -> np.ndarray:
    """Component of start_vec in the unit-eigenvalue subspace of phi."""
    vals, vecs = np.linalg.eig(phi)
    sel = np.abs(vals - 1.0) < UNIT_EIGENVALUE_TOL
    if not np.any(sel):
        closest = vals[np.argmin(np.abs(vals - 1.0))]
        raise ConvergenceError(
            f"no unit eigenvalue of the period map (closest {closest!r})",
            residual=float(np.min(np.abs(vals - 1.0))),
        )
    try:
        coeff = np.linalg.solve(vecs, start_vec)
    except np.linalg.LinAlgError:
        coeff, *_ = np.linalg.lstsq(vecs, start_vec, rcond=None)
    return vecs[:, sel] @ coeff[sel]


def periodic_steady_state(
    liouville: LiouvilleOperator,
    rtol: float = DEFAULT_RTOL,
    n_samples: int = 256,
    method: str = "monodromy",
    max_periods: int = 10_000,
) -> PeriodicTrajectory:
    """Periodic steady state of the time-dependent Lindblad generator.

    The returned trajectory is the ground-state-connected fixed point of the
    one-period propagator and satisfies ||rho(T) - rho(0)||_1 < 10 rtol.
    method="monodromy" builds the period map once and solves the fixed point
    directly (fast for slowly relaxing systems); method="iterate" propagates
    stroboscopically from the ground state, failing after max_periods.
    """
    t_period = liouville.period
    d = liouville.dim
    l0s, mod_diags, scale = liouville.scaled_generator()
    rhs = liouville.vec_rhs(l0s, mod_diags)
    ground = liouville.ground_state().reshape(-1) / scale

    if method == "monodromy":
        phi = ode_propagate(
            rhs, np.eye(d * d, dtype=complex), 0.0, t_period, rtol=rtol, atol=1e-13
        )
        start = _fixed_point_from_monodromy(phi, ground)
    elif method == "iterate":
        start = ground
        residual = math.inf
        for _ in range(max_periods):
            nxt = ode_propagate(rhs, start, 0.0, t_period, rtol=rtol, atol=1e-16)
            residual = _trace_norm(((nxt - start) * scale).reshape(d, d))
            start = nxt
            if residual < 10.0 * rtol:
                break
        else:
            raise ConvergenceError(
                f"stroboscopic iteration did not converge within {max_periods} "
                f"periods (residual {residual:.3e})",
                residual=residual,
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    rho0 = (start * scale).reshape(d, d)
    rho0 = 0.5 * (rho0 + rho0.conj().T)
    trace = np.trace(rho0).real
    if abs(trace) < 1e-12:
        raise ConvergenceError("steady state has vanishing trace")
    rho0 /= trace
    start = rho0.reshape(-1) / scale

    times = np.arange(n_samples) * (t_period / n_samples)
    states = ode_propagate(
        rhs,
        start,
        0.0,
        t_period,
        rtol=rtol,
        atol=1e-16,
        t_eval=list(times) + [t_period],
    )
    rhos = np.array([(v * scale).reshape(d, d) for v in states[:-1]])
    rho_end = (states[-1] * scale).reshape(d, d)
    residual = _trace_norm(rho_end - rhos[0])
    if residual >= 10.0 * rtol:
        raise ConvergenceError(
            f"trajectory is not periodic at the requested tolerance "
            f"(residual {residual:.3e})",
            residual=residual,
        )
    return PeriodicTrajectory(
        times=times, rhos=rhos, period=t_period, residual=residual
    )


def static_steady_state(liouville: LiouvilleOperator) -> np.ndarray:
    """Steady state of the static (modulation-free) generator."""
    offs = liouville.modulation_offsets(0.0)
    if np.max(np.abs(offs)) > 0:
        raise ConfigError("static steady state requires zero modulation")
    l0s, _, scale = liouville.scaled_generator()
    d = liouville.dim
    vals, vecs = np.linalg.eig(l0s)
    pick = int(np.argmin(np.abs(vals)))
    rho = (vecs[:, pick] * scale).reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-12:
        # Nullspace may be degenerate; project the ground state instead.
        start = _fixed_point_from_monodromy(
            np.eye(d * d) + l0s * (0.1 / max(np.max(np.abs(l0s)), 1.0)),
            liouville.ground_state().reshape(-1) / scale,
        )
        rho = (start * scale).reshape(d, d)
        rho = 0.5 * (rho + rho.conj().T)
        trace = np.trace(rho).real
    return rho / trace


def zero_modulation_config(cfg: SystemConfig) -> SystemConfig:
    """Copy of a config with every modulation amplitude set to zero."""
    return replace(
        cfg,
        modulations=tuple(ModulationProfile() for _ in cfg.modulations),
    )


@dataclass(frozen=True)
class CorrelationRecord:
    """Time- and sideband-indexed second-order correlations.

    ``g2_tt`` holds g2(t, t) over one period; ``harmonics[n + n_max]`` is the
    Fourier coefficient g2_n(0) in the expansion sum_n g2_n e^{-i n Omega t}.
    When a delay grid is supplied, ``g2_t_tau[i, k]`` is g2(t_i + tau_k, t_i)
    and ``harmonics_vs_tau`` the corresponding coefficients g2_n(tau_k).
    """

    times: np.ndarray
    g2_tt: np.ndarray
    harmonics: np.ndarray
    n_max: int
    denominator: float
    taus: np.ndarray | None = None
    start_times: np.ndarray | None = None
    g2_t_tau: np.ndarray | None = None
    harmonics_vs_tau: np.ndarray | None = None

    def harmonic(self, n: int) -> complex:
        return complex(self.harmonics[harmonic_index(n, self.n_max)])


def g2_time_resolved(
    cfg: SystemConfig,
    taus: np.ndarray | None = None,
    n_time_samples: int = 256,
    n_start_times: int = 64,
    max_harmonic: int = 8,
    rtol: float = DEFAULT_RTOL,
    method: str = "monodromy",
) -> CorrelationRecord:
    """Time-resolved correlation g2(t + tau, t) of the reflected field.

    The numerator follows from quantum regression: propagate a rho(t) a^dag
    forward by tau under the same generator and read off <a^dag a>.  The
    normalization is the squared modulation-free photon number, computed
    from the static steady state of the same drive.
    """
    if cfg.drive.rabi_rate > WEAK_DRIVE_LIMIT:
        warnings.warn(
            f"drive rabi_rate={cfg.drive.rabi_rate} exceeds the weak-drive "
            f"regime bound {WEAK_DRIVE_LIMIT}",
            RegimeWarning,
        )
    liouville = LiouvilleOperator(cfg)
    a = liouville.collection_operator()
    aa = a @ a
    num_op = aa.conj().T @ aa
    photon_op = a.conj().T @ a

    base = LiouvilleOperator(zero_modulation_config(cfg))
    rho_static = static_steady_state(base)
    den = float(np.real(np.trace(photon_op @ rho_static)))
    if den * den < 1e-30:
        raise UndefinedCorrelationError(
            "modulation-free photon number vanishes; g2 normalization undefined"
        )

    traj = periodic_steady_state(
        liouville, rtol=rtol, n_samples=n_time_samples, method=method
    )
    num0 = traj.expectation(num_op).real
    g2_tt = num0 / den**2
    n_max = min(max_harmonic, n_time_samples // 4)
    harmonics = periodic_fourier_harmonics(g2_tt.astype(complex), n_max)

    taus_arr = None
    start_times = None
    g2_t_tau = None
    harmonics_vs_tau = None
    if taus is not None:
        taus_arr = np.asarray(taus, dtype=float)
        if np.any(taus_arr < 0):
            raise UndefinedCorrelationError("delays must be non-negative")
        l0s, mod_diags, scale = liouville.scaled_generator()
        rhs = liouville.vec_rhs(l0s, mod_diags)
        stride = max(1, n_time_samples // n_start_times)
        idx = np.arange(0, n_time_samples, stride)
        start_times = traj.times[idx]
        g2_t_tau = np.zeros((idx.size, taus_arr.size))
        order = np.argsort(taus_arr)
        for row, i0 in enumerate(idx):
            b = a @ traj.rhos[i0] @ a.conj().T
            norm = np.trace(b).real
            if abs(norm) < 1e-300:
                continue
            bvec = (b / norm).reshape(-1) / scale
            t0 = traj.times[i0]
            sorted_states = ode_propagate(
                rhs,
                bvec,
                t0,
                t0 + float(taus_arr[order][-1]),
                rtol=rtol,
                atol=1e-16,
                t_eval=list(t0 + taus_arr[order]),
            )
            for pos, state in zip(order, sorted_states):
                bmat = (state * scale).reshape(liouville.dim, liouville.dim)
                g2_t_tau[row, pos] = (
                    np.real(np.trace(photon_op @ bmat)) * norm / den**2
                )
        n_max_tau = min(max_harmonic, idx.size // 4)
        harmonics_vs_tau = np.stack(
            [
                periodic_fourier_harmonics(g2_t_tau[:, k].astype(complex), n_max_tau)
                for k in range(taus_arr.size)
            ],
            axis=1,
        )
    return CorrelationRecord(
        times=traj.times,
        g2_tt=g2_tt,
        harmonics=harmonics,
        n_max=n_max,
        denominator=den,
        taus=taus_arr,
        start_times=start_times,
        g2_t_tau=g2_t_tau,
        harmonics_vs_tau=harmonics_vs_tau,
    )


@dataclass(frozen=True)
class SmallModulationHarmonics:
    """Closed-form g2 harmonics of two co-located qubits at small modulation."""

    g0: float
    g_plus: complex  # coefficient of e^{-i Omega t}
    g_minus: complex  # coefficient of e^{+i Omega t}


def g2_harmonic_small_A(cfg: SystemConfig) -> SmallModulationHarmonics:
    """Analytic weak-modulation harmonics for N=2 co-located qubits.

    g2_0 = (1 + (Delta/2)^2) / (1 + Delta^2) and the first Stokes/anti-Stokes
    harmonic with its interference structure; Delta is the drive detuning in
    units of gamma_1d.  Valid to first order in the modulation amplitude.
    """
    if cfg.n_qubits != 2:
        raise ConfigError("closed form requires exactly two qubits")
    if abs(cfg.qubits[0].phase - cfg.qubits[1].phase) > 1e-12:
        raise ConfigError("closed form requires co-located qubits (equal phases)")
    m1, m2 = cfg.modulations
    if m1.kind != "harmonic" or m2.kind != "harmonic":
        raise ConfigError("closed form requires harmonic modulation")
    if abs(m1.amplitude - m2.amplitude) > 1e-12 * max(1.0, abs(m1.amplitude)):
        raise ConfigError("closed form requires equal modulation amplitudes")
    g = cfg.gamma_1d
    amp = m1.amplitude / g
    alpha = m2.phase - m1.phase
    delta = (cfg.drive.frequency - cfg.omega0) / g
    omega = cfg.modulation_frequency / g
    g0 = (1.0 + (delta / 2.0) ** 2) / (1.0 + delta**2)
    z = (-2j + omega) ** 2
    denom = ((2.0 * delta) ** 2 - z) * (delta**2 - z)
    numer = 10.0 + 4.0 * delta**2 + 7j * omega - omega**2
    g_minus = -g0 * 2.0 * amp * delta * math.cos(0.5 * alpha) * numer / denom
    return SmallModulationHarmonics(
        g0=g0, g_plus=complex(g_minus).conjugate(), g_minus=complex(g_minus)
    )


# -- weak-drive pure-state cascade --------------------------------------------


class WeakDriveCascade:
    """Leading-order weak-drive solver: non-Hermitian pure-state evolution.

    The ground-anchored column C(t) = rho(t)|0> obeys
    dC/dt = -i (H(t) - i Gamma) C up to relative corrections of order
    (rabi_rate)^2; populations and coherences follow from C alone.  This is
    the same generator as the density route with the quantum-jump refill
    dropped, which only feeds observables at higher drive order.
    """

    def __init__(self, liouville: LiouvilleOperator):
        self.liouville = liouville
        exc = liouville.excitations.astype(float)
        s = liouville.rabi if 0.0 < liouville.rabi < 1.0 else 1.0
        self.scale = s**exc
        self.hnh_scaled = liouville.h_nh_static * (
            self.scale[None, :] / self.scale[:, None]
        )
        self.mod_diags = [
            np.real(np.diag(liouville.number[j]))
            for j in range(liouville.n_system)
        ]

    def _rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        offs = self.liouville.modulation_offsets(t)
        out = -1j * (self.hnh_scaled @ y)
        for a, diag in zip(offs, self.mod_diags):
            if a:
                out += (-1j * a * diag)[:, None] * y if y.ndim == 2 else (-1j * a * diag) * y
        return out

    def periodic_states(
        self, rtol: float = SWEEP_RTOL, n_samples: int = 256
    ) -> tuple[np.ndarray, np.ndarray]:
        """(times, C) with C[k] the unscaled state at times[k], C_0 = 1."""
        lv = self.liouville
        d = lv.dim
        phi = ode_propagate(
            self._rhs, np.eye(d, dtype=complex), 0.0, lv.period, rtol=rtol, atol=1e-13
        )
        start = np.zeros(d, dtype=complex)
        start[0] = 1.0
        fixed = _fixed_point_from_monodromy(phi, start)
        if abs(fixed[0]) < 1e-12:
            raise ConvergenceError("cascade fixed point lost the ground component")
        fixed = fixed / fixed[0]
        times = np.arange(n_samples) * (lv.period / n_samples)
        states = ode_propagate(
            self._rhs,
            fixed,
            0.0,
            lv.period,
            rtol=rtol,
            atol=1e-16,
            t_eval=list(times),
        )
        return times, np.array([v * self.scale for v in states])


@dataclass(frozen=True)
class DetectorCorrelation:
    """Steady filtered cross-correlation read off the two detector qubits."""

    n1: int
    n2: int
    value: float
    flag: str
    numerator: float
    intensity1: float
    intensity2: float
    saturation: float


def _detector_quantities(
    cfg: SystemConfig,
    engine: str,
    rtol: float,
    max_excitations: int | None,
    n_samples: int,
) -> tuple[float, float, float, float, complex]:
    """(numerator, I1, I2, saturation, pair amplitude) for one detector pair."""
    if cfg.detectors is None:
        raise ConfigError("detectors: not configured")
    lv = LiouvilleOperator(cfg, include_detectors=True, max_excitations=max_excitations)
    i3, i4 = lv.n_system, lv.n_system + 1
    pair_idx = lv.state_index((i3, i4))
    m = cfg.detectors.n1 + cfg.detectors.n2
    if engine == "cascade":
        _, states = WeakDriveCascade(lv).periodic_states(rtol=rtol, n_samples=n_samples)
        occ3 = np.array([bool(mask & (1 << i3)) for mask in lv.basis])
        occ4 = np.array([bool(mask & (1 << i4)) for mask in lv.basis])
        weights = np.abs(states) ** 2
        pop3 = weights[:, occ3].sum(axis=1)
        pop4 = weights[:, occ4].sum(axis=1)
        joint = weights[:, occ3 & occ4].sum(axis=1)
        pair_signal = states[:, pair_idx]
    elif engine == "density":
        traj = periodic_steady_state(lv, rtol=rtol, n_samples=n_samples)
        n3 = lv.number[i3]
        n4 = lv.number[i4]
        pop3 = traj.expectation(n3).real
        pop4 = traj.expectation(n4).real
        joint = traj.expectation(n3 @ n4).real
        pair_signal = traj.rhos[:, pair_idx, 0]
    else:
        raise ValueError(f"unknown engine {engine!r}")
    n_max = max(abs(m), 1)
    psi = complex(
        periodic_fourier_harmonics(pair_signal, n_max)[harmonic_index(m, n_max)]
    )
    saturation = float(max(np.max(pop3), np.max(pop4)))
    if saturation > DETECTOR_SATURATION:
        warnings.warn(
            f"detector population {saturation:.3f} exceeds the saturation "
            f"bound {DETECTOR_SATURATION}",
            RegimeWarning,
        )
    return (
        float(np.mean(joint)),
        float(np.mean(pop3)),
        float(np.mean(pop4)),
        saturation,
        psi,
    )


def filtered_g2_detectors(
    cfg: SystemConfig,
    engine: str = "density",
    rtol: float = SWEEP_RTOL,
    max_excitations: int | None = 2,
    n_samples: int = 256,
    floor_reference: float | None = None,
) -> DetectorCorrelation:
    """Sideband-filtered cross-correlation from the detector populations.

    g2(n1, n2) = <n_D1 n_D2> / (<n_D1> <n_D2>) with every average taken over
    one period of the steady state.  Intensities below DETECTION_FLOOR times
    floor_reference (when given) are treated as dark and flagged.
    """
    num, i1, i2, sat, _ = _detector_quantities(
        cfg, engine, rtol, max_excitations, n_samples
    )
    d = cfg.detectors
    ref = floor_reference if floor_reference is not None else max(i1, i2)
    dark1 = i1 <= DETECTION_FLOOR * ref
    dark2 = i2 <= DETECTION_FLOOR * ref
    dark_num = num <= (DETECTION_FLOOR * ref) ** 2
    if dark1 or dark2:
        if dark_num:
            return DetectorCorrelation(d.n1, d.n2, math.nan, FLAG_INDET, num, i1, i2, sat)
        return DetectorCorrelation(d.n1, d.n2, math.inf, FLAG_INF, num, i1, i2, sat)
    return DetectorCorrelation(
        d.n1, d.n2, num / (i1 * i2), FLAG_FINITE, num, i1, i2, sat
    )


def filtered_g2_map(
    cfg: SystemConfig,
    n_range: tuple[int, int],
    engine: str = "cascade",
    rtol: float = SWEEP_RTOL,
    max_excitations: int | None = 2,
    n_samples: int = 256,
) -> dict[tuple[int, int], DetectorCorrelation]:
    """Filtered g2 over an (n1, n2) sideband grid with a common darkness floor."""
    if cfg.detectors is None:
        raise ConfigError("detectors: not configured")
    lo, hi = n_range
    if hi < lo:
        raise ConfigError("empty sideband range")
    raw: dict[tuple[int, int], tuple] = {}
    for n1 in range(lo, hi + 1):
        for n2 in range(lo, n1 + 1):
            pair_cfg = replace(cfg, detectors=replace(cfg.detectors, n1=n1, n2=n2))
            raw[(n1, n2)] = _detector_quantities(
                pair_cfg, engine, rtol, max_excitations, n_samples
            )
    ref = max(max(v[1], v[2]) for v in raw.values())
    out: dict[tuple[int, int], DetectorCorrelation] = {}
    for n1 in range(lo, hi + 1):
        for n2 in range(lo, hi + 1):
            num, i1, i2, sat, _ = raw[(max(n1, n2), min(n1, n2))]
            if n2 > n1:
                i1, i2 = i2, i1
            dark1 = i1 <= DETECTION_FLOOR * ref
            dark2 = i2 <= DETECTION_FLOOR * ref
            dark_num = num <= (DETECTION_FLOOR * ref) ** 2
            if dark1 or dark2:
                flag = FLAG_INDET if dark_num else FLAG_INF
                value = math.nan if dark_num else math.inf
            else:
                flag = FLAG_FINITE
                value = num / (i1 * i2)
            out[(n1, n2)] = DetectorCorrelation(n1, n2, value, flag, num, i1, i2, sat)
    return out


def detector_pair_amplitude(
    cfg: SystemConfig,
    engine: str = "cascade",
    rtol: float = SWEEP_RTOL,
    max_excitations: int | None = 2,
    n_samples: int = 256,
) -> complex:
    """Two-photon absorption amplitude <sigma_D1 sigma_D2> at its sideband harmonic.

    The harmonic n1 + n2 of the detector-pair lowering coherence is the
    stationary two-photon amplitude; assembling it over a sideband window
    yields the emitted pair wavefunction as seen by the detectors.
    """
    *_, psi = _detector_quantities(cfg, engine, rtol, max_excitations, n_samples)
    return psi


def detector_pair_wavefunction(
    cfg: SystemConfig,
    n_window: int,
    engine: str = "cascade",
    rtol: float = SWEEP_RTOL,
    max_excitations: int | None = 2,
    n_samples: int = 256,
) -> np.ndarray:
    """Matrix psi[n1, n2] of detector pair amplitudes over a sideband window."""
    if cfg.detectors is None:
        raise ConfigError("detectors: not configured")
    size = 2 * n_window + 1
    psi = np.zeros((size, size), dtype=complex)
    for n1 in range(-n_window, n_window + 1):
        for n2 in range(-n_window, n1 + 1):
            pair_cfg = replace(cfg, detectors=replace(cfg.detectors, n1=n1, n2=n2))
            amp = detector_pair_amplitude(
                pair_cfg, engine=engine, rtol=rtol,
                max_excitations=max_excitations, n_samples=n_samples,
            )
            psi[n1 + n_window, n2 + n_window] = amp
            psi[n2 + n_window, n1 + n_window] = amp
    return psi
