"""Closed-form frequency-comb analytics in the decay-free limit.

Per-qubit sideband amplitude combs, one- and two-photon sideband
intensities, the analytic sideband-filtered g2 with explicit inf /
indeterminate flags, and full (n1, n2) correlation maps.  Valid in the
sideband-resolved regime (modulation frequency much larger than the decay
rate); the CLI cross-checks these maps against the master-equation route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError
from .model import ModulationProfile, SystemConfig
from .numerics import bessel_j

FLAG_FINITE = "finite"
FLAG_INF = "inf"
FLAG_INDET = "indet"

#: Relative intensity below which a sideband counts as dark.
INTENSITY_FLOOR = 1e-12


@dataclass(frozen=True)
class FrequencyComb:
    """Sideband amplitudes a_n over the window n = -n_max..n_max.

    The amplitudes are the Fourier coefficients of exp(-i Phi(t)) where Phi
    is the zero-mean antiderivative of the frequency modulation; this fixes
    the global phase so that a harmonic profile with amplitude A and phase
    alpha gives exactly a_n = J_n(A/Omega) e^{-i n alpha}.
    """

    n_max: int
    amplitudes: np.ndarray

    def amplitude(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0.0 + 0.0j
        return complex(self.amplitudes[n + self.n_max])

    def to_window(self, n_max: int) -> "FrequencyComb":
        """Zero-pad (or reject shrinking below the tail bound) to a new window."""
        if n_max == self.n_max:
            return self
        if n_max < self.n_max:
            dropped = np.sum(np.abs(self.amplitudes) ** 2) - np.sum(
                np.abs(self.amplitudes[self.n_max - n_max : self.n_max + n_max + 1]) ** 2
            )
            if dropped > 1e-12:
                raise DomainError(
                    f"shrinking comb window to {n_max} drops weight {dropped:.2e}"
                )
            return FrequencyComb(
                n_max, self.amplitudes[self.n_max - n_max : self.n_max + n_max + 1]
            )
        padded = np.zeros(2 * n_max + 1, dtype=complex)
        padded[n_max - self.n_max : n_max + self.n_max + 1] = self.amplitudes
        return FrequencyComb(n_max, padded)

    @property
    def total_weight(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def default_window(amplitude_over_omega: float) -> int:
    """Default sideband window: ceil(A/Omega) + 40 (Bessel decay bound)."""
    return int(math.ceil(abs(amplitude_over_omega))) + 40


def comb_coefficients(
    m: ModulationProfile,
    omega: float,
    n_max: int | None = None,
    unitarity_tol: float = 1e-8,
) -> FrequencyComb:
    """Sideband amplitudes generated by one modulation profile.

    Harmonic profiles yield a_n = J_n(A/Omega) e^{-i n alpha}; sampled
    profiles are integrated numerically (spectral antiderivative of the
    table, then Fourier analysis of the resulting unit-modulus phase
    factor).  Raises ResolutionError if the window keeps less than
    1 - unitarity_tol of the total weight.
    """
    if omega <= 0:
        raise DomainError("modulation frequency must be positive")
    if m.kind == "harmonic":
        z = m.amplitude / omega
        if n_max is None:
            n_max = default_window(z)
        ns = np.arange(-n_max, n_max + 1)
        amps = np.array(
            [bessel_j(n, z) * np.exp(-1j * n * m.phase) for n in ns], dtype=complex
        )
        comb = FrequencyComb(n_max, amps)
    else:
        comb = _sampled_comb(m, omega, n_max)
    weight = comb.total_weight
    if abs(weight - 1.0) > unitarity_tol:
        raise ResolutionError(
            f"comb window n_max={comb.n_max} keeps weight {weight:.12f}; "
            "increase the window or the sample count"
        )
    return comb


def _sampled_comb(m: ModulationProfile, omega: float, n_max: int | None) -> FrequencyComb:
    table = np.asarray(m.samples, dtype=float)
    npts = table.size
    mean = float(np.mean(table))
    shift_f = mean / omega
    shift = int(round(shift_f))
    if abs(shift_f - shift) > 1e-6:
        raise DomainError(
            "sampled modulation has a mean frequency offset that is not an "
            f"integer multiple of the modulation frequency ({shift_f:.6g})"
        )
    spectrum = np.fft.fft(table - mean)
    freqs = np.fft.fftfreq(npts, d=1.0 / npts)  # signed integer harmonics
    with np.errstate(divide="ignore", invalid="ignore"):
        anti = np.where(freqs != 0, spectrum / (1j * freqs * omega), 0.0)
    if npts % 2 == 0:
        anti[npts // 2] = 0.0  # Nyquist bin has no well-defined antiderivative
    phase = np.fft.ifft(anti).real  # zero-mean antiderivative Phi(t_j)
    carrier = np.exp(-1j * phase)
    if n_max is None:
        n_max = min(int(math.ceil(np.max(np.abs(phase)))) + 40, npts // 4)
    if npts < 4 * n_max:
        raise ResolutionError(
            f"{npts} samples cannot resolve sidebands up to n_max={n_max}"
        )
    coeffs = np.fft.ifft(carrier)
    amps = np.zeros(2 * n_max + 1, dtype=complex)
    for n in range(-n_max, n_max + 1):
        base = n - shift
        if abs(base) <= npts // 2 - 1:
            amps[n + n_max] = coeffs[base % npts]
    return FrequencyComb(n_max, amps)


def combs_from_config(cfg: SystemConfig, n_max: int | None = None) -> list[FrequencyComb]:
    """One comb per qubit, aligned on a shared window."""
    combs = [
        comb_coefficients(m, cfg.modulation_frequency, n_max) for m in cfg.modulations
    ]
    widest = max(c.n_max for c in combs)
    return [c.to_window(widest) for c in combs]


def intensity_one_photon(combs: list[FrequencyComb], n: int) -> float:
    """One-photon sideband intensity I1(n) = |sum_i a_n^{(i)}|^2."""
    total = sum(c.amplitude(n) for c in combs)
    return abs(total) ** 2


def intensity_one_photon_harmonic(a_over_omega: float, alpha: float, n: int) -> float:
    """Two-qubit closed form 2 J_n^2(A/Omega) (1 + cos(n alpha))."""
    jn = bessel_j(n, a_over_omega)
    return 2.0 * jn * jn * (1.0 + math.cos(n * alpha))


def intensity_two_photon(combs: list[FrequencyComb], n1: int, n2: int) -> float:
    """Two-photon sideband intensity |sum_{a != b} a_{n1}^{(a)} a_{n2}^{(b)}|^2."""
    a1 = np.array([c.amplitude(n1) for c in combs])
    a2 = np.array([c.amplitude(n2) for c in combs])
    total = np.sum(a1) * np.sum(a2) - np.sum(a1 * a2)
    return abs(total) ** 2


def intensity_two_photon_harmonic(
    a_over_omega: float, alpha: float, n1: int, n2: int
) -> float:
    """Two-qubit closed form 2 J_{n1}^2 J_{n2}^2 (1 + cos((n1 - n2) alpha))."""
    j1 = bessel_j(n1, a_over_omega)
    j2 = bessel_j(n2, a_over_omega)
    return 2.0 * j1 * j1 * j2 * j2 * (1.0 + math.cos((n1 - n2) * alpha))


@dataclass(frozen=True)
class AnalyticG2:
    """Sideband-filtered correlation value with an explicit regime flag."""

    value: float
    flag: str

    def __float__(self) -> float:
        return self.value


def filtered_g2_analytic(
    combs: list[FrequencyComb],
    n1: int,
    n2: int,
    floor: float = INTENSITY_FLOOR,
) -> AnalyticG2:
    """Analytic filtered cross-correlation g2(n1, n2) for two qubits.

    Normalized so that factorized (uncorrelated) emission gives 1; cells
    where a one-photon denominator vanishes are flagged 'inf' (bunching
    protected by parity) or 'indet' when the numerator vanishes as well.
    """
    if len(combs) != 2:
        raise DomainError("the analytic filtered g2 is defined for two qubits")
    window = min(c.n_max for c in combs)
    ref1 = max(
        intensity_one_photon(combs, n) for n in range(-window, window + 1)
    )
    i1a = intensity_one_photon(combs, n1)
    i1b = intensity_one_photon(combs, n2)
    i2 = intensity_two_photon(combs, n1, n2)
    dark1 = i1a <= floor * ref1
    dark2 = i1b <= floor * ref1
    dark12 = i2 <= floor * ref1 * ref1
    if dark1 or dark2:
        return AnalyticG2(math.nan, FLAG_INDET) if dark12 else AnalyticG2(math.inf, FLAG_INF)
    return AnalyticG2(4.0 * i2 / (i1a * i1b), FLAG_FINITE)


def sideband_map(
    cfg: SystemConfig, n_range: tuple[int, int], n_max: int | None = None
) -> dict[tuple[int, int], AnalyticG2]:
    """Grid of filtered_g2_analytic over (n1, n2) for the configured phases."""
    lo, hi = n_range
    if hi < lo:
        raise DomainError("empty sideband range")
    combs = combs_from_config(cfg, n_max)
    out: dict[tuple[int, int], AnalyticG2] = {}
    for n1 in range(lo, hi + 1):
        for n2 in range(lo, hi + 1):
            out[(n1, n2)] = filtered_g2_analytic(combs, n1, n2)
    return out
