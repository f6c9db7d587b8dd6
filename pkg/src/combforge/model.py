"""System configuration: qubit array, modulation profiles, drive, detectors.

All rates and frequencies are stored in units of the waveguide decay rate
(gamma_1d = 1 internally); loading a config normalizes to these units.  The
on-disk format is a YAML document described in the README; every frequency
or rate field is annotated there with its unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError

MAX_QUBITS = 8
MIN_SAMPLED_POINTS = 64


@dataclass(frozen=True)
class QubitSpec:
    """One emitter: position phase (omega0 * z / c) and nonradiative rate."""

    phase: float = 0.0
    gamma_nr: float = 0.0


@dataclass(frozen=True)
class ModulationProfile:
    """Periodic resonance-frequency modulation of a single qubit.

    ``harmonic`` profiles evaluate to amplitude * cos(Omega t + phase);
    ``sampled`` profiles linearly interpolate a table of values spanning one
    period (uniform grid, first point at t = 0).
    """

    kind: str = "harmonic"
    amplitude: float = 0.0
    phase: float = 0.0
    samples: tuple[float, ...] | None = None

    def scaled(self, factor: float) -> "ModulationProfile":
        if self.kind == "harmonic":
            return replace(self, amplitude=self.amplitude * factor)
        return replace(self, samples=tuple(s * factor for s in self.samples))


@dataclass(frozen=True)
class Drive:
    """Weak coherent drive: carrier frequency and Rabi rate."""

    frequency: float = 0.0
    rabi_rate: float = 0.0


@dataclass(frozen=True)
class DetectorSpec:
    """Two detector qubits filtering sidebands n1 and n2 with extra decay."""

    n1: int = 0
    n2: int = 0
    gamma_d: float = 5.0
    phase: float = 0.0


@dataclass(frozen=True)
class SystemConfig:
    """Validated description of the full modulated-array system."""

    qubits: tuple[QubitSpec, ...]
    modulations: tuple[ModulationProfile, ...]
    drive: Drive
    omega0: float = 0.0
    gamma_1d: float = 1.0
    modulation_frequency: float = 1.0
    detectors: DetectorSpec | None = None

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.modulation_frequency


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Check every invariant; raises ConfigError naming the offending field."""
    n = len(cfg.qubits)
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigError(f"qubits: count {n} outside [1, {MAX_QUBITS}]")
    if len(cfg.modulations) != n:
        raise ConfigError(
            f"modulations: {len(cfg.modulations)} profiles for {n} qubits"
        )
    if not (np.isfinite(cfg.gamma_1d) and cfg.gamma_1d > 0):
        raise ConfigError(f"gamma_1d: must be positive, got {cfg.gamma_1d}")
    if not (np.isfinite(cfg.modulation_frequency) and cfg.modulation_frequency > 0):
        raise ConfigError(
            f"modulation_frequency: must be positive, got {cfg.modulation_frequency}"
        )
    if not np.isfinite(cfg.omega0):
        raise ConfigError("omega0: must be finite")
    for i, q in enumerate(cfg.qubits):
        if not np.isfinite(q.phase):
            raise ConfigError(f"qubits[{i}].phase: must be finite")
        if not (np.isfinite(q.gamma_nr) and q.gamma_nr >= 0):
            raise ConfigError(f"qubits[{i}].gamma_nr: must be >= 0")
    for i, m in enumerate(cfg.modulations):
        if m.kind not in ("harmonic", "sampled"):
            raise ConfigError(f"modulations[{i}].kind: unknown kind {m.kind!r}")
        if m.kind == "harmonic":
            if m.samples is not None:
                raise ConfigError(
                    f"modulations[{i}].samples: not allowed for harmonic profiles"
                )
            if not np.isfinite(m.amplitude) or not np.isfinite(m.phase):
                raise ConfigError(f"modulations[{i}]: amplitude/phase must be finite")
        else:
            if m.samples is None or len(m.samples) < MIN_SAMPLED_POINTS:
                raise ConfigError(
                    f"modulations[{i}].samples: sampled profiles need >= "
                    f"{MIN_SAMPLED_POINTS} uniform points"
                )
            if not all(np.isfinite(s) for s in m.samples):
                raise ConfigError(f"modulations[{i}].samples: must be finite")
    if not np.isfinite(cfg.drive.frequency):
        raise ConfigError("drive.frequency: must be finite")
    if not (np.isfinite(cfg.drive.rabi_rate) and cfg.drive.rabi_rate >= 0):
        raise ConfigError(f"drive.rabi_rate: must be >= 0, got {cfg.drive.rabi_rate}")
    if cfg.detectors is not None:
        d = cfg.detectors
        if not (np.isfinite(d.gamma_d) and d.gamma_d > 0):
            raise ConfigError(f"detectors.gamma_d: must be positive, got {d.gamma_d}")
        if n + 2 > MAX_QUBITS:
            raise ConfigError(
                f"detectors: total qubit count {n + 2} exceeds {MAX_QUBITS}"
            )
    return cfg


def modulation_value(m: ModulationProfile, omega: float, t) -> float | np.ndarray:
    """Instantaneous frequency offset of a modulation profile at time t."""
    if m.kind == "harmonic":
        return m.amplitude * np.cos(omega * np.asarray(t) + m.phase)
    table = np.asarray(m.samples, dtype=float)
    npts = table.size
    pos = (np.asarray(t) * omega / (2.0 * math.pi)) % 1.0 * npts
    left = np.floor(pos).astype(int) % npts
    frac = pos - np.floor(pos)
    right = (left + 1) % npts
    return table[left] * (1.0 - frac) + table[right] * frac


def modulation_weights(cfg: SystemConfig) -> np.ndarray:
    """Complex one-sided modulation weights u_k with A_k(t) = u_k e^{-i Omega t} + c.c.

    Only defined for harmonic profiles: u_k = (A_k / 2) e^{-i alpha_k}.
    """
    weights = []
    for i, m in enumerate(cfg.modulations):
        if m.kind != "harmonic":
            raise ConfigError(
                f"modulations[{i}]: one-sided weights require harmonic profiles"
            )
        weights.append(0.5 * m.amplitude * np.exp(-1j * m.phase))
    return np.asarray(weights, dtype=complex)


def _as_float(raw: dict, key: str, default=None, context: str = "") -> float:
    if key not in raw:
        if default is None:
            raise ConfigError(f"{context}{key}: missing required field")
        return float(default)
    value = raw.pop(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{context}{key}: expected a number, got {value!r}")
    return float(value)


def _reject_unknown(raw: dict, context: str) -> None:
    if raw:
        raise ConfigError(f"{context}: unknown fields {sorted(raw)}")


def config_from_dict(doc: dict) -> SystemConfig:
    """Build and validate a SystemConfig from a parsed YAML document."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a mapping")
    doc = dict(doc)
    gamma_1d = _as_float(doc, "gamma_1d", 1.0)
    if gamma_1d <= 0:
        raise ConfigError(f"gamma_1d: must be positive, got {gamma_1d}")
    omega0 = _as_float(doc, "omega0", 0.0) / gamma_1d
    omega = _as_float(doc, "modulation_frequency", context="") / gamma_1d

    raw_qubits = doc.pop("qubits", None)
    if not isinstance(raw_qubits, list) or not raw_qubits:
        raise ConfigError("qubits: expected a non-empty list")
    qubits = []
    modulations = []
    for i, rq in enumerate(raw_qubits):
        if not isinstance(rq, dict):
            raise ConfigError(f"qubits[{i}]: expected a mapping")
        rq = dict(rq)
        ctx = f"qubits[{i}]."
        phase = _as_float(rq, "phase", 0.0, ctx)
        gamma_nr = _as_float(rq, "gamma_nr", 0.0, ctx) / gamma_1d
        raw_mod = rq.pop("modulation", None)
        if raw_mod is None:
            modulations.append(ModulationProfile())
        else:
            if not isinstance(raw_mod, dict):
                raise ConfigError(f"qubits[{i}].modulation: expected a mapping")
            raw_mod = dict(raw_mod)
            mctx = f"qubits[{i}].modulation."
            kind = raw_mod.pop("kind", "harmonic")
            if kind == "harmonic":
                amp = _as_float(raw_mod, "amplitude", 0.0, mctx) / gamma_1d
                mphase = _as_float(raw_mod, "phase", 0.0, mctx)
                _reject_unknown(raw_mod, f"qubits[{i}].modulation")
                modulations.append(ModulationProfile("harmonic", amp, mphase))
            elif kind == "sampled":
                samples = raw_mod.pop("samples", None)
                if not isinstance(samples, list):
                    raise ConfigError(f"{mctx}samples: expected a list")
                _reject_unknown(raw_mod, f"qubits[{i}].modulation")
                modulations.append(
                    ModulationProfile(
                        "sampled",
                        samples=tuple(float(s) / gamma_1d for s in samples),
                    )
                )
            else:
                raise ConfigError(f"{mctx}kind: unknown kind {kind!r}")
        _reject_unknown(rq, f"qubits[{i}]")
        qubits.append(QubitSpec(phase=phase, gamma_nr=gamma_nr))

    raw_drive = doc.pop("drive", {})
    if not isinstance(raw_drive, dict):
        raise ConfigError("drive: expected a mapping")
    raw_drive = dict(raw_drive)
    drive = Drive(
        frequency=_as_float(raw_drive, "frequency", 0.0, "drive.") / gamma_1d,
        rabi_rate=_as_float(raw_drive, "rabi_rate", 0.0, "drive.") / gamma_1d,
    )
    _reject_unknown(raw_drive, "drive")

    detectors = None
    raw_det = doc.pop("detectors", None)
    if raw_det is not None:
        if not isinstance(raw_det, dict):
            raise ConfigError("detectors: expected a mapping")
        raw_det = dict(raw_det)
        n1 = raw_det.pop("n1", 0)
        n2 = raw_det.pop("n2", 0)
        if not isinstance(n1, int) or not isinstance(n2, int):
            raise ConfigError("detectors.n1/n2: expected integers")
        detectors = DetectorSpec(
            n1=n1,
            n2=n2,
            gamma_d=_as_float(raw_det, "gamma_d", 5.0, "detectors.") / gamma_1d,
            phase=_as_float(raw_det, "phase", 0.0, "detectors."),
        )
        _reject_unknown(raw_det, "detectors")

    _reject_unknown(doc, "top level")
    cfg = SystemConfig(
        qubits=tuple(qubits),
        modulations=tuple(modulations),
        drive=drive,
        omega0=omega0,
        gamma_1d=1.0,
        modulation_frequency=omega,
        detectors=detectors,
    )
    return validate_config(cfg)


def load_config(path: str | Path) -> SystemConfig:
    """Load, validate and unit-normalize a YAML system configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"parse error in {path}{where}: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: SystemConfig) -> dict:
    doc: dict = {
        "gamma_1d": cfg.gamma_1d,
        "omega0": cfg.omega0,
        "modulation_frequency": cfg.modulation_frequency,
        "qubits": [],
        "drive": {
            "frequency": cfg.drive.frequency,
            "rabi_rate": cfg.drive.rabi_rate,
        },
    }
    for q, m in zip(cfg.qubits, cfg.modulations):
        entry: dict = {"phase": q.phase, "gamma_nr": q.gamma_nr}
        if m.kind == "harmonic":
            entry["modulation"] = {
                "kind": "harmonic",
                "amplitude": m.amplitude,
                "phase": m.phase,
            }
        else:
            entry["modulation"] = {"kind": "sampled", "samples": list(m.samples)}
        doc["qubits"].append(entry)
    if cfg.detectors is not None:
        doc["detectors"] = {
            "n1": cfg.detectors.n1,
            "n2": cfg.detectors.n2,
            "gamma_d": cfg.detectors.gamma_d,
            "phase": cfg.detectors.phase,
        }
    return doc


def save_config(cfg: SystemConfig, path: str | Path) -> None:
    """Write a config back to YAML; load(save(cfg)) == cfg field for field."""
    Path(path).write_text(yaml.safe_dump(config_to_dict(cfg), sort_keys=True))


def describe_config(cfg: SystemConfig) -> str:
    """Stable key=value rendering of a config for echo/golden-file tests."""
    lines = [
        f"gamma_1d={cfg.gamma_1d:.12g}",
        f"modulation_frequency={cfg.modulation_frequency:.12g}",
        f"n_qubits={cfg.n_qubits}",
        f"omega0={cfg.omega0:.12g}",
    ]
    for i, (q, m) in enumerate(zip(cfg.qubits, cfg.modulations)):
        lines.append(f"qubit[{i}].phase={q.phase:.12g}")
        lines.append(f"qubit[{i}].gamma_nr={q.gamma_nr:.12g}")
        lines.append(f"qubit[{i}].modulation.kind={m.kind}")
        if m.kind == "harmonic":
            lines.append(f"qubit[{i}].modulation.amplitude={m.amplitude:.12g}")
            lines.append(f"qubit[{i}].modulation.phase={m.phase:.12g}")
        else:
            lines.append(f"qubit[{i}].modulation.samples={len(m.samples)}")
    lines.append(f"drive.frequency={cfg.drive.frequency:.12g}")
    lines.append(f"drive.rabi_rate={cfg.drive.rabi_rate:.12g}")
    if cfg.detectors is None:
        lines.append("detectors=none")
    else:
        lines.append(f"detectors.n1={cfg.detectors.n1}")
        lines.append(f"detectors.n2={cfg.detectors.n2}")
        lines.append(f"detectors.gamma_d={cfg.detectors.gamma_d:.12g}")
        lines.append(f"detectors.phase={cfg.detectors.phase:.12g}")
    return "\n".join(lines)
