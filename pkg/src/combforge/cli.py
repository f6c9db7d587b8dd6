"""Command-line driver: maps, sweeps and design runs as CSV files plus figures.

Every subcommand reads a YAML system config, echoes it in a stable
key=value form, and writes deterministic '#'-commented CSV files (and PNG
renderings unless --no-figures) into the output directory.  Cross-route
comparisons are emitted as machine-readable JSON reports.

Exit codes: 0 success, 2 configuration error, 3 convergence/stiffness
error, 4 regime-violation warning escalated under --strict.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, comb, design, entangle, lindblad, model
from .errors import (
    CombforgeError,
    ConfigError,
    ConvergenceError,
    RegimeWarning,
    StiffnessError,
)

FLOAT_FMT = "{:.12e}"


# -- output helpers -----------------------------------------------------------


def _format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "indet"
    if math.isinf(v):
        return "inf"
    return FLOAT_FMT.format(v)


def write_csv(path: Path, header: list[str], rows: list[tuple], meta: dict) -> None:
    lines = [f"# combforge {__version__}"]
    for key in sorted(meta):
        lines.append(f"# {key} = {meta[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _save_figure(fig, path: Path) -> None:
    fig.savefig(path, dpi=150, metadata={"Software": "combforge"})
    import matplotlib.pyplot as plt

    plt.close(fig)


def _new_figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _parse_alphas(text: str) -> list[float]:
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(float(eval(token, {"__builtins__": {}}, {"pi": math.pi})))
        except Exception as exc:
            raise ConfigError(f"cannot parse angle {token!r}: {exc}") from exc
    if not out:
        raise ConfigError("empty angle list")
    return out


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} must be lo:hi:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ConfigError("grid needs at least one point")
    return np.linspace(lo, hi, n)


def _alpha_tag(alpha: float) -> str:
    return f"{alpha:.6f}".replace("-", "m").replace(".", "p")


def _with_alpha(cfg: model.SystemConfig, alpha: float) -> model.SystemConfig:
    """Set the relative modulation phase of qubit 2 (qubit 1 stays at 0)."""
    if cfg.n_qubits != 2:
        raise ConfigError("relative-phase sweeps require a two-qubit config")
    m1, m2 = cfg.modulations
    return replace(cfg, modulations=(replace(m1, phase=0.0), replace(m2, phase=alpha)))


def _with_amplitude(cfg: model.SystemConfig, amplitude: float) -> model.SystemConfig:
    return replace(
        cfg,
        modulations=tuple(
            replace(m, amplitude=amplitude) for m in cfg.modulations
        ),
    )


def _config_meta(cfg: model.SystemConfig) -> dict:
    return {
        "config": model.describe_config(cfg).replace("\n", "; "),
        "version": __version__,
    }


# -- filtered map --------------------------------------------------------------


def cmd_filtered_map(args) -> int:
    cfg = model.load_config(args.config)
    print(model.describe_config(cfg))
    if cfg.detectors is None:
        raise ConfigError("detectors: filtered-map requires a detectors section")
    if args.n_max < args.n_min:
        raise ConfigError("empty sideband range")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    alphas = _parse_alphas(args.alphas)
    report = {"alphas": [], "engine": args.engine, "version": __version__}
    for alpha in alphas:
        acfg = _with_alpha(cfg, alpha)
        numeric = lindblad.filtered_g2_map(
            acfg,
            (args.n_min, args.n_max),
            engine=args.engine,
            rtol=args.rtol or lindblad.SWEEP_RTOL,
        )
        analytic = comb.sideband_map(acfg, (args.n_min, args.n_max))
        rows = []
        finite_devs = []
        ref_num = numeric[(0, 0)].value
        ref_ana = analytic[(0, 0)].value
        pattern = classify_map_pattern(numeric, analytic)
        for (n1, n2) in sorted(numeric):
            cell_n = numeric[(n1, n2)]
            cell_a = analytic[(n1, n2)]
            rows.append((n1, n2, cell_n.value, cell_a.value, cell_a.flag))
            if (
                cell_n.flag == lindblad.FLAG_FINITE
                and cell_a.flag == comb.FLAG_FINITE
                and np.isfinite(ref_num)
                and ref_num > 0
                and ref_ana > 0
            ):
                rn = cell_n.value / ref_num
                ra = cell_a.value / ref_ana
                finite_devs.append(abs(rn - ra) / max(ra, 1.0))
        tag = _alpha_tag(alpha)
        meta = _config_meta(acfg)
        meta["alpha"] = alpha
        write_csv(
            out / f"filtered_map_alpha{tag}.csv",
            ["n1", "n2", "g2_numeric", "g2_analytic", "flag"],
            rows,
            meta,
        )
        report["alphas"].append(
            {
                "alpha": alpha,
                "pattern_match": pattern["match"],
                "mismatched_cells": pattern["mismatches"],
                "max_normalized_deviation": max(finite_devs) if finite_devs else None,
            }
        )
        if not args.no_figures:
            _render_map_figure(
                out / f"filtered_map_alpha{tag}.png", numeric, args.n_min, args.n_max, alpha
            )
    (out / "cross_route_report.json").write_text(json.dumps(report, indent=2))
    return 0


def classify_map_pattern(
    numeric: dict, analytic: dict, floor: float = 1e-2
) -> dict:
    """Compare bunching/antibunching/indeterminate cell classes across routes.

    Numeric cells are classified dark when a detector intensity (or the
    coincidence numerator) falls below ``floor`` times the map maximum;
    analytic cells carry exact flags.
    """
    imax = max(max(c.intensity1, c.intensity2) for c in numeric.values())
    nmax = max(c.numerator for c in numeric.values())
    mismatches = []
    for key, cell_a in analytic.items():
        cell_n = numeric[key]
        dark1 = cell_n.intensity1 < floor * imax
        dark2 = cell_n.intensity2 < floor * imax
        dark_num = cell_n.numerator < floor * nmax
        if dark1 or dark2:
            num_class = "indet" if dark_num else "inf"
        else:
            num_class = "finite"
        if num_class != cell_a.flag:
            mismatches.append({"cell": list(key), "numeric": num_class, "analytic": cell_a.flag})
    return {"match": not mismatches, "mismatches": mismatches}


def _render_map_figure(path, cells, n_min, n_max, alpha) -> None:
    plt = _new_figure()
    size = n_max - n_min + 1
    grid = np.zeros((size, size))
    for (n1, n2), cell in cells.items():
        v = cell.value
        if math.isnan(v):
            v = 0.0
        elif math.isinf(v):
            v = np.nan  # render saturated
        grid[n2 - n_min, n1 - n_min] = np.log10(max(v, 1e-12)) if np.isfinite(v) else np.nan
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    im = ax.imshow(
        grid,
        origin="lower",
        extent=(n_min - 0.5, n_max + 0.5, n_min - 0.5, n_max + 0.5),
        cmap="RdBu_r",
        vmin=-3,
        vmax=3,
    )
    fig.colorbar(im, ax=ax, label="log10 g2(n1, n2)")
    ax.set_xlabel("sideband n1")
    ax.set_ylabel("sideband n2")
    ax.set_title(f"filtered cross-correlations, alpha = {alpha:.3f}")
    _save_figure(fig, path)


# -- time-resolved g2 ----------------------------------------------------------


def cmd_time_g2(args) -> int:
    cfg = model.load_config(args.config)
    print(model.describe_config(cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    alphas = _parse_alphas(args.alphas)
    rtol = args.rtol or lindblad.DEFAULT_RTOL
    if args.amplitude_sweep:
        amplitudes = _parse_grid(args.amplitude_sweep)
        for alpha in alphas:
            rows = []
            curves = []
            for amp in amplitudes:
                acfg = _with_amplitude(_with_alpha(cfg, alpha), amp)
                rec = lindblad.g2_time_resolved(acfg, rtol=rtol, n_time_samples=args.samples)
                curves.append(rec.g2_tt)
                for t, v in zip(rec.times, rec.g2_tt):
                    rows.append((amp, t, v))
            tag = _alpha_tag(alpha)
            meta = _config_meta(cfg)
            meta["alpha"] = alpha
            write_csv(
                out / f"time_g2_sweep_alpha{tag}.csv",
                ["amplitude", "t", "g2_tt"],
                rows,
                meta,
            )
            if not args.no_figures:
                plt = _new_figure()
                fig, ax = plt.subplots(figsize=(5.2, 4.0))
                rec_times = np.arange(args.samples) / args.samples
                im = ax.pcolormesh(
                    rec_times,
                    amplitudes,
                    np.array(curves),
                    shading="auto",
                    cmap="RdBu_r",
                    vmin=0,
                    vmax=2,
                )
                fig.colorbar(im, ax=ax, label="g2(t, t)")
                ax.set_xlabel("t / T")
                ax.set_ylabel("modulation amplitude")
                ax.set_title(f"g2(t, t) vs amplitude, alpha = {alpha:.3f}")
                _save_figure(fig, out / f"time_g2_sweep_alpha{tag}.png")
    else:
        for alpha in alphas:
            acfg = _with_alpha(cfg, alpha)
            rec = lindblad.g2_time_resolved(acfg, rtol=rtol, n_time_samples=args.samples)
            tag = _alpha_tag(alpha)
            meta = _config_meta(acfg)
            meta["alpha"] = alpha
            meta["denominator"] = rec.denominator
            write_csv(
                out / f"time_g2_alpha{tag}.csv",
                ["t", "g2_tt"],
                list(zip(rec.times, rec.g2_tt)),
                meta,
            )
            write_csv(
                out / f"harmonics_alpha{tag}.csv",
                ["n", "re", "im", "abs"],
                [
                    (n, rec.harmonic(n).real, rec.harmonic(n).imag, abs(rec.harmonic(n)))
                    for n in range(-rec.n_max, rec.n_max + 1)
                ],
                meta,
            )
            if not args.no_figures:
                plt = _new_figure()
                fig, ax = plt.subplots(figsize=(5.2, 3.6))
                ax.plot(rec.times / rec.times[-1], rec.g2_tt)
                ax.set_xlabel("t / T")
                ax.set_ylabel("g2(t, t)")
                ax.set_title(f"alpha = {alpha:.3f}")
                _save_figure(fig, out / f"time_g2_alpha{tag}.png")
    return 0


# -- harmonic map ---------------------------------------------------------------


def _harmonic_map_point(payload):
    cfg_doc, alpha, detuning, rtol, samples = payload
    cfg = model.config_from_dict(cfg_doc)
    acfg = _with_alpha(cfg, alpha)
    acfg = replace(acfg, drive=replace(acfg.drive, frequency=acfg.omega0 + detuning))
    rec = lindblad.g2_time_resolved(acfg, rtol=rtol, n_time_samples=samples, max_harmonic=2)
    amp = acfg.modulations[0].amplitude
    return alpha, detuning, abs(rec.harmonic(1)) / amp


def cmd_harmonic_map(args) -> int:
    cfg = model.load_config(args.config)
    print(model.describe_config(cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    alphas = np.linspace(-math.pi, math.pi, args.alpha_points)
    detunings = _parse_grid(args.detunings)
    rtol = args.rtol or lindblad.SWEEP_RTOL
    doc = model.config_to_dict(cfg)
    payloads = [
        (doc, float(a), float(d), rtol, args.samples) for a in alphas for d in detunings
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_harmonic_map_point, payloads, chunksize=4))
    else:
        results = [_harmonic_map_point(p) for p in payloads]
    results.sort(key=lambda r: (r[0], r[1]))
    meta = _config_meta(cfg)
    write_csv(
        out / "harmonic_map.csv",
        ["alpha", "detuning", "abs_g1_over_A"],
        results,
        meta,
    )
    if not args.no_figures:
        plt = _new_figure()
        grid = np.array([r[2] for r in results]).reshape(alphas.size, detunings.size)
        fig, ax = plt.subplots(figsize=(5.2, 4.0))
        im = ax.pcolormesh(detunings, alphas, grid, shading="auto", cmap="viridis")
        fig.colorbar(im, ax=ax, label="|g2_1(0)| / A")
        ax.set_xlabel("drive detuning")
        ax.set_ylabel("relative modulation phase alpha")
        _save_figure(fig, out / "harmonic_map.png")
    return 0


# -- entanglement entropy --------------------------------------------------------


def cmd_entropy(args) -> int:
    cfg = model.load_config(args.config)
    print(model.describe_config(cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.photons > args.qubits:
        raise ConfigError("photons: cannot exceed the qubit count")
    ratios = _parse_grid(args.amplitude_ratios)
    alphas = _parse_alphas(args.alphas)
    omega = cfg.modulation_frequency
    rows = []
    report = {"alphas": [], "version": __version__}
    for alpha in alphas:
        devs = []
        for ratio in ratios:
            phases = [k * alpha for k in range(args.qubits)]
            combs = [
                comb.comb_coefficients(
                    model.ModulationProfile("harmonic", ratio * omega, ph), omega
                )
                for ph in phases
            ]
            if args.photons == 2:
                psi = entangle.pair_wavefunction(combs)
                rep = entangle.entropy_svd(psi)
            else:
                psi = entangle.multiphoton_wavefunction(combs, args.photons)
                rep = entangle.entropy_hosvd(psi)
            overlap_es = ""
            if args.qubits == 2:
                overlap_es = entangle.pair_entropy_from_overlap(
                    entangle.harmonic_overlap(ratio, alpha)
                ).exp_entropy
            det_es = ""
            if args.with_lindblad:
                if cfg.detectors is None:
                    raise ConfigError("detectors: required for --with-lindblad")
                acfg = _with_amplitude(_with_alpha(cfg, alpha), ratio * omega)
                window = int(math.ceil(ratio)) + 5
                mat = lindblad.detector_pair_wavefunction(
                    acfg, window, engine="cascade", rtol=args.rtol or lindblad.SWEEP_RTOL
                )
                det_es = entangle.entropy_svd(
                    entangle.PhotonWavefunction(window, mat / np.linalg.norm(mat))
                ).exp_entropy
                if overlap_es:
                    devs.append(abs(det_es / overlap_es - 1.0))
            rows.append((alpha, ratio, rep.exp_entropy, overlap_es, det_es))
        report["alphas"].append(
            {"alpha": alpha, "max_detector_vs_analytic_dev": max(devs) if devs else None}
        )
    meta = _config_meta(cfg)
    meta["photons"] = args.photons
    meta["qubits"] = args.qubits
    write_csv(
        out / "entropy.csv",
        ["alpha", "a_over_omega", "exp_entropy_comb", "exp_entropy_overlap", "exp_entropy_detector"],
        rows,
        meta,
    )
    (out / "entropy_report.json").write_text(json.dumps(report, indent=2))
    if not args.no_figures:
        plt = _new_figure()
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        for alpha in alphas:
            sel = [r for r in rows if r[0] == alpha]
            ax.plot(
                [r[1] for r in sel],
                [r[2] for r in sel],
                label=f"alpha = {alpha:.3f}",
            )
        ax.set_xlabel("A / Omega")
        ax.set_ylabel("exp(S)")
        ax.legend()
        _save_figure(fig, out / "entropy.png")
    return 0


# -- inter-qubit distance sweep ---------------------------------------------------


def cmd_distance_sweep(args) -> int:
    from . import spectral

    cfg = model.load_config(args.config)
    print(model.describe_config(cfg))
    if cfg.n_qubits != 2:
        raise ConfigError("distance-sweep requires two qubits")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    phis = _parse_grid(args.phis)
    detunings = _parse_grid(args.detunings)
    rtol = args.rtol or lindblad.SWEEP_RTOL
    step = args.amplitude_step

    rows_r = []
    for phi in phis:
        pcfg = replace(
            cfg,
            qubits=(replace(cfg.qubits[0], phase=0.0), replace(cfg.qubits[1], phase=phi)),
        )
        h = spectral.build_hamiltonian(pcfg)
        for det in detunings:
            rows_r.append((phi, det, abs(spectral.reflection(h, cfg.omega0 + det))))
    meta = _config_meta(cfg)
    write_csv(out / "reflection_map.csv", ["phi", "detuning", "abs_r"], rows_r, meta)

    alphas = _parse_alphas(args.alphas)
    for alpha in alphas:
        rows_g1, rows_g2 = [], []
        for phi in phis:
            for det in detunings:
                base = replace(
                    cfg,
                    qubits=(
                        replace(cfg.qubits[0], phase=0.0),
                        replace(cfg.qubits[1], phase=phi),
                    ),
                    drive=replace(cfg.drive, frequency=cfg.omega0 + det),
                )
                base = _with_alpha(base, alpha)
                d1, d2 = _inelastic_derivatives(base, step, rtol)
                rows_g1.append((phi, det, d1))
                rows_g2.append((phi, det, d2))
        tag = _alpha_tag(alpha)
        meta_a = _config_meta(cfg)
        meta_a["alpha"] = alpha
        meta_a["amplitude_step"] = step
        write_csv(
            out / f"inelastic_g1_alpha{tag}.csv",
            ["phi", "detuning", "dg1_dA"],
            rows_g1,
            meta_a,
        )
        write_csv(
            out / f"inelastic_g2_alpha{tag}.csv",
            ["phi", "detuning", "dg2_dA"],
            rows_g2,
            meta_a,
        )
    if not args.no_figures:
        plt = _new_figure()
        grid = np.array([r[2] for r in rows_r]).reshape(phis.size, detunings.size)
        fig, ax = plt.subplots(figsize=(5.2, 4.0))
        im = ax.pcolormesh(detunings, phis, grid, shading="auto", cmap="magma")
        fig.colorbar(im, ax=ax, label="|r|")
        ax.set_xlabel("drive detuning")
        ax.set_ylabel("inter-qubit phase")
        _save_figure(fig, out / "reflection_map.png")
    return 0


def _inelastic_derivatives(cfg: model.SystemConfig, step: float, rtol: float):
    """Symmetric finite-difference first-harmonic response to the modulation."""
    photon_harm = []
    g2_harm = []
    for sign in (+1.0, -1.0):
        acfg = _with_amplitude(cfg, sign * step)
        lv = lindblad.LiouvilleOperator(acfg)
        traj = lindblad.periodic_steady_state(lv, rtol=rtol, n_samples=64)
        a = lv.collection_operator()
        photon_harm.append(traj.harmonic(a.conj().T @ a, 1))
        aa = a @ a
        g2_harm.append(traj.harmonic(aa.conj().T @ aa, 1))
    d1 = abs(photon_harm[0] - photon_harm[1]) / (2.0 * step)
    d2 = abs(g2_harm[0] - g2_harm[1]) / (2.0 * step)
    return d1, d2


# -- inverse design ----------------------------------------------------------------


def load_target_state(path: str | Path) -> entangle.PhotonWavefunction:
    """Read a two-photon target state from YAML (sideband pairs + weights)."""
    import yaml

    try:
        doc = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read target file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "amplitudes" not in doc:
        raise ConfigError("target file must contain an 'amplitudes' list")
    n_max = int(doc.get("n_max", 0))
    entries = doc["amplitudes"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("amplitudes: expected a non-empty list")
    for e in entries:
        n_max = max(n_max, abs(int(e["n1"])), abs(int(e["n2"])))
    dim = 2 * n_max + 1
    tensor = np.zeros((dim, dim), dtype=complex)
    for e in entries:
        n1, n2 = int(e["n1"]), int(e["n2"])
        w = float(e.get("re", 0.0)) + 1j * float(e.get("im", 0.0))
        tensor[n1 + n_max, n2 + n_max] = w
        tensor[n2 + n_max, n1 + n_max] = w
    norm = np.linalg.norm(tensor)
    if norm == 0:
        raise ConfigError("target state is identically zero")
    return entangle.PhotonWavefunction(n_max, tensor / norm)


def cmd_design(args) -> int:
    import yaml

    target = load_target_state(args.target)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = design.design_modulation(target, args.omega, args.samples)
    t = np.arange(args.samples) * (2.0 * math.pi / args.omega) / args.samples
    meta = {"omega": args.omega, "samples": args.samples, "version": __version__}
    write_csv(
        out / "profiles.csv",
        ["t", "omega1", "omega2"],
        list(zip(t, result.profiles[0].samples, result.profiles[1].samples)),
        meta,
    )
    ach = result.achieved
    rows = []
    for n1 in range(-ach.n_max, ach.n_max + 1):
        for n2 in range(-ach.n_max, ach.n_max + 1):
            v = ach.amplitude(n1, n2)
            if abs(v) > 1e-12:
                rows.append((n1, n2, v.real, v.imag))
    write_csv(out / "achieved_state.csv", ["n1", "n2", "re", "im"], rows, meta)
    summary = {
        "fidelity": result.fidelity,
        "imag_residual": result.imag_residual,
        "omega": args.omega,
        "samples": args.samples,
        "version": __version__,
    }
    (out / "design_result.yaml").write_text(yaml.safe_dump(summary, sort_keys=True))
    print(f"fidelity={result.fidelity:.6f} imag_residual={result.imag_residual:.6e}")
    if not args.no_figures:
        plt = _new_figure()
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        ax.plot(t, result.profiles[0].samples, label="qubit 1")
        ax.plot(t, result.profiles[1].samples, label="qubit 2")
        ax.set_xlabel("t")
        ax.set_ylabel("frequency modulation")
        ax.legend()
        _save_figure(fig, out / "profiles.png")
    return 0


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combforge",
        description="Frequency-comb photon correlations from modulated qubit arrays",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="YAML system config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--rtol", type=float, default=None, help="integrator tolerance")
        p.add_argument("--strict", action="store_true", help="escalate regime warnings")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("filtered-map", help="sideband-filtered g2 maps (two routes)")
    common(p)
    p.add_argument("--alphas", default="0,pi/2,pi")
    p.add_argument("--n-min", type=int, default=-3)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--engine", choices=["cascade", "density"], default="cascade")
    p.set_defaults(func=cmd_filtered_map)

    p = sub.add_parser("time-g2", help="period-resolved g2(t,t) and harmonics")
    common(p)
    p.add_argument("--alphas", default="0,pi")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--amplitude-sweep", default=None, help="lo:hi:n amplitude grid")
    p.set_defaults(func=cmd_time_g2)

    p = sub.add_parser("harmonic-map", help="|g2_1(0)|/A over phase and detuning")
    common(p)
    p.add_argument("--alpha-points", type=int, default=21)
    p.add_argument("--detunings", default="-8:8:21", help="lo:hi:n detuning grid")
    p.add_argument("--samples", type=int, default=128)
    p.set_defaults(func=cmd_harmonic_map)

    p = sub.add_parser("entropy", help="entanglement entropy maps")
    common(p)
    p.add_argument("--amplitude-ratios", default="0:3:13", help="A/Omega grid lo:hi:n")
    p.add_argument("--alphas", default="pi/2,pi")
    p.add_argument("--photons", type=int, default=2)
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--with-lindblad", action="store_true")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("distance-sweep", help="reflection and inelastic response vs phi")
    common(p)
    p.add_argument("--phis", default="0:3.141592653589793:17")
    p.add_argument("--detunings", default="-8:8:33")
    p.add_argument("--alphas", default="0,pi")
    p.add_argument("--amplitude-step", type=float, default=1e-4)
    p.set_defaults(func=cmd_distance_sweep)

    p = sub.add_parser("design", help="inverse modulation design for a target pair state")
    common(p, needs_config=False)
    p.add_argument("--target", required=True, help="YAML target state")
    p.add_argument("--omega", type=float, required=True, help="modulation frequency")
    p.add_argument("--samples", type=int, default=1024)
    p.set_defaults(func=cmd_design)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RegimeWarning)
            code = args.func(args)
        regime = [w for w in caught if issubclass(w.category, RegimeWarning)]
        for w in regime:
            print(f"warning: {w.message}", file=sys.stderr)
        if regime and args.strict:
            return 4
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, StiffnessError) as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3
    except CombforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
