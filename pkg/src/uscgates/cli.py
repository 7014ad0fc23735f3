"""Configuration-driven experiment runner.

Subcommands: spectrum | gate | prep | sweep | validate.  Every run writes a
manifest.json (resolved config + content hash + tool version) next to its
outputs, and all randomness flows from the config seed, so equal manifests
reproduce byte-identical files.

Exit codes: 0 success, 2 validation failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, codes, config, dynamics, pulses, rabi

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                     default=_jsonify) + "\n")


def _jsonify(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating))
                             else x for x in row])


def _validate_rwa(cfg, schedule, spectrum, override_flag):
    rwa = cfg["rwa"]
    report = pulses.rwa_check(schedule, spectrum, ratio_max=float(rwa["ratio_max"]))
    if not report.passed and not (rwa.get("override") or override_flag):
        print(f"RWA validation failed: worst ratio {report.worst_ratio:.3f} "
              f"(limit {report.ratio_max}) at {report.worst_transition}",
              file=sys.stderr)
        return report, False
    return report, True


def run_spectrum(cfg, out_dir):
    """Coupling sweep: energies and dressed coefficients as CSV."""
    sw = cfg.get("sweep") or {}
    g_list = sw.get("g_over_omega_c") or np.linspace(0.0, 1.0, 101).tolist()
    g_over = np.asarray(g_list, dtype=float)
    n_levels = int(sw.get("n_levels", 8))
    template = config.build_model(cfg)
    wc = template.omega_c[0]
    sweep = rabi.spectrum_sweep(template, g_over * wc, n_levels=n_levels)
    rows = []
    for i, g in enumerate(sweep.g_values):
        for m in range(n_levels):
            rows.append([g / wc, m, sweep.energies[m, i] / wc]
                        + [sweep.coefficients[m, k, i] for k in (0, 2, 4)])
    _write_csv(out_dir / "spectrum.csv",
               ["g_over_omega_c", "m", "E_m_over_omega_c", "c_0", "c_2", "c_4"],
               rows)
    return {"points": int(g_over.size), "levels": n_levels}


def _export_pulses(out_dir, schedule):
    ts, data = schedule.sample()
    rows = []
    for k, (amp, ph) in data.items():
        label = k if isinstance(k, int) else f"{k[0]}-{k[1]}"
        for t, a, p in zip(ts, amp, ph):
            rows.append([t, label, a, p])
    _write_csv(out_dir / "pulses.csv",
               ["t_ns", "omega_k_index", "amplitude_rad_per_ns", "phase_rad"], rows)
    _write_json(out_dir / "pulses_header.json",
                {"tones": [{"k": t.k, "omega_rad_per_ns": t.omega,
                            "c_coeff": t.c_coeff} for t in schedule.tones],
                 "t_f_ns": schedule.t_f, "kind": schedule.kind})


def _export_phases(out_dir, schedule):
    if schedule.kind not in ("gate", "two-qubit-gate"):
        return
    aux = schedule.aux
    lr = pulses.lewis_riesenfeld_phases(aux)
    ts, second = pulses.sample_grid(schedule.t_f, 1001)
    rows = []
    lr_dyn = np.interp(ts, lr.ts, lr.theta_dyn)
    lr_geo = np.interp(ts, lr.ts, lr.theta_geo)
    for i, (t, sec) in enumerate(zip(ts, second)):
        xi, phi2 = pulses.effective_drive(aux, t, sec)
        rows.append([t, aux.phi(t), aux.beta(t, sec), xi, phi2,
                     lr_dyn[i], lr_geo[i]])
    _write_csv(out_dir / "phases.csv",
               ["t_ns", "phi_rad", "beta_rad", "xi_rad_per_ns", "phi2_rad",
                "theta_dyn_rad", "theta_geo_rad"], rows)


def run_gate(cfg, out_dir, override_rwa=False, workers=1):
    model, spectrum = config.build_system(cfg)
    spec = config.build_gate_spec(cfg)
    schedule = config.build_schedule(cfg, spectrum)
    report, ok = _validate_rwa(cfg, schedule, spectrum, override_rwa)
    if not ok:
        return EXIT_VALIDATION, None
    rtol = float(cfg["integration"]["rtol"])
    frame = dynamics.InteractionFrame(model)
    basis = analysis._gate_basis(model, spec)
    u_target = codes.target_unitary(spec)
    delta = float(cfg["noise"]["delta_i"])

    results = {"rwa_worst_ratio": report.worst_ratio,
               "delta_i": delta,
               "peak_amplitudes_rad_per_ns":
                   {str(k): v for k, v in schedule.peak_amplitudes().items()}}
    run_sched = schedule if delta == 0 else schedule.scaled(1 + delta)
    u = dynamics.extract_propagator(model, run_sched, basis, frame=frame, rtol=rtol)
    rep = analysis.average_gate_fidelity(u, u_target)
    results["f_bar"] = rep.f_bar
    results["propagator"] = u

    noise = cfg["noise"]
    if noise.get("snr_power_ratio") and int(noise.get("samples", 1)) > 1:
        nc = analysis.NoiseConfig(delta_i=delta, snr=float(noise["snr_power_ratio"]),
                                  samples=int(noise["samples"]),
                                  seed=int(noise["seed"]),
                                  snr_in_db=bool(noise.get("snr_in_db", False)))
        mc = awgn_mc_parallel(cfg, model, schedule, spec, nc, rtol, workers)
        results["awgn"] = {"snr": nc.snr, "samples": nc.samples, "seed": nc.seed,
                           "mean_f_bar": mc["mean"], "std_f_bar": mc["std"],
                           "fidelities": mc["fidelities"].tolist()}

    rates = config.build_rates(cfg)
    if rates is not None:
        n_keep = int(cfg["master"]["n_keep"])
        mrtol = float(cfg["master"]["rtol"])
        psi_in = basis[:, 0]
        res = dynamics.propagate_master(model, run_sched, psi_in, rates,
                                        n_keep=n_keep, rtol=mrtol, n_samples=0)
        mframe = dynamics.InteractionFrame(model, n_keep=n_keep)
        psi_out = mframe.to_eigen(basis @ (u_target @ np.eye(basis.shape[1])[:, 0]))
        results["f_out"] = float(np.real(psi_out.conj() @ res.rho_final @ psi_out))
        results["master_diagnostics"] = {
            k: float(v) for k, v in res.diagnostics.items()}

    _export_pulses(out_dir, schedule)
    _export_phases(out_dir, schedule)
    _write_json(out_dir / "fidelity.json", results)
    return EXIT_OK, results


def _awgn_sample_from_cfg(args):
    # schedules hold closures (unpicklable), so each worker rebuilds from cfg
    cfg, i = args
    model, spectrum = config.build_system(cfg)
    spec = config.build_gate_spec(cfg)
    schedule = config.build_schedule(cfg, spectrum)
    noise = cfg["noise"]
    nc = analysis.NoiseConfig(delta_i=float(noise["delta_i"]),
                              snr=float(noise["snr_power_ratio"]),
                              samples=1, seed=int(noise["seed"]),
                              snr_in_db=bool(noise.get("snr_in_db", False)))
    rng = np.random.default_rng((nc.seed, i))
    base = schedule if nc.delta_i == 0 else schedule.scaled(1 + nc.delta_i)
    noisy = base.with_awgn(nc.snr, rng, snr_in_db=nc.snr_in_db)
    basis = analysis._gate_basis(model, spec)
    u = dynamics.extract_propagator(model, noisy, basis,
                                    rtol=float(cfg["integration"]["rtol"]))
    return analysis.average_gate_fidelity(u, codes.target_unitary(spec)).f_bar


def awgn_mc_parallel(cfg, model, schedule, spec, nc, rtol, workers):
    if workers <= 1:
        return analysis.awgn_monte_carlo(model, schedule, spec, nc, rtol=rtol)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        fids = list(pool.map(_awgn_sample_from_cfg,
                             [(cfg, i) for i in range(nc.samples)]))
    fids = np.array(fids)
    return {"fidelities": fids, "mean": float(np.mean(fids)),
            "std": float(np.std(fids, ddof=1)) if fids.size > 1 else 0.0}


def run_prep(cfg, out_dir, override_rwa=False, workers=1):
    model, spectrum = config.build_system(cfg)
    schedule = config.build_schedule(cfg, spectrum)
    report, ok = _validate_rwa(cfg, schedule, spectrum, override_rwa)
    if not ok:
        return EXIT_VALIDATION, None
    rtol = float(cfg["integration"]["rtol"])
    lay = model.layout

    psi0_reduced = np.zeros(len(schedule.tones) + 1, dtype=complex)
    psi0_reduced[0] = 1.0
    res_eff = dynamics.propagate_effective(spectrum, schedule, psi0_reduced,
                                           n_samples=0)
    cutoff = lay.fock_cutoffs[0]
    pops_eff = np.zeros(cutoff)
    for i, tone in enumerate(schedule.tones):
        pops_eff[tone.k] = abs(res_eff.final_state[i]) ** 2

    res_full = dynamics.propagate_schrodinger(model, schedule, lay.ket(0, 0),
                                              rtol=rtol)
    pops_full = analysis.fock_populations(res_full.final_state, lay)

    rates = config.build_rates(cfg)
    pops_open = None
    rho_cav = None
    if rates is not None:
        n_keep = int(cfg["master"]["n_keep"])
        frame = dynamics.InteractionFrame(model, n_keep=n_keep)
        res_m = dynamics.propagate_master(model, schedule, lay.ket(0, 0), rates,
                                          rtol=float(cfg["master"]["rtol"]),
                                          n_samples=0, frame=frame)
        rho_full = frame.w @ res_m.rho_final @ frame.w.conj().T
        pops_open = analysis.fock_populations(rho_full, lay)
        rho_cav = analysis.reduced_cavity_rho(rho_full, lay)
    if rho_cav is None:
        rho_cav = analysis.reduced_cavity_rho(res_full.final_state, lay)

    rows = []
    for k in range(cutoff):
        rows.append([k, pops_eff[k], pops_full[k],
                     pops_open[k] if pops_open is not None else ""])
    _write_csv(out_dir / "populations.csv",
               ["fock_n", "p_effective", "p_full", "p_open"], rows)

    xs, w = analysis.wigner_grid(rho_cav)
    wrows = [[x, y, w[i, j]] for i, y in enumerate(xs) for j, x in enumerate(xs)]
    _write_csv(out_dir / "wigner.csv", ["alpha_re", "alpha_im", "w"], wrows)
    _export_pulses(out_dir, schedule)

    target = schedule.bright_state
    fid = analysis.state_fidelity(
        np.concatenate([target, np.zeros(lay.total_dim - cutoff)]),
        res_full.final_state)
    results = {"target_fidelity_full": fid,
               "populations_full": pops_full.tolist(),
               "rwa_worst_ratio": report.worst_ratio}
    _write_json(out_dir / "fidelity.json", results)
    return EXIT_OK, results


def _sweep_point(args):
    cfg, out_key = args
    code, results = run_gate_quiet(cfg)
    return results.get(out_key) if results else None


def run_gate_quiet(cfg):
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        return run_gate(cfg, Path(tmp), override_rwa=True)


def run_sweep(cfg, out_dir, override_rwa=False, workers=1):
    """Grid-evaluate f_bar or f_out over one or two config-key axes."""
    sw = cfg["sweep"]
    axes = sw["axes"]
    if not 1 <= len(axes) <= 2:
        raise config.ConfigError("sweep needs one or two axes")
    observable = sw.get("observable", "f_bar")

    def set_key(base, dotted, value):
        node = base
        parts = dotted.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        if parts[-1] == "gamma_all":
            # one knob for all four atomic rates (relaxations and dephasings)
            for key in ("gamma_g", "gamma_mu", "gamma_g_phi", "gamma_mu_phi"):
                node[key] = value
        else:
            node[parts[-1]] = value

    import copy as _copy
    points = []
    values0 = axes[0]["values"]
    values1 = axes[1]["values"] if len(axes) == 2 else [None]
    for v0 in values0:
        for v1 in values1:
            c = _copy.deepcopy(cfg)
            c["kind"] = "gate"
            set_key(c, axes[0]["key"], v0)
            if v1 is not None:
                set_key(c, axes[1]["key"], v1)
            if observable != "f_out":
                c["decoherence_kHz_times_2pi"] = None
            points.append((c, observable))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(_sweep_point, points))
    else:
        vals = [_sweep_point(p) for p in points]

    rows = []
    i = 0
    for v0 in values0:
        for v1 in values1:
            rows.append([v0] + ([] if v1 is None else [v1]) + [vals[i]])
            i += 1
    header = [axes[0]["key"]] + ([axes[1]["key"]] if len(axes) == 2 else []) \
        + [observable]
    _write_csv(out_dir / "sweep.csv", header, rows)
    return EXIT_OK, {"points": len(rows)}


def run_validate(cfg, out_dir, override_rwa=False, workers=1):
    if cfg["kind"] == "spectrum":
        print("spectrum runs have no schedule to validate")
        return EXIT_OK, None
    model, spectrum = config.build_system(cfg)
    schedule = config.build_schedule(cfg, spectrum)
    report, ok = _validate_rwa(cfg, schedule, spectrum, override_rwa)
    print(f"RWA worst ratio {report.worst_ratio:.4f} "
          f"(limit {report.ratio_max}); pass={report.passed}")
    return (EXIT_OK if ok else EXIT_VALIDATION), None


def main(argv=None):
    parser = argparse.ArgumentParser(prog="uscgates", description=__doc__)
    parser.add_argument("command",
                        choices=["spectrum", "gate", "prep", "sweep", "validate"])
    parser.add_argument("--config", required=True,
                        help="YAML config path or preset name "
                             f"(presets: {', '.join(config.available_presets())})")
    parser.add_argument("--out", default="runs/out", help="output directory")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--override-rwa", action="store_true")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides noise.seed from the config")
    args = parser.parse_args(argv)

    try:
        cfg = config.load_config(args.config)
    except (config.ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        cfg["noise"]["seed"] = int(args.seed)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "manifest.json", config.manifest(cfg))

    runner = {"spectrum": lambda *a: (EXIT_OK, run_spectrum(cfg, out_dir)),
              "gate": run_gate, "prep": run_prep, "sweep": run_sweep,
              "validate": run_validate}[args.command]
    try:
        if args.command == "spectrum":
            code, _ = runner()
        else:
            code, _ = runner(cfg, out_dir, args.override_rwa, args.workers)
    except (pulses.NumericError, dynamics.IntegratorAccuracyError,
            dynamics.StiffFailureError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (config.ConfigError, rabi.ConfigurationError,
            pulses.SingularSynthesisError, ValueError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return code


if __name__ == "__main__":
    sys.exit(main())
