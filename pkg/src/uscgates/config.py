"""Experiment configuration: YAML schema, resolution, and model building.

Every physical quantity carries an explicit unit suffix in the file
(`*_GHz_times_2pi`, `*_ns`, `*_rad`, `*_kHz_times_2pi`, dimensionless
ratios spelled `*_over_*`), so the rad/ns convention used internally never
leaks into user-facing files.  See `uscgates/presets/*.yaml` for worked
examples; `load_config("fig3b")` resolves preset names as well as paths.
"""

from __future__ import annotations

import copy
import hashlib
import importlib.resources
import json
import math
from pathlib import Path

import numpy as np
import yaml

from . import codes, dynamics, pulses, rabi

GHZ = 2 * math.pi           # GHz_times_2pi -> rad/ns
VERSION = "0.1.0"


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


DEFAULTS = {
    "kind": "gate",
    "model": {
        "modes": 1,
        "omega_c_GHz_times_2pi": 6.25,
        "omega_q_GHz_times_2pi": 6.25,
        "g_over_omega_c": 0.8,
        "fock_cutoff": 20,
        # bimodal extras
        "omega_b_over_omega_a": 0.9,
        "g_b_over_omega_a": None,
    },
    "schedule": {
        "duration_ns": 150.0,
        "m_level": 2,
        "k_max": 4,
    },
    "gate": None,
    "prep": None,
    "noise": {
        "delta_i": 0.0,
        "snr_power_ratio": None,
        "snr_in_db": False,
        "samples": 1,
        "seed": 0,
    },
    "decoherence_kHz_times_2pi": None,
    "master": {"n_keep": 40, "rtol": 1e-8},
    "rwa": {"ratio_max": 0.1, "override": False},
    "sweep": None,
    "integration": {"rtol": 1e-9},
}


def _deep_update(base, extra):
    out = copy.deepcopy(base)
    for key, val in (extra or {}).items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def preset_path(name):
    root = importlib.resources.files("uscgates") / "presets"
    path = root / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError(f"unknown preset '{name}'")
    return path


def available_presets():
    root = importlib.resources.files("uscgates") / "presets"
    return sorted(p.stem for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(source):
    """Load a config from a YAML path, preset name, or dict."""
    if isinstance(source, dict):
        raw = source
    else:
        path = Path(source)
        if not path.is_file():
            path = preset_path(str(source))
        raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    cfg = _deep_update(DEFAULTS, raw)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["kind"] not in ("gate", "prep", "spectrum", "sweep"):
        raise ConfigError(f"unknown kind '{cfg['kind']}'")
    m = cfg["model"]
    if m["modes"] not in (1, 2):
        raise ConfigError("model.modes must be 1 or 2")
    if cfg["kind"] == "gate" and not cfg.get("gate"):
        raise ConfigError("gate run needs a [gate] section")
    if cfg["kind"] == "prep":
        prep = cfg.get("prep")
        if not prep:
            raise ConfigError("prep run needs a [prep] section")
        if prep.get("target") == "superposition" and not prep.get("epsilons"):
            raise ConfigError("superposition prep needs a non-empty epsilons list")
    if cfg["kind"] == "sweep" and not cfg.get("sweep"):
        raise ConfigError("sweep run needs a [sweep] section")


def config_hash(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=float).encode()).hexdigest()


def manifest(cfg):
    return {"tool": "uscgates", "version": VERSION,
            "config": cfg, "config_sha256": config_hash(cfg)}


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_model(cfg):
    """RabiModel (omega_mu not yet pinned) from the [model] section."""
    m = cfg["model"]
    cutoff = int(m["fock_cutoff"])
    if m["modes"] == 1:
        wc = m["omega_c_GHz_times_2pi"] * GHZ
        wq = m["omega_q_GHz_times_2pi"] * GHZ
        g = m["g_over_omega_c"] * wc
        return rabi.RabiModel.single_mode(wc, wq, g, cutoff=cutoff)
    wa = m["omega_c_GHz_times_2pi"] * GHZ
    wb = m["omega_b_over_omega_a"] * wa
    wq = m["omega_q_GHz_times_2pi"] * GHZ
    ga = m["g_over_omega_c"] * wa
    gb = (m["g_b_over_omega_a"] * wa) if m["g_b_over_omega_a"] is not None else ga
    return rabi.RabiModel.bimodal(wa, wb, wq, ga, gb, cutoff=cutoff)


def build_system(cfg):
    """(model, spectrum) with omega_mu pinned by the schedule section."""
    model = build_model(cfg)
    sch = cfg["schedule"]
    m_level = int(sch["m_level"])
    k_max = int(sch["k_max"])
    spec0 = rabi.dressed_spectrum(model)
    if model.layout.n_modes == 1:
        omega_mu = rabi.choose_omega_mu(spec0, m_level, k_max)
    else:
        omega_mu = rabi.choose_omega_mu_bimodal(spec0, m_level, k_max, k_max)
    model = model.with_omega_mu(omega_mu)
    return model, rabi.dressed_spectrum(model)


def build_gate_spec(cfg):
    g = cfg["gate"]
    if g is None:
        raise ConfigError("missing [gate] section")
    if "theta_rad" in g:
        return codes.GateSpec(theta_s=float(g["theta_s_rad"]),
                              theta=float(g["theta_rad"]),
                              phi=float(g.get("phi_rad", 0.0)))
    return codes.GateSpec(theta_s=float(g["theta_s_rad"]),
                          theta0=float(g["theta0_rad"]),
                          theta1=float(g["theta1_rad"]),
                          theta2=float(g["theta2_rad"]),
                          phi=float(g.get("phi_rad", 0.0)))


def build_schedule(cfg, spectrum):
    sch = cfg["schedule"]
    t_f = float(sch["duration_ns"])
    m_level = int(sch["m_level"])
    if cfg["kind"] == "prep" or cfg.get("prep"):
        prep = cfg["prep"]
        if prep.get("target") == "cat":
            beta_f, eps = pulses.cat_prep_parameters(
                float(prep["eta"]), k_max=int(prep.get("k_max", 8)))
        else:
            eps = np.asarray(prep["epsilons"], dtype=float)
            if "beta_f_rad" in prep:
                beta_f = float(prep["beta_f_rad"])
            else:
                raise ConfigError("superposition prep needs beta_f_rad")
        return pulses.prep_schedule(spectrum, beta_f, eps, t_f, m=m_level)
    spec = build_gate_spec(cfg)
    if spec.is_two_qubit:
        return pulses.synthesize_two_qubit(spec, spectrum, t_f, m=m_level)
    return pulses.synthesize_single_qubit(spec, spectrum, t_f, m=m_level)


def build_rates(cfg):
    d = cfg.get("decoherence_kHz_times_2pi")
    if not d:
        return None
    return dynamics.DecoherenceRates.from_khz(
        d.get("kappa", 0.0), d.get("kappa_phi", 0.0),
        d.get("gamma_g", 0.0), d.get("gamma_mu", 0.0),
        d.get("gamma_g_phi", 0.0), d.get("gamma_mu_phi", 0.0))
