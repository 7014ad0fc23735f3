"""Invariant-based shortcut-to-adiabaticity pulse synthesis.

A composite drive Omega(t) = sum_k Omega_k(t) cos(omega_k t + phi_k(t)) on
the mu<->g transition realizes, after the rotating-wave approximation, an
effective coupling between Fock states |mu,k> and one dressed state
|zeta_m>.  Gate schedules steer the bright logical combination along the
exact eigenpath

    |psi_-(t)> = i e^{i beta} cos(phi/2) |mu,b> + sin(phi/2) |zeta_m>

of a dynamical invariant, which requires the drive quadratures

    Xi e^{i phi_2} = e^{i beta} (dphi/dt + i (dbeta/dt) tan(phi)),

with auxiliary angles phi = pi sin^2(pi t/T) and beta = (4/3) sin^3(phi),
shifted by -2*Theta_s on the second half.  The cyclic run imprints the
geometric phase -2*Theta_s on the bright state and nothing on the dark
space.  State-preparation schedules instead drive a multi-leg ladder
{|mu,0>, |mu,k'>} <-> |zeta_m> with pump/Stokes envelopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import codes, rabi


class SingularSynthesisError(ValueError):
    """A dressed-state coefficient needed by the synthesis vanishes."""


class NumericError(RuntimeError):
    """Quadrature or root-finding failed to reach its tolerance."""


COEFF_TOL = 1e-6


# ---------------------------------------------------------------------------
# auxiliary schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateAuxiliary:
    """Smooth cyclic auxiliary angles for a holonomic gate.

    phi(0) = phi(t_f) = 0, phi(t_f/2) = pi; beta jumps by -2*Theta_s at
    t_f/2 where the bright component of the eigenpath vanishes.
    """

    theta_s: float
    t_f: float
    kind: str = "gate"

    def phi(self, t):
        return math.pi * math.sin(math.pi * t / self.t_f) ** 2

    def dphi(self, t):
        return (math.pi ** 2 / self.t_f) * math.sin(2 * math.pi * t / self.t_f)

    def beta(self, t, second_half=None):
        if second_half is None:
            second_half = t > self.t_f / 2
        b = (4.0 / 3.0) * math.sin(self.phi(t)) ** 3
        return b - 2 * self.theta_s if second_half else b

    def dbeta(self, t):
        s = math.sin(self.phi(t))
        return 4 * s * s * math.cos(self.phi(t)) * self.dphi(t)

    def dbeta_tan_phi(self, t):
        """Analytic product dbeta*tan(phi) = 4 dphi sin^3(phi) (no pole)."""
        return 4 * self.dphi(t) * math.sin(self.phi(t)) ** 3

    @property
    def beta_jump(self):
        return -2 * self.theta_s

    def theta_dyn_rate(self, t):
        # (dbeta/2) sin(phi) tan(phi) with the cos(phi) cancelled analytically
        return 2 * self.dphi(t) * math.sin(self.phi(t)) ** 4

    def theta_geo_rate(self, t):
        return -0.5 * self.dbeta(t) * (1 - math.cos(self.phi(t)))


@dataclass(frozen=True)
class NaiveGateAuxiliary(GateAuxiliary):
    """Counterexample schedule: same phi, beta carries only the -2*Theta_s
    step (no sin^3 shaping), so the error-sensitivity integral stays finite."""

    kind: str = "naive-gate"

    def beta(self, t, second_half=None):
        if second_half is None:
            second_half = t > self.t_f / 2
        return -2 * self.theta_s if second_half else 0.0

    def dbeta(self, t):
        return 0.0

    def dbeta_tan_phi(self, t):
        return 0.0

    def theta_dyn_rate(self, t):
        return 0.0

    def theta_geo_rate(self, t):
        return 0.0


@dataclass(frozen=True)
class PrepAuxiliary:
    """Auxiliary angles for even-Fock superposition preparation.

    beta_tilde rises as a logistic from ~0 to beta_f; phi_tilde is a small
    Gaussian bump (peak phi0 at t_f/2).  Boundaries are approximate:
    beta(0)/beta_f and phi(0)/phi0 ~ e^{-(t_f/2 tau)^2}-ish, accepted as-is.
    """

    beta_f: float
    t_f: float
    phi0: float = math.pi / 5
    tau_frac: float = 0.115
    tau_c_frac: float = 0.3
    kind: str = "prep"
    theta_s: float = 0.0

    @property
    def tau(self):
        return self.tau_frac * self.t_f

    @property
    def tau_c(self):
        return self.tau_c_frac * self.t_f

    def beta(self, t):
        return self.beta_f / (1 + math.exp(-(t - self.t_f / 2) / self.tau))

    def dbeta(self, t):
        e = math.exp(-(t - self.t_f / 2) / self.tau)
        return self.beta_f * e / (self.tau * (1 + e) ** 2)

    def phi(self, t):
        return self.phi0 * math.exp(-(((t - self.t_f / 2) / self.tau_c) ** 2))

    def dphi(self, t):
        return self.phi(t) * (-2 * (t - self.t_f / 2) / self.tau_c ** 2)


def gate_auxiliary(theta_s, t_f):
    if t_f <= 0:
        raise ValueError("gate duration must be positive")
    return GateAuxiliary(theta_s=float(theta_s), t_f=float(t_f))


def prep_auxiliary(beta_f, t_f, phi0=math.pi / 5, tau_frac=0.115, tau_c_frac=0.3):
    return PrepAuxiliary(beta_f=float(beta_f), t_f=float(t_f), phi0=phi0,
                         tau_frac=tau_frac, tau_c_frac=tau_c_frac)


# ---------------------------------------------------------------------------
# drive quadratures / envelopes
# ---------------------------------------------------------------------------

def omega_p_omega_s(aux, t, second_half=None):
    """Quadratures (Omega_p, Omega_s) of the bright-state drive.

    Xi sin(phi_2) = Omega_p = dphi sin(beta) + dbeta tan(phi) cos(beta)
    Xi cos(phi_2) = Omega_s = dphi cos(beta) - dbeta tan(phi) sin(beta)

    The dbeta*tan(phi) product is evaluated analytically, so the endpoint
    and midpoint zeros of cos(phi) never appear as poles.
    """
    b = aux.beta(t, second_half) if isinstance(aux, GateAuxiliary) else aux.beta(t)
    dp = aux.dphi(t)
    bt = aux.dbeta_tan_phi(t)
    sb, cb = math.sin(b), math.cos(b)
    return dp * sb + bt * cb, dp * cb - bt * sb


def effective_drive(aux, t, second_half=None):
    """Effective amplitude Xi >= 0 and phase phi_2 of the bright drive.

    Xi = sqrt(dphi^2 + (dbeta tan phi)^2), phi_2 = beta + atan2(dbeta tan phi,
    dphi); continuous within each half interval, with the single
    discontinuity at t_f/2 where Xi = 0.
    """
    if second_half is None:
        second_half = t > aux.t_f / 2
    b = aux.beta(t, second_half)
    dp = aux.dphi(t)
    dbt = aux.dbeta_tan_phi(t)
    return math.hypot(dp, dbt), b + math.atan2(dbt, dp)


def sample_effective_drive(aux, n=4001):
    ts, second = sample_grid(aux.t_f, n)
    xi = np.empty(ts.size)
    phi2 = np.empty(ts.size)
    for i, (t, sec) in enumerate(zip(ts, second)):
        xi[i], phi2[i] = effective_drive(aux, t, sec)
    return ts, xi, phi2


def sample_grid(t_f, n=4001):
    """Uniform-step grid split at t_f/2, which appears twice (left/right limits)."""
    m = (n + 1) // 2
    left = np.linspace(0.0, t_f / 2, m)
    right = np.linspace(t_f / 2, t_f, m)
    ts = np.concatenate([left, right])
    second = np.concatenate([np.zeros(m, bool), np.ones(m, bool)])
    return ts, second


def invariant_matrix(aux, t, second_half=None):
    """Dynamical invariant of the synthesized bright drive, in the
    (|mu,b>, |zeta_m>) basis.

    I = cos(phi) (|Z><Z| - |B><B|) + (i e^{i beta} sin(phi) |B><Z| + h.c.)

    With H_eff built from effective_drive, this satisfies the invariant
    equation in the form dI/dt = i [H_eff, I].
    """
    if second_half is None:
        second_half = t > aux.t_f / 2
    p = aux.phi(t)
    b = aux.beta(t, second_half)
    off = 1j * np.exp(1j * b) * math.sin(p)
    return np.array([[-math.cos(p), off], [np.conj(off), math.cos(p)]])


# ---------------------------------------------------------------------------
# Lewis-Riesenfeld phases
# ---------------------------------------------------------------------------

@dataclass
class LewisRiesenfeldPhases:
    """Dynamical and geometric phases along the minus eigenpath.

    theta_dyn rate +(dbeta/2) sin(phi) tan(phi); theta_geo rate
    -(dbeta/2)(1-cos(phi)), plus the beta-jump contribution
    -(Delta beta/2)(1-cos(phi(t_f/2))) = 2*Theta_s at t_f/2.
    R = theta_dyn + theta_geo.
    """

    aux: object
    ts: np.ndarray
    theta_dyn: np.ndarray
    theta_geo: np.ndarray
    theta_dyn_final: float
    theta_geo_final: float

    @property
    def r_minus(self):
        return self.theta_dyn + self.theta_geo

    @property
    def r_final(self):
        return self.theta_dyn_final + self.theta_geo_final

    def r_interpolant(self):
        from scipy.interpolate import interp1d
        return interp1d(self.ts, self.r_minus, kind="cubic",
                        fill_value="extrapolate", assume_sorted=False)


def lewis_riesenfeld_phases(aux, n=4001, quad_tol=1e-10):
    """Integrate the phase rates by quadrature, split exactly at t_f/2."""
    from scipy.integrate import quad, cumulative_trapezoid

    if aux.kind not in ("gate", "naive-gate"):
        raise ValueError("Lewis-Riesenfeld phases are defined for gate schedules")
    t_half, t_f = aux.t_f / 2, aux.t_f

    def quad_piece(rate, a, b):
        val, err = quad(rate, a, b, limit=200, epsabs=quad_tol, epsrel=quad_tol)
        if err > max(100 * quad_tol, 1e-8 * max(abs(val), 1.0)):
            raise NumericError(f"phase quadrature error {err:.2e} too large")
        return val

    jump_geo = -0.5 * aux.beta_jump * (1 - math.cos(aux.phi(t_half)))
    sp, cp = math.sin(aux.phi(t_half)), math.cos(aux.phi(t_half))
    jump_dyn = 0.5 * aux.beta_jump * (sp * sp / cp if abs(cp) > 1e-12 else 0.0)

    dyn_final = (quad_piece(aux.theta_dyn_rate, 0, t_half) + jump_dyn
                 + quad_piece(aux.theta_dyn_rate, t_half, t_f))
    geo_final = (quad_piece(aux.theta_geo_rate, 0, t_half) + jump_geo
                 + quad_piece(aux.theta_geo_rate, t_half, t_f))

    ts, second = sample_grid(t_f, n)
    dyn_rate = np.array([aux.theta_dyn_rate(t) for t in ts])
    geo_rate = np.array([aux.theta_geo_rate(t) for t in ts])
    dyn = cumulative_trapezoid(dyn_rate, ts, initial=0.0)
    geo = cumulative_trapezoid(geo_rate, ts, initial=0.0)
    dyn[second] += jump_dyn
    geo[second] += jump_geo
    return LewisRiesenfeldPhases(aux, ts, dyn, geo, dyn_final, geo_final)


# ---------------------------------------------------------------------------
# pulse schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tone:
    k: object                # int, or (ka, kb) for bimodal drives
    omega: float             # rad/ns
    c_coeff: float           # dressed-state coefficient carried by this tone
    amplitude: object        # callable t -> rad/ns (signed)
    phase: object            # callable t -> rad


@dataclass(frozen=True)
class PulseSchedule:
    t_f: float
    tones: tuple
    m: int
    kind: str                          # 'gate' | 'two-qubit-gate' | 'prep'
    aux: object
    bright_state: np.ndarray = None    # cavity-space vector driven by the tones
    dark_states: tuple = None
    spec: object = None
    split_time: float = None
    meta: dict = field(default_factory=dict)

    def drive(self, t):
        """Scalar composite drive sum_k Omega_k(t) cos(omega_k t + phi_k(t))."""
        return sum(tone.amplitude(t) * math.cos(tone.omega * t + tone.phase(t))
                   for tone in self.tones)

    def drive_factory(self):
        """Fast scalar drive evaluator (hot path of the propagators)."""
        env = self.meta.get("envelope")
        if env is not None:
            # all tones share the (Xi, phi_2) envelope: one evaluation per t
            aux = self.aux
            scales = env["scales"]
            offsets = env["offsets"]
            omegas = env["omegas"]
            factor = env.get("amp_factor", 1.0)
            cos = math.cos
            terms = list(zip(scales, omegas, offsets))

            def f(t):
                xi, p2 = effective_drive(aux, t)
                if xi == 0.0:
                    return 0.0
                total = 0.0
                for s, w, o in terms:
                    total += s * cos(w * t + p2 - o)
                return factor * xi * total
            return f

        amps = [t.amplitude for t in self.tones]
        phases = [t.phase for t in self.tones]
        omegas = [t.omega for t in self.tones]
        cos = math.cos

        def f(t):
            total = 0.0
            for a, p, w in zip(amps, phases, omegas):
                total += a(t) * cos(w * t + p(t))
            return total
        return f

    def peak_amplitudes(self, n=2001):
        ts = np.linspace(0, self.t_f, n)
        return {tone.k: max(abs(tone.amplitude(t)) for t in ts) for tone in self.tones}

    def sample(self, n=4001):
        ts, _ = sample_grid(self.t_f, n)
        data = {}
        for tone in self.tones:
            amp = np.array([tone.amplitude(t) for t in ts])
            ph = np.array([tone.phase(t) for t in ts])
            data[tone.k] = (amp, ph)
        return ts, data

    def scaled(self, factor):
        """Schedule with every tone amplitude multiplied by `factor`
        (systematic amplitude error (1+delta_i))."""
        tones = tuple(
            Tone(t.k, t.omega, t.c_coeff,
                 _scaled_callable(t.amplitude, factor), t.phase)
            for t in self.tones)
        meta = dict(self.meta)
        env = meta.get("envelope")
        if env is not None:
            env = dict(env)
            env["amp_factor"] = env.get("amp_factor", 1.0) * factor
            meta["envelope"] = env
        return self._replace_tones(tones, meta)

    def with_awgn(self, snr, rng, n_grid=4001, snr_in_db=False):
        """Schedule whose sampled tone amplitudes carry additive white
        Gaussian noise at the given signal-to-noise (power) ratio."""
        r = 10 ** (snr / 10) if snr_in_db else float(snr)
        ts = np.linspace(0.0, self.t_f, n_grid)
        tones = []
        for tone in self.tones:
            clean = np.array([tone.amplitude(t) for t in ts])
            p_signal = float(np.mean(clean ** 2))
            noisy = clean + rng.normal(0.0, math.sqrt(p_signal / r), size=clean.shape)
            tones.append(Tone(tone.k, tone.omega, tone.c_coeff,
                              _interp_callable(ts, noisy), tone.phase))
        meta = dict(self.meta)
        meta.pop("envelope", None)
        return self._replace_tones(tuple(tones), meta)

    def mirrored(self):
        """Time-mirror with pi-shifted phases; at the rotating-wave level this
        generates the inverse evolution."""
        t_f = self.t_f
        tones = tuple(
            Tone(t.k, t.omega, t.c_coeff,
                 _mirror_callable(t.amplitude, t_f),
                 _mirror_phase_callable(t.phase, t_f))
            for t in self.tones)
        meta = dict(self.meta)
        meta.pop("envelope", None)
        return self._replace_tones(tuple(tones), meta)

    def _replace_tones(self, tones, meta=None):
        return PulseSchedule(self.t_f, tones, self.m, self.kind, self.aux,
                             self.bright_state, self.dark_states, self.spec,
                             self.split_time,
                             dict(self.meta) if meta is None else meta)


def _scaled_callable(f, factor):
    return lambda t: factor * f(t)


def _interp_callable(ts, ys):
    def f(t):
        return float(np.interp(t, ts, ys))
    return f


def _mirror_callable(f, t_f):
    return lambda t: f(t_f - t)


def _mirror_phase_callable(f, t_f):
    return lambda t: f(t_f - t) + math.pi


def _gate_envelope(aux):
    """Shared (Xi, phi_2) evaluator with a one-slot memo (tones share t)."""
    memo = {"t": None, "v": (0.0, 0.0)}

    def get(t):
        if memo["t"] != t:
            memo["v"] = effective_drive(aux, t)
            memo["t"] = t
        return memo["v"]
    return get


def synthesize_single_qubit(spec, spectrum, t_f, m=2, ks=(0, 2, 4)):
    """Three-tone composite pulse realizing the single-qubit gate `spec`.

    Amplitudes: Omega_0 = (Xi/(sqrt2 c_0)) sin(th/2), Omega_2 = (Xi/c_2) cos(th/2),
    Omega_4 = (Xi/(sqrt2 c_4)) sin(th/2); tone phases phi_0 = phi_4 =
    phi_2(t) - phi_drive and phi_2tone = phi_2(t).

    Two exactly equivalent drive constructions exist: the cyclic bright-state
    phase -2*Theta_s on b(th, pi - phi), or +2*Theta_s (beta jump reversed) on
    b(pi - th, phi).  Both reproduce target_unitary(spec) up to a global
    phase; the synthesizer picks the one with smaller k = 0, 4 tones, which
    matters for |th| > pi/2 where the weak c_4 coefficient would otherwise
    run the drive hot.
    """
    if spec.is_two_qubit:
        raise ValueError("use synthesize_two_qubit for two-qubit specs")
    cutoff = spectrum.model.layout.fock_cutoffs[0]
    cs = {}
    for k in ks:
        ck = float(np.real(spectrum.c[m][k]))
        if abs(ck) < COEFF_TOL:
            raise SingularSynthesisError(
                f"dressed coefficient c_{k}^{m} = {ck:.2e} vanishes; "
                "this coupling regime cannot drive the code space")
        cs[k] = ck
    omegas = rabi.drive_frequencies(spectrum, m, ks, spectrum.model.omega_mu)

    if abs(math.sin(spec.theta / 2)) <= abs(math.cos(spec.theta / 2)):
        theta_d, phi_drive, theta_s_d = spec.theta, math.pi - spec.phi, spec.theta_s
    else:
        theta_d, phi_drive, theta_s_d = math.pi - spec.theta, -spec.phi, -spec.theta_s
    aux = gate_auxiliary(theta_s_d, t_f)
    env = _gate_envelope(aux)
    s_half, c_half = math.sin(theta_d / 2), math.cos(theta_d / 2)
    scale = {ks[0]: s_half / (math.sqrt(2) * cs[ks[0]]),
             ks[1]: c_half / cs[ks[1]],
             ks[2]: s_half / (math.sqrt(2) * cs[ks[2]])}
    offsets = {ks[0]: phi_drive, ks[1]: 0.0, ks[2]: phi_drive}

    tones = tuple(
        Tone(k, float(w), cs[k],
             _envelope_amplitude(env, scale[k]),
             _envelope_phase(env, offsets[k]))
        for k, w in zip(ks, omegas))

    code = codes.binomial_codewords(cutoff)
    drive_spec = codes.GateSpec(theta_s=spec.theta_s, theta=theta_d, phi=phi_drive)
    bright, dark = codes.bright_dark(drive_spec, code)
    envelope = {"scales": [scale[k] for k in ks],
                "omegas": [float(w) for w in omegas],
                "offsets": [offsets[k] for k in ks],
                "amp_factor": 1.0}
    return PulseSchedule(t_f=float(t_f), tones=tones, m=m, kind="gate", aux=aux,
                         bright_state=bright, dark_states=(dark,), spec=spec,
                         split_time=t_f / 2,
                         meta={"phi_drive": phi_drive, "ks": tuple(ks),
                               "theta_drive": theta_d, "envelope": envelope})


def _envelope_amplitude(env, scale):
    return lambda t: env(t)[0] * scale


def _envelope_phase(env, offset):
    return lambda t: env(t)[1] - offset


_TWO_QUBIT_KS = tuple((ka, kb) for ka in (0, 2, 4) for kb in (0, 2, 4))


def synthesize_two_qubit(spec, spectrum, t_f, m=0):
    """Nine-tone bimodal drive realizing the two-qubit gate `spec`.

    Pair envelopes Xi_[00] = Xi cos(th0/2)cos(th1/2) etc. are tied to the
    tone amplitudes by c_{ka,kb} Omega_{ka,kb} = Xi_pair/w with w = 2 on the
    four 0~0~ legs, sqrt(2) on the 0~1~/1~0~ legs and 1 on (2,2).  The
    auxiliary beta jump is driven with -Theta_s so the bright state acquires
    +2*Theta_s, matching target_unitary(spec).
    """
    if not spec.is_two_qubit:
        raise ValueError("use synthesize_single_qubit for single-qubit specs")
    cuts = spectrum.model.layout.fock_cutoffs
    cs = {}
    for (ka, kb) in _TWO_QUBIT_KS:
        ck = float(np.real(spectrum.c[m][ka, kb]))
        if abs(ck) < COEFF_TOL:
            raise SingularSynthesisError(
                f"dressed coefficient c_({ka},{kb})^{m} = {ck:.2e} vanishes")
        cs[(ka, kb)] = ck
    omegas = rabi.drive_frequencies(spectrum, m, _TWO_QUBIT_KS, spectrum.model.omega_mu)

    c0, s0 = math.cos(spec.theta0 / 2), math.sin(spec.theta0 / 2)
    c1, s1 = math.cos(spec.theta1 / 2), math.sin(spec.theta1 / 2)
    c2q, s2q = math.cos(spec.theta2 / 2), math.sin(spec.theta2 / 2)
    pair_weight = {"00": c0 * c1, "01": c0 * s1, "10": s0 * c2q, "11": s0 * s2q}

    aux = gate_auxiliary(-spec.theta_s, t_f)
    env = _gate_envelope(aux)

    tones = []
    scales, offsets = [], []
    for (ka, kb), w in zip(_TWO_QUBIT_KS, omegas):
        pair = ("0" if ka in (0, 4) else "1") + ("0" if kb in (0, 4) else "1")
        leg = {"00": 2.0, "01": math.sqrt(2), "10": math.sqrt(2), "11": 1.0}[pair]
        scale = pair_weight[pair] / (leg * cs[(ka, kb)])
        offset = spec.phi if pair == "00" else 0.0
        scales.append(scale)
        offsets.append(offset)
        tones.append(Tone((ka, kb), float(w), cs[(ka, kb)],
                          _envelope_amplitude(env, scale),
                          _envelope_phase(env, offset)))

    code_a = codes.binomial_codewords(cuts[0])
    code_b = codes.binomial_codewords(cuts[1])
    bd = codes.bright_dark_two_qubit(spec, code_a, code_b)
    envelope = {"scales": scales, "omegas": [float(w) for w in omegas],
                "offsets": offsets, "amp_factor": 1.0}
    return PulseSchedule(t_f=float(t_f), tones=tuple(tones), m=m,
                         kind="two-qubit-gate", aux=aux,
                         bright_state=bd[0], dark_states=bd[1:], spec=spec,
                         split_time=t_f / 2,
                         meta={"ks": _TWO_QUBIT_KS, "envelope": envelope})


# ---------------------------------------------------------------------------
# state preparation
# ---------------------------------------------------------------------------

def prep_pump_stokes(aux, t):
    """Leg amplitudes of the preparation ladder.

    pump  = 2 (dbeta cot(phi) sin(beta) + dphi cos(beta))   on the |mu,0> leg
    stokes= 2 (dbeta cot(phi) cos(beta) - dphi sin(beta))   on the eps legs

    The factor 2 comes from the transport equations of the ladder eigenpath
    (each leg couples with hbar/2).
    """
    b, db = aux.beta(t), aux.dbeta(t)
    p, dp = aux.phi(t), aux.dphi(t)
    cot = math.cos(p) / math.sin(p)
    sb, cb = math.sin(b), math.cos(b)
    return 2 * (db * cot * sb + dp * cb), 2 * (db * cot * cb - dp * sb)


def prep_schedule(spectrum, beta_f, epsilons, t_f, m=2,
                  phi0=math.pi / 5, tau_frac=0.115, tau_c_frac=0.3):
    """Composite pulse steering |mu,0> to cos(beta_f)|0> + sin(beta_f) sum eps_k'|k'>.

    epsilons are the even-Fock target amplitudes for k' = 2, 4, ..., with
    sum |eps|^2 = 1.  Tones: c_0 Omega_0 = pump (phase 0) and
    c_k' Omega_k' = eps_k' * stokes (phase pi).
    """
    epsilons = np.asarray(epsilons, dtype=float)
    if abs(float(np.sum(epsilons ** 2)) - 1.0) > 1e-10:
        raise ValueError("prep target amplitudes must satisfy sum |eps|^2 = 1")
    ks = (0,) + tuple(2 * (i + 1) for i in range(epsilons.size))
    cs = {}
    for k in ks:
        ck = float(np.real(spectrum.c[m][k]))
        if abs(ck) < COEFF_TOL:
            raise SingularSynthesisError(f"dressed coefficient c_{k}^{m} vanishes")
        cs[k] = ck
    omegas = rabi.drive_frequencies(spectrum, m, ks, spectrum.model.omega_mu)
    aux = prep_auxiliary(beta_f, t_f, phi0, tau_frac, tau_c_frac)

    memo = {"t": None, "v": (0.0, 0.0)}

    def env(t):
        if memo["t"] != t:
            memo["v"] = prep_pump_stokes(aux, t)
            memo["t"] = t
        return memo["v"]

    tones = [Tone(0, float(omegas[0]), cs[0],
                  _prep_amplitude(env, 0, 1.0 / cs[0]), _const_phase(0.0))]
    for i, k in enumerate(ks[1:]):
        tones.append(Tone(k, float(omegas[i + 1]), cs[k],
                          _prep_amplitude(env, 1, float(epsilons[i]) / cs[k]),
                          _const_phase(math.pi)))

    cutoff = spectrum.model.layout.fock_cutoffs[0]
    target = prep_target(beta_f, epsilons, cutoff)
    return PulseSchedule(t_f=float(t_f), tones=tuple(tones), m=m, kind="prep",
                         aux=aux, bright_state=target, dark_states=(),
                         spec=None, split_time=None,
                         meta={"beta_f": float(beta_f),
                               "epsilons": tuple(float(e) for e in epsilons),
                               "ks": ks})


def _prep_amplitude(env, which, scale):
    return lambda t: env(t)[which] * scale


def _const_phase(value):
    return lambda t: value


def prep_target(beta_f, epsilons, cutoff):
    """Ideal preparation target cos(beta_f)|0> + sin(beta_f) sum eps_k'|k'>."""
    epsilons = np.asarray(epsilons, dtype=float)
    v = np.zeros(cutoff, dtype=complex)
    v[0] = math.cos(beta_f)
    for i, e in enumerate(epsilons):
        v[2 * (i + 1)] = math.sin(beta_f) * e
    return v


def cat_prep_parameters(eta, k_max=8):
    """(beta_f, epsilons) targeting the even cat state of amplitude eta.

    beta_f = arccos(sqrt(sech eta^2)); eps_k' = eta^k' cot(beta_f)/sqrt(k'!),
    truncated at k_max and renormalized (the tail is ~1e-4 in norm at
    eta = sqrt(2), k_max = 8).
    """
    sech = 1.0 / math.cosh(eta ** 2)
    beta_f = math.acos(math.sqrt(sech))
    cot = math.cos(beta_f) / math.sin(beta_f)
    ks = range(2, k_max + 1, 2)
    eps = np.array([cot * eta ** k / math.sqrt(math.factorial(k)) for k in ks])
    eps /= np.linalg.norm(eps)
    return beta_f, eps


def even_cat_state(eta, cutoff):
    """Normalized even cat (|eta> + |-eta>)/N in the Fock basis (real eta)."""
    n = np.arange(cutoff)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    coh = np.exp(-eta ** 2 / 2 + n * math.log(abs(eta)) - 0.5 * log_fact) \
        if eta != 0 else np.eye(cutoff)[0]
    coh = coh * np.sign(eta) ** n
    v = coh.copy()
    v[1::2] = 0.0
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# rotating-wave-approximation validity report
# ---------------------------------------------------------------------------

@dataclass
class RWAReport:
    passed: bool
    worst_ratio: float
    worst_transition: tuple   # (tone k, m', n, 'co'|'counter')
    ratio_max: float
    entries: list = field(default_factory=list)


def rwa_check(schedule, spectrum, ratio_max=0.1, m_max=10):
    """Check every spectator coupling against its detuning.

    For each tone k with peak amplitude W, each dressed level m' and Fock
    index n, the neglected co- and counter-rotating couplings require

        |c_n^{m'}| W  <=  ratio_max * |(n-k).omega_c - (E_{m'} - E_m)|
        |c_n^{m'}| W  <=  ratio_max * |(n-k).omega_c - 2 omega_k - (E_{m'}-E_m)|

    The resonant target term (m' = m, n = k) is exempt from the first line.
    """
    model = spectrum.model
    m = schedule.m
    peaks = schedule.peak_amplitudes()
    n_dressed = spectrum.energies.size
    worst = (0.0, None)
    entries = []
    bimodal = model.layout.n_modes == 2
    for tone in schedule.tones:
        w_pk = peaks[tone.k]
        if w_pk == 0.0:
            continue
        for mp in range(min(m_max + 1, n_dressed)):
            de = spectrum.energies[mp] - spectrum.energies[m]
            table = spectrum.c[mp]
            for idx in np.ndindex(*table.shape):
                cn = abs(table[idx])
                if cn * w_pk < 1e-12:
                    continue
                if bimodal:
                    detune = ((idx[0] - tone.k[0]) * model.omega_c[0]
                              + (idx[1] - tone.k[1]) * model.omega_c[1])
                    is_resonant = (mp == m and tuple(idx) == tuple(tone.k))
                else:
                    detune = (idx[0] - tone.k) * model.omega_c[0]
                    is_resonant = (mp == m and idx[0] == tone.k)
                for label, den in (("co", detune - de),
                                   ("counter", detune - 2 * tone.omega - de)):
                    if label == "co" and is_resonant:
                        continue
                    ratio = cn * w_pk / abs(den) if den != 0 else math.inf
                    entries.append((ratio, tone.k, mp, idx, label))
                    if ratio > worst[0]:
                        worst = (ratio, (tone.k, mp, idx, label))
    entries.sort(key=lambda e: -e[0])
    return RWAReport(passed=worst[0] <= ratio_max, worst_ratio=worst[0],
                     worst_transition=worst[1], ratio_max=ratio_max,
                     entries=entries[:20])
