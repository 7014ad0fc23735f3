"""Gate/state quality metrics and noise studies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import codes, dynamics, linalg, pulses


@dataclass
class FidelityReport:
    f_bar: float
    dim: int
    trace_m: complex
    trace_mmdag: float
    f_out: float = None

    def as_dict(self):
        out = {"f_bar": self.f_bar, "dim": self.dim,
               "trace_m_abs": abs(self.trace_m), "trace_mmdag": self.trace_mmdag}
        if self.f_out is not None:
            out["f_out"] = self.f_out
        return out


@dataclass(frozen=True)
class NoiseConfig:
    delta_i: float = 0.0
    snr: float = math.inf
    samples: int = 1
    seed: int = 0
    snr_in_db: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.snr <= 0:
            raise ValueError("snr must be positive")


def average_gate_fidelity(u_actual, u_target, projector=None):
    """Average gate fidelity over the code subspace.

    F = [Tr(M M^dag) + |Tr M|^2] / (D^2 + D) with M = P U_T^dag U P
    restricted to the D-dimensional subspace.  With no projector the inputs
    are taken as already-restricted D x D blocks (leakage then shows up as
    nonunitarity of M).
    """
    u_actual = np.asarray(u_actual, dtype=complex)
    u_target = np.asarray(u_target, dtype=complex)
    if projector is not None:
        p = np.asarray(projector, dtype=complex)
        if np.max(np.abs(p @ p - p)) > 1e-10:
            raise ValueError("projector must be idempotent")
        vals, vecs = np.linalg.eigh(p)
        iso = vecs[:, vals > 0.5]
        u_actual = iso.conj().T @ u_actual @ iso
        u_target = iso.conj().T @ u_target @ iso
    d = u_target.shape[0]
    m = u_target.conj().T @ u_actual
    tr_m = complex(np.trace(m))
    tr_mm = float(np.real(np.trace(m @ m.conj().T)))
    f = (tr_mm + abs(tr_m) ** 2) / (d * d + d)
    return FidelityReport(f_bar=float(f), dim=d, trace_m=tr_m, trace_mmdag=tr_mm)


def state_fidelity(psi, rho_or_psi):
    """<psi|rho|psi>, or |<psi|phi>|^2 for pure states."""
    psi = np.asarray(psi, dtype=complex)
    other = np.asarray(rho_or_psi, dtype=complex)
    if other.ndim == 1:
        return float(abs(np.vdot(psi, other)) ** 2)
    return float(np.real(psi.conj() @ other @ psi))


def systematic_error_sweep(model, schedule, spec, delta_list, frame=None,
                           basis=None, rtol=1e-9):
    """F(delta_i) for a global amplitude error Omega_k -> (1+delta_i) Omega_k."""
    frame = frame or dynamics.InteractionFrame(model)
    if basis is None:
        basis = _gate_basis(model, spec)
    u_target = codes.target_unitary(spec)
    out = []
    for delta in delta_list:
        u = dynamics.extract_propagator(model, schedule.scaled(1 + delta),
                                        basis, frame=frame, rtol=rtol)
        out.append(average_gate_fidelity(u, u_target).f_bar)
    return np.array(out)


def _gate_basis(model, spec):
    cuts = model.layout.fock_cutoffs
    if spec.is_two_qubit:
        code_a = codes.binomial_codewords(cuts[0])
        code_b = codes.binomial_codewords(cuts[1])
        return dynamics.code_basis_states_two_mode(model, code_a, code_b)
    return dynamics.code_basis_states(model, codes.binomial_codewords(cuts[0]))


def error_sensitivity(aux, lr=None, quad_tol=1e-10):
    """Systematic-error sensitivity q_i = |int e^{i beta + 2i R} dphi/dt sin^2(phi) dt|^2.

    R is the Lewis-Riesenfeld phase of the minus eigenpath.  For the
    sin^3-shaped auxiliary schedule the integral cancels exactly; a bare
    step schedule leaves it of order one.
    """
    from scipy.integrate import quad
    from scipy.interpolate import CubicSpline

    if lr is None:
        lr = pulses.lewis_riesenfeld_phases(aux)
    t_half, t_f = aux.t_f / 2, aux.t_f
    # the LR sample grid is two equal blocks, [0, t_f/2] then [t_f/2, t_f]
    split = lr.ts.size // 2
    halves = [(False, CubicSpline(lr.ts[:split], lr.r_minus[:split])),
              (True, CubicSpline(lr.ts[split:], lr.r_minus[split:]))]

    total = 0.0 + 0.0j
    for second, r_of_t in halves:
        def re_part(t):
            ph = aux.beta(t, second) + 2 * float(r_of_t(t))
            return math.cos(ph) * aux.dphi(t) * math.sin(aux.phi(t)) ** 2

        def im_part(t):
            ph = aux.beta(t, second) + 2 * float(r_of_t(t))
            return math.sin(ph) * aux.dphi(t) * math.sin(aux.phi(t)) ** 2

        a, b = (t_half, t_f) if second else (0.0, t_half)
        for part, unit in ((re_part, 1.0), (im_part, 1.0j)):
            val, err = quad(part, a, b, limit=200, epsabs=quad_tol, epsrel=1e-9)
            if err > 1e-6:
                raise pulses.NumericError(f"q_i quadrature error {err:.2e}")
            total += unit * val
    return float(abs(total) ** 2)


def awgn_monte_carlo(model, schedule, spec, config, frame=None, rtol=1e-9):
    """Gate fidelities under additive white Gaussian amplitude noise.

    Each sample redraws independent noise on every tone-amplitude grid point
    (sigma^2 = mean(Omega_k^2)/r per tone), then recomputes the full
    propagator.  Sample i uses the child seed (seed, i), so the whole list
    is reproducible and order-independent.
    """
    frame = frame or dynamics.InteractionFrame(model)
    basis = _gate_basis(model, spec)
    u_target = codes.target_unitary(spec)
    base = schedule if config.delta_i == 0 else schedule.scaled(1 + config.delta_i)
    fids = []
    for i in range(config.samples):
        rng = np.random.default_rng((config.seed, i))
        noisy = base.with_awgn(config.snr, rng, snr_in_db=config.snr_in_db)
        u = dynamics.extract_propagator(model, noisy, basis, frame=frame, rtol=rtol)
        fids.append(average_gate_fidelity(u, u_target).f_bar)
    fids = np.array(fids)
    return {"fidelities": fids, "mean": float(np.mean(fids)),
            "std": float(np.std(fids, ddof=1)) if fids.size > 1 else 0.0}


def infidelity_map(model, spectrum, spec_grid, t_f, delta_i=0.1, m=2,
                   frame=None, rtol=1e-9):
    """1 - F for each gate spec, clean and with amplitude error delta_i."""
    frame = frame or dynamics.InteractionFrame(model)
    rows = []
    for spec in spec_grid:
        sch = pulses.synthesize_single_qubit(spec, spectrum, t_f=t_f, m=m)
        basis = _gate_basis(model, spec)
        u_target = codes.target_unitary(spec)
        u0 = dynamics.extract_propagator(model, sch, basis, frame=frame, rtol=rtol)
        ud = dynamics.extract_propagator(model, sch.scaled(1 + delta_i), basis,
                                         frame=frame, rtol=rtol)
        rows.append({
            "theta_s": spec.theta_s, "theta": spec.theta, "phi": spec.phi,
            "infidelity_clean": 1 - average_gate_fidelity(u0, u_target).f_bar,
            "infidelity_delta": 1 - average_gate_fidelity(ud, u_target).f_bar,
            "delta_i": delta_i,
        })
    return rows


# ---------------------------------------------------------------------------
# state diagnostics
# ---------------------------------------------------------------------------

def fock_populations(state_or_rho, layout, atom=linalg.MU):
    """P_k = <atom, k| rho |atom, k> over the cavity index."""
    cav = layout.cavity_dim
    x = np.asarray(state_or_rho)
    if x.ndim == 1:
        block = x.reshape(layout.atom_levels, cav)[atom]
        return np.abs(block) ** 2
    block = x.reshape(layout.atom_levels, cav, layout.atom_levels, cav)
    return np.real(np.diagonal(block[atom, :, atom, :]))


def reduced_cavity_rho(state_or_rho, layout):
    """Partial trace over the atom (cavity factor kept whole)."""
    cav = layout.cavity_dim
    x = np.asarray(state_or_rho, dtype=complex)
    if x.ndim == 1:
        blocks = x.reshape(layout.atom_levels, cav)
        return sum(np.outer(b, b.conj()) for b in blocks)
    r = x.reshape(layout.atom_levels, cav, layout.atom_levels, cav)
    return np.einsum("akal->kl", r)


def trace_out_mode(rho_cav, cutoffs, keep=0):
    """Reduce a two-mode cavity density matrix to one mode."""
    ca, cb = cutoffs
    r = np.asarray(rho_cav).reshape(ca, cb, ca, cb)
    return np.einsum("abcb->ac", r) if keep == 0 else np.einsum("abad->bd", r)


def wigner(rho_cav, alpha_re, alpha_im=None, tail_tol=1e-8):
    """Displaced-parity Wigner function W(alpha) = (2/pi) Tr[rho D P D^dag].

    Evaluated through the identity D(a) P D(a)^dag = D(2a) P with exact
    closed-form displacement matrix elements, so the only truncation error
    is the tail of rho itself (a TruncationWarning flags a populated
    boundary).  Returns a real array (rows: Im alpha, cols: Re alpha).
    """
    import warnings

    rho = np.asarray(rho_cav, dtype=complex)
    cutoff = rho.shape[0]
    if alpha_im is None:
        alpha_im = alpha_re
    tail = float(np.sum(np.abs(np.real(np.diag(rho)[-2:]))))
    if tail > tail_tol:
        warnings.warn(
            f"cavity state carries weight {tail:.2e} at the Fock cutoff; "
            "Wigner values are unreliable", linalg.TruncationWarning)
    signs = (-1.0) ** np.arange(cutoff)
    rho_t = rho.T.copy()
    w = np.empty((len(alpha_im), len(alpha_re)))
    for i, ai in enumerate(alpha_im):
        for j, ar in enumerate(alpha_re):
            d2 = _displacement_fast(2 * complex(ar, ai), cutoff)
            # Tr[rho D(2a) P] = sum_{mn} rho_{nm} D_{mn} (-1)^n
            val = np.sum(rho_t * d2 * signs[None, :])
            if abs(val.imag) > 1e-9:
                raise pulses.NumericError(f"Wigner value not real: {val}")
            w[i, j] = (2 / math.pi) * val.real
    return w


def _displacement_fast(alpha, cutoff):
    """D(alpha) from the normal-ordered factorization e^{alpha a^dag} e^{-alpha* a}.

    Both factors are triangular with closed-form entries
    <m|e^{alpha a^dag}|k> = alpha^{m-k} sqrt(m!/k!)/(m-k)!, which beats a
    matrix exponential per grid point.
    """
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, cutoff))]))
    p = np.subtract.outer(np.arange(cutoff), np.arange(cutoff))  # m - k
    tri = p >= 0
    w = np.where(tri, 0.5 * (log_fact[:, None] - log_fact[None, :])
                 - log_fact[np.where(tri, p, 0)], -np.inf)
    mag = np.exp(w)
    lower = np.where(tri, alpha ** np.where(tri, p, 0), 0) * mag
    upper = (np.where(tri, (-np.conj(alpha)) ** np.where(tri, p, 0), 0) * mag).T
    return math.exp(-0.5 * abs(alpha) ** 2) * (lower @ upper)


def wigner_grid(rho_cav, extent=3.0, n=81):
    xs = np.linspace(-extent, extent, n)
    return xs, wigner(rho_cav, xs, xs)


def cat_wigner_analytic(eta, alpha_re, alpha_im):
    """Closed-form Wigner function of the even cat (|eta> + |-eta>)/N, real eta."""
    eta = float(eta)
    norm = 2 * (1 + math.exp(-2 * eta * eta))
    w = np.empty((len(alpha_im), len(alpha_re)))
    for i, y in enumerate(alpha_im):
        for j, x in enumerate(alpha_re):
            a2 = x * x + y * y
            w[i, j] = (2 / math.pi) / norm * (
                math.exp(-2 * ((x - eta) ** 2 + y * y))
                + math.exp(-2 * ((x + eta) ** 2 + y * y))
                + 2 * math.exp(-2 * a2) * math.cos(4 * eta * y))
    return w
