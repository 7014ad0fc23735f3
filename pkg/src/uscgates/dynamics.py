"""Time evolution: full lab-frame Schrodinger, reduced effective model, and
the dressed-basis Lindblad master equation.

Lab-frame propagation is carried out in the interaction picture of H_0
(diagonalized once), which removes the static phases and leaves the
composite drive Omega(t) * exp(i H_0 t) V exp(-i H_0 t) as the only
generator.  The returned `propagator` / rotating-frame states are therefore
directly comparable with the rotating-frame target gates.

The master equation uses jump operators built in the H_0 eigenbasis.  In
the interaction picture the dissipator becomes time independent and purely
structural: pure dephasing and downward jumps act elementwise on the
density matrix plus a classical gain term on the diagonal, which keeps the
dense integration cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import linalg, rabi


class RangeError(ValueError):
    """Time outside the schedule window."""


class StiffFailureError(RuntimeError):
    """The adaptive integrator failed to advance."""


class IntegratorAccuracyError(RuntimeError):
    """Norm, trace, or positivity drift beyond the contract."""


NORM_DRIFT_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-7
POSITIVITY_TOL = 1e-6


@dataclass(frozen=True)
class DecoherenceRates:
    """Bare decay/dephasing rates (rad/ns): cavity decay kappa, cavity
    dephasing kappa_phi, atomic relaxations gamma_g (e->g), gamma_mu (g->mu)
    and the corresponding dephasings."""

    kappa: float = 0.0
    kappa_phi: float = 0.0
    gamma_g: float = 0.0
    gamma_mu: float = 0.0
    gamma_g_phi: float = 0.0
    gamma_mu_phi: float = 0.0

    def __post_init__(self):
        if any(r < 0 for r in self.as_tuple()):
            raise ValueError("decoherence rates must be non-negative")

    def as_tuple(self):
        return (self.kappa, self.kappa_phi, self.gamma_g, self.gamma_mu,
                self.gamma_g_phi, self.gamma_mu_phi)

    @classmethod
    def from_khz(cls, kappa, kappa_phi, gamma_g, gamma_mu, gamma_g_phi, gamma_mu_phi):
        """Rates given as nu/2pi in kHz."""
        f = 2 * np.pi * 1e-6
        return cls(kappa * f, kappa_phi * f, gamma_g * f, gamma_mu * f,
                   gamma_g_phi * f, gamma_mu_phi * f)


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: np.ndarray = None          # rotating-frame states, (n_t, dim)
    final_state: np.ndarray = None     # rotating frame
    final_state_lab: np.ndarray = None
    rho_final: np.ndarray = None       # rotating frame, eigenbasis
    propagator: np.ndarray = None
    diagnostics: dict = field(default_factory=dict)


def h_total_at(model, schedule, t):
    """Lab-frame H_tot(t) = H_0 + Omega(t)(|mu><g| + |g><mu|) (x) 1_cav."""
    if not 0.0 <= t <= schedule.t_f:
        raise RangeError(f"t = {t} outside the schedule window [0, {schedule.t_f}]")
    h = rabi.build_h0(model)
    v = model.layout.atom_op(linalg.sigma_mux())
    return h + schedule.drive(t) * v


class InteractionFrame:
    """Eigenbasis of H_0 plus the drive operator expressed there."""

    def __init__(self, model, n_keep=None):
        self.model = model
        h0 = rabi.build_h0(model)
        xi, w = linalg.eigh_gauged(h0)
        if n_keep is not None and n_keep < xi.size:
            xi, w = xi[:n_keep], w[:, :n_keep]
        self.xi = xi
        self.w = w
        v_full = model.layout.atom_op(linalg.sigma_mux())
        self.v = w.conj().T @ v_full @ w

    @property
    def dim(self):
        return self.xi.size

    def to_eigen(self, state):
        return self.w.conj().T @ state

    def from_eigen(self, coeffs):
        return self.w @ coeffs

    def captured_weight(self, state):
        return float(np.linalg.norm(self.to_eigen(state)) ** 2)


def _segments(schedule):
    if schedule.split_time is None:
        return [(0.0, schedule.t_f)]
    return [(0.0, schedule.split_time), (schedule.split_time, schedule.t_f)]


def _solve_piecewise(rhs, segments, y0, t_eval, rtol, atol):
    """Integrate across segments (split at drive discontinuities); collect
    requested sample points and return the final state at the last endpoint."""
    ys, ts_out = [], []
    y = np.asarray(y0, dtype=complex)
    n_fev = 0
    for i, (a, b) in enumerate(segments):
        seg_eval = np.array([b])
        keep = 0
        if t_eval is not None:
            last = i == len(segments) - 1
            mask = (t_eval >= a) & ((t_eval <= b) if last else (t_eval < b))
            pts = t_eval[mask]
            keep = pts.size
            seg_eval = pts if (keep and pts[-1] == b) else np.append(pts, b)
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol, atol=atol,
                        t_eval=seg_eval, dense_output=False)
        if not sol.success:
            raise StiffFailureError(f"integration failed on [{a}, {b}]: {sol.message}")
        n_fev += sol.nfev
        y = sol.y[:, -1]
        if keep:
            ts_out.append(sol.t[:keep])
            ys.append(sol.y[:, :keep])
    return y, (np.concatenate(ts_out) if ts_out else None,
               np.concatenate(ys, axis=1) if ys else None), n_fev


def propagate_schrodinger(model, schedule, psi0, rtol=1e-9, atol=1e-12,
                          n_samples=0, frame=None):
    """Propagate i dpsi/dt = H_tot(t) psi across the schedule.

    Returns rotating-frame (interaction-picture) states, the lab-frame final
    state, and integrator diagnostics.  Norm drift beyond 1e-8 raises.
    """
    frame = frame or InteractionFrame(model)
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state must be normalized")
    y0 = frame.to_eigen(psi0)
    drive = schedule.drive_factory()
    xi = frame.xi
    v = frame.v

    def rhs(t, y):
        ph = np.exp(-1j * xi * t)
        w = v @ (ph * y)
        return (-1j * drive(t)) * (np.conj(ph) * w)

    t_eval = np.linspace(0.0, schedule.t_f, n_samples) if n_samples else None
    y_final, (ts, ys), n_steps = _solve_piecewise(
        rhs, _segments(schedule), y0, t_eval, rtol, atol)

    drift = abs(np.linalg.norm(y_final) - np.linalg.norm(y0))
    if drift > NORM_DRIFT_TOL:
        raise IntegratorAccuracyError(f"norm drift {drift:.2e} exceeds {NORM_DRIFT_TOL}")

    t_f = schedule.t_f
    psi_rot = frame.from_eigen(y_final)
    psi_lab = frame.from_eigen(np.exp(-1j * xi * t_f) * y_final)
    states = None
    if ys is not None:
        states = (frame.w @ ys).T
    return EvolutionResult(
        times=ts if ts is not None else np.array([t_f]),
        states=states, final_state=psi_rot, final_state_lab=psi_lab,
        diagnostics={"norm_drift": drift, "n_steps": n_steps, "rtol": rtol})


def extract_propagator(model, schedule, basis, rtol=1e-9, atol=1e-12, frame=None):
    """Rotating-frame propagator matrix U[i, j] = <basis_i|U|basis_j>.

    The basis columns are propagated together under the full Hamiltonian.
    """
    frame = frame or InteractionFrame(model)
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2:
        raise ValueError("basis must be a matrix of column vectors")
    gram = basis.conj().T @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[1]))) > 1e-9:
        raise ValueError("propagator basis must be orthonormal")
    y0 = frame.to_eigen(basis)
    drive = schedule.drive_factory()
    xi = frame.xi
    v = frame.v
    ncol = basis.shape[1]

    def rhs(t, y):
        yy = y.reshape(frame.dim, ncol)
        ph = np.exp(-1j * xi * t)
        w = v @ (ph[:, None] * yy)
        return ((-1j * drive(t)) * (np.conj(ph)[:, None] * w)).ravel()

    y_final, _, n_steps = _solve_piecewise(
        rhs, _segments(schedule), y0.ravel(), None, rtol, atol)
    cols = y_final.reshape(frame.dim, ncol)
    drift = float(np.max(np.abs(np.linalg.norm(cols, axis=0) - 1.0)))
    if drift > NORM_DRIFT_TOL:
        raise IntegratorAccuracyError(f"norm drift {drift:.2e} exceeds {NORM_DRIFT_TOL}")
    u = basis.conj().T @ frame.w @ cols
    return u


def propagate_effective(spectrum, schedule, psi0, rtol=1e-10, atol=1e-13,
                        n_samples=201):
    """Evolve in the reduced basis {|mu,k> for scheduled k} + {|zeta_m>}.

    H_eff(t) = (1/2) sum_k c_k Omega_k(t) e^{i phi_k(t)} |mu,k><zeta_m| + h.c.

    psi0 is given in the reduced basis (length n_tones + 1, zeta last).
    """
    tones = schedule.tones
    n = len(tones)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.size != n + 1:
        raise ValueError(f"reduced state needs {n + 1} amplitudes")
    amps = [t.amplitude for t in tones]
    phases = [t.phase for t in tones]
    cks = np.array([t.c_coeff for t in tones])

    def rhs(t, y):
        g = 0.5 * cks * np.array([a(t) for a in amps]) * np.exp(
            1j * np.array([p(t) for p in phases]))
        dy = np.empty_like(y)
        dy[:n] = -1j * g * y[n]
        dy[n] = -1j * np.vdot(g, y[:n])
        return dy

    t_eval = np.linspace(0.0, schedule.t_f, n_samples) if n_samples else None
    y_final, (ts, ys), n_steps = _solve_piecewise(
        rhs, _segments(schedule), psi0, t_eval, rtol, atol)
    drift = abs(np.linalg.norm(y_final) - np.linalg.norm(psi0))
    if drift > NORM_DRIFT_TOL:
        raise IntegratorAccuracyError(f"norm drift {drift:.2e}")
    return EvolutionResult(
        times=ts if ts is not None else np.array([schedule.t_f]),
        states=ys.T if ys is not None else None,
        final_state=y_final,
        diagnostics={"norm_drift": drift, "n_steps": n_steps})


def reduced_basis_state(schedule, cavity_state):
    """Project a cavity-space state (atom in mu) onto the reduced basis."""
    ks = [t.k for t in schedule.tones]
    psi = np.zeros(len(ks) + 1, dtype=complex)
    for i, k in enumerate(ks):
        psi[i] = cavity_state[k]
    return psi


def reduced_to_cavity(schedule, psi_reduced, cutoff):
    v = np.zeros(cutoff, dtype=complex)
    for i, tone in enumerate(schedule.tones):
        v[tone.k] = psi_reduced[i]
    return v


# ---------------------------------------------------------------------------
# Lindblad machinery
# ---------------------------------------------------------------------------

@dataclass
class LindbladSet:
    """Eigenbasis dissipator data.

    mask[j, j'] multiplies rho_{jj'} (dephasing + jump loss); gain[j', j]
    feeds population from j into j' (strictly downward).  `collapse_diags`
    and `jump_pairs` retain the raw operators for identity tests.
    """

    frame: InteractionFrame
    mask: np.ndarray
    gain: np.ndarray
    collapse_diags: list
    jump_pairs: list                   # (j, j', total rate)

    def apply(self, rho):
        out = self.mask * rho
        out[np.diag_indices_from(out)] += self.gain @ np.real(np.diag(rho))
        return out


def lindblad_rates(model, rates, frame=None, n_keep=None):
    """Build the dressed-basis dissipator of the standard hybrid-system
    master equation.

    Pure dephasing: one collapse operator per channel,
    sum_j sqrt(Lambda_nu^{jj}) |E_j><E_j| with Lambda from |<E_j|X|E_j>|^2.
    Relaxation: downward jumps sqrt(Gamma_nu'^{jj'}) |E_j'><E_j| (j > j')
    with Gamma from |<E_j'|X|E_j>|^2, X running over
    {a^dag a, a + a^dag, sigma_g^x, sigma_mu^x, sigma_g^z, sigma_mu^z}.
    """
    if frame is None:
        frame = InteractionFrame(model, n_keep=n_keep)
    lay = model.layout
    w = frame.w

    def eig_op(full_op):
        return w.conj().T @ full_op @ w

    adag_a = sum(lay.mode_op(linalg.number(c), i) for i, c in enumerate(lay.fock_cutoffs))
    x_cav = sum(lay.mode_op(linalg.annihilation(c) + linalg.creation(c), i)
                for i, c in enumerate(lay.fock_cutoffs))
    ops_deph = [(rates.kappa_phi, eig_op(adag_a)),
                (rates.kappa, eig_op(x_cav)),
                (rates.gamma_g_phi, eig_op(lay.atom_op(linalg.sigma_gz()))),
                (rates.gamma_mu_phi, eig_op(lay.atom_op(linalg.sigma_muz())))]
    ops_jump = [(rates.kappa_phi, ops_deph[0][1]),
                (rates.kappa, ops_deph[1][1]),
                (rates.gamma_g, eig_op(lay.atom_op(linalg.sigma_gx()))),
                (rates.gamma_mu, eig_op(lay.atom_op(linalg.sigma_mux()))),
                (rates.gamma_g_phi, ops_deph[2][1]),
                (rates.gamma_mu_phi, ops_deph[3][1])]

    d = frame.dim
    collapse_diags = []
    mask = np.zeros((d, d))
    for rate, op in ops_deph:
        c = np.sqrt(rate) * np.abs(np.diag(op))
        collapse_diags.append(c)
        mask += -0.5 * (c[:, None] - c[None, :]) ** 2

    gain = np.zeros((d, d))
    for rate, op in ops_jump:
        if rate == 0.0:
            continue
        gamma = rate * np.abs(op) ** 2        # gamma[j', j] = Gamma_{nu'}^{j j'}
        gain += np.triu(gamma, k=1)           # strictly downward: j > j' only
    loss = gain.sum(axis=0)                   # total out-rate of each j
    mask += -0.5 * (loss[:, None] + loss[None, :])
    jump_pairs = [(j, jp, gain[jp, j])
                  for j in range(d) for jp in range(j) if gain[jp, j] > 0]
    return LindbladSet(frame=frame, mask=mask, gain=gain,
                       collapse_diags=collapse_diags, jump_pairs=jump_pairs)


def propagate_master(model, schedule, rho0, rates, n_keep=40, rtol=1e-8,
                     atol=1e-11, n_samples=41, frame=None, lindblad=None):
    """Integrate the dressed-basis master equation in the interaction picture.

    rho0 may be a full-space pure state vector or a full-space density
    matrix; it is projected onto the lowest-n_keep eigenbasis of H_0.
    Returned rho_final lives in that (rotating) eigenbasis.
    """
    if lindblad is not None:
        frame = lindblad.frame
    elif frame is None:
        frame = InteractionFrame(model, n_keep=n_keep)
    if lindblad is None:
        lindblad = lindblad_rates(model, rates, frame=frame)
    d = frame.dim

    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        captured = frame.captured_weight(rho0)
        c = frame.to_eigen(rho0)
        rho = np.outer(c, c.conj())
    else:
        rho = frame.w.conj().T @ rho0 @ frame.w
        captured = float(np.real(np.trace(rho)))
    if captured < 1 - 1e-6:
        raise ValueError(f"initial state loses weight {1 - captured:.2e} "
                         "under the eigenbasis truncation")

    drive = schedule.drive_factory()
    xi = frame.xi
    v = frame.v
    mask = lindblad.mask
    gain = lindblad.gain
    diag_idx = np.diag_indices(d)

    def rhs(t, y):
        rho = y.reshape(d, d)
        ph = np.exp(1j * xi * t)
        vt = (ph[:, None] * v) * np.conj(ph)[None, :]
        out = (-1j * drive(t)) * (vt @ rho - rho @ vt)
        out += mask * rho
        out[diag_idx] += gain @ np.real(np.diag(rho))
        return out.ravel()

    t_eval = np.linspace(0.0, schedule.t_f, n_samples) if n_samples else None
    y_final, (ts, ys), n_steps = _solve_piecewise(
        rhs, _segments(schedule), rho.ravel(), t_eval, rtol, atol)
    rho_final = y_final.reshape(d, d)
    rho_final = 0.5 * (rho_final + rho_final.conj().T)

    trace_drift = abs(np.real(np.trace(rho_final)) - captured)
    if trace_drift > TRACE_DRIFT_TOL:
        raise IntegratorAccuracyError(f"trace drift {trace_drift:.2e}")
    min_eig = float(np.linalg.eigvalsh(rho_final)[0])
    if min_eig < -POSITIVITY_TOL:
        raise IntegratorAccuracyError(f"negativity {min_eig:.2e} beyond tolerance")

    states = ys.T.reshape(-1, d, d) if ys is not None else None
    return EvolutionResult(
        times=ts if ts is not None else np.array([schedule.t_f]),
        states=states, rho_final=rho_final,
        diagnostics={"trace_drift": trace_drift, "min_eigenvalue": min_eig,
                     "n_steps": n_steps, "captured_weight": captured})


def dissipator(op, rho):
    """D[O] rho = O rho O^dag - (O^dag O rho + rho O^dag O)/2."""
    od = op.conj().T
    odo = od @ op
    return op @ rho @ od - 0.5 * (odo @ rho + rho @ odo)


def code_basis_states(model, code):
    """|mu> (x) codeword vectors in the full lab space, as columns."""
    lay = model.layout
    cols = []
    for word in (code.zero, code.one):
        v = np.zeros(lay.total_dim, dtype=complex)
        v[:lay.cavity_dim] = word          # atom index 0 = mu block comes first
        cols.append(v)
    return np.array(cols).T


def code_basis_states_two_mode(model, code_a, code_b):
    lay = model.layout
    cols = []
    for wa in (code_a.zero, code_a.one):
        for wb in (code_b.zero, code_b.one):
            v = np.zeros(lay.total_dim, dtype=complex)
            v[:lay.cavity_dim] = np.kron(wa, wb)
            cols.append(v)
    return np.array(cols).T
