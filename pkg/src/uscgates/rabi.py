"""Quantum Rabi model with a third (spectator) atomic level.

Single-mode Hamiltonian:

    H_R = omega_c a^dag a + (omega_q/2) sigma_g^z + g (a + a^dag) sigma_g^x
    H_0 = H_R + omega_mu |mu><mu|

The bimodal variant carries (omega_a, omega_b) and (g_a, g_b) with both
modes coupled through the same sigma_g^x.  The |mu> level never couples
to the cavity, so every H_0 eigenstate is either a product |mu>|n> or an
atom-cavity dressed state |zeta_m> living in the (g, e) block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import MU, DimensionError, HilbertLayout


class ClassificationError(RuntimeError):
    """An H_0 eigenstate could not be assigned to the mu or dressed sector."""


class ConfigurationError(ValueError):
    """Inconsistent model / drive configuration."""


MU_POPULATION_TOL = 1e-8


@dataclass(frozen=True)
class RabiModel:
    """Atom-cavity model parameters (angular frequencies, rad/ns)."""

    omega_c: tuple          # one entry per mode
    omega_q: float
    g: tuple                # coupling per mode
    omega_mu: float
    layout: HilbertLayout

    def __post_init__(self):
        oc = tuple(float(w) for w in np.atleast_1d(self.omega_c))
        gs = tuple(float(x) for x in np.atleast_1d(self.g))
        object.__setattr__(self, "omega_c", oc)
        object.__setattr__(self, "g", gs)
        if len(oc) != self.layout.n_modes or len(gs) != self.layout.n_modes:
            raise DimensionError("one omega_c and one g per cavity mode required")
        if any(w <= 0 for w in oc) or self.omega_q <= 0:
            raise ConfigurationError("cavity and qubit frequencies must be positive")
        if any(x < 0 for x in gs):
            raise ConfigurationError("coupling strengths must be non-negative")

    @classmethod
    def single_mode(cls, omega_c, omega_q, g, omega_mu=0.0, cutoff=20):
        return cls((omega_c,), omega_q, (g,), omega_mu, HilbertLayout((cutoff,)))

    @classmethod
    def bimodal(cls, omega_a, omega_b, omega_q, g_a, g_b, omega_mu=0.0, cutoff=10):
        return cls((omega_a, omega_b), omega_q, (g_a, g_b), omega_mu,
                   HilbertLayout((cutoff, cutoff)))

    def with_omega_mu(self, omega_mu):
        return RabiModel(self.omega_c, self.omega_q, self.g, float(omega_mu), self.layout)

    def omega_mu_is_pinned(self, spectrum, m, k_max, tol=1e-9):
        """Whether omega_mu follows the E_m - (k_max + 0.25) omega_c rule.

        Freely constructed models are allowed, but schedules assume the
        pinned value; callers may warn on a mismatch.
        """
        if self.layout.n_modes == 1:
            target = choose_omega_mu(spectrum, m, k_max)
        else:
            target = choose_omega_mu_bimodal(spectrum, m, k_max, k_max)
        return abs(self.omega_mu - target) <= tol * max(1.0, abs(target))


def build_h0(model):
    """Assemble H_0 = H_R + omega_mu |mu><mu| on the full tensor space."""
    lay = model.layout
    h = 0.5 * model.omega_q * lay.atom_op(linalg.sigma_gz())
    h = h + model.omega_mu * lay.atom_op(linalg.mu_projector())
    sx = lay.atom_op(linalg.sigma_gx())
    for mode in range(lay.n_modes):
        a = linalg.annihilation(lay.fock_cutoffs[mode])
        x = lay.mode_op(a + a.conj().T, mode)
        h = h + model.omega_c[mode] * lay.mode_op(a.conj().T @ a, mode)
        h = h + model.g[mode] * (x @ sx)
    linalg.require_hermitian(h, what="H_0")
    return h


@dataclass
class DressedSpectrum:
    """Eigendata of H_0 split into dressed and noninteracting-mu sectors.

    energies[m] and states[:, m] cover the dressed sector only, ascending.
    c[m] / d[m] are the Fock-amplitude tables <g, n|zeta_m> and <e, n|zeta_m>
    (shape: fock cutoffs, one axis per mode).  all_energies / all_states hold
    the complete eigenbasis of H_0 with sector labels, for open-system work.
    """

    model: RabiModel
    energies: np.ndarray
    states: np.ndarray
    c: np.ndarray
    d: np.ndarray
    all_energies: np.ndarray
    all_states: np.ndarray
    sectors: list = field(default_factory=list)

    def coefficient(self, m, *fock):
        return self.c[(m,) + fock]

    def mu_state_index(self, *fock):
        """Index (within the full eigenbasis) of the |mu>|n...> eigenstate."""
        lay = self.model.layout
        target = lay.ket(MU, *fock)
        overlaps = np.abs(self.all_states.conj().T @ target)
        j = int(np.argmax(overlaps))
        if overlaps[j] < 1 - 1e-6:
            raise ClassificationError(f"no clean |mu>{fock} eigenstate found")
        return j


def dressed_spectrum(model):
    """Diagonalize H_0 and classify eigenstates by mu-level population."""
    lay = model.layout
    vals, vecs = linalg.eigh_gauged(build_h0(model))
    cav = lay.cavity_dim
    dressed_idx, sectors = [], []
    for j in range(lay.total_dim):
        pmu = float(np.sum(np.abs(vecs[:cav, j]) ** 2))
        if pmu >= 1 - MU_POPULATION_TOL:
            sectors.append("noninteracting-mu")
        elif pmu <= MU_POPULATION_TOL:
            sectors.append("dressed")
            dressed_idx.append(j)
        else:
            raise ClassificationError(
                f"eigenstate {j} has ambiguous mu population {pmu:.3e}")
    dressed_idx = np.array(dressed_idx, dtype=int)
    states = vecs[:, dressed_idx]
    shape = (len(dressed_idx),) + lay.fock_cutoffs
    blocks = states.T.reshape(len(dressed_idx), lay.atom_levels, *lay.fock_cutoffs)
    c = np.ascontiguousarray(blocks[:, 1])   # <g, n | zeta_m>
    d = np.ascontiguousarray(blocks[:, 2])   # <e, n | zeta_m>
    return DressedSpectrum(
        model=model,
        energies=vals[dressed_idx].copy(),
        states=states,
        c=c.reshape(shape),
        d=d.reshape(shape),
        all_energies=vals,
        all_states=vecs,
        sectors=sectors,
    )


def choose_omega_mu(spectrum, m, k_max, omega_c=None):
    """omega_mu = E_m - (k_max + 0.25) omega_c, putting zeta_m on top of the
    evolution subspace ladder."""
    if omega_c is None:
        omega_c = spectrum.model.omega_c[0]
    return float(spectrum.energies[m] - (k_max + 0.25) * omega_c)


def choose_omega_mu_bimodal(spectrum, m, k_max_a, k_max_b, omega_a=None, omega_b=None):
    if omega_a is None:
        omega_a, omega_b = spectrum.model.omega_c
    return float(spectrum.energies[m]
                 - k_max_a * omega_a - k_max_b * omega_b - 0.25 * omega_a)


def drive_frequencies(spectrum, m, ks, omega_mu, omega_c=None):
    """Tone frequencies omega_k = E_m - omega_mu - k omega_c (single mode) or
    omega_{ka,kb} = E_m - omega_mu - ka omega_a - kb omega_b (bimodal)."""
    model = spectrum.model
    e_m = spectrum.energies[m]
    out = []
    for k in ks:
        if model.layout.n_modes == 1:
            oc = model.omega_c[0] if omega_c is None else omega_c
            w = e_m - omega_mu - k * oc
        else:
            ka, kb = k
            w = e_m - omega_mu - ka * model.omega_c[0] - kb * model.omega_c[1]
        if w <= 0:
            raise ConfigurationError(f"tone k={k} has nonpositive frequency {w:.4f}")
        out.append(w)
    return np.array(out)


@dataclass
class SpectrumSweep:
    g_values: np.ndarray
    energies: np.ndarray        # (n_levels, n_g), tracked by eigenvector overlap
    coefficients: np.ndarray    # (n_levels, n_fock, n_g) dressed c_n^m tables
    orderings: np.ndarray       # (n_levels, n_g) energy-order index per column


def spectrum_sweep(model_template, g_values, n_levels=8, n_candidates=None):
    """Diagonalize the single-mode model along a coupling sweep.

    Levels are tracked between adjacent g values by maximum eigenvector
    overlap (linear-sum assignment over a candidate window), so the track
    of each level is a bijection column to column.  Only the dressed
    sector is swept; omega_mu plays no role there.
    """
    from scipy.optimize import linear_sum_assignment

    g_values = np.asarray(g_values, dtype=float)
    if np.any(np.diff(g_values) < 0):
        raise ConfigurationError("g_values must be ascending")
    cutoff = model_template.layout.fock_cutoffs[0]
    if n_candidates is None:
        n_candidates = min(n_levels + 4, 2 * cutoff)
    energies = np.empty((n_levels, g_values.size))
    coeffs = np.empty((n_levels, cutoff, g_values.size))
    orders = np.empty((n_levels, g_values.size), dtype=int)

    tracked = None
    for i, g in enumerate(g_values):
        model = RabiModel(model_template.omega_c, model_template.omega_q,
                          (g,), model_template.omega_mu, model_template.layout)
        spec = dressed_spectrum(model)
        if tracked is None:
            sel = np.arange(n_levels)
        else:
            cand = spec.states[:, :n_candidates]
            overlap = np.abs(tracked.conj().T @ cand)
            row, col = linear_sum_assignment(-overlap)
            sel = np.empty(n_levels, dtype=int)
            sel[row] = col
        tracked = spec.states[:, sel]
        energies[:, i] = spec.energies[sel]
        coeffs[:, :, i] = spec.c[sel].real
        orders[:, i] = sel
    return SpectrumSweep(g_values, energies, coeffs, orders)


def locate_coefficient_jump(model_template, g_values, level=2, fock=0):
    """Coupling value where |c_fock| of the energy-ordered dressed level
    changes fastest.

    The energy-ordered label swaps character across an avoided crossing, so
    the Fock amplitude jumps from ~0 to a finite value there; the maximum
    finite-difference rate localizes the crossing.
    """
    g_values = np.asarray(g_values, dtype=float)
    c = np.empty(g_values.size)
    for i, g in enumerate(g_values):
        model = RabiModel(model_template.omega_c, model_template.omega_q,
                          (g,), model_template.omega_mu, model_template.layout)
        spec = dressed_spectrum(model)
        c[i] = abs(spec.c[level][fock])
    rate = np.abs(np.diff(c)) / np.diff(g_values)
    i = int(np.argmax(rate))
    return 0.5 * (g_values[i] + g_values[i + 1])


def anharmonicity(spectrum, m):
    """|Delta E_{m,m+1} - Delta E_{m+1,m+2}| of the dressed ladder."""
    e = spectrum.energies
    return float(abs((e[m + 1] - e[m]) - (e[m + 2] - e[m + 1])))
