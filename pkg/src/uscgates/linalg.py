"""Dense complex linear algebra and operator construction.

All operators are plain complex numpy arrays; states are 1-D complex
arrays.  Frequencies are angular, in rad/ns, with hbar = 1 (so an
omega_c/2pi = 6.25 GHz cavity is omega_c = 2*pi*6.25 rad/ns).  System
dimensions stay below ~600, so everything is dense.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

HERMITICITY_TOL = 1e-10

# atom level ordering, fixed everywhere
MU, G, E = 0, 1, 2


class DimensionError(ValueError):
    """Operator or state built with an invalid dimension."""


class HermiticityError(ValueError):
    """A matrix that must be Hermitian is not."""


class TruncationWarning(UserWarning):
    """Fock truncation too small for the requested operation."""


def annihilation(cutoff):
    """Cavity annihilation operator a with <n-1|a|n> = sqrt(n)."""
    if cutoff < 2:
        raise DimensionError(f"annihilation needs cutoff >= 2, got {cutoff}")
    a = np.zeros((cutoff, cutoff), dtype=complex)
    n = np.arange(1, cutoff)
    a[n - 1, n] = np.sqrt(n)
    return a


def creation(cutoff):
    return annihilation(cutoff).conj().T


def number(cutoff):
    return np.diag(np.arange(cutoff).astype(complex))


def identity(dim):
    return np.eye(dim, dtype=complex)


def kron(*ops):
    """Kronecker product of one or more operators, left to right."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def hermiticity_defect(h):
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T)))


def require_hermitian(h, tol=HERMITICITY_TOL, what="matrix"):
    defect = hermiticity_defect(h)
    if defect > tol:
        raise HermiticityError(f"{what} is not Hermitian: max|H - H^dag| = {defect:.3e}")


def eigh_gauged(h, tol=HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix with a fixed eigenvector gauge.

    Eigenvalues ascend; each eigenvector is rescaled by a phase so that its
    largest-magnitude component is real and positive.  This makes dressed-state
    coefficient tables reproducible across runs and platforms.
    """
    h = np.asarray(h, dtype=complex)
    require_hermitian(h, tol)
    vals, vecs = np.linalg.eigh(h)
    for j in range(vecs.shape[1]):
        k = int(np.argmax(np.abs(vecs[:, j])))
        pivot = vecs[k, j]
        vecs[:, j] *= np.abs(pivot) / pivot
    # scrub negligible imaginary residue left by the phase fix on real input
    if np.max(np.abs(vecs.imag)) < 1e-13:
        vecs = vecs.real.astype(complex)
    return vals, vecs


def displacement(alpha, cutoff, unitarity_tol=1e-6):
    """Displacement operator D(alpha) = exp(alpha a^dag - alpha* a).

    Warns if the truncation is too small for the displaced vacuum to fit
    (rule of thumb: |alpha|^2 << cutoff).  The truncated exponential itself
    is always unitary, so the check uses the exact coherent column norm
    ||P_cutoff D|0>||^2 = e^{-|a|^2} sum_{m<cutoff} |a|^{2m}/m!.
    """
    a = annihilation(cutoff)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    x = abs(alpha) ** 2
    term, total = 1.0, 1.0
    for m in range(1, cutoff):
        term *= x / m
        total += term
    captured = np.exp(-x) * total
    if np.sqrt(captured) < 1 - unitarity_tol:
        warnings.warn(
            f"displacement(alpha={alpha}) loses norm "
            f"{1 - np.sqrt(captured):.2e} at cutoff {cutoff}",
            TruncationWarning,
        )
    return d


def basis_state(dim, index):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalized(v):
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


@dataclass(frozen=True)
class HilbertLayout:
    """Tensor layout: atom (mu=0, g=1, e=2) x mode a x (mode b if present)."""

    fock_cutoffs: tuple
    atom_levels: int = 3
    total_dim: int = field(init=False)

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.fock_cutoffs)
        if any(c < 2 for c in cuts):
            raise DimensionError(f"Fock cutoffs must be >= 2, got {cuts}")
        if len(cuts) not in (1, 2):
            raise DimensionError("only one or two cavity modes are supported")
        object.__setattr__(self, "fock_cutoffs", cuts)
        dim = self.atom_levels
        for c in cuts:
            dim *= c
        object.__setattr__(self, "total_dim", dim)

    @property
    def n_modes(self):
        return len(self.fock_cutoffs)

    @property
    def cavity_dim(self):
        return self.total_dim // self.atom_levels

    def atom_op(self, op3):
        """Embed a 3x3 atomic operator into the full space."""
        return kron(op3, identity(self.cavity_dim))

    def mode_op(self, op, mode=0):
        """Embed a single-mode cavity operator into the full space."""
        if mode >= self.n_modes:
            raise DimensionError(f"mode {mode} out of range for {self.n_modes} modes")
        factors = [identity(self.atom_levels)]
        for i, c in enumerate(self.fock_cutoffs):
            factors.append(op if i == mode else identity(c))
        return kron(*factors)

    def cavity_op(self, op_cavity):
        """Embed an operator acting on the full cavity factor."""
        return kron(identity(self.atom_levels), op_cavity)

    def ket(self, atom, *fock):
        """Product basis state |atom>|n_a>(|n_b>)."""
        if len(fock) != self.n_modes:
            raise DimensionError("one Fock index per mode required")
        idx = atom
        for n, c in zip(fock, self.fock_cutoffs):
            if not 0 <= n < c:
                raise DimensionError(f"Fock index {n} outside cutoff {c}")
            idx = idx * c + n
        return basis_state(self.total_dim, idx)

    def atom_population(self, state, atom):
        """Total population of one atomic level in a pure state."""
        psi = np.asarray(state).reshape(self.atom_levels, self.cavity_dim)
        return float(np.sum(np.abs(psi[atom]) ** 2))


# 3x3 atomic operators in the (mu, g, e) ordering
def sigma_gx():
    s = np.zeros((3, 3), dtype=complex)
    s[E, G] = s[G, E] = 1.0
    return s


def sigma_gz():
    return np.diag([0.0, -1.0, 1.0]).astype(complex)


def sigma_mux():
    s = np.zeros((3, 3), dtype=complex)
    s[MU, G] = s[G, MU] = 1.0
    return s


def sigma_muz():
    return np.diag([-1.0, 1.0, 0.0]).astype(complex)


def mu_projector():
    return np.diag([1.0, 0.0, 0.0]).astype(complex)
