"""Binomial codewords, error-channel checks, bright/dark bases, target gates.

Single-mode code: |1~> = |2>, |0~> = (|0> + |4>)/sqrt(2), supported on even
Fock numbers so that one photon loss maps it onto the disjoint odd-parity
subspace.  Logical basis ordering is (0~, 1~) and, for two modes,
(0~0~, 0~1~, 1~0~, 1~1~).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import DimensionError


@dataclass(frozen=True)
class CodeWords:
    zero: np.ndarray
    one: np.ndarray
    label: str = "binomial"

    @property
    def cutoff(self):
        return self.zero.size

    def projector(self):
        return np.outer(self.zero, self.zero.conj()) + np.outer(self.one, self.one.conj())

    def encode(self, c0, c1):
        return c0 * self.zero + c1 * self.one


@dataclass(frozen=True)
class GateSpec:
    """Holonomic gate angles.

    Single-qubit gates use (theta_s, theta, phi); two-qubit gates use
    (theta_s, theta0, theta1, theta2, phi).
    """

    theta_s: float
    theta: float = None
    phi: float = 0.0
    theta0: float = None
    theta1: float = None
    theta2: float = None

    def __post_init__(self):
        two = self.theta0 is not None or self.theta1 is not None or self.theta2 is not None
        if two and self.theta is not None:
            raise ValueError("give either theta (1q) or theta0/1/2 (2q), not both")
        if two and None in (self.theta0, self.theta1, self.theta2):
            raise ValueError("two-qubit spec needs all of theta0, theta1, theta2")
        if not two and self.theta is None:
            raise ValueError("single-qubit spec needs theta")
        if not -np.pi < self.theta_s <= np.pi:
            raise ValueError(f"Theta_s must lie in (-pi, pi], got {self.theta_s}")

    @property
    def is_two_qubit(self):
        return self.theta is None


def binomial_codewords(cutoff):
    """Embed |0~> = (|0>+|4>)/sqrt2 and |1~> = |2> at the given Fock cutoff."""
    if cutoff < 5:
        raise DimensionError(f"binomial code needs cutoff >= 5, got {cutoff}")
    zero = np.zeros(cutoff, dtype=complex)
    zero[0] = zero[4] = 1 / np.sqrt(2)
    one = np.zeros(cutoff, dtype=complex)
    one[2] = 1.0
    return CodeWords(zero, one)


@dataclass(frozen=True)
class KLReport:
    values: np.ndarray   # 2x2 table <rho~|a^dag a|rho~'>
    passed: bool
    tol: float


def knill_laflamme_check(code, tol=1e-10):
    """Evaluate <rho~|a^dag a|rho~'> for the photon-loss error channel.

    Passes when the two diagonal entries agree and the off-diagonal entries
    vanish, i.e. a photon jump occurs with equal probability on both
    codewords and carries no logical information.
    """
    n_op = linalg.number(code.cutoff)
    words = (code.zero, code.one)
    values = np.array([[np.vdot(w, n_op @ v) for v in words] for w in words])
    passed = (abs(values[0, 0] - values[1, 1]) <= tol
              and abs(values[0, 1]) <= tol and abs(values[1, 0]) <= tol)
    return KLReport(values=values, passed=bool(passed), tol=tol)


def apply_photon_loss(state):
    """Normalized single-photon-loss image a|psi>/||a|psi>||."""
    state = np.asarray(state, dtype=complex)
    lowered = linalg.annihilation(state.size) @ state
    norm = np.linalg.norm(lowered)
    if norm < 1e-12:
        raise ValueError("state has vacuum support only; photon loss annihilates it")
    return lowered / norm


def bright_dark(spec, code):
    """Bright/dark decomposition of the code space for a single-qubit gate.

    |b> = e^{-i phi} sin(theta/2)|0~> + cos(theta/2)|1~> couples to the
    intermediate dressed state; the orthogonal partner
    |d> = e^{-i phi} cos(theta/2)|0~> - sin(theta/2)|1~> stays dark.
    """
    if spec.is_two_qubit:
        raise ValueError("bright_dark needs a single-qubit spec")
    s, c = np.sin(spec.theta / 2), np.cos(spec.theta / 2)
    ph = np.exp(-1j * spec.phi)
    bright = ph * s * code.zero + c * code.one
    dark = ph * c * code.zero - s * code.one
    return bright, dark


def bright_dark_two_qubit(spec, code_a, code_b):
    """Bright state |b'> and its three dark partners on the two-mode code space.

    Vectors live on the mode_a (x) mode_b Fock space; amplitudes follow the
    (theta0, theta1, theta2, phi) parameterization with e^{-i phi} on the
    0~0~ component.
    """
    if not spec.is_two_qubit:
        raise ValueError("bright_dark_two_qubit needs a two-qubit spec")
    basis = _two_qubit_logical_basis(code_a, code_b)
    coeffs = _two_qubit_coefficients(spec)
    return tuple(basis @ row for row in coeffs)


def _two_qubit_logical_basis(code_a, code_b):
    """Columns (0~0~, 0~1~, 1~0~, 1~1~) embedded in the two-mode Fock space."""
    cols = [np.kron(wa, wb)
            for wa in (code_a.zero, code_a.one)
            for wb in (code_b.zero, code_b.one)]
    return np.array(cols).T


def _two_qubit_coefficients(spec):
    """Rows: b', d1, d2, d3 in the logical product basis."""
    c0, s0 = np.cos(spec.theta0 / 2), np.sin(spec.theta0 / 2)
    c1, s1 = np.cos(spec.theta1 / 2), np.sin(spec.theta1 / 2)
    c2, s2 = np.cos(spec.theta2 / 2), np.sin(spec.theta2 / 2)
    ph = np.exp(-1j * spec.phi)
    b = np.array([ph * c0 * c1, c0 * s1, s0 * c2, s0 * s2])
    d1 = np.array([ph * s0 * c1, s0 * s1, -c0 * c2, -c0 * s2])
    d2 = np.array([ph * c0 * s1, -c0 * c1, s0 * s2, -s0 * c2])
    d3 = np.array([ph * s0 * s1, -s0 * c1, -c0 * s2, c0 * c2])
    return np.array([b, d1, d2, d3])


def target_unitary(spec):
    """Ideal holonomic gate in the logical basis.

    Single-qubit (basis 0~, 1~):

        [[cos(Ts) + i sin(Ts)cos(th),   i sin(Ts)sin(th) e^{+i phi}],
         [i sin(Ts)sin(th) e^{-i phi},  cos(Ts) - i sin(Ts)cos(th)]]

    Two-qubit: diag(e^{2i Ts}, 1, 1, 1) in the (b', d1, d2, d3) basis,
    rotated to the logical product basis.
    """
    ts = spec.theta_s
    if not spec.is_two_qubit:
        th, ph = spec.theta, spec.phi
        return np.array([
            [np.cos(ts) + 1j * np.sin(ts) * np.cos(th),
             1j * np.sin(ts) * np.sin(th) * np.exp(1j * ph)],
            [1j * np.sin(ts) * np.sin(th) * np.exp(-1j * ph),
             np.cos(ts) - 1j * np.sin(ts) * np.cos(th)]])
    v = _two_qubit_coefficients(spec).T        # columns b', d1..d3 in logical basis
    phases = np.diag([np.exp(2j * ts), 1.0, 1.0, 1.0]).astype(complex)
    return v @ phases @ v.conj().T
