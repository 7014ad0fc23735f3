import numpy as np
import pytest

from uscgates import linalg


def test_annihilation_cutoff2():
    assert np.array_equal(linalg.annihilation(2), [[0, 1], [0, 0]])


def test_annihilation_sqrt2_entry():
    a = linalg.annihilation(3)
    assert a[1, 2] == pytest.approx(np.sqrt(2))


def test_number_operator_diagonal():
    a = linalg.annihilation(5)
    assert np.allclose(a.conj().T @ a, np.diag([0, 1, 2, 3, 4]))


def test_annihilation_rejects_small_cutoff():
    with pytest.raises(linalg.DimensionError):
        linalg.annihilation(1)


def test_commutator_corner_defect():
    n = 7
    a = linalg.annihilation(n)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.eye(n, dtype=complex)
    expected[n - 1, n - 1] = -(n - 1)
    # exactly diagonal, with the single corner defect
    assert np.array_equal(comm != 0, expected != 0)
    assert np.max(np.abs(comm - expected)) < 1e-13


def test_kron_identities():
    assert np.array_equal(linalg.kron(np.eye(2), np.eye(3)), np.eye(6))
    sz = np.diag([1.0, -1.0])
    assert np.array_equal(linalg.kron(sz, np.eye(2)), np.diag([1, 1, -1, -1]))


def test_kron_lowering_product():
    k = linalg.kron(linalg.annihilation(2), linalg.annihilation(2))
    expected = np.zeros((4, 4))
    expected[0, 3] = 1.0
    assert np.array_equal(k, expected)


def test_kron_associativity():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    b = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    left = linalg.kron(linalg.kron(a, b), c)
    right = linalg.kron(a, linalg.kron(b, c))
    assert left.shape == right.shape
    assert np.max(np.abs(left - right)) <= 1e-14


def test_eigh_diagonal_case():
    vals, _ = linalg.eigh_gauged(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(vals, [1, 2, 3])


def test_eigh_pauli_x():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    vals, vecs = linalg.eigh_gauged(sx)
    assert np.allclose(vals, [-1, 1])
    minus = np.array([1, -1]) / np.sqrt(2)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert min(abs(np.vdot(minus, vecs[:, 0])), abs(np.vdot(plus, vecs[:, 0]))) \
        == pytest.approx(0.0, abs=1e-12)
    assert abs(np.vdot(plus, vecs[:, 1])) == pytest.approx(1.0, abs=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(linalg.HermiticityError):
        linalg.eigh_gauged(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigh_gauge_and_reconstruction():
    rng = np.random.default_rng(11)
    for dim in (40, 400):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = x + x.conj().T
        vals, vecs = linalg.eigh_gauged(h)
        assert np.max(np.abs(h - vecs @ np.diag(vals) @ vecs.conj().T)) <= 1e-9
        assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(dim))) <= 1e-10
        for j in range(dim):
            k = np.argmax(np.abs(vecs[:, j]))
            pivot = vecs[k, j]
            assert pivot.real > 0 and abs(pivot.imag) <= 1e-10 * abs(pivot)


def test_displacement_identity_at_zero():
    assert np.allclose(linalg.displacement(0.0, 10), np.eye(10))


def test_displacement_vacuum_overlap():
    d = linalg.displacement(1.0, 30)
    assert abs(d[0, 0]) == pytest.approx(np.exp(-0.5), abs=1e-8)
    assert d[0, 0].real == pytest.approx(0.60653066, abs=1e-8)


def test_displacement_inverse():
    cut = 30
    alpha = np.sqrt(2)
    prod = linalg.displacement(alpha, cut) @ linalg.displacement(-alpha, cut)
    assert np.max(np.abs(prod - np.eye(cut))[:10, :10]) <= 1e-6


def test_displacement_truncation_warning():
    with pytest.warns(linalg.TruncationWarning):
        linalg.displacement(3.0, 6)


def test_layout_dimensions_and_kets():
    lay = linalg.HilbertLayout((5,))
    assert lay.total_dim == 15
    v = lay.ket(linalg.G, 2)
    assert v[1 * 5 + 2] == 1.0 and np.sum(np.abs(v)) == 1.0
    lay2 = linalg.HilbertLayout((4, 3))
    assert lay2.total_dim == 36
    with pytest.raises(linalg.DimensionError):
        lay.ket(0, 7)
    with pytest.raises(linalg.DimensionError):
        linalg.HilbertLayout((1,))
