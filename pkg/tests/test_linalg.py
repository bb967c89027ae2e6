import numpy as np
import pytest

from trotter_chaos.linalg import (canonical_eigenbasis, eig_unitary, expm_hermitian, partial_trace,
                                  principal_phase, project_basis, reduced_density, tensor, unitarity_defect)

from conftest import random_hermitian

SZ = np.diag([1.0, -1.0])


def taylor_expm(h, t, squarings=12, terms=30):
    """Scaling-and-squaring Taylor series for exp(-i h t), used as an independent oracle."""
    a = -1j * h * t / 2**squarings
    out = np.eye(len(h), dtype=complex)
    term = np.eye(len(h), dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def test_expm_zero_generator():
    assert np.allclose(expm_hermitian(np.zeros((3, 3)), 1.7), np.eye(3))


def test_expm_pauli_z_quarter_turn():
    assert np.allclose(expm_hermitian(SZ, np.pi / 2), np.diag([-1j, 1j]), atol=1e-14)


def test_expm_matches_taylor_oracle(rng):
    h = random_hermitian(rng, 4)
    assert np.max(np.abs(expm_hermitian(h, 0.37) - taylor_expm(h, 0.37))) < 1e-10


def test_expm_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


def test_eig_unitary_identity():
    phases, vecs = eig_unitary(np.eye(5))
    assert np.allclose(phases, 0)


def test_eig_unitary_diagonal():
    phases, vecs = eig_unitary(np.diag(np.exp(1j * np.array([0.3, -1.1]))))
    assert np.allclose(phases, [-1.1, 0.3])
    assert np.allclose(np.abs(vecs), [[0, 1], [1, 0]])


def test_eig_unitary_reconstructs_random_unitary(rng):
    u = expm_hermitian(random_hermitian(rng, 30), 1.3)
    phases, v = eig_unitary(u)
    assert np.all(np.diff(phases) >= 0)
    assert np.max(np.abs(v @ np.diag(np.exp(1j * phases)) @ v.conj().T - u)) < 1e-8
    assert np.max(np.abs(v.conj().T @ v - np.eye(30))) < 1e-8


def test_eig_unitary_rejects_non_unitary():
    with pytest.raises(ValueError, match="not unitary"):
        eig_unitary(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_principal_phase_branch():
    assert principal_phase(np.array([-np.pi]))[0] == pytest.approx(np.pi)
    assert principal_phase(np.array([3 * np.pi / 2]))[0] == pytest.approx(-np.pi / 2)


def test_tensor_identities():
    assert np.allclose(tensor(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(np.diag(tensor(SZ, np.eye(2))), [1, 1, -1, -1])


def test_tensor_mixed_product(rng):
    a, b = rng.standard_normal((2, 2, 2))
    x, y = rng.standard_normal((2, 2))
    assert np.max(np.abs(tensor(a, b) @ tensor(x, y) - tensor(a @ x, b @ y))) < 1e-12


def test_partial_trace_product_state(rng):
    r1 = np.diag([0.3, 0.7])
    r2 = np.array([[0.5, 0.2j], [-0.2j, 0.5]])
    assert np.allclose(partial_trace(tensor(r1, r2), (2, 2), [0]), r1)
    assert np.allclose(partial_trace(tensor(r1, r2), (2, 2), [1]), r2)


def test_partial_trace_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(bell, bell), (2, 2), [1]), np.eye(2) / 2)


def test_partial_trace_preserves_trace(rng):
    psi = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    for keep in ([0], [1], [2], [0, 2]):
        assert abs(np.trace(partial_trace(rho, (2, 3, 4), keep)) - 1) < 1e-12
    assert partial_trace(rho, (2, 3, 4), []).shape == (1, 1)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(ValueError):
        partial_trace(np.eye(6) / 6, (2, 2), [0])


def test_reduced_density_agrees_with_partial_trace(rng):
    psi = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    psi /= np.linalg.norm(psi)
    for keep in ([0], [1], [0, 1], [2]):
        dims = (2, 3, 2)
        assert np.allclose(reduced_density(psi, dims, keep), partial_trace(np.outer(psi, psi.conj()), dims, keep))


def test_canonical_eigenbasis_is_rotation_free():
    # a doubly degenerate level: the basis must not depend on the solver's choice inside it
    h = np.diag([0.0, 1.0, 1.0, 2.0]).astype(complex)
    rot = expm_hermitian(np.array([[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]], dtype=complex), 0.3)
    basis = canonical_eigenbasis(rot @ h @ rot.conj().T)
    again = canonical_eigenbasis(rot @ h @ rot.conj().T + 1e-14 * np.eye(4))
    assert np.allclose(basis, again)
    assert unitarity_defect(basis) < 1e-12


def test_project_basis_keeps_aligned_candidates():
    p = np.diag([1, 0, 1, 0]).astype(complex)
    perm = np.eye(4)[:, [3, 2, 1, 0]]
    assert np.allclose(project_basis(p, perm), perm[:, [1, 3]])
