"""Dense complex linear algebra used by every other module.

Operators and states are plain numpy arrays. The subsystem factorisation
of a Hilbert space travels alongside the array as a tuple of dimensions
(see ``ModelInstance.factor_dims``) and is passed explicitly where it
matters, i.e. to :func:`partial_trace` and :func:`reduced_density`.
"""
from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8


class HermitianEig(NamedTuple):
    """Eigendecomposition ``H = V diag(values) V^dagger`` of a Hermitian matrix."""

    values: np.ndarray
    vectors: np.ndarray

    def propagator(self, t: float) -> np.ndarray:
        """Return ``exp(-i H t)``."""
        v = self.vectors
        return (v * np.exp(-1j * self.values * t)) @ v.conj().T


class UnitaryEig(NamedTuple):
    """Eigenphases (ascending, in (-pi, pi]) and orthonormal eigenvectors."""

    phases: np.ndarray
    vectors: np.ndarray


def hermiticity_defect(h: np.ndarray) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _square(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} has non-finite entries")
    return a


def eigh_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> HermitianEig:
    h = _square(h, "Hamiltonian")
    defect = hermiticity_defect(h)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: max |H - H^dagger| = {defect:.3e}")
    values, vectors = np.linalg.eigh(h)
    return HermitianEig(values, vectors)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via its eigendecomposition.

    Raises
    ------
    ValueError
        If ``H`` deviates from Hermitian by more than ``HERMITIAN_TOL``.
    """
    return eigh_hermitian(h).propagator(t)


def principal_phase(phi: np.ndarray) -> np.ndarray:
    """Map angles onto the branch (-pi, pi]."""
    phi = np.angle(np.exp(1j * np.asarray(phi, dtype=float)))
    return np.where(phi <= -np.pi, phi + 2 * np.pi, phi)


def eig_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> UnitaryEig:
    """Eigenphases and eigenvectors of a unitary.

    A complex Schur factorisation is used instead of a general eigensolver:
    for a normal matrix the triangular factor is diagonal and the Schur
    vectors are orthonormal even inside degenerate eigenspaces.
    """
    u = _square(u, "unitary")
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValueError(f"matrix is not unitary: ||U^dagger U - 1||_max = {defect:.3e}")
    t, z = sla.schur(u, output="complex")
    phases = principal_phase(np.angle(np.diag(t)))
    order = np.argsort(phases, kind="stable")
    return UnitaryEig(phases[order], z[:, order])


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of operators or state vectors, left factor outermost."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (np.asarray(f) for f in factors))


def _check_dims(dim: int, factor_dims: Sequence[int], keep: Sequence[int]) -> tuple[list[int], list[int]]:
    dims = [int(d) for d in factor_dims]
    if int(np.prod(dims)) != dim:
        raise ValueError(f"factor dims {dims} do not multiply to {dim}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} factors")
    return dims, keep


def partial_trace(rho: np.ndarray, factor_dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    An empty ``keep`` traces over everything and returns a 1x1 matrix.
    """
    rho = _square(rho, "density operator")
    dims, keep = _check_dims(rho.shape[0], factor_dims, keep)
    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # trace the highest-index factors first so earlier axis numbers stay valid
    for offset, k in enumerate(sorted(traced, reverse=True)):
        remaining = n - offset
        t = np.trace(t, axis1=k, axis2=k + remaining)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def reduced_density(psi: np.ndarray, factor_dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state without forming ``|psi><psi|``.

    ``psi`` may also be a stack of states with shape ``(n, dim)``; the result
    then has shape ``(n, d, d)``.
    """
    psi = np.asarray(psi)
    stacked = psi.ndim == 2
    block = psi if stacked else psi[None, :]
    dims, keep = _check_dims(block.shape[1], factor_dims, keep)
    if not keep:
        out = np.sum(np.abs(block) ** 2, axis=1).reshape(-1, 1, 1).astype(complex)
        return out if stacked else out[0]
    traced = [k for k in range(len(dims)) if k not in keep]
    t = block.reshape([block.shape[0]] + dims)
    t = np.transpose(t, [0] + [k + 1 for k in keep] + [k + 1 for k in traced])
    dk = int(np.prod([dims[k] for k in keep]))
    m = t.reshape(block.shape[0], dk, -1)
    out = np.einsum("nik,njk->nij", m, m.conj())
    return out if stacked else out[0]


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def _is_diagonal(a: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(a - np.diag(np.diag(a))), initial=0.0) <= tol)


def project_basis(projector: np.ndarray, candidates: np.ndarray | None = None, rank: int | None = None,
                  tol: float = 1e-6) -> np.ndarray:
    """Orthonormal basis of ``range(projector)`` built from projected candidates.

    Columns of ``candidates`` (the identity when omitted) are projected and
    Gram-Schmidt orthogonalised in order; a column is kept when its residual
    norm exceeds ``tol``. The result is deterministic for a fixed candidate
    ordering.
    """
    d = projector.shape[0]
    if rank is None:
        rank = int(round(np.real(np.trace(projector))))
    if candidates is None and _is_diagonal(projector):
        cols = np.flatnonzero(np.real(np.diag(projector)) > 0.5)
        if len(cols) != rank:
            raise ValueError(f"diagonal projector has {len(cols)} unit entries, expected {rank}")
        return np.eye(d, dtype=complex)[:, cols]
    projected = projector if candidates is None else projector @ candidates
    if candidates is not None:
        # candidates lying entirely inside or outside the range are kept verbatim
        norms = np.linalg.norm(projected, axis=0)
        inside = np.abs(norms - 1) < 1e-12
        if np.sum(inside) == rank and np.all(inside | (norms < 1e-12)):
            return np.asarray(candidates[:, inside], dtype=complex)
    q = np.zeros((d, rank), dtype=complex)
    k = 0
    for col in range(projected.shape[1]):
        if k == rank:
            break
        v = projected[:, col]
        if np.linalg.norm(v) <= tol:
            continue
        for _ in range(2):  # second pass for numerical orthogonality
            v = v - q[:, :k] @ (q[:, :k].conj().T @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            q[:, k] = v / norm
            k += 1
    if k != rank:
        raise ValueError(f"candidates span only {k} of {rank} projector dimensions")
    return q


def canonical_eigenbasis(h: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Eigenbasis of a Hermitian matrix, fixed uniquely inside degenerate levels.

    Within every cluster of eigenvalues closer than ``tol`` the basis is
    rebuilt from the computational basis vectors in ascending order, so the
    result does not depend on the eigensolver's arbitrary rotation inside a
    degenerate eigenspace. Columns are ordered by eigenvalue.
    """
    h = _square(h, "Hamiltonian")
    d = h.shape[0]
    if _is_diagonal(h):
        order = np.argsort(np.real(np.diag(h)), kind="stable")
        return np.eye(d, dtype=complex)[:, order]
    values, vectors = eigh_hermitian(h)
    out = np.empty((d, d), dtype=complex)
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and values[stop] - values[stop - 1] < tol:
            stop += 1
        block = vectors[:, start:stop]
        if stop - start == 1:
            v = block[:, 0]
            # fix the phase so the largest component is real positive
            k = int(np.argmax(np.abs(v)))
            out[:, start] = v * np.exp(-1j * np.angle(v[k]))
        else:
            out[:, start:stop] = project_basis(block @ block.conj().T, None, stop - start)
        start = stop
    return out
