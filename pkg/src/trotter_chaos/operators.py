"""Spin, qubit-chain and bosonic operators, special states, symmetry projectors.

Conventions
-----------
* Spin-j matrices are written in the ``|j, m>`` basis ordered ``m = j, j-1, ..., -j``.
* Qubits: local basis index 0 is ``|0>``, the sigma_z = -1 ground state, and
  index 1 is ``|1>`` (sigma_z = +1). Site 0 is the leftmost tensor factor.
* Fock states are ordered by photon number starting at 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .linalg import expm_hermitian, hermiticity_defect

QUBIT_CONVENTION = "|0> = sigma_z -1 (ground), |1> = sigma_z +1; site 0 leftmost"

# Pauli matrices in the (|0>, |1>) = (down, up) ordering
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "Z": np.array([[-1, 0], [0, 1]], dtype=complex),
}

PROJECTOR_TOL = 1e-8


def _is_half_integer(j: float) -> bool:
    return abs(2 * j - round(2 * j)) < 1e-12


@dataclass(frozen=True)
class SpinAlgebra:
    """Angular momentum matrices of a spin ``j``.

    ``jplus``/``jminus`` are the unhalved ladders ``Jx +- i Jy``; use
    :meth:`ladder` with ``halved=True`` for ``(Jx +- i Jy) / 2``.
    """

    j: float
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    @property
    def m_values(self) -> np.ndarray:
        return np.real(np.diag(self.jz))

    def ladder(self, halved: bool = False) -> tuple[np.ndarray, np.ndarray]:
        scale = 0.5 if halved else 1.0
        return scale * self.jplus, scale * self.jminus

    def basis_state(self, m: float) -> np.ndarray:
        """The ``|j, m>`` state."""
        idx = int(round(self.j - m))
        if not 0 <= idx < self.dim or abs(self.j - m - idx) > 1e-12:
            raise ValueError(f"m = {m} is not a valid projection for j = {self.j}")
        psi = np.zeros(self.dim, dtype=complex)
        psi[idx] = 1.0
        return psi


def spin_algebra(j: float) -> SpinAlgebra:
    if j <= 0 or not _is_half_integer(j):
        raise ValueError(f"spin j must be a positive half-integer, got {j}")
    j = round(2 * j) / 2
    m = np.arange(j, -j - 1, -1)
    # <j, m+1 | J+ | j, m> sits just above the diagonal
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    return SpinAlgebra(j, jx, jy, jz, jp, jm)


def embed_site(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Single-qubit ``op`` acting on ``site`` of an ``n_sites`` chain."""
    return reduce(np.kron, [op if k == site else PAULI["I"] for k in range(n_sites)])


def _pauli(label: str | np.ndarray) -> np.ndarray:
    if isinstance(label, str):
        try:
            return PAULI[label.upper()]
        except KeyError:
            raise ValueError(f"unknown Pauli label {label!r}") from None
    return np.asarray(label, dtype=complex)


def chain_operator(
    n_sites: int,
    site_terms: Iterable[tuple[float, str, int]] = (),
    pair_terms: Iterable[tuple[float, str, str, int, int]] = (),
) -> np.ndarray:
    """Sum of single-site and nearest-neighbour Pauli terms on an open chain.

    ``site_terms`` holds ``(coefficient, pauli, site)`` and ``pair_terms``
    holds ``(coefficient, pauli_a, pauli_b, site_a, site_b)`` with
    ``|site_a - site_b| == 1``.
    """
    if not 1 <= n_sites <= 12:
        raise ValueError(f"chain length must be in [1, 12], got {n_sites}")
    dim = 2**n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for coef, label, site in site_terms:
        if not 0 <= site < n_sites:
            raise ValueError(f"site {site} out of range for {n_sites} sites")
        out += coef * embed_site(_pauli(label), site, n_sites)
    for coef, la, lb, sa, sb in pair_terms:
        if not (0 <= sa < n_sites and 0 <= sb < n_sites):
            raise ValueError(f"pair ({sa}, {sb}) out of range for {n_sites} sites")
        if abs(sa - sb) != 1:
            raise ValueError(f"pair ({sa}, {sb}) is not nearest-neighbour")
        out += coef * embed_site(_pauli(la), sa, n_sites) @ embed_site(_pauli(lb), sb, n_sites)
    return out


def computational_state(bits: Sequence[int]) -> np.ndarray:
    """Product state ``|b_0 b_1 ... >`` in the qubit convention above."""
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b}")
        idx = 2 * idx + int(b)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[idx] = 1.0
    return psi


@dataclass(frozen=True)
class BosonicAlgebra:
    dim_c: int
    a: np.ndarray
    a_dag: np.ndarray
    n: np.ndarray

    def fock_state(self, k: int) -> np.ndarray:
        if not 0 <= k < self.dim_c:
            raise ValueError(f"Fock level {k} outside truncation {self.dim_c}")
        psi = np.zeros(self.dim_c, dtype=complex)
        psi[k] = 1.0
        return psi


def bosonic_algebra(dim_c: int) -> BosonicAlgebra:
    if dim_c < 2:
        raise ValueError(f"cavity truncation must be at least 2, got {dim_c}")
    a = np.diag(np.sqrt(np.arange(1, dim_c)), 1).astype(complex)
    a_dag = a.conj().T
    return BosonicAlgebra(dim_c, a, a_dag, a_dag @ a)


def spin_coherent_state(j: float, theta: float, phi: float) -> np.ndarray:
    """``exp(i theta (Jx sin phi - Jy cos phi)) |j, j>``."""
    s = spin_algebra(j)
    generator = theta * (s.jx * np.sin(phi) - s.jy * np.cos(phi))
    return expm_hermitian(generator, -1.0) @ s.basis_state(s.j)


def make_rng(seed: int | None) -> np.random.Generator:
    """The package-wide generator: PCG64 seeded directly, stable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def sphere_angles(rng: np.random.Generator) -> tuple[float, float]:
    """Uniform point on the sphere: cos(theta) uniform on [-1, 1], phi on [0, 2 pi)."""
    cos_theta = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2 * np.pi)
    return float(np.arccos(cos_theta)), float(phi)


def random_state(kind: str, dims: Sequence[int], seed: int | None) -> np.ndarray:
    """Random initial state of the given kind.

    Parameters
    ----------
    kind
        ``"haar_pure"`` (normalised complex Gaussian over the full space),
        ``"product"`` (independent Haar state per factor) or
        ``"spin_coherent"`` (uniform on the sphere; either a single factor of
        dimension ``2j + 1`` or a register of qubits all pointing the same way).
    dims
        Factor dimensions of the target space.
    seed
        Seed for :func:`make_rng`; equal seeds give bit-identical states.
    """
    rng = make_rng(seed)
    dims = [int(d) for d in dims]
    if kind == "haar_pure":
        return haar_state(int(np.prod(dims)), rng)
    if kind == "product":
        return reduce(np.kron, [haar_state(d, rng) for d in dims])
    if kind == "spin_coherent":
        theta, phi = sphere_angles(rng)
        if len(dims) == 1:
            return spin_coherent_state((dims[0] - 1) / 2, theta, phi)
        if any(d != 2 for d in dims):
            raise ValueError("spin_coherent states need one spin factor or a register of qubits")
        # spin-1/2 basis runs m = +1/2, -1/2; the qubit ordering is the reverse
        qubit = spin_coherent_state(0.5, theta, phi)[::-1]
        return reduce(np.kron, [qubit] * len(dims))
    raise ValueError(f"unknown random state kind {kind!r}")


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group (complex) eigenvalues closer than ``tol``; returns index arrays."""
    order = np.lexsort((values.imag, values.real))
    clusters: list[list[int]] = []
    centres: list[complex] = []
    for idx in order:
        for c, centre in enumerate(centres):
            if abs(values[idx] - centre) < tol:
                clusters[c].append(idx)
                break
        else:
            clusters.append([idx])
            centres.append(values[idx])
    return [np.array(c) for c in clusters]


def symmetry_projectors(s: np.ndarray, tol: float = PROJECTOR_TOL) -> list[tuple[complex, np.ndarray]]:
    """Orthogonal projectors onto the eigenspaces of a normal operator.

    Eigenvalues within ``tol`` of each other share a projector. Labels are
    rounded cluster centres, returned real when the imaginary part vanishes.
    """
    s = np.asarray(s, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(s))))
    if np.max(np.abs(s @ s.conj().T - s.conj().T @ s)) > 1e-10 * scale**2:
        raise ValueError("symmetry operator is not normal")
    if np.count_nonzero(s - np.diag(np.diag(s))) == 0:
        values, vectors = np.diag(s).copy(), np.eye(s.shape[0], dtype=complex)
    elif hermiticity_defect(s) <= 1e-10 * scale:
        values, vectors = np.linalg.eigh((s + s.conj().T) / 2)
        values = values.astype(complex)
    else:
        t, vectors = sla.schur(s, output="complex")
        values = np.diag(t)
    out = []
    for idx in _cluster(values, tol):
        v = vectors[:, idx]
        label = complex(np.mean(values[idx]))
        label = round(label.real, 10) if abs(label.imag) < tol else complex(round(label.real, 10), round(label.imag, 10))
        out.append((label, v @ v.conj().T))
    out.sort(key=lambda item: (np.real(item[0]), np.imag(item[0])))
    return out
