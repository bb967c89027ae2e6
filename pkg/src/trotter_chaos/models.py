"""Target Hamiltonians, their Trotter summands, and the kicked-top family.

Frequencies are in units of the coupling ``g`` and times in units of
``2 pi / g``, so the unitary of a summand ``H`` for a step ``tau`` is
``expm_hermitian(H, 2 pi tau)``.

Ordering: the Trotter step unitary is the matrix product of the summand
unitaries in list order, ``U_tau = U(summands[0]) U(summands[1]) ...``.
The last summand therefore acts on the state first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .linalg import HermitianEig, canonical_eigenbasis, eigh_hermitian, expm_hermitian, tensor
from .operators import PAULI, QUBIT_CONVENTION, bosonic_algebra, chain_operator, computational_state, spin_algebra

TWO_PI = 2 * np.pi

ISING_DEFAULTS = {"g_z": 1.0, "g_x": 0.7, "omega_x": 0.1, "omega_z": 0.3, "perturbation": 0.05}
HEISENBERG_DEFAULTS = {"omega": 1.0, "g": 1.0, "perturbation": 0.05}
DICKE_DEFAULTS = {"omega_c": 3.5, "omega_j": 3.5, "g": 1.0, "perturbation": 0.05}
PHOTON_NORM_PER_SPIN_DIM = 7


def _merge(defaults: Mapping[str, float], overrides: Mapping[str, Any]) -> dict[str, Any]:
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}; allowed {sorted(defaults)}")
    out = dict(defaults)
    out.update(overrides)
    return out


@dataclass(frozen=True, eq=False)
class ModelInstance:
    """A target Hamiltonian together with its ordered Trotter decomposition.

    Besides the Hamiltonian pieces the instance carries what the signature
    and statistics layers need: the observable of interest, the basis for
    participation ratios and eigenvector statistics, the symmetry used to
    split the Trotter step unitary into sectors, and the default ensemble.
    """

    name: str
    size: float
    hamiltonian: np.ndarray
    summands: tuple[np.ndarray, ...]
    summand_labels: tuple[str, ...]
    params: dict[str, Any]
    default_state: np.ndarray
    free_hamiltonian: np.ndarray
    factor_dims: tuple[int, ...]
    perturbation_generator: np.ndarray
    observable: np.ndarray
    observable_label: str
    reference_basis: np.ndarray
    pr_dimension: float
    entropy_keep: tuple[int, ...] | None = None
    symmetry: np.ndarray | None = None
    ensemble: str = "COE"
    degeneracy_mode: str = "none"
    warnings: tuple[str, ...] = ()
    conventions: dict[str, str] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def summand_unitaries(self, tau: float) -> list[np.ndarray]:
        return [expm_hermitian(h, TWO_PI * tau) for h in self.summands]

    def step_unitary(self, tau: float) -> np.ndarray:
        """The Trotter step unitary for step size ``tau`` (memoised per ``tau``)."""
        key = ("step", float(tau))
        if key not in self._cache:
            u = np.eye(self.dim, dtype=complex)
            for factor in self.summand_unitaries(tau):
                u = u @ factor
            self._cache[key] = u
        return self._cache[key]

    def target_eig(self) -> HermitianEig:
        if "target_eig" not in self._cache:
            self._cache["target_eig"] = eigh_hermitian(self.hamiltonian)
        return self._cache["target_eig"]

    def target_unitary(self, t: float) -> np.ndarray:
        """Exact evolution ``exp(-i H_M 2 pi t)``."""
        return self.target_eig().propagator(TWO_PI * t)

    def perturbed_step(self, u_tau: np.ndarray, tau: float, strength: float | None = None) -> np.ndarray:
        """``exp(-i H_pert strength tau) U_tau`` with the model's perturbation generator."""
        if strength is None:
            strength = self.params.get("perturbation", 0.05)
        return expm_hermitian(self.perturbation_generator, TWO_PI * strength * tau) @ u_tau


def a2a_ising(j: float, **params: float) -> ModelInstance:
    """All-to-all Ising model written as a collective spin j (a kicked top).

    ``H = H_z + H_x`` with ``H_mu = omega_mu J_mu + g_mu J_mu^2 / (2j + 1)``.
    The step unitary is ``exp(-i H_z tau) exp(-i H_x tau)``.
    """
    p = _merge(ISING_DEFAULTS, params)
    s = spin_algebra(j)
    norm = 2 * s.j + 1
    h_z = p["omega_z"] * s.jz + p["g_z"] * s.jz @ s.jz / norm
    h_x = p["omega_x"] * s.jx + p["g_x"] * s.jx @ s.jx / norm
    free = p["omega_x"] * s.jx + p["omega_z"] * s.jz
    return ModelInstance(
        name="a2a_ising",
        size=s.j,
        hamiltonian=h_z + h_x,
        summands=(h_z, h_x),
        summand_labels=("H_z", "H_x"),
        params=p,
        default_state=s.basis_state(s.j),
        free_hamiltonian=free,
        factor_dims=(s.dim,),
        perturbation_generator=h_z,
        observable=s.jz / s.j,
        observable_label="magnetisation Jz/j",
        reference_basis=np.eye(s.dim, dtype=complex),
        pr_dimension=float(s.dim),
        ensemble="COE",
        degeneracy_mode="none",
        conventions={"spin_basis": "m = j..-j", "reference_basis": "J_z eigenbasis"},
    )


def heisenberg_pieces(n_sites: int, omega: float = 1.0, g: float = 1.0) -> dict[str, list[np.ndarray]]:
    """Field term and per-bond exchange terms of the open Heisenberg chain."""
    gp = g / 2
    pieces: dict[str, list[np.ndarray]] = {
        "z": [chain_operator(n_sites, [(omega / 2, "Z", k) for k in range(n_sites)])]
    }
    for label, (a, b) in {"xy": ("X", "Y"), "xz": ("X", "Z"), "yz": ("Y", "Z")}.items():
        pieces[label] = [
            chain_operator(n_sites, pair_terms=[(gp, a, a, k, k + 1), (gp, b, b, k, k + 1)])
            for k in range(n_sites - 1)
        ]
    return pieces


def heisenberg(n_sites: int, **params: float) -> ModelInstance:
    """Open Heisenberg chain with a longitudinal field.

    ``H = (omega/2) sum Z + g' sum (XX + YY + ZZ)``, ``g' = g/2``, decomposed as
    ``H_z + H_xy + H_xz + H_yz`` with each exchange part split further into its
    nearest-neighbour bonds. Neighbouring bonds of one part do not commute,
    so the bond unitaries are applied one by one.
    """
    if not 2 <= n_sites <= 10:
        raise ValueError(f"chain length must be in [2, 10], got {n_sites}")
    p = _merge(HEISENBERG_DEFAULTS, params)
    pieces = heisenberg_pieces(n_sites, p["omega"], p["g"])
    summands, labels = [], []
    for part in ("z", "xy", "xz", "yz"):
        for k, h in enumerate(pieces[part]):
            summands.append(h)
            labels.append("H_z" if part == "z" else f"H_{part}[{k},{k + 1}]")
    h_z = pieces["z"][0]
    parity = tensor(*([PAULI["Z"]] * n_sites))
    first = chain_operator(n_sites, [(1.0, "Z", 0)])
    return ModelInstance(
        name="heisenberg",
        size=n_sites,
        hamiltonian=sum(summands),
        summands=tuple(summands),
        summand_labels=tuple(labels),
        params=p,
        default_state=computational_state([1] + [0] * (n_sites - 1)),
        free_hamiltonian=h_z,
        factor_dims=(2,) * n_sites,
        perturbation_generator=h_z,
        observable=first,
        observable_label="polarisation sigma_z of qubit 1",
        reference_basis=canonical_eigenbasis(h_z),
        pr_dimension=float(2**n_sites),
        entropy_keep=(0,),
        symmetry=parity,
        ensemble="CUE",
        degeneracy_mode="symmetry_sectors",
        conventions={"qubits": QUBIT_CONVENTION, "symmetry": "prod_k sigma_z^k"},
    )


def default_dynamics_cavity(dim_j: int) -> int:
    """Cavity truncation with 50% headroom over the largest photon numbers seen."""
    return math.ceil(1.5 * PHOTON_NORM_PER_SPIN_DIM * dim_j)


def dicke(j: float, dim_c: int, **params: float) -> ModelInstance:
    """Dicke model as a sum of a Tavis-Cummings and an anti-Tavis-Cummings term.

    ``H_TC  = D_c n + D_tc Jz + g/sqrt(2j) (a^dag J- + a J+)``
    ``H_ATC = D_c n - D_atc Jz + g/sqrt(2j) (a^dag J+ + a J-)``

    with unhalved ladders ``J+- = Jx +- i Jy``. The defaults put the whole spin
    frequency in the TC term (``D_tc = omega_j``, ``D_atc = 0``) and split the
    cavity frequency evenly (``D_c = omega_c / 2``); any split obeying
    ``2 D_c = omega_c`` and ``D_tc - D_atc = omega_j`` sums to the same target.
    The space is ordered cavity (x) spin.
    """
    base = dict(DICKE_DEFAULTS, delta_c=None, delta_j_tc=None, delta_j_atc=None)
    p = _merge(base, params)
    if p["delta_c"] is None:
        p["delta_c"] = p["omega_c"] / 2
    if p["delta_j_tc"] is None and p["delta_j_atc"] is None:
        p["delta_j_tc"], p["delta_j_atc"] = p["omega_j"], 0.0
    elif p["delta_j_tc"] is None:
        p["delta_j_tc"] = p["omega_j"] + p["delta_j_atc"]
    elif p["delta_j_atc"] is None:
        p["delta_j_atc"] = p["delta_j_tc"] - p["omega_j"]
    if not math.isclose(2 * p["delta_c"], p["omega_c"]) or not math.isclose(
        p["delta_j_tc"] - p["delta_j_atc"], p["omega_j"]
    ):
        raise ValueError("detunings must satisfy 2 delta_c = omega_c and delta_j_tc - delta_j_atc = omega_j")

    s = spin_algebra(j)
    b = bosonic_algebra(dim_c)
    jp, jm = s.ladder(halved=False)
    eye_c, eye_j = np.eye(dim_c), np.eye(s.dim)
    coupling = p["g"] / np.sqrt(2 * s.j)
    n_op = tensor(b.n, eye_j)
    jz_op = tensor(eye_c, s.jz)
    h_tc = p["delta_c"] * n_op + p["delta_j_tc"] * jz_op + coupling * (tensor(b.a_dag, jm) + tensor(b.a, jp))
    h_atc = p["delta_c"] * n_op - p["delta_j_atc"] * jz_op + coupling * (tensor(b.a_dag, jp) + tensor(b.a, jm))
    free = p["omega_c"] * n_op + p["omega_j"] * jz_op
    excitations = np.add.outer(np.arange(dim_c), s.m_values + s.j).ravel()
    parity = np.diag(np.where(np.round(excitations).astype(int) % 2 == 0, 1.0, -1.0)).astype(complex)
    n_norm = PHOTON_NORM_PER_SPIN_DIM * s.dim
    warnings = ()
    if dim_c < n_norm:
        warnings = (f"cavity truncation {dim_c} is below {n_norm} = 7 dim_j; dynamics may be truncated",)
    return ModelInstance(
        name="dicke",
        size=s.j,
        hamiltonian=h_tc + h_atc,
        summands=(h_tc, h_atc),
        summand_labels=("H_TC", "H_ATC"),
        params=dict(p, dim_c=dim_c),
        default_state=tensor(b.fock_state(0), s.basis_state(s.j)),
        free_hamiltonian=free,
        factor_dims=(dim_c, s.dim),
        perturbation_generator=free,
        observable=n_op / n_norm,
        observable_label=f"photon number n / {n_norm}",
        reference_basis=canonical_eigenbasis(free),
        pr_dimension=float((2 * s.dim) ** 2),
        entropy_keep=(1,),
        symmetry=parity,
        ensemble="COE",
        degeneracy_mode="symmetry_sectors",
        warnings=warnings,
        conventions={"ordering": "cavity (x) spin", "ladder": "J+- = Jx +- i Jy (unhalved)",
                     "parity": "exp(i pi (n + Jz + j))"},
    )


KICKED_TOP_DEFAULTS = {
    "COE": {"j": 400.0, "p": 1.0, "lam": 10.0},
    "CUE": {"j": 400.0, "p": 1.7, "k": 6.0, "k1": 0.5},
    "CSE": {"j": 399.5, "p": 4.5, "k": 1.5, "k1": 2.0, "k2": 3.0},
}
# parameter scaled by a perturbation (relative kick strength change)
KICK_PARAMETER = {"COE": "lam", "CUE": "k", "CSE": "k"}


@dataclass(frozen=True, eq=False)
class KickedTopInstance:
    """A kicked top of a fixed symmetry class with its Floquet operator.

    Evolution proceeds in whole kicks, so ``step_unitary`` ignores its
    argument. Perturbations rescale the kick strength by ``1 + strength``.
    """

    variant: str
    j: float
    params: dict[str, float]
    floquet: np.ndarray
    symmetry: np.ndarray | None
    degeneracy_mode: str
    default_perturbation: float = 1e-3
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.floquet.shape[0]

    @property
    def ensemble(self) -> str:
        return self.variant

    @property
    def reference_basis(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    @property
    def default_state(self) -> np.ndarray:
        return spin_algebra(self.j).basis_state(self.j - 1)

    @property
    def observable(self) -> np.ndarray:
        return spin_algebra(self.j).jz / self.j

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return (self.dim,)

    @property
    def pr_dimension(self) -> float:
        return float(self.dim)

    def step_unitary(self, tau: float = 1.0) -> np.ndarray:
        return self.floquet

    def perturbed_step(self, u_tau: np.ndarray | None = None, tau: float = 1.0,
                       strength: float | None = None) -> np.ndarray:
        if strength is None:
            strength = self.default_perturbation
        key = ("perturbed", float(strength))
        if key not in self._cache:
            name = KICK_PARAMETER[self.variant]
            params = dict(self.params)
            params[name] = params[name] * (1 + strength)
            self._cache[key] = kicked_top(self.variant, **params).floquet
        return self._cache[key]


def kicked_top(variant: str, **params: float) -> KickedTopInstance:
    """Kicked top of class COE, CUE or CSE.

    * COE: ``F = exp(-i lam Jz^2 / 2j) exp(-i p Jy)``
    * CUE: ``F = exp(-i k1 Jx^2 / 2j) exp(-i k Jz^2 / 2j) exp(-i p Jy)``
    * CSE: ``F = exp(-i V) exp(-i p Jz^2 / j)`` with
      ``V = k [Jz^2 + k1 (JxJz + JzJx) + k2 (JxJy + JyJx)] / j``

    COE and CUE commute with the parity ``exp(-i pi Jy)``; the CSE top has
    Kramers-degenerate levels and needs half-integer ``j``.
    """
    variant = variant.upper()
    if variant not in KICKED_TOP_DEFAULTS:
        raise ValueError(f"unknown kicked-top variant {variant!r}")
    p = _merge(KICKED_TOP_DEFAULTS[variant], params)
    j = p["j"]
    if variant == "CSE" and abs((2 * j) % 2 - 1) > 1e-12:
        raise ValueError(f"the symplectic kicked top needs half-integer j, got {j}")
    s = spin_algebra(j)
    jx, jy, jz = s.jx, s.jy, s.jz
    if variant == "COE":
        f = expm_hermitian(p["lam"] * jz @ jz / (2 * j), 1.0) @ expm_hermitian(p["p"] * jy, 1.0)
    elif variant == "CUE":
        f = (expm_hermitian(p["k1"] * jx @ jx / (2 * j), 1.0)
             @ expm_hermitian(p["k"] * jz @ jz / (2 * j), 1.0)
             @ expm_hermitian(p["p"] * jy, 1.0))
    else:
        h0 = p["p"] * jz @ jz / j
        v = p["k"] * (jz @ jz + p["k1"] * (jx @ jz + jz @ jx) + p["k2"] * (jx @ jy + jy @ jx)) / j
        f = expm_hermitian(v, 1.0) @ expm_hermitian(h0, 1.0)
    if variant == "CSE":
        return KickedTopInstance(variant, s.j, p, f, None, "pair_degenerate")
    parity = expm_hermitian(jy, np.pi)
    return KickedTopInstance(variant, s.j, p, f, parity, "symmetry_sectors")


def model_from_spec(name: str, size: float, **params: Any) -> ModelInstance | KickedTopInstance:
    """Build a model by name; used by the runner's JSON configs."""
    if name == "a2a_ising":
        return a2a_ising(size, **params)
    if name == "heisenberg":
        return heisenberg(int(size), **params)
    if name == "dicke":
        params = dict(params)
        dim_c = params.pop("dim_c", None)
        if dim_c is None:
            dim_c = default_dynamics_cavity(int(round(2 * size + 1)))
        return dicke(size, int(dim_c), **params)
    if name == "kicked_top":
        params = dict(params)
        variant = params.pop("variant", "COE")
        return kicked_top(variant, j=size, **params)
    raise ValueError(f"unknown model {name!r}; known: a2a_ising, heisenberg, dicke, kicked_top")
