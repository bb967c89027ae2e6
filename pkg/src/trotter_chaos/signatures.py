"""Dynamical fingerprints of chaos computed from stacks of states.

Every function takes states as rows of a 2-D array (as produced by
:mod:`trotter_chaos.evolution`) and returns a :class:`TimeSeries`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .evolution import EvolutionRecord, stroboscopic
from .linalg import hermiticity_defect, reduced_density

ENTROPY_CLIP = 1e-12
TIME_AVERAGE_CONVENTION = "inclusive of t = 0; plain mean over samples with n tau <= t_max"


@dataclass(frozen=True)
class TimeSeries:
    label: str
    tau: float
    times: np.ndarray
    values: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)


def _times(n: int, tau: float, times: np.ndarray | None) -> np.ndarray:
    return np.arange(n) * tau if times is None else np.asarray(times, dtype=float)


def expectation(states: np.ndarray, op: np.ndarray, tau: float = 1.0, times: np.ndarray | None = None,
                label: str = "expectation") -> TimeSeries:
    """``<psi_n|O|psi_n>`` for Hermitian ``O``."""
    states = np.atleast_2d(states)
    if op.shape != (states.shape[1], states.shape[1]):
        raise ValueError(f"operator shape {op.shape} does not match state dimension {states.shape[1]}")
    if hermiticity_defect(op) > 1e-10:
        raise ValueError("observable must be Hermitian")
    vals = np.einsum("ni,ij,nj->n", states.conj(), op, states)
    residue = np.max(np.abs(vals.imag)) if len(vals) else 0.0
    if residue > 1e-10:
        raise ArithmeticError(f"expectation value has imaginary residue {residue:.2e}")
    return TimeSeries(label, tau, _times(len(vals), tau, times), vals.real)


def participation_ratio(states: np.ndarray, basis: np.ndarray | None = None, dimension: float | None = None,
                        tau: float = 1.0, times: np.ndarray | None = None) -> TimeSeries:
    """``(1/D) (sum_k |<k|psi>|^4)^-1`` over an orthonormal ``basis`` (columns).

    ``dimension`` defaults to the number of basis vectors. A smaller value
    (the Dicke normalisation) lets the ratio exceed 1.
    """
    states = np.atleast_2d(states)
    amps = states if basis is None else states @ basis.conj()
    d = float(amps.shape[1] if dimension is None else dimension)
    ipr = np.sum(np.abs(amps) ** 4, axis=1)
    return TimeSeries("participation_ratio", tau, _times(len(ipr), tau, times), 1.0 / (d * ipr),
                      {"dimension": d})


def fidelity(states_a: np.ndarray, states_b: np.ndarray) -> np.ndarray:
    """Row-wise ``|<a_n|b_n>|^2``."""
    if states_a.shape != states_b.shape:
        raise ValueError(f"state stacks are misaligned: {states_a.shape} vs {states_b.shape}")
    return np.abs(np.einsum("ni,ni->n", states_a.conj(), states_b)) ** 2


def perturbation_fidelity(model, tau: float, r: int, psi0: np.ndarray | None = None,
                          strength: float | None = None, stride: int = 1) -> TimeSeries:
    """Overlap of states evolved under ``U_tau`` and the perturbed step."""
    psi0 = model.default_state if psi0 is None else psi0
    u = model.step_unitary(tau)
    if strength == 0:
        u_p = u
    else:
        u_p = model.perturbed_step(u, tau, strength)
    a = stroboscopic(u, psi0, r, stride)
    b = stroboscopic(u_p, psi0, r, stride)
    steps = np.arange(0, r + 1, stride)
    return TimeSeries("perturbation_fidelity", tau, steps * tau, np.clip(fidelity(a, b), 0.0, 1.0),
                      {"strength": strength})


def entanglement_entropy(rho: np.ndarray) -> float:
    """Normalised von Neumann entropy ``-Tr(rho ln rho) / ln d`` of one density matrix."""
    d = rho.shape[0]
    if d == 1:
        return 0.0
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if np.min(w) < -ENTROPY_CLIP:
        raise ArithmeticError(f"density matrix has eigenvalue {np.min(w):.2e} below clipping tolerance")
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)) / np.log(d))


def subsystem_entropy(states: np.ndarray, factor_dims: Sequence[int], keep: Sequence[int],
                      tau: float = 1.0, times: np.ndarray | None = None) -> TimeSeries:
    states = np.atleast_2d(states)
    rhos = reduced_density(states, factor_dims, keep)
    vals = np.array([entanglement_entropy(r) for r in rhos])
    return TimeSeries("subsystem_entropy", tau, _times(len(vals), tau, times), vals, {"keep": list(keep)})


def simulation_fidelity(record: EvolutionRecord) -> TimeSeries:
    """``|<psi_dig(t)|psi_ide(t)>|^2`` at every stored stroboscopic time."""
    if record.states_ide is None:
        raise ValueError("record has no exact evolution to compare against")
    vals = np.clip(fidelity(record.states_dig, record.states_ide), 0.0, 1.0)
    return TimeSeries("simulation_fidelity", record.tau, record.times, vals)


def time_average(series: TimeSeries, t_max: float) -> float:
    """Mean over samples at times ``<= t_max`` (the ``t = 0`` sample included)."""
    if t_max > series.times[-1] + 1e-9 * max(1.0, abs(t_max)):
        raise ValueError(f"window {t_max} exceeds the series span {series.times[-1]}")
    mask = series.times <= t_max + 1e-9 * max(1.0, abs(t_max))
    if not np.any(mask):
        raise ValueError(f"no samples inside the window t <= {t_max}")
    return float(np.mean(series.values[mask]))
