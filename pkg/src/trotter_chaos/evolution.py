"""Stroboscopic Trotterised evolution and step-sampled exact evolution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .linalg import eig_unitary

NORM_TOL = 1e-6


@dataclass(frozen=True)
class EvolutionRecord:
    """States at stroboscopic times ``n tau`` for ``n = 0, stride, 2 stride, ... <= r``."""

    tau: float
    n_steps: int
    stride: int
    steps: np.ndarray
    states_dig: np.ndarray
    states_ide: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.tau


def _sample_steps(r: int, stride: int) -> np.ndarray:
    if r < 0:
        raise ValueError(f"number of steps must be non-negative, got {r}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return np.arange(0, r + 1, stride)


def _check_norms(states: np.ndarray, what: str) -> None:
    drift = np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0))
    if drift > NORM_TOL:
        raise RuntimeError(f"{what}: norm drift {drift:.3e} exceeds {NORM_TOL:g}")


def powers_by_multiplication(u: np.ndarray, psi0: np.ndarray, steps: np.ndarray) -> np.ndarray:
    out = np.empty((len(steps), len(psi0)), dtype=complex)
    psi = np.asarray(psi0, dtype=complex).copy()
    n = 0
    for k, target in enumerate(steps):
        while n < target:
            psi = u @ psi
            n += 1
        out[k] = psi
    return out


def powers_by_eigendecomposition(u: np.ndarray, psi0: np.ndarray, steps: np.ndarray,
                                 chunk: int = 4096) -> np.ndarray:
    phases, v = eig_unitary(u)
    coeffs = v.conj().T @ psi0
    out = np.empty((len(steps), len(psi0)), dtype=complex)
    for start in range(0, len(steps), chunk):
        block = steps[start:start + chunk]
        weights = np.exp(1j * np.outer(block, phases)) * coeffs
        out[start:start + chunk] = weights @ v.T
    return out


def stroboscopic(u: np.ndarray, psi0: np.ndarray, r: int, stride: int = 1, method: str = "auto") -> np.ndarray:
    """States ``U^n psi0`` at ``n = 0, stride, ... <= r`` as rows of an array.

    ``method="eig"`` applies powers through the eigendecomposition of ``U``;
    ``"multiply"`` reapplies ``U``. ``"auto"`` picks the eigendecomposition
    when ``r`` exceeds the dimension.
    """
    steps = _sample_steps(r, stride)
    psi0 = np.asarray(psi0, dtype=complex)
    if method == "auto":
        method = "eig" if r > len(psi0) else "multiply"
    if method == "eig":
        states = powers_by_eigendecomposition(u, psi0, steps)
    elif method == "multiply":
        states = powers_by_multiplication(u, psi0, steps)
    else:
        raise ValueError(f"unknown evolution method {method!r}")
    _check_norms(states, "stroboscopic evolution")
    return states


def trotter_evolve(model, tau: float, r: int, psi0: np.ndarray | None = None, stride: int = 1,
                   method: str = "auto") -> EvolutionRecord:
    """Trotterised evolution with one step unitary built once and reapplied."""
    if tau <= 0:
        raise ValueError(f"step size must be positive, got {tau}")
    if r < 1:
        raise ValueError(f"need at least one step, got r = {r}")
    psi0 = model.default_state if psi0 is None else psi0
    states = stroboscopic(model.step_unitary(tau), psi0, r, stride, method)
    return EvolutionRecord(tau, r, stride, _sample_steps(r, stride), states, meta={"method": method})


def ideal_sampled(model, tau: float, r: int, psi0: np.ndarray | None = None, stride: int = 1) -> np.ndarray:
    """Exact states ``exp(-i H_M 2 pi n tau) psi0`` from one eigendecomposition of ``H_M``."""
    from .models import TWO_PI

    psi0 = np.asarray(model.default_state if psi0 is None else psi0, dtype=complex)
    steps = _sample_steps(r, stride)
    eig = model.target_eig()
    coeffs = eig.vectors.conj().T @ psi0
    out = np.empty((len(steps), len(psi0)), dtype=complex)
    chunk = 4096
    for start in range(0, len(steps), chunk):
        block = steps[start:start + chunk]
        weights = np.exp(-1j * TWO_PI * tau * np.outer(block, eig.values)) * coeffs
        out[start:start + chunk] = weights @ eig.vectors.T
    _check_norms(out, "ideal evolution")
    return out


def evolve_pair(model, tau: float, r: int, psi0: np.ndarray | None = None, stride: int = 1,
                method: str = "auto") -> EvolutionRecord:
    """Trotterised and exact evolution sampled at the same stroboscopic times."""
    rec = trotter_evolve(model, tau, r, psi0, stride, method)
    ide = ideal_sampled(model, tau, r, psi0, stride)
    return EvolutionRecord(rec.tau, rec.n_steps, rec.stride, rec.steps, rec.states_dig, ide, rec.meta)


def steps_for_window(tau: float, t_max: float) -> int:
    """Number of steps whose times ``n tau`` cover ``[0, t_max]``."""
    return int(np.floor(t_max / tau + 1e-9))
