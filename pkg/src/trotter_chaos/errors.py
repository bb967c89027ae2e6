"""Trotter-error metrics and the first-order Floquet-Magnus Hamiltonian."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .evolution import EvolutionRecord
from .signatures import TimeSeries, simulation_fidelity, time_average


@dataclass(frozen=True)
class ErrorCurve:
    """One error metric sampled over a grid of step sizes."""

    metric: str
    tau_grid: np.ndarray
    values: np.ndarray
    window: float
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tau_grid) != len(self.values):
            raise ValueError("tau grid and values differ in length")
        if not np.all(np.isfinite(self.values)) or np.any(np.asarray(self.values) < 0):
            raise ValueError(f"{self.metric} values must be finite and non-negative")

    def rows(self) -> list[tuple[str, float, str, float, float]]:
        """``(size, tau, metric, window, value)`` tuples for tabular output."""
        size = self.provenance.get("size", "")
        return [(size, float(t), self.metric, float(self.window), float(v))
                for t, v in zip(self.tau_grid, self.values)]


def _aligned(dig: TimeSeries, ide: TimeSeries) -> None:
    if dig.tau != ide.tau or len(dig.times) != len(ide.times) or not np.allclose(dig.times, ide.times):
        raise ValueError("digital and ideal series are not sampled at the same times")


def delta_time_avg(dig: TimeSeries, ide: TimeSeries, t_max: float) -> float:
    """Difference of the two time averages, ``|<<O_dig>> - <<O_ide>>|``."""
    _aligned(dig, ide)
    return abs(time_average(dig, t_max) - time_average(ide, t_max))


def delta_pointwise(dig: TimeSeries, ide: TimeSeries, t_max: float) -> float:
    """Time average of the pointwise deviation ``|<O_dig> - <O_ide>|``."""
    _aligned(dig, ide)
    diff = TimeSeries("abs_difference", dig.tau, dig.times, np.abs(dig.values - ide.values))
    return time_average(diff, t_max)


def avg_sim_infidelity(record: EvolutionRecord, t_max: float) -> float:
    """``1 - <F(psi_dig, psi_ide)>_t`` over the window."""
    value = 1.0 - time_average(simulation_fidelity(record), t_max)
    return float(min(max(value, 0.0), 1.0))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def magnus_correction(summands: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_{l>m} [H_l, H_m]`` with ``l, m`` positions in the summand list.

    With the step product ``U_0 U_1 ...`` (left factor acting last) this is
    the sign that makes ``H + (i t / 2) sum_{l>m} [H_l, H_m]`` the
    second-order generator.
    """
    total = np.zeros_like(summands[0], dtype=complex)
    running = np.zeros_like(total)
    for h in summands:
        total += commutator(h, running)
        running = running + h
    return total


def floquet_magnus_first(model, tau: float) -> np.ndarray:
    """First-order Floquet Hamiltonian ``H + i (2 pi tau / 2) sum_{l>m} [H_l, H_m]``.

    Accurate to second order in ``tau``: ``U_tau - exp(-i H_F 2 pi tau)`` is
    ``O(tau^3)``.
    """
    from .models import TWO_PI

    if len(model.summands) < 2:
        raise ValueError("the Floquet-Magnus term needs at least two summands")
    h_f = model.hamiltonian + 0.5j * TWO_PI * tau * magnus_correction(model.summands)
    return (h_f + h_f.conj().T) / 2
