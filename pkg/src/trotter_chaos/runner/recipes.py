"""Ready-made sweep configurations for each class of experiment."""
from __future__ import annotations

from typing import Callable

from .config import RMTSettings, StateSpec, SweepConfig, TauGrid

DYNAMICS = ["observable", "observable_ideal", "participation_ratio", "perturbation_fidelity",
            "simulation_fidelity"]
ERRORS = ["delta_time_avg", "delta_pointwise", "sim_infidelity"]
# long plateau windows per model, plus a short window for the error curves
LONG_WINDOW = {"a2a_ising": 200.0, "heisenberg": 50.0, "dicke": 200.0}
SHORT_WINDOW = {"a2a_ising": 10.0, "heisenberg": 5.0, "dicke": 10.0}
FULL_DYNAMICS_SIZE = {"a2a_ising": 64, "heisenberg": 8, "dicke": 6}
SIZE_SWEEP = {
    "a2a_ising": [1, 2, 4, 8, 16, 32, 64],
    "heisenberg": [2, 3, 4, 5, 6, 7, 8, 9],
    "dicke": [1, 2, 3, 4, 5, 6],
}
STAT_SIZES = {
    "a2a_ising": [1, 2, 4, 8, 16, 32, 64, 128, 256],
    "heisenberg": [3, 4, 5, 6, 7, 8, 9, 10],
    "dicke": [1, 2, 3, 4, 5, 6, 7, 8],
}
TAU_MAX = {"a2a_ising": 1.0, "heisenberg": 1.0, "dicke": 0.5}


def _extra_signatures(model: str) -> list[str]:
    return ["entropy"] if model in ("heisenberg", "dicke") else []


def _dynamics(model: str) -> SweepConfig:
    return SweepConfig(
        name=f"fig2_{model}", model=model, sizes=[FULL_DYNAMICS_SIZE[model]],
        taus=TauGrid(0.01, TAU_MAX[model], 100), signatures=DYNAMICS + _extra_signatures(model),
        windows=[LONG_WINDOW[model]], mode="series")


def _size_averages(model: str) -> SweepConfig:
    return SweepConfig(
        name=f"fig3_{model}", model=model, sizes=SIZE_SWEEP[model],
        taus=TauGrid(0.01, TAU_MAX[model], 100), signatures=DYNAMICS + _extra_signatures(model),
        windows=[LONG_WINDOW[model]])


def _statistics(model: str) -> SweepConfig:
    return SweepConfig(
        name=f"fig5_{model}", model=model, sizes=STAT_SIZES[model],
        taus=TauGrid(0.001, TAU_MAX[model], 60, "log"), signatures=["chi2_rmt"], windows=[])


def _errors(model: str) -> SweepConfig:
    return SweepConfig(
        name=f"fig6_{model}", model=model, sizes=SIZE_SWEEP[model],
        taus=TauGrid(0.001, TAU_MAX[model], 60, "log"), signatures=ERRORS,
        windows=[SHORT_WINDOW[model], LONG_WINDOW[model]])


def kicked_top_suite(variant: str = "COE") -> SweepConfig:
    j = 399.5 if variant == "CSE" else 400.0
    cfg = SweepConfig(
        name=f"appA_kicked_top_{variant.lower()}", model="kicked_top", sizes=[j], taus=TauGrid(values=[1.0]),
        signatures=["chi2_rmt", "spacing_repulsion", "perturbation_fidelity"], windows=[20.0, 200.0],
        params={"variant": variant}, rmt=RMTSettings(ensembles=["COE", "CUE", "CSE"]))
    if variant == "COE":
        cfg.name = "appA_kicked_top"
        cfg.sweep_params = {"lam": [0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0]}
    return cfg


def random_states() -> SweepConfig:
    return SweepConfig(
        name="appC_random_states", model="heisenberg", sizes=[9], taus=TauGrid(0.01, 1.0, 100),
        signatures=["observable", "delta_time_avg", "delta_pointwise", "participation_ratio", "sim_infidelity"],
        windows=[50.0], initial_state=StateSpec(kind="random", random_kind="spin_coherent", count=20, seed=0))


def truncation() -> SweepConfig:
    return SweepConfig(
        name="appD_truncation", model="dicke", sizes=[2, 3, 4, 6], taus=TauGrid(values=[0.01, 0.12]),
        signatures=["chi2_rmt"], windows=[],
        sweep_params={"dim_c": [5, 7, 9, 13, 20, 30, 50, 80, 120, 160, 200]})


RECIPES: dict[str, Callable[[], SweepConfig]] = {}
for _m in ("a2a_ising", "heisenberg", "dicke"):
    _short = "ising" if _m == "a2a_ising" else _m
    RECIPES[f"fig2_{_short}"] = lambda m=_m: _dynamics(m)
    RECIPES[f"fig3_{_short}"] = lambda m=_m: _size_averages(m)
    RECIPES[f"fig5_{_short}"] = lambda m=_m: _statistics(m)
    RECIPES[f"fig6_{_short}"] = lambda m=_m: _errors(m)
RECIPES["appA_kicked_top"] = lambda: kicked_top_suite("COE")
RECIPES["appA_kicked_top_cue"] = lambda: kicked_top_suite("CUE")
RECIPES["appA_kicked_top_cse"] = lambda: kicked_top_suite("CSE")
RECIPES["appC_random_states"] = random_states
RECIPES["appD_truncation"] = truncation


def figure_recipe(name: str) -> SweepConfig:
    """A fully populated configuration for a named experiment."""
    if name not in RECIPES:
        raise KeyError(f"unknown recipe {name!r}; available: {', '.join(sorted(RECIPES))}")
    cfg = RECIPES[name]()
    cfg.name = name
    return cfg.validate()
