"""Declarative sweep configuration and its validation."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

AVERAGE_SIGNATURES = (
    "observable",
    "observable_ideal",
    "participation_ratio",
    "entropy",
    "perturbation_fidelity",
    "simulation_fidelity",
    "sim_infidelity",
    "delta_time_avg",
    "delta_pointwise",
)
STATIC_SIGNATURES = ("chi2_rmt", "spacing_repulsion")
SIGNATURES = AVERAGE_SIGNATURES + STATIC_SIGNATURES
# signatures that compare against exact evolution need a Trotter decomposition
NEEDS_IDEAL = {"observable_ideal", "simulation_fidelity", "sim_infidelity", "delta_time_avg", "delta_pointwise"}
MODELS = ("a2a_ising", "heisenberg", "dicke", "kicked_top")
STATE_KINDS = ("default", "spin_coherent", "product", "random")
MODES = ("averages", "series")


class ConfigError(ValueError):
    """Raised with every problem found in a configuration."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {i}" for i in self.issues))


@dataclass
class TauGrid:
    """Step sizes either listed explicitly or generated from ``start``, ``stop``, ``count``."""

    start: float | None = None
    stop: float | None = None
    count: int = 0
    spacing: str = "linear"
    values: list[float] | None = None

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.count < 1 or self.start is None or self.stop is None:
            return np.array([])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def issues(self) -> list[str]:
        out = []
        if self.spacing not in ("linear", "log"):
            out.append(f"taus.spacing must be 'linear' or 'log', got {self.spacing!r}")
            return out
        g = self.grid()
        if g.size == 0:
            out.append("taus: the step-size grid is empty")
        elif np.any(~np.isfinite(g)) or np.any(g <= 0):
            out.append("taus: step sizes must be finite and strictly positive")
        elif np.any(np.diff(g) <= 0):
            out.append("taus: step sizes must be strictly ascending")
        return out


@dataclass
class StateSpec:
    """Initial state: the model default, a spin coherent state, a product of bits or random draws."""

    kind: str = "default"
    theta: float = 0.0
    phi: float = 0.0
    bits: list[int] | None = None
    random_kind: str = "haar_pure"
    count: int = 1
    seed: int | None = None

    def issues(self) -> list[str]:
        out = []
        if self.kind not in STATE_KINDS:
            out.append(f"initial_state.kind must be one of {STATE_KINDS}, got {self.kind!r}")
        if self.kind == "product" and not self.bits:
            out.append("initial_state.bits is required for product states")
        if self.kind == "random":
            if self.random_kind not in ("haar_pure", "product", "spin_coherent"):
                out.append(f"initial_state.random_kind {self.random_kind!r} is not a known random state kind")
            if self.count < 1:
                out.append("initial_state.count must be at least 1")
        return out


@dataclass
class RMTSettings:
    ensembles: list[str] | None = None
    n_bins: int | None = None
    residual: str = "density"
    d_fit: float | None = None
    # cavity truncation for Dicke statistics: "spin_dim" (dim_c = 2j + 1) or an integer
    dim_c: Any = "spin_dim"
    unfold_window: int = 10

    def issues(self) -> list[str]:
        out = []
        for e in self.ensembles or []:
            if e.upper() not in ("COE", "CUE", "CSE"):
                out.append(f"rmt.ensembles: unknown ensemble {e!r}")
        if self.residual not in ("density", "counts"):
            out.append(f"rmt.residual must be 'density' or 'counts', got {self.residual!r}")
        if self.n_bins is not None and self.n_bins < 2:
            out.append("rmt.n_bins must be at least 2")
        if not (self.dim_c == "spin_dim" or (isinstance(self.dim_c, int) and self.dim_c >= 2)):
            out.append(f"rmt.dim_c must be 'spin_dim' or an integer >= 2, got {self.dim_c!r}")
        return out


@dataclass
class SweepConfig:
    model: str
    sizes: list[float]
    taus: TauGrid
    signatures: list[str]
    windows: list[float] = field(default_factory=lambda: [200.0])
    params: dict[str, Any] = field(default_factory=dict)
    sweep_params: dict[str, list[Any]] = field(default_factory=dict)
    initial_state: StateSpec = field(default_factory=StateSpec)
    rmt: RMTSettings = field(default_factory=RMTSettings)
    mode: str = "averages"
    max_samples: int = 4000
    perturbation: float | None = None
    out_dir: str = "results"
    workers: int = 1
    seed: int = 0
    name: str = "custom"

    def issues(self) -> list[str]:
        out = []
        if self.model not in MODELS:
            out.append(f"model must be one of {MODELS}, got {self.model!r}")
        if not self.sizes:
            out.append("sizes: at least one system size is required")
        for s in self.sizes:
            out.extend(_size_issues(self.model, s))
        out.extend(self.taus.issues())
        if not self.signatures:
            out.append("signatures: at least one signature is required")
        for sig in self.signatures:
            if sig not in SIGNATURES:
                out.append(f"signatures: unknown signature {sig!r}; known {list(SIGNATURES)}")
        if self.model == "kicked_top" and NEEDS_IDEAL & set(self.signatures):
            out.append("signatures: kicked tops have no exact continuous evolution to compare against")
        if "entropy" in self.signatures and self.model in ("a2a_ising", "kicked_top"):
            out.append("signatures: entropy needs a bipartite model (heisenberg or dicke)")
        if any(s in AVERAGE_SIGNATURES for s in self.signatures) or self.mode == "series":
            if not self.windows:
                out.append("windows: at least one averaging window is required")
            if any(w <= 0 for w in self.windows):
                out.append("windows: averaging windows must be positive")
        if self.mode not in MODES:
            out.append(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_samples < 2:
            out.append("max_samples must be at least 2")
        if self.workers < 1:
            out.append("workers must be at least 1")
        for k, v in self.sweep_params.items():
            if not isinstance(v, list) or not v:
                out.append(f"sweep_params.{k} must be a non-empty list")
        out.extend(self.initial_state.issues())
        out.extend(self.rmt.issues())
        return out

    def validate(self) -> "SweepConfig":
        issues = self.issues()
        if issues:
            raise ConfigError(issues)
        return self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        data = dict(data)
        issues = []
        for key in ("model", "sizes", "taus", "signatures"):
            if key not in data:
                issues.append(f"{key}: required field missing")
        known = set(cls.__dataclass_fields__)
        for key in sorted(set(data) - known):
            issues.append(f"{key}: unknown field")
        if issues:
            raise ConfigError(issues)
        try:
            taus = data.pop("taus")
            data["taus"] = TauGrid(values=list(taus)) if isinstance(taus, list) else TauGrid(**taus)
            data["initial_state"] = StateSpec(**data.get("initial_state", {}))
            data["rmt"] = RMTSettings(**data.get("rmt", {}))
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError([str(exc)]) from exc
        return cfg.validate()

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
        return cls.from_dict(data)


def _size_issues(model: str, size: Any) -> list[str]:
    try:
        s = float(size)
    except (TypeError, ValueError):
        return [f"sizes: {size!r} is not a number"]
    if model == "heisenberg" and (s != int(s) or not 2 <= s <= 10):
        return [f"sizes: Heisenberg chain length must be an integer in [2, 10], got {size}"]
    if model in ("a2a_ising", "dicke", "kicked_top") and (s <= 0 or abs(2 * s - round(2 * s)) > 1e-12):
        return [f"sizes: spin size must be a positive half-integer, got {size}"]
    return []
