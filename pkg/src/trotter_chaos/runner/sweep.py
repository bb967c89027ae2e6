"""Fan a sweep out into independent jobs, cache their rows and collect a table."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Any

import numpy as np

from .. import __version__
from ..errors import avg_sim_infidelity, delta_pointwise, delta_time_avg
from ..evolution import evolve_pair, trotter_evolve
from ..models import model_from_spec
from ..operators import bosonic_algebra, computational_state, random_state, spin_coherent_state
from ..rmt import analyse_model, level_spacings, sector_spectra
from ..signatures import (expectation, participation_ratio, perturbation_fidelity, simulation_fidelity,
                          subsystem_entropy, time_average)
from .config import AVERAGE_SIGNATURES, NEEDS_IDEAL, SweepConfig

CODE_VERSION = f"trotter_chaos-{__version__}"
CACHE_DIR = "cache"
REPULSION_CUTOFF = 0.1


@dataclass(frozen=True)
class Job:
    size: float
    tau: float
    extra: tuple[tuple[str, Any], ...] = ()
    state_index: int = 0

    def label_suffix(self, n_states: int) -> str:
        suffix = "".join(f"[{k}={v}]" for k, v in self.extra)
        return suffix + (f"#{self.state_index}" if n_states > 1 else "")


@dataclass
class SweepResult:
    rows: list[dict[str, Any]]
    failures: list[dict[str, Any]] = field(default_factory=list)
    computed: int = 0
    cached: int = 0

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0


def make_jobs(cfg: SweepConfig) -> list[Job]:
    names = sorted(cfg.sweep_params)
    combos = list(itertools.product(*(cfg.sweep_params[n] for n in names)))
    n_states = cfg.initial_state.count if cfg.initial_state.kind == "random" else 1
    taus = cfg.taus.grid()
    return [Job(float(size), float(tau), tuple(zip(names, combo)), k)
            for size in cfg.sizes for tau in taus for combo in combos for k in range(n_states)]


def provenance_hash(cfg: SweepConfig, job: Job) -> str:
    """Stable digest of everything that determines a job's rows."""
    d = cfg.to_dict()
    payload = {
        "code": CODE_VERSION,
        "model": cfg.model,
        "params": d["params"],
        "extra": [list(x) for x in job.extra],
        "size": repr(job.size),
        "tau": repr(job.tau),
        "signatures": sorted(cfg.signatures),
        "windows": [repr(float(w)) for w in cfg.windows],
        "initial_state": d["initial_state"],
        "state_index": job.state_index,
        "rmt": d["rmt"],
        "mode": cfg.mode,
        "max_samples": cfg.max_samples,
        "perturbation": cfg.perturbation,
        "seed": cfg.seed,
    }
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _coherent(model, theta: float, phi: float) -> np.ndarray:
    dims = model.factor_dims
    if getattr(model, "name", "") == "dicke":
        vacuum = bosonic_algebra(dims[0]).fock_state(0)
        return np.kron(vacuum, spin_coherent_state((dims[1] - 1) / 2, theta, phi))
    if len(dims) == 1:
        return spin_coherent_state((dims[0] - 1) / 2, theta, phi)
    # spin-1/2 basis runs m = +1/2, -1/2; the qubit ordering is the reverse
    qubit = spin_coherent_state(0.5, theta, phi)[::-1]
    return reduce(np.kron, [qubit] * len(dims))


def initial_state(cfg: SweepConfig, model, index: int) -> np.ndarray:
    spec = cfg.initial_state
    if spec.kind == "default":
        return model.default_state
    if spec.kind == "spin_coherent":
        return _coherent(model, spec.theta, spec.phi)
    if spec.kind == "product":
        if len(model.factor_dims) != len(spec.bits) or any(d != 2 for d in model.factor_dims):
            raise ValueError("product states of bits need a qubit register of matching length")
        return computational_state(spec.bits)
    seed = (cfg.seed if spec.seed is None else spec.seed) + index
    if getattr(model, "name", "") == "dicke":
        spin = random_state(spec.random_kind, model.factor_dims[1:], seed)
        return np.kron(bosonic_algebra(model.factor_dims[0]).fock_state(0), spin)
    return random_state(spec.random_kind, model.factor_dims, seed)


def _statistics_model(cfg: SweepConfig, job: Job):
    params = dict(cfg.params, **dict(job.extra))
    if cfg.model == "dicke" and "dim_c" not in dict(job.extra):
        rule = cfg.rmt.dim_c
        params["dim_c"] = int(round(2 * job.size + 1)) if rule == "spin_dim" else int(rule)
    return model_from_spec(cfg.model, job.size, **params)


def _dynamic_series(cfg: SweepConfig, model, job: Job, psi0: np.ndarray) -> dict[str, Any]:
    sigs = set(cfg.signatures)
    t_max = max(cfg.windows)
    r = max(1, math.ceil(t_max / job.tau - 1e-9))
    stride = max(1, math.ceil(r / (cfg.max_samples - 1)))
    r = stride * math.ceil(r / stride)  # the last sample reaches the longest window
    need_ideal = bool(NEEDS_IDEAL & sigs)
    rec = (evolve_pair if need_ideal else trotter_evolve)(model, job.tau, r, psi0, stride)
    out: dict[str, Any] = {"record": rec}
    if sigs & {"observable", "delta_time_avg", "delta_pointwise"}:
        out["observable"] = expectation(rec.states_dig, model.observable, job.tau, rec.times, "observable")
    if need_ideal:
        out["observable_ideal"] = expectation(rec.states_ide, model.observable, job.tau, rec.times,
                                              "observable_ideal")
        out["simulation_fidelity"] = simulation_fidelity(rec)
    if "participation_ratio" in sigs:
        out["participation_ratio"] = participation_ratio(rec.states_dig, model.reference_basis,
                                                         model.pr_dimension, job.tau, rec.times)
    if "entropy" in sigs:
        out["entropy"] = subsystem_entropy(rec.states_dig, model.factor_dims, model.entropy_keep,
                                           job.tau, rec.times)
    if "perturbation_fidelity" in sigs:
        out["perturbation_fidelity"] = perturbation_fidelity(model, job.tau, r, psi0, cfg.perturbation, stride)
    return out


def run_job(cfg: SweepConfig, job: Job) -> list[dict[str, Any]]:
    """Every row of one (size, tau, extra parameters, initial state) point."""
    n_states = cfg.initial_state.count if cfg.initial_state.kind == "random" else 1
    suffix = job.label_suffix(n_states)
    rows: list[dict[str, Any]] = []

    def add(signature: str, window: float, value: float) -> None:
        rows.append({"model": cfg.model, "size": job.size, "tau": job.tau,
                     "signature": signature + suffix, "window": float(window), "value": float(value)})

    sigs = set(cfg.signatures)
    if sigs & set(AVERAGE_SIGNATURES):
        model = model_from_spec(cfg.model, job.size, **dict(cfg.params, **dict(job.extra)))
        psi0 = initial_state(cfg, model, job.state_index)
        series = _dynamic_series(cfg, model, job, psi0)
        rec = series["record"]
        if cfg.mode == "series":
            for name, ts in series.items():
                if name == "record":
                    continue
                for t, v in zip(ts.times, ts.values):
                    add(f"series:{name}", t, v)
        else:
            for w in cfg.windows:
                for sig in cfg.signatures:
                    if sig in ("observable", "observable_ideal", "participation_ratio", "entropy",
                               "perturbation_fidelity", "simulation_fidelity"):
                        add(sig, w, time_average(series[sig], w))
                    elif sig == "sim_infidelity":
                        add(sig, w, avg_sim_infidelity(rec, w))
                    elif sig == "delta_time_avg":
                        add(sig, w, delta_time_avg(series["observable"], series["observable_ideal"], w))
                    elif sig == "delta_pointwise":
                        add(sig, w, delta_pointwise(series["observable"], series["observable_ideal"], w))
    if "chi2_rmt" in sigs or "spacing_repulsion" in sigs:
        model = _statistics_model(cfg, job)
        if "chi2_rmt" in sigs:
            kwargs = {"n_bins": cfg.rmt.n_bins, "residual": cfg.rmt.residual}
            if cfg.rmt.d_fit is not None:
                kwargs["d_fit"] = cfg.rmt.d_fit
            report = analyse_model(model, job.tau, cfg.rmt.ensembles, **kwargs)
            for ens, value in sorted(report.x2.items()):
                add(f"chi2_{ens}", 0.0, value)
            add("chi2_rmt", 0.0, report.x2_rmt)
        if "spacing_repulsion" in sigs:
            s = level_spacings(sector_spectra(model.step_unitary(job.tau), model.symmetry),
                               cfg.rmt.unfold_window)
            add("spacing_repulsion", 0.0, float(np.mean(s < REPULSION_CUTOFF)))
    return rows


def _worker(payload: tuple[dict, Job]) -> tuple[str, list[dict] | None, str | None]:
    cfg_dict, job = payload
    cfg = SweepConfig.from_dict(cfg_dict)
    try:
        return "ok", run_job(cfg, job), None
    except Exception:  # reported in the failure manifest
        return "failed", None, traceback.format_exc()


def sort_rows(rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return sorted(rows, key=lambda r: (r["model"], r["size"], r["tau"], r["signature"], r["window"]))


class RowCache:
    """One JSON file per provenance hash under ``<out_dir>/cache``."""

    def __init__(self, root: str | Path):
        self.root = Path(root) / CACHE_DIR

    def get(self, key: str) -> list[dict] | None:
        path = self.root / f"{key}.json"
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        if data.get("provenance") != key:
            return None
        return data["rows"]

    def put(self, key: str, rows: list[dict]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = self.root / f".{key}.tmp"
        tmp.write_text(json.dumps({"provenance": key, "rows": rows}))
        os.replace(tmp, self.root / f"{key}.json")


def run_sweep(cfg: SweepConfig, out_dir: str | Path | None = None, workers: int | None = None,
              use_cache: bool = True) -> SweepResult:
    """Run every job of ``cfg``, reusing cached rows whose provenance matches.

    Rows are sorted canonically, so the table does not depend on the worker
    count or completion order. Failed jobs are listed in ``failures``.
    """
    cfg.validate()
    out_dir = Path(cfg.out_dir if out_dir is None else out_dir)
    workers = cfg.workers if workers is None else workers
    cache = RowCache(out_dir) if use_cache else None
    result = SweepResult(rows=[])
    pending = []
    for job in make_jobs(cfg):
        key = provenance_hash(cfg, job)
        hit = cache.get(key) if cache else None
        if hit is not None:
            result.rows.extend(dict(r, provenance=key) for r in hit)
            result.cached += 1
        else:
            pending.append((key, job))
    cfg_dict = cfg.to_dict()
    payloads = [(cfg_dict, job) for _, job in pending]
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_worker, payloads))
    else:
        outcomes = [_worker(p) for p in payloads]
    for (key, job), (status, rows, error) in zip(pending, outcomes):
        if status == "ok":
            if cache:
                cache.put(key, rows)
            result.rows.extend(dict(r, provenance=key) for r in rows)
            result.computed += 1
        else:
            result.failures.append({"size": job.size, "tau": job.tau, "extra": [list(e) for e in job.extra],
                                    "state_index": job.state_index, "provenance": key, "error": error})
    result.rows = sort_rows(result.rows)
    return result
