"""CSV and JSON writers for result tables."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable

from ..rmt import BINNING_RULE, MAX_BINS, MIN_BINS, PAIR_TOL, UNFOLD_WINDOW
from ..signatures import ENTROPY_CLIP, TIME_AVERAGE_CONVENTION
from .sweep import CODE_VERSION, REPULSION_CUTOFF

CSV_FIELDS = ("model", "size", "tau", "signature", "window", "value")


def settings_metadata() -> dict[str, Any]:
    """Every numerical convention that shapes the emitted values."""
    return {
        "code_version": CODE_VERSION,
        "time_units": "2 pi / g",
        "time_average": TIME_AVERAGE_CONVENTION,
        "entropy_eigenvalue_clip": ENTROPY_CLIP,
        "bin_rule": BINNING_RULE,
        "bin_limits": [MIN_BINS, MAX_BINS],
        "chi2_residual_default": "area-normalised density at bin centres",
        "chi2_exclusion": "bins whose target density underflows double precision",
        "cse_density": "renormalised to unit area",
        "unfolding": f"local mean of 2w neighbouring spacings, w = {UNFOLD_WINDOW}",
        "unfolding_window": UNFOLD_WINDOW,
        "degeneracy_pairing_tol": PAIR_TOL,
        "spacing_repulsion_cutoff": REPULSION_CUTOFF,
        "window_column": "averaging window for averages, sample time for series rows, 0 for static statistics",
        "step_order": "U_tau is the product of summand unitaries in list order (last summand acts first)",
    }


def _fmt(x: Any) -> str:
    return x if isinstance(x, str) else repr(float(x))


def format_csv(rows: Iterable[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in rows:
        writer.writerow([_fmt(r[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict[str, Any]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [{"model": r["model"], "size": float(r["size"]), "tau": float(r["tau"]),
             "signature": r["signature"], "window": float(r["window"]), "value": float(r["value"])}
            for r in reader]


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_csv(rows: Iterable[dict[str, Any]], path: str | Path) -> Path:
    return _write(Path(path), format_csv(rows))


def write_json(rows: Iterable[dict[str, Any]], path: str | Path, config: dict | None = None,
               failures: list | None = None) -> Path:
    doc = {"metadata": settings_metadata(), "config": config, "rows": list(rows), "failures": failures or []}
    return _write(Path(path), json.dumps(doc, indent=1, sort_keys=True) + "\n")


def emit(rows: list[dict[str, Any]], out_dir: str | Path, stem: str, fmt: str = "csv",
         config: dict | None = None, failures: list | None = None) -> list[Path]:
    """Write ``<stem>.csv`` and/or ``<stem>.json`` (``fmt`` is csv, json or both)."""
    out_dir = Path(out_dir)
    written = []
    if fmt in ("csv", "both"):
        written.append(write_csv(rows, out_dir / f"{stem}.csv"))
    if fmt in ("json", "both"):
        written.append(write_json(rows, out_dir / f"{stem}.json", config, failures))
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"format must be csv, json or both, got {fmt!r}")
    if failures:
        written.append(_write(out_dir / f"{stem}.failures.json", json.dumps(failures, indent=1) + "\n"))
    return written
