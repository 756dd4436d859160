"""CSV and manifest writers/readers for harness artifacts."""
from __future__ import annotations

import csv
import json
import platform
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import scipy

from ..scenario import EpochMeasurements, Fleet

MEASUREMENT_FIELDS = ("epoch", "receiver_id", "satellite_id", "pseudorange_m")
RECEIVER_FIELDS = ("receiver_id", "x_m", "y_m", "z_m")
TRUTH_FIELDS = ("receiver_id", "true_x_m", "true_y_m", "is_spoofed")
D2PS_FIELDS = ("idx", "sample_m")
DETECTION_FIELDS = ("region_id", "variance_m2", "gamma1", "gamma2", "decision",
                    "pd_h1_pred", "pd_h2_pred")
GLRT_DETECTION_FIELDS = DETECTION_FIELDS + ("method",)
RESIZE_FIELDS = ("region_id", "x_lo", "x_hi", "y_lo", "y_hi", "n_receivers", "decision")
ROC_FIELDS = ("fa", "pd")
TIMING_FIELDS = ("method", "M", "mean_seconds")
HISTOGRAM_FIELDS = ("bin_lo", "bin_hi", "count", "density", "predicted_density")


def _fmt(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path: str | Path, fields: Sequence[str], rows: Iterable[dict | Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            vals = [r[k] for k in fields] if isinstance(r, dict) else list(r)
            w.writerow([_fmt(v) for v in vals])
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_measurements(path, epochs: Sequence[EpochMeasurements]) -> Path:
    rows = ((ep.epoch_index, int(rid), int(sid), ep.pseudoranges[r, c])
            for ep in epochs
            for r, rid in enumerate(ep.receiver_ids)
            for c, sid in enumerate(ep.satellite_ids))
    return write_csv(path, MEASUREMENT_FIELDS, rows)


def read_measurements(path) -> list[EpochMeasurements]:
    rows = read_csv(path)
    if not rows:
        raise ValueError(f"{path}: no measurements")
    ep = np.array([int(r["epoch"]) for r in rows])
    rid = np.array([int(r["receiver_id"]) for r in rows])
    sid = np.array([int(r["satellite_id"]) for r in rows])
    val = np.array([float(r["pseudorange_m"]) for r in rows])
    epochs_u, rec_u, sat_u = np.unique(ep), np.unique(rid), np.unique(sid)
    cube = np.full((len(epochs_u), len(rec_u), len(sat_u)), np.nan)
    cube[np.searchsorted(epochs_u, ep), np.searchsorted(rec_u, rid),
         np.searchsorted(sat_u, sid)] = val
    if np.isnan(cube).any():
        raise ValueError(f"{path}: incomplete epoch x receiver x satellite grid")
    return [EpochMeasurements(int(k), cube[i], rec_u, sat_u) for i, k in enumerate(epochs_u)]


def write_receivers(path, fleet: Fleet) -> Path:
    rows = ((int(i), *fleet.reported_positions[k]) for k, i in enumerate(fleet.ids))
    return write_csv(path, RECEIVER_FIELDS, rows)


def read_receivers(path) -> tuple[np.ndarray, np.ndarray]:
    rows = read_csv(path)
    ids = np.array([int(r["receiver_id"]) for r in rows])
    pos = np.array([[float(r["x_m"]), float(r["y_m"]), float(r["z_m"])] for r in rows])
    return ids, pos


def write_truth(path, fleet: Fleet) -> Path:
    rows = ((int(i), fleet.true_positions[k, 0], fleet.true_positions[k, 1],
             int(fleet.is_spoofed[k])) for k, i in enumerate(fleet.ids))
    return write_csv(path, TRUTH_FIELDS, rows)


def write_d2ps(path, samples) -> Path:
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    return write_csv(path, D2PS_FIELDS, enumerate(x))


def read_d2ps(path) -> np.ndarray:
    return np.array([float(r["sample_m"]) for r in read_csv(path)])


def write_manifest(out_dir, *, command: str, seed: int, config_hash: str,
                   extra: dict | None = None) -> Path:
    """Run manifest; the only artifact that may differ between identical runs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "seed": seed, "config_hash": config_hash,
           "python": sys.version.split()[0], "numpy": np.__version__,
           "scipy": scipy.__version__, "platform": platform.platform()}
    doc.update(extra or {})
    path = out / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return path
