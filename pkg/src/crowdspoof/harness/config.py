"""Scenario and experiment configuration, TOML ingestion and hashing."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from ..geometry import SkyView, load_sky, sky12
from ..scenario import NoiseConfig, RoiBounds, ScenarioConfig, SpooferConfig, SpoofMode

SWEEP_KEYS = ("fa", "alpha", "D", "M", "K", "delta_sigma", "spoofed_sats", "pf_ratio")


@dataclass
class RunOptions:
    """Detection-side settings that are not part of the simulated world."""

    sky: str = "sky12"
    epsilon: float = 0.001
    nx: int = 5
    ny: int = 5
    cell_threshold: int = 4
    fa_pair: float = 0.01
    include_noise_h0: bool = False


@dataclass
class ExperimentSpec:
    scenario: ScenarioConfig
    method: str = "d2ps"                    # d2ps | glrt | both
    sweep: dict[str, list] = field(default_factory=dict)
    trials: int = 1000
    master_seed: int = 0
    truth: str = "H1"
    options: RunOptions = field(default_factory=RunOptions)
    label: str = ""

    def __post_init__(self):
        if self.method not in ("d2ps", "glrt", "both"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(self.sweep) - set(SWEEP_KEYS)
        if unknown:
            raise ValueError(f"unknown sweep keys {sorted(unknown)}")
        if any(len(v) == 0 for v in self.sweep.values()):
            raise ValueError("empty sweep list")

    @property
    def methods(self) -> tuple[str, ...]:
        return ("d2ps", "glrt") if self.method == "both" else (self.method,)


def resolve_sky(name: str, base: Path | None = None) -> SkyView:
    if name == "sky12":
        return sky12()
    path = Path(name)
    if base is not None and not path.is_absolute():
        path = base / path
    return load_sky(path)


def _build(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**data)


def scenario_from_dict(d: dict[str, Any]) -> tuple[ScenarioConfig, RunOptions]:
    roi_d = dict(d.get("roi", {}))
    if "D" in roi_d:
        roi = RoiBounds.square(float(roi_d.pop("D")), bool(roi_d.pop("centered", True)))
        if roi_d:
            raise ValueError(f"'D' cannot be combined with {sorted(roi_d)}")
    elif roi_d:
        roi = _build(RoiBounds, roi_d)
    else:
        roi = RoiBounds.square(100.0)
    spoofer = None
    if "spoofer" in d:
        sp = dict(d["spoofer"])
        if "mode" in sp:
            sp["mode"] = SpoofMode(sp["mode"])
        spoofer = _build(SpooferConfig, sp)
    noise = _build(NoiseConfig, dict(d.get("noise", {})))
    run = dict(d.get("run", {}))
    scen_keys = {"n_receivers", "epochs", "seed", "far_field", "sigma_pos"}
    opt_keys = {f.name for f in dataclasses.fields(RunOptions)}
    unknown = set(run) - scen_keys - opt_keys
    if unknown:
        raise ValueError(f"unknown run keys: {sorted(unknown)}")
    cfg = ScenarioConfig(roi=roi, spoofer=spoofer, noise=noise,
                         **{k: v for k, v in run.items() if k in scen_keys})
    return cfg, RunOptions(**{k: v for k, v in run.items() if k in opt_keys})


def load_config(path: str | Path) -> tuple[ScenarioConfig, RunOptions]:
    with open(path, "rb") as fh:
        return scenario_from_dict(tomllib.load(fh))


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if hasattr(obj, "value") and not isinstance(obj, (int, float)):
        return obj.value
    return obj


def config_hash(*objs) -> str:
    blob = json.dumps([to_jsonable(o) for o in objs], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def apply_params(cfg: ScenarioConfig, params: dict[str, Any]) -> ScenarioConfig:
    """A grid point applied to the base scenario (``fa`` is detection-side only)."""
    roi = cfg.roi
    if "D" in params:
        roi = RoiBounds.square(float(params["D"]))
    spoofer = cfg.spoofer
    if any(k in params for k in ("alpha", "spoofed_sats", "pf_ratio")):
        spoofer = spoofer or SpooferConfig()
        if "alpha" in params:
            spoofer = replace(spoofer, mode=SpoofMode.DIRECT_FRACTION,
                              spoofed_fraction=float(params["alpha"]))
        if "spoofed_sats" in params:
            spoofer = replace(spoofer, spoofed_satellite_count=int(params["spoofed_sats"]))
        if "pf_ratio" in params:
            spoofer = replace(spoofer, counterfeit_distance_ratio=float(params["pf_ratio"]))
    noise = cfg.noise
    if "delta_sigma" in params:
        ds = float(params["delta_sigma"])
        noise = replace(noise, multipath_enabled=ds > 0, delta_sigma=ds)
    return replace(cfg, roi=roi, spoofer=spoofer, noise=noise,
                   n_receivers=int(params.get("M", cfg.n_receivers)),
                   epochs=int(params.get("K", cfg.epochs)))
