"""End-to-end detection of one measurement window, optionally per enclosed region."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..d2ps import build_d2ps
from ..detector import DetectionReport, detect
from ..geometry import SkyView
from ..glrt import GlrtConfig, GlrtOutcome, run_glrt
from ..resize import (DEFAULT_THRESHOLD, EnclosedRegion, enclose, map_and_tag, partition,
                      per_region_detection_inputs)
from ..scenario import EpochMeasurements, RoiBounds
from ..statmodels import variance_h0, variance_h1


@dataclass(frozen=True)
class RegionResult:
    region_id: int
    bounds: RoiBounds
    receiver_ids: tuple[int, ...]
    d2ps: DetectionReport | None
    glrt: GlrtOutcome | None
    samples: np.ndarray | None = None

    @property
    def n_receivers(self) -> int:
        return len(self.receiver_ids)


def sky_for(sky: SkyView, satellite_ids: Sequence[int]) -> SkyView:
    """Restrict a sky view to the given ids, in that order."""
    by_id = {s.id: s for s in sky.satellites}
    missing = [int(i) for i in satellite_ids if int(i) not in by_id]
    if missing:
        raise KeyError(f"satellites {missing} are not in the sky view")
    return SkyView(tuple(by_id[int(i)] for i in satellite_ids))


def _detect_block(region_id: int, bounds: RoiBounds, epochs: Sequence[EpochMeasurements],
                  sky: SkyView, *, methods, epsilon, sigma_rho, seed, include_noise_h0,
                  fa_pair) -> RegionResult:
    M = epochs[0].pseudoranges.shape[0]
    K = len(epochs)
    view = sky_for(sky, epochs[0].satellite_ids)
    report = glrt_out = samples = None
    if "d2ps" in methods:
        s2_h0 = variance_h0(bounds.D_x, bounds.D_y, view, sigma_rho=sigma_rho, K=K,
                            include_noise=include_noise_h0).sigma2
        d2 = build_d2ps(epochs, seed)
        samples = d2.samples
        s2_h1 = variance_h1(sigma_rho, K).sigma2 if sigma_rho > 0 else None
        # no H2 prediction: it needs the counterfeit position, unknown to a detector
        report = detect(d2, s2_h0, epsilon, M, region_id, sigma2_h1=s2_h1)
    if "glrt" in methods:
        rho = np.stack([ep.pseudoranges for ep in epochs])
        glrt_out = run_glrt(rho, GlrtConfig(sigma_rho=sigma_rho, fa_pair=fa_pair, K=K))
    return RegionResult(region_id, bounds, tuple(int(r) for r in epochs[0].receiver_ids),
                        report, glrt_out, samples)


def detect_window(epochs: Sequence[EpochMeasurements], sky: SkyView, roi: RoiBounds, *,
                  receiver_ids=None, reported_positions=None, resize: bool = False,
                  nx: int = 5, ny: int = 5, cell_threshold: int = DEFAULT_THRESHOLD,
                  methods: Sequence[str] = ("d2ps",), epsilon: float = 0.001,
                  sigma_rho: float = 5.0, seed: int = 0, include_noise_h0: bool = False,
                  fa_pair: float = 0.01) -> list[RegionResult]:
    """Detect on the whole ROI, or on every enclosed region when ``resize`` is set."""
    kw = dict(methods=methods, epsilon=epsilon, sigma_rho=sigma_rho, seed=seed,
              include_noise_h0=include_noise_h0, fa_pair=fa_pair)
    if not resize:
        return [_detect_block(0, roi, epochs, sky, **kw)]
    if receiver_ids is None or reported_positions is None:
        raise ValueError("resizing needs reported receiver positions")
    grid = map_and_tag(partition(roi, nx, ny), receiver_ids, reported_positions, cell_threshold)
    regions: list[EnclosedRegion] = enclose(grid)
    return [_detect_block(ri.region_id, ri.region.bounds, ri.epochs, sky, **kw)
            for ri in per_region_detection_inputs(regions, epochs)]


def resize_rows(results: Sequence[RegionResult], method: str = "d2ps") -> list[dict]:
    rows = []
    for r in results:
        dec = r.d2ps.decision if method == "d2ps" else r.glrt.decision
        rows.append({"region_id": r.region_id, "x_lo": r.bounds.a1, "x_hi": r.bounds.a2,
                     "y_lo": r.bounds.b1, "y_hi": r.bounds.b2,
                     "n_receivers": r.n_receivers, "decision": dec.value})
    return rows
