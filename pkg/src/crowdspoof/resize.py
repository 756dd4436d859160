"""Grid resizing of the ROI into rectangular enclosed regions of active cells.

Receivers are binned by reported position into a uniform nx x ny grid, cells
with more than ``threshold`` receivers are active, and every maximal
all-active rectangle of cells becomes an enclosed region that is detected on
its own dimensions. Regions may overlap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .scenario import EpochMeasurements, RoiBounds

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 4
DEFAULT_DIVISIONS = (5, 5)


@dataclass(frozen=True)
class Cell:
    bounds: RoiBounds
    receiver_ids: tuple[int, ...] = ()
    active: bool = False

    @property
    def count(self) -> int:
        return len(self.receiver_ids)


@dataclass(frozen=True)
class GridPartition:
    roi: RoiBounds
    nx: int
    ny: int
    cells: tuple[tuple[Cell, ...], ...]   # cells[ix][iy]
    out_of_roi: int = 0
    threshold: int | None = None

    @property
    def active_mask(self) -> np.ndarray:
        return np.array([[c.active for c in col] for col in self.cells], dtype=bool)

    @property
    def counts(self) -> np.ndarray:
        return np.array([[c.count for c in col] for col in self.cells], dtype=int)

    def cell_bounds(self, ix0: int, ix1: int, iy0: int, iy1: int) -> RoiBounds:
        """Bounds of the cell block [ix0, ix1] x [iy0, iy1] (inclusive indices)."""
        return RoiBounds(self.cells[ix0][iy0].bounds.a1, self.cells[ix1][iy1].bounds.a2,
                         self.cells[ix0][iy0].bounds.b1, self.cells[ix1][iy1].bounds.b2)


@dataclass(frozen=True)
class EnclosedRegion:
    bounds: RoiBounds
    member_cells: tuple[tuple[int, int], ...]
    receiver_ids: tuple[int, ...]

    @property
    def n_receivers(self) -> int:
        return len(self.receiver_ids)


def partition(roi: RoiBounds, nx: int = 5, ny: int = 5) -> GridPartition:
    if nx < 1 or ny < 1:
        raise ValueError("need at least one division per axis")
    xs = np.linspace(roi.a1, roi.a2, nx + 1)
    ys = np.linspace(roi.b1, roi.b2, ny + 1)
    xs[-1], ys[-1] = roi.a2, roi.b2
    cells = tuple(tuple(Cell(RoiBounds(xs[i], xs[i + 1], ys[j], ys[j + 1])) for j in range(ny))
                  for i in range(nx))
    return GridPartition(roi, nx, ny, cells)


def _cell_index(v: np.ndarray, lo: float, hi: float, n: int) -> np.ndarray:
    # half-open bins [lo_k, hi_k) with the last bin closed at hi; the edges are
    # the ones partition() builds, so membership agrees with the cell bounds
    edges = np.linspace(lo, hi, n + 1)
    return np.clip(np.searchsorted(edges, v, side="right") - 1, 0, n - 1)


def map_and_tag(grid: GridPartition, receiver_ids, reported_positions,
                threshold: int = DEFAULT_THRESHOLD) -> GridPartition:
    """Bin receivers by reported position and mark cells with count > threshold active."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    ids = np.asarray(receiver_ids)
    pos = np.asarray(reported_positions, dtype=float)
    pos = pos.reshape(len(ids), pos.shape[-1] if pos.ndim > 1 else 2)
    roi = grid.roi
    inside = roi.contains(pos[:, 0], pos[:, 1])
    ix = _cell_index(pos[inside, 0], roi.a1, roi.a2, grid.nx)
    iy = _cell_index(pos[inside, 1], roi.b1, roi.b2, grid.ny)
    kept = ids[inside]
    cells = []
    for i in range(grid.nx):
        col = []
        for j in range(grid.ny):
            members = tuple(int(r) for r in kept[(ix == i) & (iy == j)])
            col.append(replace(grid.cells[i][j], receiver_ids=members, active=len(members) > threshold))
        cells.append(tuple(col))
    n_out = int(len(ids) - inside.sum())
    if n_out:
        log.info("%d receivers reported outside the ROI", n_out)
    return replace(grid, cells=tuple(cells), out_of_roi=n_out, threshold=threshold)


def maximal_rectangles(mask: np.ndarray) -> list[tuple[int, int, int, int]]:
    """All maximal all-True axis-aligned rectangles as (ix0, ix1, iy0, iy1), inclusive.

    A rectangle is maximal when none of its four sides can be pushed out by
    one cell while staying all-True; that is equivalent to not being contained
    in any larger all-True rectangle.
    """
    mask = np.asarray(mask, dtype=bool)
    nx, ny = mask.shape
    S = np.zeros((nx + 1, ny + 1), dtype=int)
    S[1:, 1:] = np.cumsum(np.cumsum(mask, axis=0), axis=1)

    def full(x0, x1, y0, y1):
        if x0 < 0 or y0 < 0 or x1 >= nx or y1 >= ny:
            return False
        area = (x1 - x0 + 1) * (y1 - y0 + 1)
        return S[x1 + 1, y1 + 1] - S[x0, y1 + 1] - S[x1 + 1, y0] + S[x0, y0] == area

    out = []
    for x0 in range(nx):
        for y0 in range(ny):
            if not mask[x0, y0]:
                continue
            for x1 in range(x0, nx):
                if not mask[x1, y0]:
                    break
                for y1 in range(y0, ny):
                    if not full(x0, x1, y0, y1):
                        break
                    if (full(x0 - 1, x1, y0, y1) or full(x0, x1 + 1, y0, y1)
                            or full(x0, x1, y0 - 1, y1) or full(x0, x1, y0, y1 + 1)):
                        continue
                    out.append((x0, x1, y0, y1))
    return out


def enclose(grid: GridPartition) -> list[EnclosedRegion]:
    regions = []
    for x0, x1, y0, y1 in maximal_rectangles(grid.active_mask):
        members = tuple((i, j) for i in range(x0, x1 + 1) for j in range(y0, y1 + 1))
        rids = tuple(sorted(r for i, j in members for r in grid.cells[i][j].receiver_ids))
        regions.append(EnclosedRegion(grid.cell_bounds(x0, x1, y0, y1), members, rids))
    return regions


@dataclass(frozen=True)
class RegionInput:
    region_id: int
    region: EnclosedRegion
    D_x: float
    D_y: float
    epochs: tuple[EpochMeasurements, ...]


def per_region_detection_inputs(regions: Sequence[EnclosedRegion],
                                epochs: Sequence[EpochMeasurements]) -> list[RegionInput]:
    """Region dimensions plus the measurements of its member receivers."""
    out = []
    for rid, reg in enumerate(regions):
        if reg.n_receivers < 2:
            log.info("region %d skipped: %d receivers", rid, reg.n_receivers)
            continue
        sub = tuple(ep.restrict(reg.receiver_ids) for ep in epochs)
        out.append(RegionInput(rid, reg, reg.bounds.D_x, reg.bounds.D_y, sub))
    return out
