"""Satellite line-of-sight geometry in a local East-North-Up frame.

Angles are kept in degrees everywhere and only converted to radians inside
the trigonometric calls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class SatelliteLOS:
    id: int
    elevation: float
    azimuth: float

    def __post_init__(self):
        if not (math.isfinite(self.elevation) and math.isfinite(self.azimuth)):
            raise ValueError(f"satellite {self.id}: non-finite angle")
        if not 0.0 <= self.elevation <= 90.0:
            raise ValueError(f"satellite {self.id}: elevation {self.elevation} outside [0, 90]")
        object.__setattr__(self, "azimuth", float(self.azimuth) % 360.0)


@dataclass(frozen=True)
class SkyView:
    """Ordered set of commonly observed satellites (J >= 2)."""

    satellites: tuple[SatelliteLOS, ...]

    def __post_init__(self):
        sats = tuple(self.satellites)
        object.__setattr__(self, "satellites", sats)
        if len(sats) < 2:
            raise ValueError("a sky view needs at least two satellites")
        ids = [s.id for s in sats]
        if len(set(ids)) != len(ids):
            raise ValueError("satellite ids must be unique")

    @classmethod
    def from_angles(cls, elevations: Sequence[float], azimuths: Sequence[float],
                    ids: Sequence[int] | None = None) -> "SkyView":
        if ids is None:
            ids = range(1, len(elevations) + 1)
        return cls(tuple(SatelliteLOS(int(i), float(e), float(a))
                         for i, e, a in zip(ids, elevations, azimuths)))

    def __len__(self) -> int:
        return len(self.satellites)

    @property
    def ids(self) -> list[int]:
        return [s.id for s in self.satellites]

    @property
    def elevations(self) -> np.ndarray:
        return np.array([s.elevation for s in self.satellites])

    @property
    def azimuths(self) -> np.ndarray:
        return np.array([s.azimuth for s in self.satellites])

    def pairs(self) -> list[tuple[int, int]]:
        """Index pairs (i, j), i < j, in list order."""
        return pair_indices(len(self))

    def subset(self, n: int) -> "SkyView":
        return SkyView(self.satellites[:n])

    def reversed(self) -> "SkyView":
        return SkyView(self.satellites[::-1])

    def unit_vectors(self) -> np.ndarray:
        """(J, 3) array of ENU line-of-sight unit vectors."""
        return los_matrix(self.elevations, self.azimuths)


def pair_indices(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def los_matrix(elevation_deg, azimuth_deg) -> np.ndarray:
    el = np.radians(np.asarray(elevation_deg, dtype=float))
    az = np.radians(np.asarray(azimuth_deg, dtype=float))
    return np.stack([np.cos(el) * np.sin(az), np.cos(el) * np.cos(az), np.sin(el)], axis=-1)


def los_unit_vector(sat: SatelliteLOS) -> np.ndarray:
    """[cos(el) sin(az), cos(el) cos(az), sin(el)] for one satellite."""
    return los_matrix(sat.elevation, sat.azimuth)


def diff_geom_vector(sat_i: SatelliteLOS, sat_j: SatelliteLOS) -> np.ndarray:
    return los_unit_vector(sat_i) - los_unit_vector(sat_j)


def diff_geom_matrix(sky: SkyView) -> np.ndarray:
    """(C(J,2), 3) differential geometry vectors in the fixed pair order."""
    e = sky.unit_vectors()
    i, j = np.triu_indices(len(sky), k=1)
    return e[i] - e[j]


@dataclass(frozen=True)
class GeometryCoefficients:
    sum_ex2: float
    sum_ey2: float
    n_pairs: int

    @property
    def mean_ex2(self) -> float:
        return self.sum_ex2 / self.n_pairs

    @property
    def mean_ey2(self) -> float:
        return self.sum_ey2 / self.n_pairs


def geometry_coefficients(sky: SkyView) -> GeometryCoefficients:
    """Sums of squared East and North differential components over all pairs."""
    if len(sky) < 2:
        raise ValueError("need J >= 2")
    d = diff_geom_matrix(sky)
    return GeometryCoefficients(float(np.sum(d[:, 0] ** 2)), float(np.sum(d[:, 1] ** 2)), d.shape[0])


# -- sky-view files -----------------------------------------------------------

def parse_sky(lines: Iterable[str]) -> SkyView:
    sats = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'id elevation azimuth', got {raw!r}")
        sats.append(SatelliteLOS(int(parts[0]), float(parts[1]), float(parts[2])))
    return SkyView(tuple(sats))


def load_sky(path: str | Path) -> SkyView:
    with open(path) as fh:
        return parse_sky(fh)


def write_sky(sky: SkyView, path: str | Path, header: str = "") -> None:
    with open(path, "w") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        fh.write("# id elevation_deg azimuth_deg\n")
        for s in sky.satellites:
            fh.write(f"{s.id} {s.elevation:.4f} {s.azimuth:.4f}\n")


def sky12() -> SkyView:
    """The committed 12-satellite open-sky fixture (all above a 10 deg mask)."""
    return load_sky(Path(__file__).parent / "data" / "sky12.txt")
