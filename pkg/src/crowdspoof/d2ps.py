"""Double differential pseudoranges and the D2PS random sample set.

For every satellite pair the subset holds the DDPs of all ordered receiver
pairs (reference receiver in the outer loop). Each subset is shuffled, the
subsets are summed index by index with a 1/sqrt(C(J,2)) scale, and the
per-epoch sets are averaged index-aligned over a K-epoch window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import SkyView
from .scenario import EpochMeasurements


@dataclass(frozen=True)
class DdpSubset:
    sat_pair: tuple[int, int]
    values: np.ndarray


@dataclass(frozen=True)
class D2psSampleSet:
    samples: np.ndarray
    M: int
    J: int
    K: int = 1

    def __post_init__(self):
        if len(self.samples) != self.M * (self.M - 1):
            raise ValueError(f"expected {self.M * (self.M - 1)} samples, got {len(self.samples)}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite D2PS sample")

    def __len__(self) -> int:
        return len(self.samples)


def sdp(rho_n, rho_m):
    """Single differential pseudorange between receivers n and m."""
    return rho_n - rho_m


def ddp(sdp_i, sdp_j):
    """Double differential pseudorange between satellites i and j."""
    return sdp_i - sdp_j


def ordered_pairs(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(reference, other) receiver indices, reference in the outer loop."""
    n, m = np.nonzero(~np.eye(M, dtype=bool))
    return n, m


def ddp_matrix(pseudoranges: np.ndarray, i_idx=None, j_idx=None) -> np.ndarray:
    """(P, M, M) DDPs for satellite pairs (i_idx[p], j_idx[p]) and all receiver pairs.

    Entry [p, n, m] is the DDP with receiver n as reference; the diagonal is zero.
    """
    rho = np.asarray(pseudoranges, dtype=float)
    if i_idx is None:
        i_idx, j_idx = np.triu_indices(rho.shape[1], k=1)
    between = rho[:, i_idx] - rho[:, j_idx]          # (M, P) satellite differences
    return between.T[:, :, None] - between.T[:, None, :]


def subset_matrix(pseudoranges: np.ndarray) -> np.ndarray:
    """(C(J,2), M(M-1)) array whose rows are the DdpSubset values."""
    M = pseudoranges.shape[0]
    full = ddp_matrix(pseudoranges)
    n, m = ordered_pairs(M)
    return full[:, n, m]


def build_subsets(epoch: EpochMeasurements, sky: SkyView | None = None) -> list[DdpSubset]:
    M, J = epoch.pseudoranges.shape
    if M < 2 or J < 2:
        raise ValueError("need at least two receivers and two satellites")
    if sky is not None and list(epoch.satellite_ids) != sky.ids:
        raise ValueError("epoch satellites do not match the sky view")
    rows = subset_matrix(epoch.pseudoranges)
    sats = epoch.satellite_ids
    i, j = np.triu_indices(J, k=1)
    return [DdpSubset((int(sats[a]), int(sats[b])), rows[p]) for p, (a, b) in enumerate(zip(i, j))]


def pair_generators(seed: int, sat_pairs: Sequence[tuple[int, int]]) -> list[np.random.Generator]:
    """One permutation stream per satellite pair, keyed by (seed, sat ids).

    The key does not include the epoch, so every epoch in a window applies the
    same permutation to a given satellite pair.
    """
    return [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(a), int(b))))
            for a, b in sat_pairs]


def build_d2ps_epoch(subsets, rng, M: int | None = None) -> D2psSampleSet:
    """Shuffle every subset independently and merge them with a 1/sqrt(C) scale.

    ``subsets`` is a list of DdpSubset or a (C, N) array. ``rng`` is either a
    single Generator, used to shuffle all rows, or a list with one Generator
    per subset.
    """
    if isinstance(subsets, np.ndarray):
        rows = subsets
    else:
        rows = np.stack([s.values for s in subsets])
    C, N = rows.shape
    if M is None:
        M = int(round((1 + math.sqrt(1 + 4 * N)) / 2))
    J = int(round((1 + math.sqrt(1 + 8 * C)) / 2))
    if isinstance(rng, np.random.Generator):
        shuffled = rng.permuted(rows, axis=1)
    else:
        if len(rng) != C:
            raise ValueError("need one generator per subset")
        shuffled = np.stack([g.permutation(r) for g, r in zip(rng, rows)])
    return D2psSampleSet(shuffled.sum(axis=0) / math.sqrt(C), M, J, 1)


def average_epochs(per_epoch_sets: Sequence[D2psSampleSet], K: int | None = None) -> D2psSampleSet:
    if K is None:
        K = len(per_epoch_sets)
    if K < 1 or len(per_epoch_sets) < K:
        raise ValueError("need K >= 1 sample sets")
    sets = per_epoch_sets[:K]
    n = len(sets[0])
    if any(len(s) != n for s in sets):
        raise ValueError("sample sets differ in length")
    mean = np.mean(np.stack([s.samples for s in sets]), axis=0)
    return D2psSampleSet(mean, sets[0].M, sets[0].J, K)


def build_d2ps(epochs: Sequence[EpochMeasurements], seed: int) -> D2psSampleSet:
    """Full window: subsets per epoch, keyed shuffles, merge, K-epoch average."""
    if not epochs:
        raise ValueError("no epochs")
    per_epoch = []
    for ep in epochs:
        M, J = ep.pseudoranges.shape
        if M < 2 or J < 2:
            raise ValueError("need at least two receivers and two satellites")
        sats = ep.satellite_ids
        i, j = np.triu_indices(J, k=1)
        gens = pair_generators(seed, list(zip(sats[i], sats[j])))
        per_epoch.append(build_d2ps_epoch(subset_matrix(ep.pseudoranges), gens, M))
    return average_epochs(per_epoch)


def build_d2ps_fast(rho: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo path: (K, M, J) pseudoranges to the averaged D2PS samples.

    One permutation per satellite pair is drawn from ``rng`` and shared by all
    K epochs, as in :func:`build_d2ps`.
    """
    K, M, J = rho.shape
    i, j = np.triu_indices(J, k=1)
    C = len(i)
    n, m = ordered_pairs(M)
    # averaging commutes with the permutation when it is shared across epochs
    between = (rho[:, :, i] - rho[:, :, j]).mean(axis=0).T     # (C, M)
    rows = between[:, n] - between[:, m]
    return rng.permuted(rows, axis=1).sum(axis=0) / math.sqrt(C)
