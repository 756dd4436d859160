"""DP-GLRT baseline: one pairwise test per (receiver pair, satellite pair), then voting.

Each pair test asks whether a K-epoch DDP series is consistent with pure
measurement noise, which is what two receivers captured by the same spoofer
produce. The per-pair statistic is the GLRT for an unknown constant DDP in
white noise of variance 4 sigma_rho^2: T = (sum_k ddp_k)^2 / (4 K sigma_rho^2),
chi-squared with one degree of freedom when the pair is spoofed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .detector import Decision
from .statmodels import chi2_inv

H1_VOTE = True   # pair looks spoofed (DDP is pure noise)
H0_VOTE = False


@dataclass(frozen=True)
class GlrtConfig:
    sigma_rho: float = 5.0
    fa_pair: float = 0.01
    vote_high: float = 0.9
    vote_low: float = 0.9
    K: int = 1

    def __post_init__(self):
        for name in ("vote_high", "vote_low"):
            v = getattr(self, name)
            if not 0.5 < v <= 1.0:
                raise ValueError(f"{name}={v} must lie in (0.5, 1]")
        if not 0.0 < self.fa_pair < 1.0:
            raise ValueError("fa_pair must lie in (0, 1)")

    @property
    def threshold(self) -> float:
        return _chi2_1_quantile(1.0 - self.fa_pair)


@lru_cache(maxsize=256)
def _chi2_1_quantile(p: float) -> float:
    return chi2_inv(p, 1)


@dataclass(frozen=True)
class GlrtOutcome:
    n_tests: int
    n_h1_votes: int
    n_h0_votes: int
    decision: Decision

    @property
    def h1_fraction(self) -> float:
        return self.n_h1_votes / self.n_tests


def pair_statistic(ddp_series, sigma_rho: float) -> float:
    s = np.asarray(ddp_series, dtype=float)
    if not sigma_rho > 0:
        raise ValueError("sigma_rho must be positive")
    return float(s.sum() ** 2 / (s.size * 4.0 * sigma_rho**2))


def glrt_pair_test(ddp_series, cfg: GlrtConfig) -> bool:
    """True (H1 vote) when the series is consistent with pure noise."""
    return pair_statistic(ddp_series, cfg.sigma_rho) <= cfg.threshold


def glrt_aggregate(votes, cfg: GlrtConfig) -> GlrtOutcome:
    v = np.asarray(votes, dtype=bool)
    if v.size == 0:
        raise ValueError("no votes")
    return outcome_from_counts(int(v.sum()), int(v.size), cfg)


def outcome_from_counts(n_h1: int, n_tests: int, cfg: GlrtConfig) -> GlrtOutcome:
    n_h0 = n_tests - n_h1
    if n_h1 >= cfg.vote_high * n_tests:
        decision = Decision.H1
    elif n_h0 >= cfg.vote_low * n_tests:
        decision = Decision.H0
    else:
        decision = Decision.H2
    return GlrtOutcome(n_tests, n_h1, n_h0, decision)


def glrt_predicted_fraction(alpha: float, M: int) -> float:
    """Expected share of receiver pairs that are both spoofed."""
    if not 0.0 <= alpha <= 1.0 or M < 2:
        raise ValueError("need alpha in [0, 1] and M >= 2")
    t = alpha * (alpha - 1.0 / M) / (1.0 - 1.0 / M)
    return min(max(t, 0.0), 1.0)


def pair_ddp_series(rho: np.ndarray) -> np.ndarray:
    """(K, C(J,2), C(M,2)) DDP series for unordered receiver and satellite pairs."""
    K, M, J = rho.shape
    i, j = np.triu_indices(J, k=1)
    n, m = np.triu_indices(M, k=1)
    between = rho[:, :, i] - rho[:, :, j]            # (K, M, P)
    return np.transpose(between[:, n, :] - between[:, m, :], (0, 2, 1))


def glrt_votes(rho: np.ndarray, cfg: GlrtConfig) -> np.ndarray:
    """Vectorized pair tests over a (K, M, J) pseudorange block; True = H1 vote."""
    K = rho.shape[0]
    s = pair_ddp_series(rho).sum(axis=0)
    T = s * s / (K * 4.0 * cfg.sigma_rho**2)
    return T <= cfg.threshold


def run_glrt(rho: np.ndarray, cfg: GlrtConfig) -> GlrtOutcome:
    v = glrt_votes(rho, cfg)
    return outcome_from_counts(int(v.sum()), int(v.size), cfg)


def run_glrt_pairwise(rho: np.ndarray, cfg: GlrtConfig) -> GlrtOutcome:
    """Reference path: one independent pair test per receiver pair and satellite pair."""
    K, M, J = rho.shape
    votes = []
    for a in range(J):
        for b in range(a + 1, J):
            for n in range(M):
                for m in range(n + 1, M):
                    series = (rho[:, n, a] - rho[:, m, a]) - (rho[:, n, b] - rho[:, m, b])
                    votes.append(glrt_pair_test(series, cfg))
    return glrt_aggregate(votes, cfg)
