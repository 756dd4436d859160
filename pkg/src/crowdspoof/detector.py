"""Tri-level variance detector: spoofing-free, fully-spoofed, partially-spoofed."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .statmodels import chi2_cdf, chi2_inv


class Decision(str, enum.Enum):
    H0 = "H0"   # spoofing-free
    H1 = "H1"   # fully spoofed
    H2 = "H2"   # partially spoofed

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {Decision.H1: 0, Decision.H0: 1, Decision.H2: 2}


@dataclass(frozen=True)
class Thresholds:
    gamma1: float
    gamma2: float
    epsilon: float
    M: int
    sigma2_h0: float


@dataclass(frozen=True)
class DetectionReport:
    region_id: int
    sample_variance: float
    thresholds: Thresholds
    decision: Decision
    predicted_pd_h1: float | None = None
    predicted_pd_h2: float | None = None

    def row(self) -> dict:
        return {"region_id": self.region_id, "variance_m2": self.sample_variance,
                "gamma1": self.thresholds.gamma1, "gamma2": self.thresholds.gamma2,
                "decision": self.decision.value,
                "pd_h1_pred": "" if self.predicted_pd_h1 is None else self.predicted_pd_h1,
                "pd_h2_pred": "" if self.predicted_pd_h2 is None else self.predicted_pd_h2}


def sample_variance(samples) -> float:
    """Zero-mean variance estimate sum(d^2) / (N - 1); no mean is subtracted."""
    d = np.asarray(getattr(samples, "samples", samples), dtype=float)
    N = d.size
    if N < 2:
        raise ValueError("need at least two samples")
    return float(np.dot(d, d) / (N - 1))


def thresholds(sigma2_h0: float, M: int, epsilon: float) -> Thresholds:
    """Chi-squared thresholds with M degrees of freedom, epsilon/2 in each tail."""
    if not sigma2_h0 > 0:
        raise ValueError("spoofing-free variance must be positive")
    if M < 2:
        raise ValueError("need M >= 2")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    scale = sigma2_h0 / M
    return Thresholds(scale * chi2_inv(epsilon / 2.0, M), scale * chi2_inv(1.0 - epsilon / 2.0, M),
                      epsilon, M, sigma2_h0)


def decide(sigma2_hat: float, th: Thresholds) -> Decision:
    if sigma2_hat < th.gamma1:
        return Decision.H1
    if sigma2_hat > th.gamma2:
        return Decision.H2
    return Decision.H0


def decide_many(sigma2_hat, th: Thresholds) -> np.ndarray:
    """Vectorized decide: 0 for H1, 1 for H0, 2 for H2 (the Decision.rank order)."""
    s = np.asarray(sigma2_hat, dtype=float)
    return np.where(s < th.gamma1, 0, np.where(s > th.gamma2, 2, 1))


def predicted_pd(th: Thresholds, sigma2_h1: float, sigma2_h2: float,
                 M: int | None = None) -> tuple[float, float]:
    """Predicted detection probabilities for the fully- and partially-spoofed cases."""
    M = th.M if M is None else M
    if not (sigma2_h1 > 0 and sigma2_h2 > 0):
        raise ValueError("variances must be positive")
    pd_h1 = chi2_cdf(M * th.gamma1 / sigma2_h1, M)
    pd_h2 = 1.0 - chi2_cdf(M * th.gamma2 / sigma2_h2, M)
    return pd_h1, pd_h2


def detect(samples, sigma2_h0: float, epsilon: float, M: int, region_id: int = 0,
           sigma2_h1: float | None = None, sigma2_h2: float | None = None) -> DetectionReport:
    s2 = sample_variance(samples)
    th = thresholds(sigma2_h0, M, epsilon)
    pd1 = pd2 = None
    if sigma2_h1 is not None:
        pd1 = predicted_pd(th, sigma2_h1, sigma2_h1, M)[0]
    if sigma2_h2 is not None:
        pd2 = predicted_pd(th, sigma2_h2, sigma2_h2, M)[1]
    return DetectionReport(region_id, s2, th, decide(s2, th), pd1, pd2)
