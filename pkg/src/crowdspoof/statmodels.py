"""Closed-form statistics of the D2PS sample set.

Triangle and sum-of-triangles densities for the spatial spread of
differential positions, variance predictions for the spoofing-free (H0),
fully-spoofed (H1), partially-spoofed (H2) and partial-satellite cases, and
a small chi-squared CDF/quantile pair built on the regularized incomplete
gamma function.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq

from .geometry import SkyView, geometry_coefficients
from .scenario import RoiBounds


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"
    H2 = "H2"
    H2_PARTIAL_SATS = "H2_partial_sats"


@dataclass(frozen=True)
class VariancePrediction:
    sigma2: float
    hypothesis: Hypothesis
    inputs: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sigma2 >= 0.0:
            raise ValueError(f"negative variance prediction {self.sigma2}")


# -- densities ------------------------------------------------------------------

def triangle_pdf(x, D: float):
    """Symmetric triangle density on [-D, D] with its peak 1/D at zero."""
    if not D > 0:
        raise ValueError("triangle half-width must be positive")
    x = np.asarray(x, dtype=float)
    out = np.clip(D - np.abs(x), 0.0, None) / D**2
    return out if out.ndim else float(out)


def _sum_pdf_three_band(h, big, small):
    # branches valid for big > small > big - small; k_tr * p_k(|h|)
    X, Y = big, small
    p1 = h**3 / 3 - Y * h**2 + (3 * X - Y) * Y**2 / 3
    p2 = (h**3 / 2 - (X + Y) / 2 * h**2 + (X - Y) ** 2 / 2 * h
          + (3 * Y - X) / 6 * X**2 + (3 * X - Y) / 6 * Y**2)
    p3 = (h**3 / 6 + (Y - X) / 2 * h**2 + (X**2 - Y**2 - 2 * X * Y) / 2 * h
          + (3 * Y - X) / 6 * X**2 + (3 * X + Y) / 6 * Y**2)
    p4 = -h**3 / 6 + (X + Y) / 2 * h**2 - (X + Y) ** 2 / 2 * h + (X + Y) ** 3 / 6
    out = np.select([h < X - Y, h < Y, h < X, h < X + Y], [p1, p2, p3, p4], 0.0)
    return out / (X * Y) ** 2


def _sum_pdf_truncated_powers(h, big, small):
    # each triangle is a second difference of a ramp, so their convolution is a
    # 3x3 combination of cubic truncated powers; valid for every width ratio
    out = np.zeros_like(h)
    for a, ca in ((-big, 1.0), (0.0, -2.0), (big, 1.0)):
        for b, cb in ((-small, 1.0), (0.0, -2.0), (small, 1.0)):
            z = h - a - b
            out += ca * cb * np.where(z > 0, z, 0.0) ** 3 / 6.0
    out = np.where(h < big + small, np.clip(out, 0.0, None), 0.0)
    return out / (big * small) ** 2


def sum_pdf(h, D_ex: float, D_ey: float):
    """Density of the sum of two independent zero-centred triangle variables.

    ``D_ex`` and ``D_ey`` are the half-widths ``|e_x| D_x`` and ``|e_y| D_y``.
    The density is symmetric in its two addends, so the widths are ordered
    first. The four-branch piecewise cubic is used when the wider triangle is
    less than twice the narrower one; other ratios go through the equivalent
    truncated-power form.
    """
    if not (D_ex > 0 and D_ey > 0):
        raise ValueError("triangle half-widths must be positive")
    big, small = max(D_ex, D_ey), min(D_ex, D_ey)
    a = np.abs(np.asarray(h, dtype=float))
    if big > small > big - small:
        out = _sum_pdf_three_band(a, big, small)
    else:
        out = _sum_pdf_truncated_powers(a, big, small)
    return out if out.ndim else float(out)


# -- variance predictions -------------------------------------------------------

def _horizontal_spread(D_x: float, D_y: float, sky: SkyView) -> float:
    g = geometry_coefficients(sky)
    return (D_x**2 * g.sum_ex2 + D_y**2 * g.sum_ey2) / (6.0 * g.n_pairs)


def variance_h0(D_x: float, D_y: float, sky: SkyView, *, sigma_rho: float = 0.0,
                K: int = 1, include_noise: bool = False) -> VariancePrediction:
    """Spoofing-free D2PS variance for receivers spread uniformly over D_x x D_y.

    Only geometry enters by default; ``include_noise`` adds the 4 sigma_rho^2 / K
    measurement-noise floor.
    """
    if D_x < 0 or D_y < 0:
        raise ValueError("region dimensions must be nonnegative")
    s2 = _horizontal_spread(D_x, D_y, sky)
    if include_noise:
        s2 += 4.0 * sigma_rho**2 / K
    return VariancePrediction(s2, Hypothesis.H0, {"D_x": D_x, "D_y": D_y, "J": len(sky),
                                                  "sigma_rho": sigma_rho, "K": K,
                                                  "include_noise": include_noise})


def variance_h1(sigma_rho: float, K: int = 1) -> VariancePrediction:
    """Fully-spoofed variance 4 sigma_rho^2, divided by K when K epochs are averaged."""
    if sigma_rho < 0 or K < 1:
        raise ValueError("need sigma_rho >= 0 and K >= 1")
    return VariancePrediction(4.0 * sigma_rho**2 / K, Hypothesis.H1,
                              {"sigma_rho": sigma_rho, "K": K})


def offset_spread_1d(c: float, lo: float, hi: float) -> float:
    """Second moment of +-(c - u), u ~ U(lo, hi): the spoofed-to-authentic spread."""
    return ((c - lo) ** 2 + (c - hi) ** 2 + (c - lo) * (c - hi)) / 3.0


def variance_mixed(auth_region: RoiBounds, p_f, sky: SkyView) -> float:
    """Variance of DDPs between a receiver at the counterfeit position and authentic ones."""
    g = geometry_coefficients(sky)
    sx = offset_spread_1d(p_f[0], auth_region.a1, auth_region.a2)
    sy = offset_spread_1d(p_f[1], auth_region.b1, auth_region.b2)
    return (sx * g.sum_ex2 + sy * g.sum_ey2) / g.n_pairs


CROSS_TERM_READINGS = ("std", "variance")
DEFAULT_CROSS_TERM = "std"


def variance_h2(alpha: float, auth_region: RoiBounds, p_f, sky: SkyView, sigma_rho: float,
                *, cross_term: str = DEFAULT_CROSS_TERM) -> VariancePrediction:
    """Partially-spoofed variance for a spoofed fraction ``alpha``.

    Combines the authentic-pair variance over ``auth_region``, the spoofed-pair
    variance 4 sigma_rho^2 and the mixed-pair variance at the counterfeit
    position. The last term couples the mixed spread with the other two; with
    ``cross_term="std"`` it multiplies standard deviations, with
    ``"variance"`` it multiplies the squared quantities literally.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if cross_term not in CROSS_TERM_READINGS:
        raise ValueError(f"cross_term must be one of {CROSS_TERM_READINGS}")
    s2_a = _horizontal_spread(auth_region.D_x, auth_region.D_y, sky)
    s2_s = variance_mixed(auth_region, p_f, sky)
    s2_f = 4.0 * sigma_rho**2
    a, b = alpha, 1.0 - alpha
    if cross_term == "std":
        cross = (math.sqrt(s2_a) + 2.0 * sigma_rho) * math.sqrt(s2_s)
    else:
        cross = (s2_a + 2.0 * sigma_rho**2) * s2_s
    s2 = b**4 * s2_a + a**4 * s2_f + 4.0 * a**2 * b**2 * s2_s + 2.0 * a * b * cross
    return VariancePrediction(s2, Hypothesis.H2, {
        "alpha": alpha, "D_x_auth": auth_region.D_x, "D_y_auth": auth_region.D_y,
        "p_f": tuple(float(v) for v in p_f[:2]), "sigma_rho": sigma_rho,
        "sigma2_auth": s2_a, "sigma2_mixed": s2_s, "cross_term": cross_term})


def variance_h2_mixture(alpha: float, auth_region: RoiBounds, p_f, sky: SkyView,
                        sigma_rho: float) -> float:
    """Large-M second moment of the D2PS set treated as a three-way pair mixture.

    Pair shares are (1 - alpha)^2 authentic, alpha^2 spoofed and
    2 alpha (1 - alpha) mixed, and every pair carries the 4 sigma_rho^2 noise.
    Used as a diagnostic next to :func:`variance_h2`.
    """
    s2_a = _horizontal_spread(auth_region.D_x, auth_region.D_y, sky)
    s2_s = variance_mixed(auth_region, p_f, sky)
    return (1 - alpha) ** 2 * s2_a + 2 * alpha * (1 - alpha) * s2_s + 4.0 * sigma_rho**2


def variance_partial_sats(n_spoofed: int, J: int, auth_variance: float,
                          sigma_rho: float) -> VariancePrediction:
    if not 0 <= n_spoofed <= J:
        raise ValueError(f"n_spoofed={n_spoofed} must lie in [0, J={J}]")
    r = math.comb(n_spoofed, 2) / math.comb(J, 2)
    s2 = (1.0 - r) ** 2 * auth_variance + 4.0 * r**2 * sigma_rho**2
    return VariancePrediction(s2, Hypothesis.H2_PARTIAL_SATS,
                              {"n_spoofed": n_spoofed, "J": J, "ratio": r,
                               "auth_variance": auth_variance, "sigma_rho": sigma_rho})


# -- chi-squared ----------------------------------------------------------------

_EPS = 1e-16
_MAX_ITER = 10_000


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by the power series, good for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # Q(a, x) by the modified Lentz continued fraction, good for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("need x >= 0 and a > 0")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def chi2_cdf(x: float, M: int) -> float:
    if x < 0:
        raise ValueError("chi-squared argument must be nonnegative")
    if M < 1:
        raise ValueError("degrees of freedom must be >= 1")
    return gammainc_lower(M / 2.0, x / 2.0)


def chi2_inv(p: float, M: int) -> float:
    """Quantile of the chi-squared distribution, by bracketed root finding."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability {p} outside (0, 1)")
    if M < 1:
        raise ValueError("degrees of freedom must be >= 1")
    hi = M + 10.0 * math.sqrt(2.0 * M) + 10.0
    while chi2_cdf(hi, M) < p:
        hi *= 2.0
    return brentq(lambda x: chi2_cdf(x, M) - p, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
