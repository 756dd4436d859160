"""Ground truth and pseudorange synthesis for one simulated world.

A world is a rectangular region of interest (ROI) in local ENU metres, a
fleet of receivers placed uniformly inside it, an optional spoofer that
captures some of them, and K synchronized epochs of pseudoranges with UERE
noise and optional MOPS-style Gauss-Markov multipath that is correlated
between nearby receivers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .geometry import SkyView

C_LIGHT = 299_792_458.0
GPS_RANGE = 20_200e3


@dataclass(frozen=True)
class RoiBounds:
    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self):
        if not (self.a1 < self.a2 and self.b1 < self.b2):
            raise ValueError(f"degenerate ROI {self}")

    @classmethod
    def square(cls, D: float, centered: bool = True) -> "RoiBounds":
        if centered:
            return cls(-D / 2, D / 2, -D / 2, D / 2)
        return cls(0.0, D, 0.0, D)

    @property
    def D_x(self) -> float:
        return self.a2 - self.a1

    @property
    def D_y(self) -> float:
        return self.b2 - self.b1

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.a1 + self.a2), 0.5 * (self.b1 + self.b2))

    @property
    def area(self) -> float:
        return self.D_x * self.D_y

    def contains(self, x, y):
        return (x >= self.a1) & (x <= self.a2) & (y >= self.b1) & (y <= self.b2)


class SpoofMode(str, enum.Enum):
    HIGH_POWER_DOMINANT = "HighPowerDominant"
    APPROACH_DRAG_OFF = "ApproachDragOff"
    DIRECT_FRACTION = "DirectFraction"


@dataclass(frozen=True)
class SpooferConfig:
    """Spoofer placement, link budget and capture model.

    Link-budget defaults reproduce the high-power-dominant example: a 0 dBm
    omnidirectional spoofer that overwhelms receivers within ~120 m and puts
    receivers within ~3.8 km at risk.
    """

    mode: SpoofMode = SpoofMode.DIRECT_FRACTION
    spoofer_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    counterfeit_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    tx_power: float = 0.0          # dBm
    tx_gain: float = 0.0           # dB
    rx_gain_spoof: float = -10.0   # dB
    rx_gain_auth: float = 0.0      # dB
    auth_power: float = -128.0     # dBm
    env_loss: float = 5.0          # dB
    sapr_tov: float = 35.0         # dB
    sapr_risk: float = 5.0         # dB
    wavelength: float = 0.1903     # m, GPS L1
    hardware_delay: float = 500e-9  # s
    spoofed_fraction: float = 0.0
    spoofed_satellite_count: int | None = None
    # when set, each world draws the counterfeit fix at this multiple of the
    # ROI size from the origin, with a uniformly random azimuth
    counterfeit_distance_ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", SpoofMode(self.mode))
        object.__setattr__(self, "spoofer_position", _enu3(self.spoofer_position))
        object.__setattr__(self, "counterfeit_position", _enu3(self.counterfeit_position))
        if not 0.0 <= self.spoofed_fraction <= 1.0:
            raise ValueError("spoofed_fraction must lie in [0, 1]")
        if not self.sapr_tov >= self.sapr_risk:
            raise ValueError("sapr_tov must not be below sapr_risk")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if self.spoofed_satellite_count is not None and self.spoofed_satellite_count < 0:
            raise ValueError("spoofed_satellite_count must be nonnegative")


def _enu3(p) -> tuple[float, float, float]:
    p = tuple(float(v) for v in p)
    if len(p) == 2:
        p = p + (0.0,)
    if len(p) != 3:
        raise ValueError(f"expected an ENU position, got {p}")
    return p


@dataclass(frozen=True)
class NoiseConfig:
    sigma_rho: float = 5.0
    multipath_enabled: bool = False
    delta_sigma: float = 0.0
    tau_corr: float = 25.0     # s, Gauss-Markov correlation time
    tau_d: float = 25.0        # m, spatial correlation decay
    theta_spoof: float = 5.0   # deg, arrival elevation of spoofing signals
    epoch_interval: float = 1.0  # s

    def __post_init__(self):
        if self.sigma_rho < 0 or self.delta_sigma < 0:
            raise ValueError("noise levels must be nonnegative")
        if not (self.tau_corr > 0 and self.tau_d > 0 and self.epoch_interval > 0):
            raise ValueError("correlation constants must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build one world (apart from the sky)."""

    roi: RoiBounds = field(default_factory=lambda: RoiBounds.square(100.0))
    n_receivers: int = 20
    spoofer: SpooferConfig | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    epochs: int = 1
    seed: int = 0
    far_field: bool = True
    sigma_pos: float = 5.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("need at least one epoch")


@dataclass(frozen=True)
class ReceiverTruth:
    id: int
    true_position: np.ndarray
    is_spoofed: bool
    reported_position: np.ndarray


@dataclass(frozen=True)
class Fleet:
    """Receiver truth stored column-wise; iterating yields ReceiverTruth rows."""

    ids: np.ndarray
    true_positions: np.ndarray      # (M, 3)
    is_spoofed: np.ndarray          # (M,) bool
    reported_positions: np.ndarray  # (M, 3)
    clock_bias: np.ndarray          # (M,) seconds

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, k: int) -> ReceiverTruth:
        return ReceiverTruth(int(self.ids[k]), self.true_positions[k],
                             bool(self.is_spoofed[k]), self.reported_positions[k])

    def __iter__(self) -> Iterator[ReceiverTruth]:
        return (self[k] for k in range(len(self)))

    @property
    def n_spoofed(self) -> int:
        return int(np.count_nonzero(self.is_spoofed))

    def select(self, mask_or_index) -> "Fleet":
        idx = np.asarray(mask_or_index)
        return Fleet(self.ids[idx], self.true_positions[idx], self.is_spoofed[idx],
                     self.reported_positions[idx], self.clock_bias[idx])


@dataclass(frozen=True)
class EpochMeasurements:
    epoch_index: int
    pseudoranges: np.ndarray   # (M, J) metres
    receiver_ids: np.ndarray
    satellite_ids: np.ndarray

    def __post_init__(self):
        M, J = self.pseudoranges.shape
        if len(self.receiver_ids) != M or len(self.satellite_ids) != J:
            raise ValueError("pseudorange matrix does not match receiver/satellite ids")

    def restrict(self, receiver_ids) -> "EpochMeasurements":
        rows = np.flatnonzero(np.isin(self.receiver_ids, receiver_ids))
        return EpochMeasurements(self.epoch_index, self.pseudoranges[rows],
                                 self.receiver_ids[rows], self.satellite_ids)


# -- receivers and spoofing -----------------------------------------------------

def place_receivers(roi: RoiBounds, M: int, rng: np.random.Generator) -> Fleet:
    """Uniform i.i.d. placement over the ROI; spoofing is assigned separately."""
    if M < 2:
        raise ValueError("need at least two receivers")
    pos = np.zeros((M, 3))
    pos[:, 0] = rng.uniform(roi.a1, roi.a2, M)
    pos[:, 1] = rng.uniform(roi.b1, roi.b2, M)
    clock = rng.uniform(0.0, 1e-3, M)
    return Fleet(np.arange(M), pos, np.zeros(M, dtype=bool), pos.copy(), clock)


def spoofed_ranges(cfg: SpooferConfig) -> tuple[float, float]:
    """Overwhelming (L_TOV) and risky (L_TRI) capture radii from the link budget."""
    budget = (cfg.tx_power + cfg.tx_gain + cfg.rx_gain_spoof
              - cfg.auth_power - cfg.rx_gain_auth - cfg.env_loss)
    k = cfg.wavelength / (4.0 * math.pi)
    return (k * 10.0 ** ((budget - cfg.sapr_tov) / 20.0),
            k * 10.0 ** ((budget - cfg.sapr_risk) / 20.0))


def capture_probability(d, L_tov: float, L_tri: float):
    """1 inside L_TOV, linear ramp down to 0 at L_TRI, 0 beyond."""
    d = np.asarray(d, dtype=float)
    if L_tri <= L_tov:
        return (d <= L_tov).astype(float)
    return np.clip((L_tri - d) / (L_tri - L_tov), 0.0, 1.0)


def assign_spoofed(fleet: Fleet, cfg: SpooferConfig, rng: np.random.Generator,
                   sigma_pos: float = 5.0) -> Fleet:
    M = len(fleet)
    if cfg.mode is SpoofMode.DIRECT_FRACTION:
        n = round(cfg.spoofed_fraction * M)
        spoofed = np.zeros(M, dtype=bool)
        spoofed[rng.choice(M, size=n, replace=False)] = True
    else:
        L_tov, L_tri = spoofed_ranges(cfg)
        if cfg.mode is SpoofMode.APPROACH_DRAG_OFF:
            L_tov = 0.0
        d = np.linalg.norm(fleet.true_positions - np.asarray(cfg.spoofer_position), axis=1)
        spoofed = rng.random(M) < capture_probability(d, L_tov, L_tri)
        spoofed |= d <= L_tov
    anchor = np.where(spoofed[:, None], np.asarray(cfg.counterfeit_position), fleet.true_positions)
    reported = anchor.copy()
    reported[:, :2] += rng.normal(0.0, sigma_pos, (M, 2))
    return replace(fleet, is_spoofed=spoofed, reported_positions=reported)


def report_positions(fleet: Fleet, counterfeit_position, rng: np.random.Generator,
                     sigma_pos: float = 5.0) -> Fleet:
    """Redraw reported positions around the truth (authentic) or the counterfeit fix."""
    anchor = np.where(fleet.is_spoofed[:, None], np.asarray(_enu3(counterfeit_position)),
                      fleet.true_positions)
    reported = anchor.copy()
    reported[:, :2] += rng.normal(0.0, sigma_pos, (len(fleet), 2))
    return replace(fleet, reported_positions=reported)


# -- multipath ------------------------------------------------------------------

def multipath_sigma2(elevation_deg, delta_sigma: float):
    """MOPS multipath variance delta^2 (0.13 + 0.53 exp(-el / 10 deg))."""
    return delta_sigma**2 * (0.13 + 0.53 * np.exp(-np.asarray(elevation_deg, dtype=float) / 10.0))


def multipath_series(elevation: float, noise: NoiseConfig, K: int,
                     rng: np.random.Generator) -> np.ndarray:
    """One receiver's first-order Gauss-Markov multipath over K epochs (metres)."""
    if K < 1:
        raise ValueError("need K >= 1")
    sigma = math.sqrt(float(multipath_sigma2(elevation, noise.delta_sigma)))
    phi = math.exp(-noise.epoch_interval / noise.tau_corr)
    q = math.sqrt(1.0 - phi * phi)
    z = rng.standard_normal(K)
    out = np.empty(K)
    out[0] = z[0]
    for k in range(1, K):
        out[k] = phi * out[k - 1] + q * z[k]
    return sigma * out


def spatial_correlation(positions, tau_d: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponential correlation matrix C and its upper-triangular root R (R^T R = C)."""
    if not tau_d > 0:
        raise ValueError("tau_d must be positive")
    p = np.atleast_2d(np.asarray(positions, dtype=float))
    d = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=-1)
    C = np.exp(-d / tau_d)
    np.fill_diagonal(C, 1.0)
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        # coincident receivers make C singular; clip the spectrum and refactor
        w, V = np.linalg.eigh(C)
        B = V * np.sqrt(np.clip(w, 0.0, None))
        # QR of B^T gives B B^T = R^T R with R upper triangular
        _, R = np.linalg.qr(B.T)
        return C, R
    return C, L.T


def correlated_multipath(R: np.ndarray, sigma: np.ndarray, noise: NoiseConfig, K: int,
                         rng: np.random.Generator) -> np.ndarray:
    """(K, M, J) multipath: unit Gauss-Markov processes mixed across receivers by R.

    ``sigma`` is the (M, J) stationary standard deviation per receiver and
    satellite channel.
    """
    M, J = sigma.shape
    phi = math.exp(-noise.epoch_interval / noise.tau_corr)
    q = math.sqrt(1.0 - phi * phi)
    z = rng.standard_normal((K, M, J))
    mixed = np.einsum("nm,kmj->knj", R.T, z)
    unit = np.empty_like(mixed)
    unit[0] = mixed[0]
    for k in range(1, K):
        unit[k] = phi * unit[k - 1] + q * mixed[k]
    return unit * sigma[None]


# -- pseudoranges ---------------------------------------------------------------

def synthesize_epochs(fleet: Fleet, sky: SkyView, spoofer: SpooferConfig | None,
                      noise: NoiseConfig, K: int, rng: np.random.Generator,
                      far_field: bool = True) -> list[EpochMeasurements]:
    """K epochs of (M, J) pseudoranges for the fleet.

    Authentic channels see the receiver's own position; spoofed channels see
    the counterfeit position for every spoofed receiver plus the spoofer
    time of flight and hardware delay. Receiver clocks, satellite constants
    and the spoofer delay all cancel in double differences.
    """
    M, J = len(fleet), len(sky)
    e = sky.unit_vectors()
    sat_const = rng.uniform(GPS_RANGE, GPS_RANGE + 6e6, J)
    clock = C_LIGHT * fleet.clock_bias

    spoofed_chan = np.zeros((M, J), dtype=bool)
    if spoofer is not None and fleet.n_spoofed:
        n_sats = J if spoofer.spoofed_satellite_count is None else min(spoofer.spoofed_satellite_count, J)
        spoofed_chan[np.ix_(fleet.is_spoofed, np.arange(J) < n_sats)] = True

    geom = _geometric_ranges(fleet.true_positions, e, sat_const, far_field)
    if spoofed_chan.any():
        p_f = np.asarray(spoofer.counterfeit_position)[None]
        counterfeit = _geometric_ranges(p_f, e, sat_const, far_field)[0]
        tof = np.linalg.norm(fleet.true_positions - np.asarray(spoofer.spoofer_position), axis=1)
        fake = counterfeit[None, :] + (tof + C_LIGHT * spoofer.hardware_delay)[:, None]
        geom = np.where(spoofed_chan, fake, geom)
    base = geom + clock[:, None]

    eps = noise.sigma_rho * rng.standard_normal((K, M, J))
    if noise.multipath_enabled and noise.delta_sigma > 0:
        el = np.where(spoofed_chan, noise.theta_spoof, sky.elevations[None, :])
        sigma_mp = np.sqrt(multipath_sigma2(el, noise.delta_sigma))
        _, R = spatial_correlation(fleet.true_positions, noise.tau_d)
        eps = eps + correlated_multipath(R, sigma_mp, noise, K, rng)

    rho = base[None] + eps
    if not np.all(np.isfinite(rho)):
        raise FloatingPointError("non-finite pseudorange synthesized")
    sat_ids = np.array(sky.ids)
    return [EpochMeasurements(k, rho[k], fleet.ids.copy(), sat_ids) for k in range(K)]


def _geometric_ranges(positions: np.ndarray, e: np.ndarray, sat_const: np.ndarray,
                      far_field: bool) -> np.ndarray:
    if far_field:
        # first-order expansion of |S - p| about the ROI origin
        return sat_const[None, :] - positions @ e.T
    sats = GPS_RANGE * e
    return (np.linalg.norm(sats[None, :, :] - positions[:, None, :], axis=-1)
            + (sat_const - GPS_RANGE)[None, :])


def build_world(cfg: ScenarioConfig, sky: SkyView, rng: np.random.Generator
                ) -> tuple[Fleet, list[EpochMeasurements]]:
    """Place, capture and measure one world; the rng drives every random draw."""
    fleet = place_receivers(cfg.roi, cfg.n_receivers, rng)
    spoofer = cfg.spoofer
    if spoofer is not None:
        if spoofer.counterfeit_distance_ratio is not None:
            az = rng.uniform(0.0, 2.0 * math.pi)
            r = spoofer.counterfeit_distance_ratio * max(cfg.roi.D_x, cfg.roi.D_y)
            spoofer = replace(spoofer, counterfeit_position=(r * math.sin(az), r * math.cos(az), 0.0))
        fleet = assign_spoofed(fleet, spoofer, rng, cfg.sigma_pos)
    else:
        fleet = report_positions(fleet, (0.0, 0.0, 0.0), rng, cfg.sigma_pos)
    epochs = synthesize_epochs(fleet, sky, spoofer, cfg.noise, cfg.epochs, rng, cfg.far_field)
    return fleet, epochs
