"""Seeded Monte Carlo runner shared by every experiment.

Each (grid point, trial) pair owns a generator derived from
``SeedSequence(master_seed, spawn_key=(grid_index, trial))``, so results do not
depend on evaluation order or on how trials are split across workers.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats

from ..d2ps import build_d2ps_fast
from ..detector import decide_many, sample_variance, thresholds
from ..geometry import SkyView
from ..glrt import GlrtConfig, pair_ddp_series, run_glrt_pairwise
from ..scenario import NoiseConfig, RoiBounds, ScenarioConfig, build_world
from ..statmodels import chi2_inv, variance_h0
from .config import SWEEP_KEYS, ExperimentSpec, RunOptions, apply_params, resolve_sky

log = logging.getLogger(__name__)

DECISIONS = ("H1", "H0", "H2")   # index order used by decide_many


@dataclass
class ResultRow:
    params: dict[str, Any]
    method: str
    fa: float
    trials: int
    counts: tuple[int, int, int] = (0, 0, 0)    # n_h0, n_h1, n_h2
    mean_stat: float = float("nan")
    std_stat: float = float("nan")
    status: str = "ok"
    wall_seconds: float = 0.0

    @property
    def n_h0(self) -> int:
        return self.counts[0]

    @property
    def n_h1(self) -> int:
        return self.counts[1]

    @property
    def n_h2(self) -> int:
        return self.counts[2]

    def _p(self, n: int) -> float:
        return n / self.trials if self.trials else float("nan")

    @property
    def pd_h1(self) -> float:
        return self._p(self.n_h1)

    @property
    def pd_h2(self) -> float:
        return self._p(self.n_h2)

    @property
    def pd_detect(self) -> float:
        """Share of trials with any spoofing alarm (H1 or H2)."""
        return self._p(self.n_h1 + self.n_h2)

    def csv_row(self, keys: Sequence[str]) -> dict[str, Any]:
        row = {k: self.params.get(k, "") for k in keys}
        row.update(method=self.method, fa=self.fa, trials=self.trials, n_h0=self.n_h0,
                   n_h1=self.n_h1, n_h2=self.n_h2, pd_h1=self.pd_h1, pd_h2=self.pd_h2,
                   pd_detect=self.pd_detect, mean_stat=self.mean_stat,
                   std_stat=self.std_stat, status=self.status)
        return row


RESULT_FIELDS = ("method", "fa", "trials", "n_h0", "n_h1", "n_h2", "pd_h1", "pd_h2",
                 "pd_detect", "mean_stat", "std_stat", "status")


def trial_rng(master_seed: int, grid_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(grid_index, trial)))


def grid_points(sweep: dict[str, list]) -> list[dict[str, Any]]:
    """Cartesian product of the non-``fa`` sweep axes, in SWEEP_KEYS order."""
    keys = [k for k in SWEEP_KEYS if k in sweep and k != "fa"]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(sweep[k] for k in keys))]


def h0_variance(cfg: ScenarioConfig, sky: SkyView, opts: RunOptions) -> float:
    return variance_h0(cfg.roi.D_x, cfg.roi.D_y, sky, sigma_rho=cfg.noise.sigma_rho,
                       K=cfg.epochs, include_noise=opts.include_noise_h0).sigma2


def glrt_thresholds(fa_list: Sequence[float]) -> np.ndarray:
    """Per-pair chi-squared(1) thresholds; fa = 1 gives 0 (only exact zeros vote H1)."""
    return np.array([0.0 if fa >= 1.0 else chi2_inv(1.0 - fa, 1) for fa in fa_list])


def run_trial(cfg: ScenarioConfig, sky: SkyView, rng: np.random.Generator,
              methods: Sequence[str], glrt_thr: np.ndarray) -> dict[str, Any]:
    """One world through the selected pipelines.

    Returns the D2PS sample variance and, for GLRT, the H1 vote count at each
    per-pair threshold together with the number of pair tests.
    """
    _, epochs = build_world(cfg, sky, rng)
    rho = np.stack([ep.pseudoranges for ep in epochs])
    out: dict[str, Any] = {}
    if "d2ps" in methods:
        out["d2ps"] = sample_variance(build_d2ps_fast(rho, rng))
    if "glrt" in methods:
        K = rho.shape[0]
        s = pair_ddp_series(rho).sum(axis=0).ravel()
        T = np.sort(s * s / (K * 4.0 * cfg.noise.sigma_rho**2))
        out["glrt"] = (np.searchsorted(T, glrt_thr, side="right"), T.size)
    return out


def _trial_task(args):
    cfg, sky, methods, glrt_thr, master_seed, gi, t = args
    return run_trial(cfg, sky, trial_rng(master_seed, gi, t), methods, glrt_thr)


def _aggregate(params, methods, fa_list, trial_out, th_list, glrt_cfg, trials, elapsed):
    rows = []
    if "d2ps" in methods:
        s2 = np.array([o["d2ps"] for o in trial_out])
        for fa, th in zip(fa_list, th_list):
            d = decide_many(s2, th)
            n_h1, n_h0, n_h2 = (int(np.count_nonzero(d == k)) for k in range(3))
            rows.append(ResultRow(params, "d2ps", fa, trials, (n_h0, n_h1, n_h2),
                                  float(s2.mean()), float(s2.std()), "ok", elapsed))
    if "glrt" in methods:
        for f, fa in enumerate(fa_list):
            frac = np.array([o["glrt"][0][f] / o["glrt"][1] for o in trial_out])
            n_h1 = int(np.count_nonzero(frac >= glrt_cfg.vote_high))
            n_h0 = int(np.count_nonzero((frac < glrt_cfg.vote_high)
                                        & (1.0 - frac >= glrt_cfg.vote_low)))
            rows.append(ResultRow(params, "glrt", fa, trials, (n_h0, n_h1, trials - n_h0 - n_h1),
                                  float(frac.mean()), float(frac.std()), "ok", elapsed))
    return rows


def run_experiment(spec: ExperimentSpec, sky: SkyView | None = None,
                   workers: int = 1) -> list[ResultRow]:
    """All grid points x all FA values; each FA value reuses the same worlds."""
    sky = resolve_sky(spec.options.sky) if sky is None else sky
    opts = spec.options
    fa_list = [float(v) for v in spec.sweep.get("fa", [opts.epsilon])]
    glrt_thr = glrt_thresholds(fa_list)
    methods = spec.methods
    rows: list[ResultRow] = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for gi, params in enumerate(grid_points(spec.sweep)):
            try:
                cfg = apply_params(spec.scenario, params)
                if cfg.n_receivers < 2 or cfg.epochs < 1:
                    raise ValueError(f"infeasible M={cfg.n_receivers}, K={cfg.epochs}")
                if len(sky) < 2:
                    raise ValueError("need at least two satellites")
                s2_h0 = h0_variance(cfg, sky, opts)
                th_list = [thresholds(s2_h0, cfg.n_receivers, fa) for fa in fa_list]
                glrt_cfg = GlrtConfig(sigma_rho=cfg.noise.sigma_rho, K=cfg.epochs)
            except ValueError as exc:
                log.warning("grid point %s skipped: %s", params, exc)
                rows.extend(ResultRow(params, m, fa, 0, status=f"skipped: {exc}")
                            for m in methods for fa in fa_list)
                continue
            t0 = time.perf_counter()
            tasks = [(cfg, sky, methods, glrt_thr, spec.master_seed, gi, t)
                     for t in range(spec.trials)]
            if pool is None:
                trial_out = [_trial_task(a) for a in tasks]
            else:
                trial_out = list(pool.map(_trial_task, tasks, chunksize=16))
            elapsed = time.perf_counter() - t0
            rows.extend(_aggregate(params, methods, fa_list, trial_out, th_list, glrt_cfg,
                                   spec.trials, elapsed))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def roc_sweep(spec: ExperimentSpec, sky: SkyView | None = None,
              workers: int = 1) -> dict[tuple, list[tuple[float, float]]]:
    """Pd_H1 against each method's own FA knob, keyed by (grid params..., method)."""
    if "fa" not in spec.sweep:
        raise ValueError("ROC sweep needs an fa list")
    table: dict[tuple, list[tuple[float, float]]] = {}
    for row in run_experiment(spec, sky, workers):
        if row.status != "ok":
            continue
        key = tuple(row.params.items()) + (("method", row.method),)
        table.setdefault(key, []).append((row.fa, row.pd_h1))
    return table


# -- timing ---------------------------------------------------------------------

@dataclass
class TimingRow:
    method: str
    M: int
    mean_seconds: float
    repeats: list[float] = field(default_factory=list)


def _time_block(fn, items) -> float:
    t0 = time.perf_counter()
    for it in items:
        fn(it)
    return (time.perf_counter() - t0) / len(items)


def timing_benchmark(M_list: Sequence[int], *, J: int = 12, K: int = 5, trials: int = 3,
                     D: float = 1000.0, sigma_rho: float = 5.0, repeats: int = 5,
                     seed: int = 0, methods: Sequence[str] = ("d2ps", "glrt"),
                     sky: SkyView | None = None) -> list[TimingRow]:
    """Per-world detection time for each method and fleet size.

    Worlds are synthesized up front and excluded from the timing. The
    reported figure is the median over ``repeats`` passes of the mean time
    per world.
    """
    if trials <= 0:
        return []
    sky = resolve_sky("sky12") if sky is None else sky
    sky = sky.subset(J)
    rows = []
    glrt_cfg = GlrtConfig(sigma_rho=sigma_rho, K=K)
    for gi, M in enumerate(M_list):
        cfg = ScenarioConfig(roi=RoiBounds.square(D), n_receivers=M,
                             noise=NoiseConfig(sigma_rho=sigma_rho), epochs=K)
        s2_h0 = variance_h0(D, D, sky).sigma2
        th = thresholds(s2_h0, M, 0.001)
        blocks = []
        for t in range(trials):
            _, eps = build_world(cfg, sky, trial_rng(seed, gi, t))
            blocks.append(np.stack([e.pseudoranges for e in eps]))
        perm_rng = trial_rng(seed, gi, trials)

        def d2ps_fn(rho):
            decide_many(sample_variance(build_d2ps_fast(rho, perm_rng)), th)

        def glrt_fn(rho):
            run_glrt_pairwise(rho, glrt_cfg)

        fns = {"d2ps": d2ps_fn, "glrt": glrt_fn}
        for m in methods:
            reps = [_time_block(fns[m], blocks) for _ in range(repeats)]
            rows.append(TimingRow(m, M, float(np.median(reps)), reps))
    return rows


def scaling_exponent(Ms: Sequence[float], seconds: Sequence[float]) -> float:
    """Slope of log(time) against log(M) by least squares."""
    x, y = np.log(np.asarray(Ms, float)), np.log(np.asarray(seconds, float))
    return float(np.polyfit(x, y, 1)[0])


# -- histogram ------------------------------------------------------------------

@dataclass
class HistogramReport:
    bin_lo: np.ndarray
    bin_hi: np.ndarray
    count: np.ndarray
    density: np.ndarray
    predicted_density: np.ndarray
    ks_distance: float
    ks_critical_1pct: float

    @property
    def ks_pass(self) -> bool:
        return self.ks_distance < self.ks_critical_1pct


def histogram_report(samples, sigma2: float, bins: int = 50) -> HistogramReport:
    """Binned samples beside the N(0, sigma2) density at bin centres, plus a KS check."""
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    if x.size == 0:
        raise ValueError("empty sample set")
    if np.all(x == x[0]):
        lo, hi = x[0] - 0.5, x[0] + 0.5
        edges = np.array([lo, hi])
    else:
        edges = np.histogram_bin_edges(x, bins=bins)
    count, edges = np.histogram(x, bins=edges)
    width = np.diff(edges)
    density = count / (x.size * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    if sigma2 > 0:
        sd = math.sqrt(sigma2)
        pred = stats.norm.pdf(centres, scale=sd)
        ks = float(stats.kstest(x, "norm", args=(0.0, sd)).statistic)
    else:
        pred = np.where(np.abs(centres) <= 0.5 * width, 1.0 / width, 0.0)
        ks = float(np.mean(x != 0.0))
    crit = ks_critical(x.size, 0.01)
    return HistogramReport(edges[:-1], edges[1:], count, density, pred, ks, crit)


def ks_critical(n: int, alpha: float) -> float:
    """Asymptotic one-sample KS critical distance."""
    return float(stats.kstwobign.isf(alpha) / math.sqrt(n))
