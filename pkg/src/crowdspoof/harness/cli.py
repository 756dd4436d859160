"""Command-line entry point: ``crowdspoof <subcommand> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from ..d2ps import build_d2ps
from ..geometry import SkyView
from ..scenario import RoiBounds, ScenarioConfig, SpooferConfig, build_world
from ..statmodels import (variance_h0, variance_h1, variance_h2, variance_h2_mixture,
                          variance_partial_sats)
from . import io
from .config import (SWEEP_KEYS, ExperimentSpec, RunOptions, config_hash, resolve_sky,
                     scenario_from_dict)
from .pipeline import detect_window, resize_rows
from .runner import RESULT_FIELDS, histogram_report, roc_sweep, run_experiment, timing_benchmark

log = logging.getLogger("crowdspoof")


# -- shared helpers -------------------------------------------------------------

def _base(args) -> tuple[ScenarioConfig, RunOptions, dict, Path | None]:
    if args.config:
        path = Path(args.config)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        cfg, opts = scenario_from_dict(raw)
        base_dir = path.parent
    else:
        raw, base_dir = {}, None
        cfg, opts = ScenarioConfig(), RunOptions()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg, opts, raw, base_dir


def _sky(opts: RunOptions, base_dir) -> SkyView:
    return resolve_sky(opts.sky, base_dir)


def _parse_sweep(items, raw: dict) -> dict[str, list]:
    sweep = {k: list(v) for k, v in raw.get("sweep", {}).items()}
    for item in items or []:
        key, _, vals = item.partition("=")
        if key not in SWEEP_KEYS or not vals:
            raise SystemExit(f"bad --sweep {item!r}; keys: {', '.join(SWEEP_KEYS)}")
        cast = int if key in ("M", "K", "spoofed_sats") else float
        sweep[key] = [cast(v) for v in vals.split(",")]
    return sweep


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _results_csv(path, rows, sweep) -> None:
    keys = [k for k in SWEEP_KEYS if k in sweep and k != "fa"]
    io.write_csv(path, tuple(keys) + RESULT_FIELDS, [r.csv_row(keys) for r in rows])


def _manifest(args, out, *objs, **extra) -> None:
    io.write_manifest(out, command=" ".join(sys.argv[1:]) or args.command,
                      seed=args.seed if args.seed is not None else 0,
                      config_hash=config_hash(*objs), extra=extra)


# -- subcommands ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg, opts, _, base_dir = _base(args)
    sky = _sky(opts, base_dir)
    rng = np.random.default_rng(cfg.seed)
    fleet, epochs = build_world(cfg, sky, rng)
    out = _out(args)
    io.write_measurements(out / "measurements.csv", epochs)
    io.write_receivers(out / "receivers.csv", fleet)
    io.write_truth(out / "truth.csv", fleet)
    _manifest(args, out, cfg, opts, n_spoofed=fleet.n_spoofed)
    print(f"{len(fleet)} receivers ({fleet.n_spoofed} spoofed), {len(epochs)} epochs -> {out}")
    return 0


def cmd_detect(args) -> int:
    cfg, opts, _, base_dir = _base(args)
    sky = _sky(opts, base_dir)
    epochs = io.read_measurements(args.measurements)
    ids = pos = None
    if args.resize:
        ids, pos = io.read_receivers(args.receivers)
    methods = ("d2ps", "glrt") if args.method == "both" else (args.method,)
    results = detect_window(epochs, sky, cfg.roi, receiver_ids=ids, reported_positions=pos,
                            resize=args.resize, nx=opts.nx, ny=opts.ny,
                            cell_threshold=opts.cell_threshold, methods=methods,
                            epsilon=opts.epsilon, sigma_rho=cfg.noise.sigma_rho, seed=cfg.seed,
                            include_noise_h0=opts.include_noise_h0, fa_pair=opts.fa_pair)
    out = _out(args)
    if "d2ps" in methods:
        io.write_csv(out / "detection.csv", io.DETECTION_FIELDS, [r.d2ps.row() for r in results])
    if "glrt" in methods:
        io.write_csv(out / "detection_glrt.csv", io.GLRT_DETECTION_FIELDS,
                     [_glrt_row(r) for r in results])
    if args.resize:
        io.write_csv(out / "resize_report.csv", io.RESIZE_FIELDS,
                     resize_rows(results, methods[0]))
    if args.dump_d2ps and results and results[0].samples is not None:
        io.write_d2ps(out / "d2ps.csv", results[0].samples)
    _manifest(args, out, cfg, opts, measurements=str(args.measurements), resize=args.resize)
    for r in results:
        parts = [f"region {r.region_id}: {r.n_receivers} receivers"]
        if r.d2ps is not None:
            parts.append(f"d2ps {r.d2ps.decision.value} (var {r.d2ps.sample_variance:.4g} m^2)")
        if r.glrt is not None:
            parts.append(f"glrt {r.glrt.decision.value} (H1 share {r.glrt.h1_fraction:.3f})")
        print(", ".join(parts))
    return 0


def _glrt_row(r) -> dict:
    return {"region_id": r.region_id, "variance_m2": "", "gamma1": "", "gamma2": "",
            "decision": r.glrt.decision.value, "pd_h1_pred": "", "pd_h2_pred": "",
            "method": "glrt"}


def cmd_variance(args) -> int:
    cfg, opts, _, base_dir = _base(args)
    sky = _sky(opts, base_dir)
    Dx = args.Dx if args.Dx is not None else cfg.roi.D_x
    Dy = args.Dy if args.Dy is not None else cfg.roi.D_y
    sr = args.sigma_rho if args.sigma_rho is not None else cfg.noise.sigma_rho
    K = args.K if args.K is not None else cfg.epochs
    roi = RoiBounds(-Dx / 2, Dx / 2, -Dy / 2, Dy / 2)
    h0 = variance_h0(Dx, Dy, sky).sigma2
    rows = [("H0", "", h0), ("H1", "", variance_h1(sr, K).sigma2)]
    p_f = tuple(args.pf) + (0.0,)
    for a in args.alpha:
        rows.append(("H2", f"alpha={a}", variance_h2(a, roi, p_f, sky, sr).sigma2))
        rows.append(("H2_mixture", f"alpha={a}", variance_h2_mixture(a, roi, p_f, sky, sr)))
    for s in args.spoofed_sats:
        rows.append(("H2_sats", f"s={s}", variance_partial_sats(s, len(sky), h0, sr).sigma2))
    print(f"{'hypothesis':<12}{'case':<12}variance_m2")
    for h, c, v in rows:
        print(f"{h:<12}{c:<12}{v:.6g}")
    if args.out:
        out = _out(args)
        io.write_csv(out / "variance.csv", ("hypothesis", "case", "variance_m2"), rows)
        _manifest(args, out, cfg, opts, Dx=Dx, Dy=Dy, sigma_rho=sr, K=K)
    return 0


def _spec(args, cfg, opts, sweep) -> ExperimentSpec:
    return ExperimentSpec(cfg, args.method, sweep, args.trials, args.seed or 0, options=opts)


def cmd_roc(args) -> int:
    cfg, opts, raw, base_dir = _base(args)
    if cfg.spoofer is None:
        cfg = replace(cfg, spoofer=SpooferConfig(spoofed_fraction=1.0))
    sweep = _parse_sweep(args.sweep, raw)
    sweep.setdefault("fa", [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0])
    spec = _spec(args, cfg, opts, sweep)
    out = _out(args)
    table = roc_sweep(spec, _sky(opts, base_dir), args.workers)
    index = []
    for n, (key, pts) in enumerate(sorted(table.items(), key=lambda kv: str(kv[0]))):
        name = f"roc_{n:03d}.csv"
        io.write_csv(out / name, io.ROC_FIELDS, pts)
        index.append((name,) + tuple(f"{k}={v}" for k, v in key))
        print(name, dict(key))
    io.write_csv(out / "roc_index.csv", ("file", "configuration"),
                 [(i[0], ";".join(i[1:])) for i in index])
    _manifest(args, out, spec)
    return 0


def cmd_partial_sweep(args) -> int:
    cfg, opts, raw, base_dir = _base(args)
    sweep = _parse_sweep(args.sweep, raw)
    if args.protocol == "receivers":
        cfg = replace(cfg, roi=RoiBounds.square(1000.0), n_receivers=100, epochs=5,
                      spoofer=cfg.spoofer or SpooferConfig()) if not args.config else cfg
        sweep.setdefault("alpha", [round(0.05 * k, 2) for k in range(1, 20)])
        sweep.setdefault("pf_ratio", [0.8, 1.0, 1.5])
    else:
        cfg = replace(cfg, epochs=5, spoofer=cfg.spoofer or SpooferConfig(spoofed_fraction=1.0)) \
            if not args.config else cfg
        sweep.setdefault("D", [100.0, 500.0])
        sweep.setdefault("M", [25, 50])
        sweep.setdefault("spoofed_sats", list(range(4, 13)))
    sweep.setdefault("fa", [0.001])
    spec = _spec(args, cfg, opts, sweep)
    rows = run_experiment(spec, _sky(opts, base_dir), args.workers)
    out = _out(args)
    _results_csv(out / f"partial_{args.protocol}.csv", rows, sweep)
    _manifest(args, out, spec, wall_seconds=sum({id(r.params): r.wall_seconds
                                                 for r in rows}.values()))
    print(f"{len(rows)} rows -> {out / f'partial_{args.protocol}.csv'}")
    return 0


def cmd_bench(args) -> int:
    cfg, opts, _, base_dir = _base(args)
    methods = ("d2ps", "glrt") if args.method == "both" else (args.method,)
    rows = timing_benchmark(args.M, J=args.J, K=args.K, trials=args.trials, D=cfg.roi.D_x,
                            sigma_rho=cfg.noise.sigma_rho, seed=args.seed or 0,
                            methods=methods, sky=_sky(opts, base_dir))
    out = _out(args)
    io.write_csv(out / "timing.csv", io.TIMING_FIELDS, [(r.method, r.M, r.mean_seconds)
                                                        for r in rows])
    _manifest(args, out, cfg, opts, M=args.M, J=args.J, K=args.K, trials=args.trials)
    for r in rows:
        print(f"{r.method:<5} M={r.M:<4} {r.mean_seconds:.6f} s")
    return 0


def cmd_reproduce(args) -> int:
    from .acceptance import CRITERIA, run_all
    out = _out(args)
    results = run_all(args.only or sorted(CRITERIA))
    io.write_csv(out / "acceptance.csv", ("criterion", "title", "passed", "seconds", "measured"),
                 [(r.number, r.title, r.passed, round(r.seconds, 2),
                   "; ".join(f"{k}={v}" for k, v in r.measured.items())) for r in results])
    for r in results:
        for name, (fields, rows) in r.tables.items():
            io.write_csv(out / f"criterion{r.number:02d}_{name}.csv", fields, rows)
    _manifest(args, out, {"criteria": [r.number for r in results]})
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def cmd_histogram(args) -> int:
    cfg, opts, _, base_dir = _base(args)
    sky = _sky(opts, base_dir)
    fleet, epochs = build_world(cfg, sky, np.random.default_rng(cfg.seed))
    d2 = build_d2ps(epochs, cfg.seed)
    s2 = variance_h0(cfg.roi.D_x, cfg.roi.D_y, sky, sigma_rho=cfg.noise.sigma_rho,
                     K=cfg.epochs, include_noise=opts.include_noise_h0).sigma2
    rep = histogram_report(d2, s2, bins=args.bins)
    out = _out(args)
    io.write_csv(out / "histogram.csv", io.HISTOGRAM_FIELDS,
                 zip(rep.bin_lo, rep.bin_hi, rep.count, rep.density, rep.predicted_density))
    io.write_d2ps(out / "d2ps.csv", d2)
    _manifest(args, out, cfg, opts, ks_distance=rep.ks_distance,
              ks_critical_1pct=rep.ks_critical_1pct)
    verdict = "consistent with" if rep.ks_pass else "deviates from"
    print(f"KS {rep.ks_distance:.4f} (1% critical {rep.ks_critical_1pct:.4f}): "
          f"samples {verdict} the spoofing-free prediction, {fleet.n_spoofed} spoofed receivers")
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML scenario file (sections roi, spoofer, noise, run)")
    common.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--trials", type=int, default=None,
                        help="Monte Carlo trials (1000; bench: 3 worlds per fleet size)")
    common.add_argument("--method", choices=("d2ps", "glrt", "both"), default="d2ps")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="crowdspoof", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="one world, dump measurements")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("detect", parents=[common], help="measurements to decisions")
    s.add_argument("--measurements", required=True)
    s.add_argument("--receivers", help="reported positions CSV (needed with --resize)")
    s.add_argument("--resize", action="store_true", help="detect per enclosed region")
    s.add_argument("--dump-d2ps", action="store_true")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("variance", parents=[common], help="print variance predictions")
    s.add_argument("--Dx", type=float)
    s.add_argument("--Dy", type=float)
    s.add_argument("--sigma-rho", type=float)
    s.add_argument("--K", type=int)
    s.add_argument("--alpha", type=float, nargs="*", default=[0.25, 0.5, 0.75])
    s.add_argument("--pf", type=float, nargs=2, default=(150.0, 0.0), metavar=("X", "Y"))
    s.add_argument("--spoofed-sats", type=int, nargs="*", default=[4, 8, 12])
    s.set_defaults(func=cmd_variance, out=None)

    for name, func, helptext in (("roc", cmd_roc, "ROC sweep"),
                                 ("partial-sweep", cmd_partial_sweep, "partial spoofing sweeps")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--sweep", action="append", metavar="KEY=V1,V2",
                       help=f"sweep axis, KEY in {', '.join(SWEEP_KEYS)}")
        if name == "partial-sweep":
            s.add_argument("--protocol", choices=("receivers", "satellites"),
                           default="receivers")
        s.set_defaults(func=func)

    s = sub.add_parser("bench", parents=[common], help="runtime against fleet size")
    s.add_argument("--M", type=int, nargs="+", default=[10, 25, 50, 100])
    s.add_argument("--J", type=int, default=12)
    s.add_argument("--K", type=int, default=5)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("reproduce", parents=[common], help="run every acceptance check")
    s.add_argument("--only", type=int, nargs="*")
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("histogram", parents=[common], help="sample histogram vs prediction")
    s.add_argument("--bins", type=int, default=50)
    s.set_defaults(func=cmd_histogram)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.trials is None:
        args.trials = 3 if args.command == "bench" else 1000
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
