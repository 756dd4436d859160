import json

import numpy as np
import pytest

from crowdspoof.d2ps import build_d2ps
from crowdspoof.geometry import sky12
from crowdspoof.harness import io
from crowdspoof.harness.cli import main
from crowdspoof.harness.config import (ExperimentSpec, apply_params, config_hash,
                                       load_config, scenario_from_dict)
from crowdspoof.harness.pipeline import detect_window
from crowdspoof.harness.runner import (histogram_report, roc_sweep, run_experiment,
                                       scaling_exponent, timing_benchmark, trial_rng)
from crowdspoof.scenario import (NoiseConfig, RoiBounds, ScenarioConfig, SpooferConfig,
                                 SpoofMode, build_world)
from crowdspoof.statmodels import variance_h0

SPOOFED = ScenarioConfig(n_receivers=20, spoofer=SpooferConfig(spoofed_fraction=1.0))
CLEAN = ScenarioConfig(n_receivers=20)


# -- configuration ----------------------------------------------------------------

def test_toml_sections_map_onto_configs(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text("""
[roi]
D = 500.0
[spoofer]
mode = "HighPowerDominant"
spoofer_position = [10.0, 20.0, 0.0]
tx_power = 3.0
[noise]
sigma_rho = 2.5
multipath_enabled = true
delta_sigma = 5.0
[run]
n_receivers = 40
epochs = 5
epsilon = 0.01
sky = "sky12"
""")
    cfg, opts = load_config(path)
    assert cfg.roi == RoiBounds.square(500.0)
    assert cfg.spoofer.mode is SpoofMode.HIGH_POWER_DOMINANT
    assert cfg.spoofer.spoofer_position == (10.0, 20.0, 0.0)
    assert cfg.noise.sigma_rho == 2.5 and cfg.noise.delta_sigma == 5.0
    assert (cfg.n_receivers, cfg.epochs) == (40, 5)
    assert opts.epsilon == 0.01


@pytest.mark.parametrize("doc", [{"noise": {"sigma": 1}}, {"run": {"bogus": 1}},
                                 {"roi": {"D": 10, "a1": 0}}])
def test_unknown_keys_are_rejected(doc):
    with pytest.raises(ValueError):
        scenario_from_dict(doc)


def test_explicit_roi_corners():
    cfg, _ = scenario_from_dict({"roi": {"a1": 0, "a2": 40, "b1": -10, "b2": 10}})
    assert (cfg.roi.D_x, cfg.roi.D_y) == (40, 20)


def test_config_hash_tracks_content():
    assert config_hash(CLEAN) == config_hash(ScenarioConfig(n_receivers=20))
    assert config_hash(CLEAN) != config_hash(SPOOFED)
    assert len(config_hash(CLEAN)) == 16


def test_sweep_keys_map_onto_the_scenario():
    cfg = apply_params(CLEAN, {"alpha": 0.3, "D": 250.0, "M": 7, "K": 3, "delta_sigma": 5.0,
                               "spoofed_sats": 4, "pf_ratio": 1.5})
    assert cfg.spoofer.mode is SpoofMode.DIRECT_FRACTION and cfg.spoofer.spoofed_fraction == 0.3
    assert cfg.roi.D_x == 250.0 and cfg.n_receivers == 7 and cfg.epochs == 3
    assert cfg.noise.multipath_enabled and cfg.noise.delta_sigma == 5.0
    assert cfg.spoofer.spoofed_satellite_count == 4
    assert cfg.spoofer.counterfeit_distance_ratio == 1.5


@pytest.mark.parametrize("kw", [dict(method="both2"), dict(trials=0), dict(sweep={"x": [1]}),
                                dict(sweep={"fa": []})])
def test_experiment_spec_validation(kw):
    with pytest.raises(ValueError):
        ExperimentSpec(CLEAN, **kw)


# -- runner -------------------------------------------------------------------------

def test_noise_free_fully_spoofed_trial_decides_h1():
    cfg = ScenarioConfig(n_receivers=20, noise=NoiseConfig(sigma_rho=0.0),
                         spoofer=SpooferConfig(spoofed_fraction=1.0))
    (row,) = run_experiment(ExperimentSpec(cfg, "d2ps", {"fa": [0.001]}, trials=1), sky12())
    assert row.n_h1 == 1
    # DDPs of pseudoranges near 2e7 m cancel to rounding, not to the last bit
    assert row.mean_stat <= 1e-12


def test_counts_sum_to_trials_and_probabilities_are_bounded():
    spec = ExperimentSpec(SPOOFED, "both", {"fa": [0.001, 0.1], "alpha": [0.3, 1.0]}, trials=20)
    rows = run_experiment(spec, sky12())
    assert len(rows) == 2 * 2 * 2
    for r in rows:
        assert sum(r.counts) == r.trials == 20
        assert 0.0 <= r.pd_h1 <= 1.0 and 0.0 <= r.pd_h2 <= 1.0


def test_infeasible_grid_points_become_skipped_rows():
    spec = ExperimentSpec(CLEAN, "d2ps", {"fa": [0.01], "M": [1, 5]}, trials=3)
    rows = run_experiment(spec, sky12())
    assert rows[0].status.startswith("skipped") and rows[0].trials == 0
    assert rows[1].status == "ok" and sum(rows[1].counts) == 3


def test_runs_are_deterministic_and_independent_of_workers(tmp_path):
    spec = ExperimentSpec(SPOOFED, "both", {"fa": [0.01], "alpha": [0.5]}, trials=12,
                          master_seed=5)
    a = run_experiment(spec, sky12())
    b = run_experiment(spec, sky12(), workers=2)
    assert [(r.counts, r.mean_stat) for r in a] == [(r.counts, r.mean_stat) for r in b]


def test_trial_streams_are_distinct():
    a = trial_rng(0, 0, 0).random(4)
    assert not np.array_equal(a, trial_rng(0, 0, 1).random(4))
    assert not np.array_equal(a, trial_rng(0, 1, 0).random(4))
    assert np.array_equal(a, trial_rng(0, 0, 0).random(4))


def test_roc_limit_at_unit_false_alarm():
    spec = ExperimentSpec(SPOOFED, "d2ps", {"fa": [0.001, 1.0]}, trials=20)
    ((key, pts),) = roc_sweep(spec, sky12()).items()
    assert dict(pts)[1.0] == 1.0
    with pytest.raises(ValueError):
        roc_sweep(ExperimentSpec(SPOOFED, "d2ps", {}, trials=2), sky12())


@pytest.mark.slow
def test_spoofing_free_alarm_rate_matches_epsilon():
    spec = ExperimentSpec(CLEAN, "d2ps", {"fa": [0.1]}, trials=10_000, master_seed=41)
    (row,) = run_experiment(spec, sky12())
    rate = 1.0 - row.n_h0 / row.trials
    print(f"alarm rate {rate:.4f} against 0.1")
    assert abs(rate - 0.1) <= 0.009


def test_benchmark_without_trials_is_empty():
    assert timing_benchmark([10, 20], trials=0) == []


def test_benchmark_rows_and_exponent():
    rows = timing_benchmark([6, 12], J=6, K=2, trials=1, repeats=1)
    assert [(r.method, r.M) for r in rows] == [("d2ps", 6), ("glrt", 6), ("d2ps", 12),
                                               ("glrt", 12)]
    assert all(r.mean_seconds > 0 for r in rows)
    assert scaling_exponent([10, 100], [1.0, 100.0]) == pytest.approx(2.0)


# -- histogram ----------------------------------------------------------------------

def test_all_zero_set_fills_one_bin_at_zero():
    rep = histogram_report(np.zeros(380), 100.0)
    assert rep.count.tolist() == [380]
    assert rep.bin_lo[0] < 0.0 < rep.bin_hi[0]
    with pytest.raises(ValueError):
        histogram_report(np.zeros(0), 1.0)


def _set(cfg, seed):
    _, eps = build_world(cfg, sky12(), np.random.default_rng(seed))
    return build_d2ps(eps, seed)


def test_spoofing_free_set_passes_ks_and_spoofed_set_fails():
    clean = ScenarioConfig(n_receivers=200, noise=NoiseConfig(sigma_rho=0.0))
    h0 = variance_h0(100, 100, sky12()).sigma2
    rep = histogram_report(_set(clean, 1), h0)
    assert rep.ks_pass
    assert rep.density.sum() * (rep.bin_hi - rep.bin_lo)[0] == pytest.approx(1.0)
    spoofed = ScenarioConfig(n_receivers=200, spoofer=SpooferConfig(spoofed_fraction=1.0))
    assert not histogram_report(_set(spoofed, 2), h0).ks_pass


# -- detection pipeline ---------------------------------------------------------------

def test_single_region_equals_unresized_detection():
    fleet, eps = build_world(ScenarioConfig(n_receivers=30, roi=RoiBounds.square(1000.0)),
                             sky12(), np.random.default_rng(3))
    plain = detect_window(eps, sky12(), RoiBounds.square(1000.0), seed=3, epsilon=0.001)
    whole = detect_window(eps, sky12(), RoiBounds.square(1000.0), seed=3, epsilon=0.001,
                          resize=True, receiver_ids=fleet.ids,
                          reported_positions=fleet.reported_positions, nx=1, ny=1)
    assert len(plain) == len(whole) == 1
    assert plain[0].d2ps.sample_variance == whole[0].d2ps.sample_variance
    assert plain[0].d2ps.decision is whole[0].d2ps.decision


# -- CLI ------------------------------------------------------------------------------

def _run(*argv):
    assert main([str(a) for a in argv]) == 0


def test_simulate_then_detect(tmp_path):
    cfg = tmp_path / "dense.toml"
    cfg.write_text("[run]\nn_receivers = 200\n")
    out = tmp_path / "sim"
    _run("simulate", "--config", cfg, "--seed", 3, "--out", out)
    for name, fields in (("measurements.csv", io.MEASUREMENT_FIELDS),
                         ("receivers.csv", io.RECEIVER_FIELDS), ("truth.csv", io.TRUTH_FIELDS)):
        assert (out / name).read_text().splitlines()[0] == ",".join(fields)
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 3 and len(man["config_hash"]) == 16

    det = tmp_path / "det"
    _run("detect", "--config", cfg, "--measurements", out / "measurements.csv", "--receivers",
         out / "receivers.csv", "--resize", "--method", "both", "--dump-d2ps", "--out", det)
    head = lambda n: (det / n).read_text().splitlines()[0]
    assert head("detection.csv") == ",".join(io.DETECTION_FIELDS)
    assert head("detection_glrt.csv") == ",".join(io.GLRT_DETECTION_FIELDS)
    assert head("resize_report.csv") == ",".join(io.RESIZE_FIELDS)
    assert head("d2ps.csv") == ",".join(io.D2PS_FIELDS)
    assert len(io.read_csv(det / "resize_report.csv")) >= 1


def test_measurement_dump_round_trips(tmp_path):
    _, eps = build_world(ScenarioConfig(n_receivers=5, epochs=2), sky12(),
                         np.random.default_rng(0))
    io.write_measurements(tmp_path / "m.csv", eps)
    back = io.read_measurements(tmp_path / "m.csv")
    for a, b in zip(eps, back):
        assert np.array_equal(a.pseudoranges, b.pseudoranges)
        assert np.array_equal(a.satellite_ids, b.satellite_ids)


def test_identical_runs_write_identical_bytes(tmp_path):
    for name in ("a", "b"):
        _run("partial-sweep", "--protocol", "satellites", "--sweep", "D=100",
             "--sweep", "M=10", "--sweep", "spoofed_sats=6,12", "--trials", 5, "--seed", 9,
             "--method", "both", "--out", tmp_path / name)
    a = (tmp_path / "a" / "partial_satellites.csv").read_bytes()
    assert a == (tmp_path / "b" / "partial_satellites.csv").read_bytes()
    assert a.splitlines()[0].decode().endswith(",".join(
        ("method", "fa", "trials", "n_h0", "n_h1", "n_h2", "pd_h1", "pd_h2", "pd_detect",
         "mean_stat", "std_stat", "status")))


def test_roc_and_bench_and_histogram_outputs(tmp_path):
    _run("roc", "--trials", 5, "--sweep", "fa=0.01,1.0", "--method", "both", "--out",
         tmp_path / "roc")
    assert (tmp_path / "roc" / "roc_000.csv").read_text().splitlines()[0] == "fa,pd"
    assert len(io.read_csv(tmp_path / "roc" / "roc_index.csv")) == 2

    _run("bench", "--M", 5, 8, "--J", 5, "--K", 2, "--trials", 1, "--out", tmp_path / "b")
    assert (tmp_path / "b" / "timing.csv").read_text().splitlines()[0] == "method,M,mean_seconds"

    _run("histogram", "--bins", 20, "--out", tmp_path / "h")
    rows = io.read_csv(tmp_path / "h" / "histogram.csv")
    assert len(rows) == 20 and list(rows[0]) == list(io.HISTOGRAM_FIELDS)


def test_variance_subcommand_prints_predictions(tmp_path, capsys):
    _run("variance", "--Dx", 100, "--Dy", 100, "--sigma-rho", 5, "--K", 1, "--out", tmp_path)
    text = capsys.readouterr().out
    assert "H0" in text and "H2_sats" in text
    rows = io.read_csv(tmp_path / "variance.csv")
    h1 = [r for r in rows if r["hypothesis"] == "H1"][0]
    assert float(h1["variance_m2"]) == 100.0


def test_reproduce_runs_selected_criteria(tmp_path):
    _run("reproduce", "--only", 12, "--out", tmp_path)
    (row,) = io.read_csv(tmp_path / "acceptance.csv")
    assert row["criterion"] == "12" and row["passed"] == "True"


def test_bad_sweep_argument_exits():
    with pytest.raises(SystemExit):
        main(["roc", "--sweep", "nonsense=1"])
