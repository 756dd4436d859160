"""Mean detector run time against fleet size, 1 km ROI, J = 12, K = 5."""
from _common import parse, run

a = parse("out/fig8", default_trials=20)
raise SystemExit(run("bench", "--method", "both", "--M", *range(10, 101, 10), "--J", 12,
                     "--K", 5, "--trials", a.trials, "--seed", a.seed, "--out", a.out))
