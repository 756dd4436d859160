"""Fully spoofed ROC curves under inflated multipath error, D = 100 m, M = 20."""
from _common import parse, run

a = parse("out/fig5")
raise SystemExit(run("roc", "--method", "both", "--sweep", "D=100", "--sweep", "M=20",
                     "--sweep", "K=5", "--sweep", "delta_sigma=5,10,15,20",
                     "--trials", a.trials, "--seed", a.seed, "--workers", a.workers,
                     "--out", a.out))
