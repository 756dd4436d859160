"""Fully spoofed ROC curves over ROI size and fleet size, single epoch."""
from _common import parse, run

a = parse("out/fig4")
raise SystemExit(run("roc", "--method", "both", "--sweep", "D=50,100", "--sweep", "M=10,20",
                     "--sweep", "K=1", "--trials", a.trials, "--seed", a.seed,
                     "--workers", a.workers, "--out", a.out))
