"""Detection probability against the spoofed receiver share for three counterfeit offsets."""
from _common import parse, run

a = parse("out/fig6")
raise SystemExit(run("partial-sweep", "--protocol", "receivers", "--method", "both",
                     "--trials", a.trials, "--seed", a.seed, "--workers", a.workers,
                     "--out", a.out))
