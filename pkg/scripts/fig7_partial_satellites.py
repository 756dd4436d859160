"""Detection probability against the number of spoofed satellites out of twelve."""
from _common import parse, run

a = parse("out/fig7")
raise SystemExit(run("partial-sweep", "--protocol", "satellites", "--method", "both",
                     "--trials", a.trials, "--seed", a.seed, "--workers", a.workers,
                     "--out", a.out))
