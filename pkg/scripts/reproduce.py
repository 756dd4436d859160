"""Run every acceptance criterion and write its tables (long: tens of minutes)."""
import sys

from _common import run

out = sys.argv[1] if len(sys.argv) > 1 else "out/reproduce"
raise SystemExit(run("reproduce", "--out", out))
