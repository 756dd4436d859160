"""Shared argument handling for the figure scripts."""
import argparse

from crowdspoof.harness.cli import main


def parse(default_out: str, default_trials: int = 1000):
    p = argparse.ArgumentParser()
    p.add_argument("--out", default=default_out)
    p.add_argument("--trials", type=int, default=default_trials)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    return p.parse_args()


def run(*argv) -> int:
    return main([str(a) for a in argv])
