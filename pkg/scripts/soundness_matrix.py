"""Run every fixture through every cost model and compare bounds with concrete runs.

    python scripts/soundness_matrix.py [--data 0..8] [--fixture NAME ...] [--sstore best]

Prints one line per fixture and every violation; exits 1 if any were found.
"""

import argparse
import sys

from gasbound import corpus
from gasbound.evm.schedule import load_schedule
from gasbound.soundness import check_fixture


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fixture", action="append", choices=sorted(corpus.FIXTURES))
    ap.add_argument("--max-data", type=int, default=8)
    ap.add_argument("--sstore", choices=("worst", "best"), default="worst")
    args = ap.parse_args(argv)
    schedule = load_schedule()
    if args.sstore == "best":
        schedule = schedule.best_case()
    names = args.fixture or sorted(corpus.FIXTURES)
    bad = 0
    seconds = 0.0
    for name in names:
        r = check_fixture(corpus.get(name), schedule=schedule, data_values=range(args.max_data + 1))
        seconds += r.seconds
        bad += len(r.violations)
        tag = "core" if name in corpus.CORE else "    "
        print(f"{name:20} {tag} runs={r.runs:4} checks={r.checks:6} violations={len(r.violations)}"
              f"  {r.seconds:.2f}s")
        for v in r.violations:
            print(f"    {v}")
    print(f"total: {bad} violations in {seconds:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
