"""Shared-null POVM pairs: effective POVMs are valid and reproduce the probabilities."""
import argparse
import sys
from pathlib import Path

from eurlab.scenarios import appendix1_equivalence_check
from eurlab.scenarios.output import write_json


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20160419)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    rep = appendix1_equivalence_check(args.n_trials, seed=args.seed)
    write_json(args.out / "povm_equivalence.json", rep.to_dict())
    print(f"max deviation {rep.max_deviation:.2e}, failures {rep.failures}, invalid {rep.invalid_povms}")
    return 0 if rep.passed else 2


if __name__ == "__main__":
    sys.exit(main())
