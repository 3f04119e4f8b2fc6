"""Random search for states and measurements that beat the null-aware bound."""
import argparse
import sys
from pathlib import Path

from eurlab.scenarios import bound_falsifier
from eurlab.scenarios.output import write_json

DIMS = ((2, 2, 2), (3, 3, 3), (4, 4, 4), (2, 4, 4), (4, 2, 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-per-dims", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    rep = bound_falsifier(args.n_per_dims, dims=DIMS, seed=args.seed)
    write_json(args.out / "falsifier.json", rep.to_dict())
    print(f"{rep.n_instances} instances, {rep.n_candidates} candidates, {rep.n_violations} violations")
    print(f"max excess of p_guess over the bound: {rep.max_excess:.3e}")
    return 0 if rep.passed else 3


if __name__ == "__main__":
    sys.exit(main())
