"""Homodyne saturation check at 19.3 dB, with and without a displacement attack."""
import argparse
from pathlib import Path

from eurlab.scenarios import cv_saturation_report, shift_for_saturation
from eurlab.scenarios.output import write_json
from eurlab.states import TmsvSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--antisqueezing-db", type=float, default=19.3)
    ap.add_argument("--convention", default="half_variance", choices=("half_variance", "unit_variance"))
    ap.add_argument("--range", type=float, default=61.6, help="symmetric detector range")
    ap.add_argument("--attack-p-sat", type=float, default=0.3)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    spec = TmsvSpec(args.antisqueezing_db, args.convention)
    clean = cv_saturation_report(spec, -args.range, args.range)
    shift = shift_for_saturation(spec, -args.range, args.range, args.attack_p_sat)
    attacked = cv_saturation_report(spec, -args.range, args.range, mean_shift=shift)
    write_json(args.out / "cv_saturation.json", {"clean": clean.to_dict(), "attacked": attacked.to_dict()})
    for name, rep in (("clean", clean), ("attacked", attacked)):
        print(f"{name:8s} p_sat {rep.p_sat_x:.3g}  bound {rep.bound.clamped_bound:.4f}  abort {rep.abort}")


if __name__ == "__main__":
    main()
