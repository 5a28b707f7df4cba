"""Penalty budget from the theory point and the ideal-FEC (GMI) sensitivity of the PSA link."""

import argparse
from pathlib import Path

from ppbsim.harness import sweeps
from ppbsim.harness.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/budget")
    ap.add_argument("--gmi-symbols", type=int, default=200_000)
    args = ap.parse_args()

    report = sweeps.budget_report(load_config("budget"), Path(args.out))
    print(sweeps.format_budget(report))
    gmi = sweeps.gmi_sweep(load_config("gmi", overrides={"gmi_symbols": args.gmi_symbols}), Path(args.out))
    print(f"\nideal-FEC sensitivity: {gmi['ideal_fec_ppb']:.4f} PPB "
          f"(fixed code predicted at {report['predicted_ppb']:.4f} PPB)")


if __name__ == "__main__":
    main()
