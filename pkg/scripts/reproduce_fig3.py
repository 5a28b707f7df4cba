"""Sensitivity versus spectral efficiency for every capacity model, plus crossovers."""

import argparse
from pathlib import Path

from ppbsim import capacity
from ppbsim.errors import ConfigurationError
from ppbsim.harness import sweeps
from ppbsim.harness.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fig3")
    ap.add_argument("--models", help="comma list overriding the preset, e.g. psa,edfa,ppm16,preamp4")
    args = ap.parse_args()

    overrides = {"models": args.models} if args.models else {}
    cfg = load_config("fig3", overrides=overrides)
    result = sweeps.capacity_curves(cfg, Path(args.out))
    for model in cfg.model_list():
        try:
            print(f"{model.name:<14} low-SNR limit {capacity.low_snr_limit(model):.5f} PPB")
        except ConfigurationError:
            print(f"{model.name:<14} low-SNR limit: sampled only")
    for pair, se in result["crossings"].items():
        if se is not None:
            print(f"{pair:<28} crosses at {se:.4f} b/s/Hz")


if __name__ == "__main__":
    main()
