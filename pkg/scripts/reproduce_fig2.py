"""BER versus received photons per bit for the PSA and EDFA receivers.

Writes ``<out>/psa/ber_sweep.csv`` and ``<out>/edfa/ber_sweep.csv`` and prints
the error-free operating points and their gap.
"""

import argparse
import math
from pathlib import Path

from ppbsim.harness import sweeps
from ppbsim.harness.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/fig2")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--frame", type=int, choices=(64800, 16200), default=64800)
    ap.add_argument("--quick", action="store_true", help="short frame, min-sum, 1e6 bits per point")
    args = ap.parse_args()

    overrides = {"workers": args.workers, "frame": args.frame}
    if args.quick:
        overrides.update(frame=16200, decoder="min-sum", max_bits=10**6)

    found = {}
    for receiver in ("psa", "edfa"):
        cfg = load_config(f"fig2-{receiver}", overrides=overrides)
        records = sweeps.ber_sweep(cfg, Path(args.out) / receiver)
        for r in records:
            post = "NA" if r.postfec_ber is None else f"{r.postfec_ber:.2e}"
            print(f"{receiver:>4} {r.ppb_total:6.3f} PPB  {r.dbm:8.2f} dBm  pre {r.prefec_ber:.3e}  post {post}")
        found[receiver] = sweeps.error_free_ppb(records, min_bits=cfg.max_bits)

    print(f"error free: PSA {found['psa']} PPB, EDFA {found['edfa']} PPB")
    if found["psa"] and found["edfa"]:
        print(f"gap {10 * math.log10(found['edfa'] / found['psa']):.2f} dB")


if __name__ == "__main__":
    main()
