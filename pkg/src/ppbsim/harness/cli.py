"""Command-line entry point: ``ppbsim <command> [--preset NAME] [--config PATH] ...``.

Exit codes: 0 success, 2 configuration error, 3 runtime or numeric error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigurationError
from . import sweeps
from .config import PRESETS, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

COMMANDS = {
    "capacity-curves": "sensitivity vs spectral efficiency curves and crossings",
    "ber-sweep": "pre/post-FEC BER versus received photons per bit",
    "budget": "penalty budget from theory to predicted sensitivity",
    "gmi-sweep": "GMI versus photons per bit and the ideal-FEC sensitivity",
    "fec-waterfall": "post-FEC BER versus Es/N0",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--preset", choices=PRESETS, help="shipped configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    common.add_argument("--ldpc-only", action="store_true", default=None, help="skip the outer BCH code")
    common.add_argument("--frame", type=int, choices=(64800, 16200))
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ppbsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value
    for key in ("seed", "workers", "frame"):
        if getattr(args, key) is not None:
            out[key] = getattr(args, key)
    if args.ldpc_only:
        out["ldpc_only"] = True
    return out


def run(args) -> None:
    cfg = load_config(args.preset, args.config, _overrides(args))
    out = Path(args.out)
    if args.command == "capacity-curves":
        result = sweeps.capacity_curves(cfg, out)
        for pair, se in result["crossings"].items():
            print(f"{pair:<28} {'none' if se is None else f'{se:.4f}'}")
    elif args.command == "ber-sweep":
        records = sweeps.ber_sweep(cfg, out)
        for r in records:
            post = "NA" if r.postfec_ber is None else f"{r.postfec_ber:.3e}"
            print(f"ppb={r.ppb_total:.4f} es_n0={r.es_n0_db:+.3f} dB pre={r.prefec_ber:.3e} post={post}")
        clean = sweeps.error_free_ppb(records)
        if clean is not None:
            print(f"error-free from {clean:.4f} PPB")
    elif args.command == "budget":
        print(sweeps.format_budget(sweeps.budget_report(cfg, out)))
    elif args.command == "gmi-sweep":
        result = sweeps.gmi_sweep(cfg, out)
        print(f"ideal-FEC sensitivity at {cfg.target_rate:g} bit/symbol: {result['ideal_fec_ppb']:.4f} PPB")
    elif args.command == "fec-waterfall":
        _, crossing, gain = sweeps.fec_waterfall(cfg, out)
        if crossing is None:
            print("post-FEC BER did not cross 1e-5 on this grid")
        else:
            print(f"post-FEC BER 1e-5 at {crossing:.3f} dB Es/N0, coding gain {gain:.2f} dB")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
