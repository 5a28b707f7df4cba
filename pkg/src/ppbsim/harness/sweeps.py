"""Experiment drivers behind the CLI subcommands; each writes headered CSV."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .. import __version__, capacity, linkmodel, modem
from ..fec import FecChain, crossing_es_n0_db
from ..fec.chain import simulate_point
from ..metrics import ideal_fec_sensitivity
from .config import ExperimentConfig

NA = "NA"
UNCODED_REF_BER = 1e-5


def _num(x) -> str:
    if x is None:
        return NA
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def write_csv(path: Path, command: str, cfg: ExperimentConfig, columns, rows, extra_header=()) -> Path:
    """Deterministic CSV with a ``#`` provenance header; run metadata goes to a sidecar."""
    buf = io.StringIO()
    buf.write(f"# ppbsim {__version__} {command}\n")
    for line in cfg.echo():
        buf.write(f"# {line}\n")
    for line in extra_header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    meta = {
        "command": command,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "workers": cfg.workers,
        "python": platform.python_version(),
        "file": path.name,
    }
    path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return path


def _code_header(cfg: ExperimentConfig, chain: FecChain | None) -> list[str]:
    if chain is None:
        return ["fec=off"]
    return [f"ldpc_sha256={chain.ldpc.checksum}", f"net_bits_per_symbol={chain.net_bits_per_symbol!r}"]


def coded_bits_per_symbol(cfg: ExperimentConfig) -> float:
    """Bits per symbol that one 'photon per bit' refers to: the LDPC information rate, FEC overhead included."""
    if not cfg.fec:
        return 2.0
    chain = FecChain.dvbs2(cfg.frame, True)
    return 2.0 * chain.ldpc.info_length / chain.frame_length


@dataclass(frozen=True)
class SweepRecord:
    ppb_total: float
    dbm: float
    es_n0_db: float
    prefec_ber: float
    prefec_ci_low: float
    prefec_ci_high: float
    prefec_theory: float
    postfec_ber: float | None
    postfec_ci_low: float | None
    postfec_ci_high: float | None
    postfec_errors: int | None
    postfec_bits: int | None
    fer: float | None
    frames: int | None
    gmi: float
    seed: int


SWEEP_COLUMNS = [f.name for f in SweepRecord.__dataclass_fields__.values()]


def operating_point(cfg: ExperimentConfig, value: float) -> tuple[float, float, float]:
    """``(ppb_total, dbm, es_n0)`` for one grid value in the configured unit."""
    receiver = cfg.receiver_model()
    per_symbol = coded_bits_per_symbol(cfg)
    if cfg.grid_unit == "esn0_db":
        es_n0 = 10.0 ** (value / 10.0)
        penalty = cfg.penalty_ledger().total_db(cfg.subset())
        photons = linkmodel.total_photons_for_snr(es_n0, receiver, cfg.pump_suppression_db, penalty)
    else:
        if cfg.grid_unit == "dbm":
            photons = linkmodel.dbm_to_photons(value, cfg.symbol_rate, cfg.optical())
        else:
            photons = value * per_symbol
        budget = linkmodel.budget_for(receiver, photons, cfg.pump_suppression_db)
        es_n0 = linkmodel.apply_penalties(linkmodel.symbol_snr(budget, receiver),
                                          cfg.penalty_ledger(), cfg.subset())
    dbm = linkmodel.photons_to_dbm(photons, cfg.symbol_rate, cfg.optical())
    return photons / per_symbol, dbm, es_n0


def ber_sweep(cfg: ExperimentConfig, out_dir: Path | None = None) -> list[SweepRecord]:
    cfg.validate()
    chain = FecChain.dvbs2(cfg.frame, cfg.ldpc_only, cfg.max_iter, cfg.decoder) if cfg.fec else None
    stop = cfg.stop_rule()
    records = []
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for i, value in enumerate(cfg.grid_values()):
            ppb, dbm, es_n0 = operating_point(cfg, value)
            theory = modem.theoretical_ber_qpsk(es_n0)
            if chain is None:
                pre = modem.simulate_uncoded_point(es_n0, stop, cfg.seed, point=i)
                gmi = modem.simulate_gmi(es_n0, min(cfg.gmi_symbols, pre.bits // 2), cfg.seed, point=i).bits_per_symbol
                post = None
                rec = SweepRecord(ppb, dbm, 10 * math.log10(es_n0), pre.ber, pre.ci95_low, pre.ci95_high, theory,
                                  None, None, None, None, None, None, None, gmi, cfg.seed)
            else:
                pt = simulate_point(chain, es_n0, stop, cfg.seed, i, cfg.workers, cfg.batch_frames, executor)
                pre, post = pt.prefec, pt.postfec
                rec = SweepRecord(ppb, dbm, 10 * math.log10(es_n0), pre.ber, pre.ci95_low, pre.ci95_high, theory,
                                  post.ber, post.ci95_low, post.ci95_high, post.errors, post.bits,
                                  pt.fer, pt.frames, pt.gmi, cfg.seed)
            records.append(rec)
            if cfg.stop_after_clean and post is not None and post.errors == 0:
                break
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)
    if out_dir is not None:
        write_csv(Path(out_dir) / "ber_sweep.csv", "ber-sweep", cfg, SWEEP_COLUMNS,
                  [list(asdict(r).values()) for r in records], _code_header(cfg, chain))
    return records


def error_free_ppb(records: list[SweepRecord], max_ber: float = 1e-6, min_bits: int = 10**7) -> float | None:
    """Lowest PPB from which every point is error free (BER < ``max_ber`` over >= ``min_bits``)."""
    ok = [r.postfec_bits is not None and r.postfec_bits >= min_bits and r.postfec_ber < max_ber for r in records]
    best = None
    for r, good in zip(reversed(records), reversed(ok)):
        if not good:
            break
        best = r.ppb_total
    return best


def fec_waterfall(cfg: ExperimentConfig, out_dir: Path | None = None):
    """Post-FEC BER over an Es/N0 (dB) grid; also reports the 1e-5 crossing and coding gain."""
    cfg.validate()
    chain = FecChain.dvbs2(cfg.frame, cfg.ldpc_only, cfg.max_iter, cfg.decoder)
    stop = cfg.stop_rule()
    points = []
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for i, value in enumerate(cfg.grid_values()):
            es_n0 = 10.0 ** (value / 10.0)
            pt = simulate_point(chain, es_n0, stop, cfg.seed, i, cfg.workers, cfg.batch_frames, executor)
            points.append(pt)
            if cfg.stop_after_clean and pt.postfec.errors == 0:
                break
    finally:
        if executor is not None:
            executor.shutdown(cancel_futures=True)
    try:
        crossing = crossing_es_n0_db(points, UNCODED_REF_BER)
    except ValueError:
        crossing = None
    uncoded = uncoded_es_n0_db(UNCODED_REF_BER)
    gain = None if crossing is None else uncoded - crossing
    if out_dir is not None:
        rows = [[p.es_n0_db, p.prefec.ber, modem.theoretical_ber_qpsk(p.es_n0), p.postfec.ber, p.postfec.ci95_low,
                 p.postfec.ci95_high, p.postfec.errors, p.postfec.bits, p.fer, p.frames, p.mean_iterations, p.gmi]
                for p in points]
        cols = ["es_n0_db", "prefec_ber", "prefec_theory", "postfec_ber", "postfec_ci_low", "postfec_ci_high",
                "postfec_errors", "postfec_bits", "fer", "frames", "mean_iterations", "gmi"]
        extra = _code_header(cfg, chain) + [
            f"uncoded_es_n0_db_at_1e-5={uncoded:.6f}",
            f"postfec_es_n0_db_at_1e-5={_num(crossing)}",
            f"coding_gain_db={_num(gain)}",
        ]
        write_csv(Path(out_dir) / "waterfall.csv", "fec-waterfall", cfg, cols, rows, extra)
    return points, crossing, gain


def uncoded_es_n0_db(ber: float) -> float:
    """Es/N0 (dB) at which uncoded Gray QPSK reaches ``ber``."""
    from scipy.special import ndtri

    return 20.0 * math.log10(-ndtri(ber))


def curve_for(model: capacity.CapacityModel, cfg: ExperimentConfig) -> list[capacity.CurvePoint]:
    if model.kind is capacity.ModelKind.PPM_ENVELOPE:
        se = np.linspace(0.5 / cfg.se_points, 0.5, cfg.se_points, endpoint=False)
        return capacity.ppm_envelope(se)
    n = np.geomspace(cfg.n_min, cfg.n_max, cfg.n_points)
    return capacity.model_curve(model, n)


def capacity_curves(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    cfg.validate()
    models = cfg.model_list()
    curves = {m.name: curve_for(m, cfg) for m in models}
    crossings = []
    for a, b in itertools.combinations(models, 2):
        se = capacity.find_crossover(curves[a.name], curves[b.name])
        crossings.append((f"{a.name}/{b.name}", se))
    if out_dir is not None:
        out_dir = Path(out_dir)
        for name, pts in curves.items():
            write_csv(out_dir / f"curve_{name}.csv", "capacity-curves", cfg, ["model", "n_s", "se", "ppb"],
                      [[name, p.n_s, p.se, p.ppb] for p in pts])
        write_csv(out_dir / "crossings.csv", "capacity-curves", cfg, ["pair", "se_star"],
                  [[pair, NA if se is None else se] for pair, se in crossings])
        limits = []
        for m in models:
            try:
                limits.append([m.name, capacity.low_snr_limit(m)])
            except Exception:
                limits.append([m.name, NA])
        write_csv(out_dir / "limits.csv", "capacity-curves", cfg, ["model", "low_snr_ppb"], limits)
    return {"curves": curves, "crossings": dict(crossings)}


def budget_report(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    """Penalty budget from the SE-0.5 theory point to the predicted operating sensitivity."""
    cfg.validate()
    ledger = cfg.penalty_ledger()
    receiver = cfg.receiver_model()
    per_symbol = coded_bits_per_symbol(cfg) if cfg.fec else 1.0
    theory_se = per_symbol / 2.0 if receiver.kind is linkmodel.ReceiverKind.PSA else per_symbol
    theory_model = capacity.PSA if receiver.kind is linkmodel.ReceiverKind.PSA else capacity.EDFA
    theory_ppb = capacity.sensitivity_at(theory_model, theory_se)

    total_db = ledger.total_db()
    ledger_ppb = theory_ppb * 10.0 ** (total_db / 10.0)

    residual_db = ledger.total_db(cfg.subset())
    threshold = 10.0 ** (cfg.fec_threshold_db / 10.0)
    fec_photons = linkmodel.total_photons_for_snr(threshold, receiver, cfg.pump_suppression_db, residual_db)
    fec_ppb = fec_photons / per_symbol
    budget = linkmodel.budget_for(receiver, fec_photons, cfg.pump_suppression_db)
    pump_db = linkmodel.pump_overhead_db(cfg.pump_suppression_db) if receiver.kind is linkmodel.ReceiverKind.PSA else 0.0

    rows = [
        ["theory_ppb", theory_ppb, f"{theory_model.name} capacity at se={theory_se:g}"],
        ["pump_overhead_db", pump_db, f"pump {cfg.pump_suppression_db:g} dB below signal+idler"],
    ]
    rows += [[f"penalty_db:{label}", db, "ledger"] for label, db in ledger.entries]
    rows += [
        ["ledger_total_db", total_db, "sum of ledger entries"],
        ["ledger_predicted_ppb", ledger_ppb, "theory_ppb scaled by ledger total"],
        ["fec_threshold_es_n0_db", cfg.fec_threshold_db, "error-free Es/N0 of the decoder"],
        ["residual_penalty_db", residual_db, ",".join(cfg.subset()) or "none"],
        ["predicted_ppb", fec_ppb, "photons per bit at the decoder threshold"],
        ["signal_photons", budget.signal_photons, "per symbol at predicted_ppb"],
        ["idler_photons", budget.idler_photons, "per symbol at predicted_ppb"],
        ["pump_photons", budget.pump_photons, "per symbol at predicted_ppb"],
        ["predicted_dbm", linkmodel.photons_to_dbm(fec_photons, cfg.symbol_rate, cfg.optical()), "received power"],
        ["gap_to_theory_db", 10 * math.log10(fec_ppb / theory_ppb), "predicted vs theory"],
    ]
    if out_dir is not None:
        write_csv(Path(out_dir) / "budget.csv", "budget", cfg, ["item", "value", "note"], rows)
    return {r[0]: r[1] for r in rows} | {"_rows": rows}


def format_budget(report: dict) -> str:
    lines = [f"{'item':<26}{'value':>14}  note"]
    for item, value, note in report["_rows"]:
        lines.append(f"{item:<26}{value:>14.4f}  {note}")
    return "\n".join(lines)


def gmi_sweep(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    cfg.validate()
    rows = []
    for i, value in enumerate(cfg.grid_values()):
        if cfg.grid_unit == "esn0_db":
            es_n0 = 10.0 ** (value / 10.0)
            penalty = cfg.penalty_ledger().total_db(cfg.subset())
            ppb = linkmodel.total_photons_for_snr(es_n0, cfg.receiver_model(), cfg.pump_suppression_db,
                                                  penalty) / cfg.target_rate
        else:
            photons = (linkmodel.dbm_to_photons(value, cfg.symbol_rate, cfg.optical())
                       if cfg.grid_unit == "dbm" else value * cfg.target_rate)
            ppb = photons / cfg.target_rate
            budget = linkmodel.budget_for(cfg.receiver_model(), photons, cfg.pump_suppression_db)
            es_n0 = linkmodel.apply_penalties(linkmodel.symbol_snr(budget, cfg.receiver_model()),
                                              cfg.penalty_ledger(), cfg.subset())
        est = modem.simulate_gmi(es_n0, cfg.gmi_symbols, cfg.seed, point=i)
        rows.append([ppb, 10 * math.log10(es_n0), est.bits_per_symbol, est.std_error, est.bits_per_symbol / 2.0])
    solution = ideal_fec_sensitivity(cfg.receiver_model(), cfg.penalty_ledger(), cfg.subset(), cfg.target_rate,
                                     cfg.seed, cfg.pump_suppression_db, cfg.gmi_symbols)
    if out_dir is not None:
        write_csv(Path(out_dir) / "gmi_sweep.csv", "gmi-sweep", cfg,
                  ["ppb_total", "es_n0_db", "gmi", "gmi_std_error", "ngmi"], rows,
                  [f"ideal_fec_ppb={solution!r}", f"target_rate={cfg.target_rate!r}"])
    return {"rows": rows, "ideal_fec_ppb": solution}
