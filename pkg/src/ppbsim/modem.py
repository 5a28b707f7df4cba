"""Gray QPSK over a symbol-level AWGN channel, with exact soft demapping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError, InputShapeError
from .linkmodel import (
    DEFAULT_PUMP_SUPPRESSION_DB,
    PenaltyLedger,
    ReceiverModel,
    apply_penalties,
    budget_for,
    symbol_snr,
)
from .metrics import MonteCarloResult, StopRule, ber_with_ci

_MASK64 = (1 << 64) - 1
# Streams with this bit set carry payload bits; the rest carry channel noise.
DATA_LANE = 1 << 63
CHUNK_SYMBOLS = 1 << 16
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def make_rng(seed: int, stream_id: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream_id)``.

    Philox is keyed directly, so streams never overlap and any stream can be
    regenerated on any worker without replaying the others.
    """
    key = np.array([int(seed) & _MASK64, int(stream_id) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def stream_id(point: int, chunk: int) -> int:
    return ((int(point) & 0x7FFFFFFF) << 32) | (int(chunk) & 0xFFFFFFFF)


def complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    """Unit-variance circular complex Gaussians by the Box-Muller transform."""
    u1 = rng.random(n)
    u2 = rng.random(n)
    r = np.sqrt(-np.log1p(-u1))  # -2 ln(1-u) halved: each rail gets variance 1/2
    phase = 2.0 * np.pi * u2
    return r * np.cos(phase) + 1j * (r * np.sin(phase))


@dataclass(frozen=True)
class ChannelSpec:
    es_n0: float
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        if not self.es_n0 > 0:
            raise ConfigurationError(f"es_n0 must be positive, got {self.es_n0}")

    @property
    def noiseless(self) -> bool:
        return self.es_n0 == math.inf


def qpsk_map(bits) -> np.ndarray:
    """Gray map bit pairs ``(b_I, b_Q)`` to ``((1-2b_I) + j(1-2b_Q))/sqrt(2)``."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size % 2:
        raise InputShapeError(f"QPSK mapper needs an even number of bits, got shape {bits.shape}")
    pairs = 1.0 - 2.0 * bits.reshape(-1, 2).astype(np.float64)
    return (pairs[:, 0] + 1j * pairs[:, 1]) * _INV_SQRT2


def awgn(symbols, spec: ChannelSpec) -> np.ndarray:
    """Add noise of total variance ``1/es_n0`` per symbol."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if spec.noiseless:
        return symbols.copy()
    rng = make_rng(spec.seed, spec.stream_id)
    return symbols + complex_gaussian(rng, symbols.size) * math.sqrt(1.0 / spec.es_n0)


def qpsk_demap_hard(symbols) -> np.ndarray:
    """Sign decision per rail; an exact zero decides bit 0."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    out = np.empty(2 * symbols.size, dtype=np.uint8)
    out[0::2] = symbols.real < 0
    out[1::2] = symbols.imag < 0
    return out


def qpsk_llr(symbols, es_n0: float) -> np.ndarray:
    """Exact per-bit LLRs, positive favouring bit 0.

    Gray QPSK separates into two BPSK rails of amplitude 1/sqrt(2) and noise
    variance 1/(2 es_n0), so the log-sum demapper reduces to ``2 sqrt(2) es_n0 y``.
    """
    if not es_n0 > 0:
        raise ValueError(f"es_n0 must be positive, got {es_n0}")
    symbols = np.asarray(symbols, dtype=np.complex128)
    scale = 2.0 * math.sqrt(2.0) * es_n0
    out = np.empty(2 * symbols.size, dtype=np.float64)
    out[0::2] = scale * symbols.real
    out[1::2] = scale * symbols.imag
    return out


def theoretical_ber_qpsk(es_n0):
    """Gray QPSK bit error probability ``Q(sqrt(es_n0))``."""
    es_n0 = np.asarray(es_n0, dtype=np.float64)
    if np.any(es_n0 < 0):
        raise ValueError("es_n0 must be >= 0")
    ber = ndtr(-np.sqrt(es_n0))
    return float(ber) if ber.ndim == 0 else ber


def simulate_uncoded_point(es_n0: float, stop: StopRule, seed: int, point: int = 0,
                           chunk_symbols: int = CHUNK_SYMBOLS) -> MonteCarloResult:
    """Uncoded QPSK BER at one SNR, drawn chunk by chunk until ``stop`` is met."""
    errors = bits = 0
    chunk = 0
    while not stop.done(errors, bits):
        n_sym = min(chunk_symbols, max(1, -(-(stop.max_bits - bits) // 2)))
        sid = stream_id(point, chunk)
        tx = make_rng(seed, sid | DATA_LANE).integers(0, 2, size=2 * n_sym, dtype=np.uint8)
        rx = awgn(qpsk_map(tx), ChannelSpec(es_n0, seed, sid))
        errors += int(np.count_nonzero(qpsk_demap_hard(rx) != tx))
        bits += tx.size
        chunk += 1
    return ber_with_ci(errors, bits)


def run_uncoded_ber(budget_sweep: Sequence[float], receiver: ReceiverModel, stop: StopRule, seed: int = 0,
                    pump_suppression_db: float = DEFAULT_PUMP_SUPPRESSION_DB,
                    ledger: PenaltyLedger | None = None, subset: Sequence[str] = ()) -> list[MonteCarloResult]:
    """Pre-FEC BER for each black-box photons-per-symbol value in ``budget_sweep``."""
    if len(budget_sweep) == 0:
        raise ConfigurationError("empty photon sweep")
    ledger = ledger if ledger is not None else PenaltyLedger()
    ledger.check_subset(subset)
    results = []
    for i, total in enumerate(budget_sweep):
        snr = symbol_snr(budget_for(receiver, total, pump_suppression_db), receiver)
        snr = apply_penalties(snr, ledger, subset)
        results.append(simulate_uncoded_point(snr, stop, seed, point=i))
    return results


def simulate_gmi(es_n0: float, n_symbols: int, seed: int, point: int = 0):
    """GMI of exact-LLR QPSK at ``es_n0`` from ``n_symbols`` channel uses."""
    from .metrics import GmiAccumulator

    acc = GmiAccumulator()
    done = 0
    chunk = 0
    while done < n_symbols:
        n = min(CHUNK_SYMBOLS, n_symbols - done)
        sid = stream_id(point, chunk)
        tx = make_rng(seed, sid | DATA_LANE).integers(0, 2, size=2 * n, dtype=np.uint8)
        rx = awgn(qpsk_map(tx), ChannelSpec(es_n0, seed, sid))
        llrs = qpsk_llr(rx, es_n0) if math.isfinite(es_n0) else (1.0 - 2.0 * tx) * 50.0
        acc = acc.merge(GmiAccumulator.from_llrs(llrs, tx))
        done += n
        chunk += 1
    return acc.estimate(2)
