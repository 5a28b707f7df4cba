"""BER confidence intervals, stopping rules and GMI estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ConfigurationError, InputShapeError

LLR_CLIP = 50.0


@dataclass(frozen=True)
class StopRule:
    """Stop a Monte Carlo point at ``min_errors`` errors or ``max_bits`` bits, whichever first."""

    min_errors: int = 100
    max_bits: int = 10**7

    def __post_init__(self):
        if self.max_bits <= 0:
            raise ConfigurationError(f"stop rule can never be satisfied: max_bits={self.max_bits}")
        if self.min_errors < 0:
            raise ConfigurationError(f"min_errors must be >= 0, got {self.min_errors}")

    def done(self, errors: int, bits: int) -> bool:
        return bits >= self.max_bits or (self.min_errors > 0 and errors >= self.min_errors)


def wilson_interval(errors: int, bits: int, confidence: float = 0.95) -> tuple[float, float]:
    if bits <= 0:
        raise ValueError("bits must be positive")
    if not 0 <= errors <= bits:
        raise ValueError(f"errors must lie in [0, bits], got {errors}/{bits}")
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / bits
    z2n = z * z / bits
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / bits + z2n / (4.0 * bits)) / (1.0 + z2n)
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == bits else min(1.0, center + half)
    return min(low, p), max(high, p)


@dataclass(frozen=True)
class MonteCarloResult:
    errors: int
    bits: int
    ber: float
    ci95_low: float
    ci95_high: float

    def merge(self, other: "MonteCarloResult") -> "MonteCarloResult":
        return ber_with_ci(self.errors + other.errors, self.bits + other.bits)

    def interval(self, confidence: float) -> tuple[float, float]:
        return wilson_interval(self.errors, self.bits, confidence)


def ber_with_ci(errors: int, bits: int) -> MonteCarloResult:
    errors, bits = int(errors), int(bits)
    low, high = wilson_interval(errors, bits, 0.95)
    return MonteCarloResult(errors, bits, errors / bits, low, high)


@dataclass(frozen=True)
class GmiEstimate:
    bits_per_symbol: float
    sample_count: int
    std_error: float


@dataclass(frozen=True)
class GmiAccumulator:
    """Partial sums of the per-bit GMI terms; merging is exact and order independent."""

    total: float = 0.0
    count: int = 0
    total_sq: float = 0.0

    @classmethod
    def from_llrs(cls, llrs, tx_bits, clip: float = LLR_CLIP) -> "GmiAccumulator":
        terms = _gmi_terms(llrs, tx_bits, clip)
        return cls(float(terms.sum()), terms.size, float(np.dot(terms, terms)))

    def merge(self, other: "GmiAccumulator") -> "GmiAccumulator":
        return GmiAccumulator(self.total + other.total, self.count + other.count,
                              self.total_sq + other.total_sq)

    def estimate(self, bits_per_symbol: int = 2) -> GmiEstimate:
        if self.count == 0:
            raise ValueError("no samples accumulated")
        mean = self.total / self.count
        var = max(self.total_sq / self.count - mean * mean, 0.0)
        se = bits_per_symbol * math.sqrt(var / self.count)
        gmi = min(max(bits_per_symbol * mean, 0.0), float(bits_per_symbol))
        return GmiEstimate(gmi, self.count // bits_per_symbol, se)


def _gmi_terms(llrs, tx_bits, clip):
    llrs = np.asarray(llrs, dtype=np.float64)
    tx_bits = np.asarray(tx_bits)
    if llrs.shape != tx_bits.shape:
        raise InputShapeError(f"LLR/bit length mismatch: {llrs.shape} vs {tx_bits.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("non-finite LLR; saturate before GMI estimation")
    signed = np.clip((1.0 - 2.0 * tx_bits) * llrs, -clip, clip)
    # 1 - log2(1 + exp(-signed))
    return 1.0 - np.logaddexp(0.0, -signed) / math.log(2.0)


def gmi_from_llrs(llrs, tx_bits, clip: float = LLR_CLIP) -> GmiEstimate:
    """Bit-metric achievable rate of QPSK in bits/symbol.

    Positive LLR favours bit 0, matching :func:`ppbsim.modem.qpsk_llr`.
    """
    return GmiAccumulator.from_llrs(llrs, tx_bits, clip).estimate(2)


def ideal_fec_sensitivity(receiver, ledger=None, subset=(), target_rate: float = 1.0, seed: int = 0,
                          pump_suppression_db: float | None = None, n_symbols: int = 200_000,
                          bracket: tuple[float, float] = (0.05, 20.0), rtol: float = 1e-4) -> float:
    """Black-box photons per net bit at which the simulated GMI reaches ``target_rate``.

    The same noise realisation is reused for every trial PPB so the GMI is a
    smooth function of received power and bisection is well posed.
    """
    from . import linkmodel, modem

    if not 0 < target_rate < 2:
        raise ConfigurationError(f"target rate must lie in (0, 2) bits/symbol, got {target_rate}")
    ledger = ledger if ledger is not None else linkmodel.PenaltyLedger()
    subset = ledger.check_subset(subset)
    if pump_suppression_db is None:
        pump_suppression_db = linkmodel.DEFAULT_PUMP_SUPPRESSION_DB

    rng = modem.make_rng(seed, 0)
    bits = rng.integers(0, 2, size=2 * n_symbols, dtype=np.uint8)
    symbols = modem.qpsk_map(bits)
    unit_noise = modem.complex_gaussian(rng, n_symbols)

    def gmi_at(ppb):
        total = ppb * target_rate
        snr = linkmodel.symbol_snr(linkmodel.budget_for(receiver, total, pump_suppression_db), receiver)
        snr = linkmodel.apply_penalties(snr, ledger, subset)
        received = symbols + unit_noise * math.sqrt(1.0 / snr)
        return gmi_from_llrs(modem.qpsk_llr(received, snr), bits).bits_per_symbol

    lo, hi = bracket
    g_lo, g_hi = gmi_at(lo), gmi_at(hi)
    if not g_lo < target_rate < g_hi:
        raise ConfigurationError(
            f"target rate {target_rate} not bracketed: GMI({lo})={g_lo:.4f}, GMI({hi})={g_hi:.4f}"
        )
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if gmi_at(mid) < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
