"""Photon counts, optical powers and per-symbol SNR for each receiver type.

All dB quantities are ``10*log10(linear)``; dBm is referenced to 1 mW.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from scipy.constants import c as SPEED_OF_LIGHT, h as PLANCK

from .errors import ConfigurationError

# Quantum-limited phase-insensitive amplifier, 10*log10(2).
QUANTUM_LIMIT_NF_DB = 10.0 * math.log10(2.0)

DEFAULT_WAVELENGTH_NM = 1550.0
DEFAULT_SYMBOL_RATE = 10.52e9
DEFAULT_PUMP_SUPPRESSION_DB = 12.0
DEFAULT_NF_PSA_DB = 1.2
DEFAULT_NF_EDFA_DB = 3.7


def db_to_lin(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def lin_to_db(x: float) -> float:
    if x == 0:
        return -math.inf
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class OpticalConstants:
    wavelength_nm: float = DEFAULT_WAVELENGTH_NM

    def __post_init__(self):
        if not self.wavelength_nm > 0:
            raise ConfigurationError(f"wavelength must be positive, got {self.wavelength_nm}")

    @property
    def wavelength(self) -> float:
        """Wavelength in metres."""
        return self.wavelength_nm * 1e-9

    @property
    def carrier_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength

    @property
    def photon_energy(self) -> float:
        return PLANCK * self.carrier_frequency


@dataclass(frozen=True)
class PowerBudget:
    """Photons per symbol carried by each received wave."""

    signal_photons: float
    idler_photons: float = 0.0
    pump_photons: float = 0.0
    pump_suppression_db: float = math.inf

    def __post_init__(self):
        for name in ("signal_photons", "idler_photons", "pump_photons"):
            v = getattr(self, name)
            if not v >= 0:
                raise ConfigurationError(f"{name} must be >= 0, got {v}")

    def total(self) -> float:
        return self.signal_photons + self.idler_photons + self.pump_photons


class ReceiverKind(enum.Enum):
    PSA = "psa"
    EDFA = "edfa"
    IDEAL_SQ = "ideal_sq"


@dataclass(frozen=True)
class ReceiverModel:
    kind: ReceiverKind
    nf_db: float | None = None

    def __post_init__(self):
        kind = ReceiverKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ReceiverKind.IDEAL_SQ:
            if self.nf_db is not None:
                raise ConfigurationError("IDEAL_SQ receiver takes no noise figure")
            return
        if self.nf_db is None or not math.isfinite(self.nf_db):
            raise ConfigurationError(f"{kind.name} receiver needs a finite noise figure")
        if kind is ReceiverKind.PSA and self.nf_db < 0:
            raise ConfigurationError(f"PSA noise figure must be >= 0 dB, got {self.nf_db}")
        if kind is ReceiverKind.EDFA and self.nf_db < 3.0:
            raise ConfigurationError(f"EDFA noise figure must be >= 3 dB, got {self.nf_db}")

    @classmethod
    def psa(cls, nf_db: float = DEFAULT_NF_PSA_DB) -> "ReceiverModel":
        return cls(ReceiverKind.PSA, nf_db)

    @classmethod
    def edfa(cls, nf_db: float = DEFAULT_NF_EDFA_DB) -> "ReceiverModel":
        return cls(ReceiverKind.EDFA, nf_db)

    @classmethod
    def ideal_sq(cls) -> "ReceiverModel":
        return cls(ReceiverKind.IDEAL_SQ)

    @property
    def nf_lin(self) -> float:
        return 1.0 if self.nf_db is None else db_to_lin(self.nf_db)


@dataclass(frozen=True)
class PenaltyLedger:
    """Ordered (label, dB) implementation penalties; they add in dB."""

    entries: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple((str(label), float(db)) for label, db in self.entries)
        seen = set()
        for label, db in entries:
            if label in seen:
                raise ConfigurationError(f"duplicate ledger label {label!r}")
            if not db >= 0:
                raise ConfigurationError(f"penalty {label!r} must be >= 0 dB, got {db}")
            seen.add(label)
        object.__setattr__(self, "entries", entries)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]

    def check_subset(self, subset: Iterable[str]) -> list[str]:
        subset = list(subset)
        known = set(self.labels)
        for label in subset:
            if label not in known:
                raise ConfigurationError(
                    f"unknown ledger label {label!r}; defined labels: {', '.join(self.labels) or '(none)'}"
                )
        return subset

    def total_db(self, subset: Iterable[str] | None = None) -> float:
        if subset is None:
            return sum(db for _, db in self.entries)
        chosen = set(self.check_subset(subset))
        return sum(db for label, db in self.entries if label in chosen)


# Measured experiment-to-theory gap contributions at SE 0.5.
MEASURED_LEDGER = PenaltyLedger((
    ("nf_excess", 1.2),
    ("impl", 0.4),
    ("dvbs2", 0.7),
    ("wdm", 0.2),
    ("pump", 0.26),
    ("pll", 0.3),
))

# Entries not already produced by the NF, pump and FEC models.
RESIDUAL_SUBSET = ("impl", "wdm", "pll")


def photons_to_dbm(n: float, symbol_rate: float = DEFAULT_SYMBOL_RATE,
                   constants: OpticalConstants = OpticalConstants()) -> float:
    """Optical power carrying ``n`` photons per symbol at ``symbol_rate``.

    Zero photons maps to ``-math.inf`` rather than a large negative number.
    """
    if n < 0:
        raise ValueError(f"photon count must be >= 0, got {n}")
    if not symbol_rate > 0:
        raise ValueError(f"symbol rate must be positive, got {symbol_rate}")
    if n == 0:
        return -math.inf
    watts = n * constants.photon_energy * symbol_rate
    return 10.0 * math.log10(watts / 1e-3)


def dbm_to_photons(dbm: float, symbol_rate: float = DEFAULT_SYMBOL_RATE,
                   constants: OpticalConstants = OpticalConstants()) -> float:
    if dbm == -math.inf:
        return 0.0
    watts = 1e-3 * 10.0 ** (dbm / 10.0)
    return watts / (constants.photon_energy * symbol_rate)


def vacuum_noise_dbm(resolution_bandwidth_nm: float,
                     constants: OpticalConstants = OpticalConstants()) -> float:
    """Half-photon-per-mode vacuum noise power in a given optical bandwidth."""
    if not resolution_bandwidth_nm > 0:
        raise ValueError("resolution bandwidth must be positive")
    lam = constants.wavelength
    dnu = SPEED_OF_LIGHT * resolution_bandwidth_nm * 1e-9 / lam**2
    watts = constants.photon_energy * dnu / 2.0
    return 10.0 * math.log10(watts / 1e-3)


def split_budget(total_photons: float, pump_suppression_db: float = DEFAULT_PUMP_SUPPRESSION_DB) -> PowerBudget:
    """Split a received photon total into equal signal/idler plus a pump.

    The pump sits ``pump_suppression_db`` below signal+idler; ``+inf`` means no pump.
    """
    if not total_photons >= 0:
        raise ValueError(f"total photons must be >= 0, got {total_photons}")
    if math.isnan(pump_suppression_db) or pump_suppression_db == -math.inf:
        raise ValueError(f"pump suppression must be finite or +inf, got {pump_suppression_db}")
    pump_ratio = 0.0 if pump_suppression_db == math.inf else 10.0 ** (-pump_suppression_db / 10.0)
    signal = total_photons / (2.0 * (1.0 + pump_ratio))
    # pump takes the remainder so the parts sum back to the total
    pump = total_photons - 2.0 * signal
    if pump < 0:
        pump = 0.0
    return PowerBudget(signal, signal, pump, pump_suppression_db)


def budget_for(receiver: ReceiverModel, total_photons: float,
               pump_suppression_db: float = DEFAULT_PUMP_SUPPRESSION_DB) -> PowerBudget:
    """Received budget for a black-box photon total: PSA carries idler and pump, others a single wave."""
    if receiver.kind is ReceiverKind.PSA:
        return split_budget(total_photons, pump_suppression_db)
    return PowerBudget(float(total_photons))


def pump_overhead_db(pump_suppression_db: float) -> float:
    if pump_suppression_db == math.inf:
        return 0.0
    return 10.0 * math.log10(1.0 + 10.0 ** (-pump_suppression_db / 10.0))


def symbol_snr(budget: PowerBudget, receiver: ReceiverModel) -> float:
    """Linear Es/N0 seen by the symbol detector.

    Only signal photons enter; idler and pump cost received power but add no SNR here.
    """
    n = budget.signal_photons
    if receiver.kind is ReceiverKind.EDFA:
        return 2.0 * n / receiver.nf_lin
    if receiver.kind is ReceiverKind.PSA:
        return 4.0 * n / receiver.nf_lin
    return 4.0 * n


def apply_penalties(snr: float, ledger: PenaltyLedger, subset: Sequence[str] = ()) -> float:
    return snr * 10.0 ** (-ledger.total_db(subset) / 10.0)


def total_photons_for_snr(es_n0: float, receiver: ReceiverModel,
                          pump_suppression_db: float = DEFAULT_PUMP_SUPPRESSION_DB,
                          penalty_db: float = 0.0) -> float:
    """Inverse of the photon-to-SNR mapping: black-box photons per symbol giving ``es_n0`` after penalties."""
    per_signal = symbol_snr(PowerBudget(1.0), receiver) * 10.0 ** (-penalty_db / 10.0)
    signal = es_n0 / per_signal
    if receiver.kind is ReceiverKind.PSA:
        ratio = 0.0 if pump_suppression_db == math.inf else 10.0 ** (-pump_suppression_db / 10.0)
        return 2.0 * signal * (1.0 + ratio)
    return signal
