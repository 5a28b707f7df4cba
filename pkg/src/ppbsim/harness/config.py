"""Flat ``key = value`` experiment configuration with presets and overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .. import capacity, linkmodel
from ..errors import ConfigurationError
from ..fec.ldpc import MIN_SUM, SUM_PRODUCT
from ..metrics import StopRule

PRESETS = ("fig2-psa", "fig2-edfa", "fig3", "gmi", "budget", "waterfall")
GRID_UNITS = ("ppb", "dbm", "esn0_db")
# excluded from data-file headers so outputs do not depend on them
RUNTIME_ONLY = ("workers",)


@dataclass
class ExperimentConfig:
    receiver: str = "psa"
    nf_db: float = linkmodel.DEFAULT_NF_PSA_DB
    pump_suppression_db: float = linkmodel.DEFAULT_PUMP_SUPPRESSION_DB
    ledger: str = "nf_excess:1.2,impl:0.4,dvbs2:0.7,wdm:0.2,pump:0.26,pll:0.3"
    ledger_subset: str = "impl,wdm,pll"
    symbol_rate: float = linkmodel.DEFAULT_SYMBOL_RATE
    wavelength_nm: float = linkmodel.DEFAULT_WAVELENGTH_NM

    fec: bool = True
    frame: int = 64800
    ldpc_only: bool = False
    max_iter: int = 50
    decoder: str = SUM_PRODUCT
    fec_threshold_db: float = 0.9

    grid: str = "0.8,0.9,1.0,1.1,1.2"
    grid_unit: str = "ppb"
    min_errors: int = 100
    max_bits: int = 10**7
    stop_after_clean: bool = False
    seed: int = 1
    workers: int = 1
    batch_frames: int = 1

    models: str = "psa,psa_rx,edfa,sq,ppm64,ppm_envelope,gordon"
    n_min: float = 1e-4
    n_max: float = 1e3
    n_points: int = 2000
    se_points: int = 1000

    target_rate: float = 1.0
    gmi_symbols: int = 200_000

    # -- derived views -------------------------------------------------

    def receiver_model(self) -> linkmodel.ReceiverModel:
        kind = linkmodel.ReceiverKind(self.receiver)
        nf = None if kind is linkmodel.ReceiverKind.IDEAL_SQ else self.nf_db
        return linkmodel.ReceiverModel(kind, nf)

    def penalty_ledger(self) -> linkmodel.PenaltyLedger:
        return parse_ledger(self.ledger)

    def subset(self) -> list[str]:
        return _split(self.ledger_subset)

    def stop_rule(self) -> StopRule:
        return StopRule(self.min_errors, self.max_bits)

    def grid_values(self) -> list[float]:
        return parse_grid(self.grid)

    def model_list(self) -> list[capacity.CapacityModel]:
        return [capacity.parse_model(m) for m in _split(self.models)]

    def optical(self) -> linkmodel.OpticalConstants:
        return linkmodel.OpticalConstants(self.wavelength_nm)

    def echo(self) -> list[str]:
        """``key=value`` lines for data-file headers."""
        return [f"{f.name}={_fmt(getattr(self, f.name))}"
                for f in dataclasses.fields(self) if f.name not in RUNTIME_ONLY]

    def validate(self) -> None:
        """Collect every problem and raise once, before any simulation starts."""
        problems = []

        def check(fn):
            try:
                fn()
            except (ConfigurationError, ValueError) as exc:
                problems.append(str(exc))

        check(self.receiver_model)
        check(lambda: self.penalty_ledger().check_subset(self.subset()))
        check(self.stop_rule)
        check(self.model_list)
        check(self.optical)
        try:
            grid = self.grid_values()
            if not grid:
                problems.append("sweep grid is empty")
            elif any(b <= a for a, b in zip(grid, grid[1:])):
                problems.append("sweep grid must be strictly increasing")
            elif self.grid_unit == "ppb" and grid[0] <= 0:
                problems.append("PPB grid values must be positive")
        except ValueError as exc:
            problems.append(str(exc))
        if self.grid_unit not in GRID_UNITS:
            problems.append(f"grid_unit must be one of {GRID_UNITS}, got {self.grid_unit!r}")
        if self.frame not in (64800, 16200):
            problems.append(f"frame must be 64800 or 16200, got {self.frame}")
        if self.decoder not in (SUM_PRODUCT, MIN_SUM):
            problems.append(f"decoder must be {SUM_PRODUCT!r} or {MIN_SUM!r}, got {self.decoder!r}")
        if self.max_iter < 1:
            problems.append("max_iter must be >= 1")
        if self.workers < 1 or self.batch_frames < 1:
            problems.append("workers and batch_frames must be >= 1")
        if not self.symbol_rate > 0:
            problems.append("symbol_rate must be positive")
        if math.isnan(self.pump_suppression_db) or self.pump_suppression_db == -math.inf:
            problems.append("pump_suppression_db must be finite or inf")
        if not 0 < self.target_rate < 2:
            problems.append("target_rate must lie in (0, 2)")
        if not 0 < self.n_min < self.n_max or self.n_points < 2 or self.se_points < 2:
            problems.append("curve grid needs 0 < n_min < n_max and at least 2 points")
        if problems:
            raise ConfigurationError("; ".join(problems))


def _split(text: str) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_ledger(text: str) -> linkmodel.PenaltyLedger:
    entries = []
    for item in _split(text):
        label, sep, value = item.partition(":")
        if not sep:
            raise ConfigurationError(f"ledger entry {item!r} is not label:dB")
        try:
            entries.append((label.strip(), float(value)))
        except ValueError:
            raise ConfigurationError(f"ledger entry {item!r} has a non-numeric penalty") from None
    return linkmodel.PenaltyLedger(tuple(entries))


def parse_grid(text: str) -> list[float]:
    """Comma list of values and/or ``start:stop:step`` ranges (stop inclusive)."""
    out = []
    for item in _split(text):
        if ":" in item:
            try:
                start, stop, step = (float(x) for x in item.split(":"))
            except ValueError:
                raise ConfigurationError(f"bad grid range {item!r}; use start:stop:step") from None
            if step <= 0:
                raise ConfigurationError(f"grid step must be positive in {item!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            out.extend(float(np.round(start + i * step, 12)) for i in range(count))
        else:
            try:
                out.append(float(item))
            except ValueError:
                raise ConfigurationError(f"bad grid value {item!r}") from None
    return out


def _coerce(name: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    if name not in fields:
        raise ConfigurationError(f"unknown config key {name!r}")
    kind = type(getattr(ExperimentConfig(), name))
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind is int:
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if kind is float:
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"config key {name!r} cannot take value {raw!r}") from None
    return raw


def parse_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {line!r}")
        values[key.strip()] = _coerce(key.strip(), value)
    return values


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("ppbsim.harness").joinpath("presets", f"{name}.cfg").read_text()


def load_config(preset: str | None = None, path: str | Path | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then preset, then config file, then explicit overrides."""
    values = {}
    if preset:
        values.update(parse_text(preset_text(preset)))
    if path:
        try:
            values.update(parse_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    for key, value in (overrides or {}).items():
        values[key] = _coerce(key, value) if isinstance(value, str) else value
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg
