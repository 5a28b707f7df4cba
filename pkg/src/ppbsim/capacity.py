"""Sensitivity versus spectral efficiency for pre-amplified coherent, PPM and quantum-limited receivers.

Every curve is traced by a per-symbol photon parameter ``n_s`` and reported as
``(se, ppb)``: spectral efficiency in bits/s/Hz and black-box photons per
information bit. For the PSA, ``n_s`` counts signal photons only while PPB
counts signal and idler, and ``se`` is per unit of occupied bandwidth (two
waves) unless the receiver-bandwidth view is requested.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, OutOfRangeError

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
PPM_MAX_LOG2_SLOTS = 20
BISECT_RTOL = 1e-10


class ModelKind(enum.Enum):
    PREAMP = "preamp"
    PSA = "psa"
    PSA_RX_BANDWIDTH = "psa_rx"
    EDFA = "edfa"
    SQ = "sq"
    PPM = "ppm"
    PPM_ENVELOPE = "ppm_envelope"
    GORDON = "gordon"


@dataclass(frozen=True)
class CapacityModel:
    kind: ModelKind
    nf_db: float | None = None
    slots: int | None = None

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ModelKind.PREAMP and (self.nf_db is None or self.nf_db < 0):
            raise ConfigurationError("PREAMP model needs a noise figure >= 0 dB")
        if kind is ModelKind.PPM:
            m = self.slots
            if m is None or m < 2 or m & (m - 1):
                raise ConfigurationError(f"PPM order must be a power of two >= 2, got {m}")

    @property
    def name(self) -> str:
        if self.kind is ModelKind.PPM:
            return f"ppm{self.slots}"
        if self.kind is ModelKind.PREAMP:
            return f"preamp{self.nf_db:g}"
        return self.kind.value

    @property
    def se_supremum(self) -> float:
        if self.kind is ModelKind.PPM:
            return math.log2(self.slots) / self.slots
        if self.kind is ModelKind.PPM_ENVELOPE:
            return 0.5
        return math.inf


PSA = CapacityModel(ModelKind.PSA)
PSA_RX_BANDWIDTH = CapacityModel(ModelKind.PSA_RX_BANDWIDTH)
EDFA = CapacityModel(ModelKind.EDFA)
SQ = CapacityModel(ModelKind.SQ)
PPM_ENVELOPE = CapacityModel(ModelKind.PPM_ENVELOPE)
GORDON = CapacityModel(ModelKind.GORDON)


def preamp(nf_db: float) -> CapacityModel:
    return CapacityModel(ModelKind.PREAMP, nf_db=nf_db)


def ppm(slots: int) -> CapacityModel:
    return CapacityModel(ModelKind.PPM, slots=slots)


def parse_model(name: str) -> CapacityModel:
    """``psa``, ``psa_rx``, ``edfa``, ``sq``, ``gordon``, ``ppm_envelope``, ``ppm<M>`` or ``preamp<nf_db>``."""
    key = name.strip().lower()
    for kind in (ModelKind.PSA, ModelKind.PSA_RX_BANDWIDTH, ModelKind.EDFA, ModelKind.SQ,
                 ModelKind.PPM_ENVELOPE, ModelKind.GORDON):
        if key == kind.value:
            return CapacityModel(kind)
    try:
        if key.startswith("ppm"):
            return ppm(int(key[3:]))
        if key.startswith("preamp"):
            return preamp(float(key[6:]))
    except (ValueError, ConfigurationError):
        pass
    raise ConfigurationError(
        f"unknown model {name!r}; valid: psa, psa_rx, edfa, sq, gordon, ppm_envelope, ppm<M>, preamp<nf_db>"
    )


@dataclass(frozen=True)
class CurvePoint:
    se: float
    ppb: float
    n_s: float
    slots: int | None = None


def _log2_1p(x):
    return np.log1p(x) / LN2


def cap_preamp(n_s, nf_db: float):
    """Bits per symbol of a dual-quadrature receiver behind an amplifier with noise figure ``nf_db``."""
    return _log2_1p(2.0 * np.asarray(n_s, dtype=float) / 10.0 ** (nf_db / 10.0))


def cap_edfa(n_s):
    """Quantum-limited phase-insensitive pre-amplifier (noise figure exactly 2)."""
    return _log2_1p(np.asarray(n_s, dtype=float))


def cap_psa(n_s):
    """Bits per unit occupied bandwidth; the idler halves the spectral efficiency."""
    return 0.5 * _log2_1p(4.0 * np.asarray(n_s, dtype=float))


def se_of(model: CapacityModel, n_s):
    n = np.asarray(n_s, dtype=float)
    k = model.kind
    if k is ModelKind.PREAMP:
        return cap_preamp(n, model.nf_db)
    if k is ModelKind.EDFA:
        return cap_edfa(n)
    if k in (ModelKind.PSA, ModelKind.SQ):
        return cap_psa(n)
    if k is ModelKind.PSA_RX_BANDWIDTH:
        return 2.0 * cap_psa(n)
    if k is ModelKind.PPM:
        m = model.slots
        return -np.expm1(-n) * math.log2(m) / m
    if k is ModelKind.GORDON:
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(n > 0, n * _log2_1p(1.0 / np.where(n > 0, n, 1.0)), 0.0)
        return _log2_1p(n) + tail
    raise ConfigurationError(f"{model.name} has no single-parameter capacity; use ppm_envelope")


def ppb_of(model: CapacityModel, n_s):
    """Black-box photons per information bit at per-symbol photon parameter ``n_s``."""
    n = np.asarray(n_s, dtype=float)
    if np.any(n <= 0):
        raise ValueError("n_s must be positive")
    k = model.kind
    if k in (ModelKind.PSA, ModelKind.PSA_RX_BANDWIDTH):
        # signal and idler photons per bits per symbol
        out = 2.0 * n / _log2_1p(4.0 * n)
    elif k is ModelKind.PPM:
        out = n / (-np.expm1(-n) * math.log2(model.slots))
    else:
        out = n / se_of(model, n)
    return float(out) if out.ndim == 0 else out


def low_snr_limit(model: CapacityModel) -> float:
    """Limit of :func:`ppb_of` as ``n_s -> 0``."""
    k = model.kind
    if k in (ModelKind.PSA, ModelKind.PSA_RX_BANDWIDTH, ModelKind.SQ):
        return LN2 / 2.0
    if k is ModelKind.EDFA:
        return LN2
    if k is ModelKind.PREAMP:
        return 10.0 ** (model.nf_db / 10.0) * LN2 / 2.0
    raise ConfigurationError(
        f"no closed-form low-SNR limit for {model.name}; sample its curve instead"
    )


def model_curve(model: CapacityModel, n_grid: Iterable[float]) -> list[CurvePoint]:
    n = np.asarray(list(n_grid), dtype=float)
    if np.any(n <= 0):
        raise ValueError("photon grid must be positive")
    se = np.atleast_1d(se_of(model, n))
    ppb = np.atleast_1d(ppb_of(model, n))
    return [CurvePoint(float(s), float(p), float(x), model.slots) for s, p, x in zip(se, ppb, n)]


def psa_curve(n_grid: Iterable[float], rx_bandwidth_view: bool = False) -> list[CurvePoint]:
    return model_curve(PSA_RX_BANDWIDTH if rx_bandwidth_view else PSA, n_grid)


def ppm_curve(slots: int, k_grid: Iterable[float]) -> list[CurvePoint]:
    return model_curve(ppm(slots), k_grid)


def gordon_curve(n_grid: Iterable[float]) -> list[CurvePoint]:
    return model_curve(GORDON, n_grid)


def bisect_increasing(f: Callable[[float], float], target: float, lo: float, hi: float,
                      rtol: float = BISECT_RTOL) -> float:
    """Root of ``f(x) = target`` for increasing ``f`` bracketed by ``[lo, hi]``."""
    f_lo, f_hi = f(lo) - target, f(hi) - target
    if f_lo > 0 or f_hi < 0:
        raise ValueError(f"target {target} not bracketed by [{lo}, {hi}]")
    while hi - lo > rtol * max(abs(hi), abs(lo), 1e-300):
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _invert_se(model: CapacityModel, se: float) -> float:
    f = lambda n: float(se_of(model, n))
    hi = 1.0
    while f(hi) < se:
        hi *= 2.0
        if hi > 1e300:
            raise OutOfRangeError(f"se={se} not reached by {model.name}")
    return bisect_increasing(f, se, 0.0, hi)


def _ppm_photons_for_se(slots: int, se: float) -> float:
    return _invert_se(ppm(slots), se)


def ppm_envelope(se_grid: Iterable[float], max_log2_slots: int = PPM_MAX_LOG2_SLOTS) -> list[CurvePoint]:
    """Least PPB over PPM orders 2..2**max_log2_slots at each spectral efficiency.

    Points above every order's supremum are omitted and logged.
    """
    out = []
    for se in se_grid:
        se = float(se)
        if not se > 0:
            raise ValueError("spectral efficiency must be positive")
        best = None
        for b in range(1, max_log2_slots + 1):
            m = 1 << b
            if se >= b / m:
                continue
            k = _ppm_photons_for_se(m, se)
            ppb = k / (se * m)
            if best is None or ppb < best.ppb:
                best = CurvePoint(se, ppb, k, m)
        if best is None:
            log.warning("se=%.6g is above the PPM supremum 0.5; point omitted", se)
            continue
        out.append(best)
    return out


def sensitivity_at(model: CapacityModel, se: float) -> float:
    """Photons per bit needed by ``model`` to operate at spectral efficiency ``se``."""
    if not se > 0:
        raise OutOfRangeError("spectral efficiency must be positive")
    sup = model.se_supremum
    if se >= sup:
        raise OutOfRangeError(f"se={se} is not attainable by {model.name} (supremum {sup:.6g})")
    if model.kind is ModelKind.PPM_ENVELOPE:
        return ppm_envelope([se])[0].ppb
    return float(ppb_of(model, _invert_se(model, se)))


def find_crossover(curve_a: Sequence[CurvePoint], curve_b: Sequence[CurvePoint],
                   tol: float = 1e-4, tie_rtol: float = 1e-4) -> float | None:
    """Lowest spectral efficiency where the two sampled curves reach equal PPB.

    Both curves are linearly interpolated on their shared SE range. Relative
    differences below ``tie_rtol`` count as coincident (interpolation noise on
    overlapping curves), so ``None`` means no genuine sign change.
    """
    a = sorted(curve_a, key=lambda p: p.se)
    b = sorted(curve_b, key=lambda p: p.se)
    if len(a) < 2 or len(b) < 2:
        return None
    sa, pa = np.array([p.se for p in a]), np.array([p.ppb for p in a])
    sb, pb = np.array([p.se for p in b]), np.array([p.ppb for p in b])
    lo, hi = max(sa[0], sb[0]), min(sa[-1], sb[-1])
    if not lo < hi:
        return None
    grid = np.unique(np.concatenate([sa, sb]))
    grid = grid[(grid >= lo) & (grid <= hi)]

    def diff(x):
        return float(np.interp(x, sa, pa) - np.interp(x, sb, pb))

    ya, yb = np.interp(grid, sa, pa), np.interp(grid, sb, pb)
    d = ya - yb
    sign = np.where(np.abs(d) <= tie_rtol * np.maximum(np.abs(ya), np.abs(yb)), 0.0, np.sign(d))
    # compare consecutive non-tied samples so a crossing on a grid point is not lost
    idx = np.flatnonzero(sign)
    for i, j in zip(idx, idx[1:]):
        if sign[i] != sign[j]:
            x0, x1 = grid[i], grid[j]
            s0 = sign[i]
            while x1 - x0 > tol * 1e-3:
                mid = 0.5 * (x0 + x1)
                if np.sign(diff(mid)) == s0:
                    x0 = mid
                else:
                    x1 = mid
            return 0.5 * (x0 + x1)
    return None
