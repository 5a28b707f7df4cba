"""Concatenated BCH + LDPC chain and its Monte Carlo waterfall."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .. import modem
from ..errors import ConfigurationError, InputShapeError
from ..metrics import GmiAccumulator, MonteCarloResult, StopRule, ber_with_ci
from ..parallel import run_ordered
from .bch import BchCode, bch_decode, bch_encode, dvbs2_bch
from .ldpc import DEFAULT_MAX_ITER, MIN_SUM, SUM_PRODUCT, DecodeResult, LdpcCode, dvbs2_code, ldpc_decode, ldpc_encode


@dataclass(frozen=True, eq=False)
class FecChain:
    ldpc: LdpcCode
    bch: BchCode | None = None
    max_iter: int = DEFAULT_MAX_ITER
    algorithm: str = SUM_PRODUCT

    def __post_init__(self):
        if self.bch is not None and self.bch.n_bch != self.ldpc.info_length:
            raise ConfigurationError(
                f"BCH length {self.bch.n_bch} does not match LDPC info length {self.ldpc.info_length}"
            )
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.algorithm not in (SUM_PRODUCT, MIN_SUM):
            raise ConfigurationError(f"unknown decoder {self.algorithm!r}")

    @classmethod
    def dvbs2(cls, frame_length: int = 64800, ldpc_only: bool = False,
              max_iter: int = DEFAULT_MAX_ITER, algorithm: str = SUM_PRODUCT) -> "FecChain":
        return _cached_chain(frame_length, ldpc_only, max_iter, algorithm)

    @property
    def ldpc_only(self) -> bool:
        return self.bch is None

    @property
    def info_length(self) -> int:
        return self.ldpc.info_length if self.bch is None else self.bch.k_bch

    @property
    def frame_length(self) -> int:
        return self.ldpc.frame_length

    @property
    def rate(self) -> float:
        return self.info_length / self.frame_length

    @property
    def net_bits_per_symbol(self) -> float:
        """Information bits per QPSK symbol."""
        return 2.0 * self.info_length / self.frame_length

    def params(self) -> tuple:
        return (self.frame_length, self.ldpc_only, self.max_iter, self.algorithm)

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (self.info_length,):
            raise InputShapeError(f"chain needs {self.info_length} info bits, got {info.shape}")
        outer = info if self.bch is None else bch_encode(info, self.bch)
        return ldpc_encode(outer, self.ldpc)

    def decode(self, llrs) -> DecodeResult:
        inner = ldpc_decode(llrs, self.ldpc, self.max_iter, self.algorithm)
        systematic = inner.bits[: self.ldpc.info_length]
        if self.bch is None:
            return DecodeResult(systematic.copy(), inner.iterations_used, inner.converged)
        outer = bch_decode(systematic, self.bch)
        return DecodeResult(outer.bits, inner.iterations_used, inner.converged and outer.converged)


@lru_cache(maxsize=None)
def _cached_chain(frame_length, ldpc_only, max_iter, algorithm):
    return FecChain(dvbs2_code(frame_length), None if ldpc_only else dvbs2_bch(frame_length),
                    max_iter, algorithm)


def fec_encode_chain(info, chain: FecChain | None = None) -> np.ndarray:
    return (chain or FecChain.dvbs2()).encode(info)


def fec_decode_chain(llrs, chain: FecChain | None = None) -> DecodeResult:
    return (chain or FecChain.dvbs2()).decode(llrs)


@dataclass(frozen=True)
class FrameBatch:
    pre_errors: int
    coded_bits: int
    post_errors: int
    info_bits: int
    frames: int
    frame_errors: int
    iterations: int
    gmi: GmiAccumulator


@dataclass(frozen=True)
class WaterfallPoint:
    es_n0: float
    prefec: MonteCarloResult
    postfec: MonteCarloResult
    frames: int
    frame_errors: int
    gmi: float
    mean_iterations: float

    @property
    def es_n0_db(self) -> float:
        return 10.0 * math.log10(self.es_n0) if self.es_n0 > 0 else -math.inf

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames


def simulate_batch(chain_params: tuple, es_n0: float, seed: int, point: int, batch: int,
                   batch_frames: int) -> FrameBatch:
    """Run frames ``batch*batch_frames ...`` of one grid point through modem and FEC."""
    chain = FecChain.dvbs2(*chain_params)
    pre = post = frame_errors = iters = 0
    gmi = GmiAccumulator()
    for f in range(batch * batch_frames, (batch + 1) * batch_frames):
        sid = modem.stream_id(point, f)
        info = modem.make_rng(seed, sid | modem.DATA_LANE).integers(0, 2, chain.info_length, dtype=np.uint8)
        codeword = chain.encode(info)
        rx = modem.awgn(modem.qpsk_map(codeword), modem.ChannelSpec(es_n0, seed, sid))
        pre += int(np.count_nonzero(modem.qpsk_demap_hard(rx) != codeword))
        if math.isinf(es_n0):
            llrs = (1.0 - 2.0 * codeword) * 50.0
        else:
            llrs = modem.qpsk_llr(rx, es_n0)
        gmi = gmi.merge(GmiAccumulator.from_llrs(llrs, codeword))
        result = chain.decode(llrs)
        e = int(np.count_nonzero(result.bits != info))
        post += e
        frame_errors += e > 0
        iters += result.iterations_used
    n = batch_frames
    return FrameBatch(pre, n * chain.frame_length, post, n * chain.info_length, n, frame_errors, iters, gmi)


def fold_batches(es_n0: float, batches: Sequence[FrameBatch]) -> WaterfallPoint:
    pre = sum(b.pre_errors for b in batches)
    coded = sum(b.coded_bits for b in batches)
    post = sum(b.post_errors for b in batches)
    info = sum(b.info_bits for b in batches)
    frames = sum(b.frames for b in batches)
    gmi = functools.reduce(GmiAccumulator.merge, (b.gmi for b in batches), GmiAccumulator())
    return WaterfallPoint(
        es_n0=es_n0,
        prefec=ber_with_ci(pre, coded),
        postfec=ber_with_ci(post, info),
        frames=frames,
        frame_errors=sum(b.frame_errors for b in batches),
        gmi=gmi.estimate().bits_per_symbol,
        mean_iterations=sum(b.iterations for b in batches) / frames,
    )


def simulate_point(chain: FecChain, es_n0: float, stop: StopRule, seed: int, point: int = 0,
                   workers: int = 1, batch_frames: int = 1, executor=None) -> WaterfallPoint:
    """Frames until ``stop`` is met on post-FEC info-bit errors."""
    task = functools.partial(simulate_batch, chain.params(), es_n0, seed, point, batch_frames=batch_frames)

    def done(batches):
        return stop.done(sum(b.post_errors for b in batches), sum(b.info_bits for b in batches))

    return fold_batches(es_n0, run_ordered(task, done, workers, executor))


def waterfall(es_n0_grid: Sequence[float], chain: FecChain | None = None, stop: StopRule = StopRule(),
              seed: int = 0, workers: int = 1, batch_frames: int = 1,
              stop_after_clean: bool = False) -> list[WaterfallPoint]:
    """Post-FEC BER and FER over a grid of linear Es/N0 values.

    With ``stop_after_clean`` the sweep ends after the first point with no
    post-FEC errors, which skips the costly error-free tail.
    """
    if len(es_n0_grid) == 0:
        raise ConfigurationError("empty Es/N0 grid")
    chain = chain or FecChain.dvbs2()
    points = []
    for i, es_n0 in enumerate(es_n0_grid):
        pt = simulate_point(chain, es_n0, stop, seed, i, workers, batch_frames)
        points.append(pt)
        if stop_after_clean and pt.postfec.errors == 0:
            break
    return points


def crossing_es_n0_db(points: Sequence[WaterfallPoint], target_ber: float = 1e-5) -> float:
    """Es/N0 (dB) where post-FEC BER falls through ``target_ber``, interpolated in log BER.

    Zero-error points enter with their 95% upper bound, which makes the
    estimate conservative (biased to higher SNR).
    """
    pts = sorted(points, key=lambda p: p.es_n0)
    xs = [p.es_n0_db for p in pts]
    ys = [math.log10(p.postfec.ber if p.postfec.errors else p.postfec.ci95_high) for p in pts]
    target = math.log10(target_ber)
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 >= target > y1:
            return x0 + (target - y0) * (x1 - x0) / (y1 - y0)
    raise ValueError(f"post-FEC BER never crosses {target_ber} on the simulated grid")
