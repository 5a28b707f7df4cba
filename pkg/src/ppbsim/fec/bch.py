"""DVB-S2 outer BCH code (t = 12), systematic encoder and algebraic decoder.

Bit ``i`` of a codeword is the coefficient of ``x**(n-1-i)``: the first bit
sent is the highest-order term, as in the standard.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError, InputShapeError
from .ldpc import DecodeResult

# Factors g1..g12 of the generator polynomial, as exponent lists.
_NORMAL_FACTORS = (
    (0, 2, 3, 5, 16),
    (0, 1, 4, 5, 6, 8, 16),
    (0, 2, 3, 4, 5, 7, 8, 9, 10, 11, 16),
    (0, 2, 4, 6, 9, 11, 12, 14, 16),
    (0, 1, 2, 3, 5, 8, 9, 10, 11, 12, 16),
    (0, 2, 4, 5, 7, 8, 9, 10, 12, 13, 14, 15, 16),
    (0, 2, 5, 6, 8, 9, 10, 11, 13, 15, 16),
    (0, 1, 2, 5, 6, 8, 9, 12, 13, 14, 16),
    (0, 5, 7, 9, 10, 11, 16),
    (0, 1, 2, 5, 7, 8, 10, 12, 13, 14, 16),
    (0, 2, 3, 5, 9, 11, 12, 13, 16),
    (0, 1, 5, 6, 7, 9, 11, 12, 16),
)
_SHORT_FACTORS = (
    (0, 1, 3, 5, 14),
    (0, 6, 8, 11, 14),
    (0, 1, 2, 6, 9, 10, 14),
    (0, 4, 7, 8, 10, 12, 14),
    (0, 2, 4, 6, 8, 9, 11, 13, 14),
    (0, 3, 7, 8, 9, 13, 14),
    (0, 2, 5, 6, 7, 10, 11, 13, 14),
    (0, 5, 8, 9, 10, 11, 14),
    (0, 1, 2, 3, 9, 10, 14),
    (0, 3, 6, 9, 11, 12, 14),
    (0, 4, 11, 12, 14),
    (0, 1, 2, 3, 5, 6, 7, 8, 10, 13, 14),
)
# (k_bch, n_bch, field degree, factors) keyed by LDPC frame length
_PARAMS = {
    64800: (32208, 32400, 16, _NORMAL_FACTORS),
    16200: (7032, 7200, 14, _SHORT_FACTORS),
}


def _poly(exps) -> int:
    p = 0
    for e in exps:
        p ^= 1 << e
    return p


def _gf2_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


class GaloisField:
    """GF(2^m) with exp/log tables over a primitive polynomial."""

    def __init__(self, m: int, primitive: int):
        self.m = m
        self.order = (1 << m) - 1
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.order + 1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> m:
                x ^= primitive
        if x != 1:
            raise ConfigurationError("field polynomial is not primitive")
        exp[self.order:] = exp[: self.order]
        self.exp, self.log = exp, log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        return int(self.exp[self.order - self.log[a]])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % self.order])


@dataclass(frozen=True, eq=False)
class BchCode:
    k_bch: int
    n_bch: int
    t: int
    field_degree: int
    generator: int
    gf: GaloisField = field(repr=False)
    _table: np.ndarray = field(repr=False)

    @property
    def n_parity(self) -> int:
        return self.n_bch - self.k_bch

    @property
    def overhead(self) -> float:
        return self.n_bch / self.k_bch - 1.0

    def generator_bits(self) -> np.ndarray:
        """Generator coefficients, highest degree first."""
        deg = self.n_parity
        return np.array([(self.generator >> (deg - i)) & 1 for i in range(deg + 1)], dtype=np.uint8)


@lru_cache(maxsize=None)
def dvbs2_bch(frame_length: int = 64800) -> BchCode:
    try:
        k, n, m, factors = _PARAMS[frame_length]
    except KeyError:
        raise ConfigurationError(f"no BCH code for frame length {frame_length}") from None
    g = 1
    for f in factors:
        g = _gf2_mul(g, _poly(f))
    if g.bit_length() - 1 != n - k:
        raise ConfigurationError("generator degree does not match the parity length")
    gf = GaloisField(m, _poly(factors[0]))
    return BchCode(k, n, 12, m, g, gf, _byte_table(g, n - k))


def _byte_table(g: int, deg: int) -> np.ndarray:
    # remainder update for 8 message bits entering the top of the register
    mask = (1 << deg) - 1
    table = []
    for byte in range(256):
        reg = byte << (deg - 8)
        for _ in range(8):
            if reg >> (deg - 1) & 1:
                reg = ((reg << 1) & mask) ^ (g & mask)
            else:
                reg = (reg << 1) & mask
        table.append(reg)
    return np.array(table, dtype=object)


def _remainder(bits: np.ndarray, code: BchCode) -> int:
    """Remainder of ``m(x) x^(n-k)`` modulo ``g(x)`` for MSB-first message bits."""
    deg = code.n_parity
    mask = (1 << deg) - 1
    pad = (-bits.size) % 8
    # leading zeros do not change the remainder
    data = np.packbits(np.concatenate([np.zeros(pad, dtype=np.uint8), bits])).tolist()
    table = code._table
    reg = 0
    shift = deg - 8
    for byte in data:
        reg = ((reg << 8) & mask) ^ table[(reg >> shift) ^ byte]
    return reg


def bch_encode(info, code: BchCode) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (code.k_bch,):
        raise InputShapeError(f"BCH encoder needs {code.k_bch} bits, got {info.shape}")
    rem = _remainder(info, code)
    deg = code.n_parity
    parity = np.array([(rem >> (deg - 1 - i)) & 1 for i in range(deg)], dtype=np.uint8)
    return np.concatenate([info, parity])


def syndromes(word: np.ndarray, code: BchCode) -> list[int]:
    """``S_j = r(alpha^j)`` for j = 1..2t."""
    gf = code.gf
    powers = (code.n_bch - 1 - np.flatnonzero(word)).astype(np.int64)
    out = []
    for j in range(1, 2 * code.t + 1):
        if powers.size == 0:
            out.append(0)
            continue
        terms = gf.exp[(powers * j) % gf.order]
        out.append(int(np.bitwise_xor.reduce(terms)))
    return out


def berlekamp_massey(synd: list[int], gf: GaloisField) -> list[int]:
    """Error locator coefficients ``[1, L1, L2, ...]`` from the syndromes."""
    lam = [1]
    prev = [1]
    length = 0
    shift = 1
    prev_disc = 1
    for r in range(len(synd)):
        disc = synd[r]
        for i in range(1, length + 1):
            if i < len(lam):
                disc ^= gf.mul(lam[i], synd[r - i])
        if disc == 0:
            shift += 1
            continue
        coef = gf.mul(disc, gf.inv(prev_disc))
        update = [0] * shift + [gf.mul(coef, p) for p in prev]
        new = [(lam[i] if i < len(lam) else 0) ^ (update[i] if i < len(update) else 0)
               for i in range(max(len(lam), len(update)))]
        if 2 * length <= r:
            prev, length, prev_disc, shift = lam, r + 1 - length, disc, 1
        else:
            shift += 1
        lam = new
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    return lam


def chien_search(lam: list[int], code: BchCode) -> np.ndarray:
    """Codeword powers ``p`` in [0, n) with ``Lambda(alpha^-p) = 0``."""
    gf = code.gf
    p = np.arange(code.n_bch, dtype=np.int64)
    acc = np.zeros(code.n_bch, dtype=np.int64)
    for i, coef in enumerate(lam):
        if coef == 0:
            continue
        acc ^= gf.exp[(gf.log[coef] - i * p) % gf.order]
    return np.flatnonzero(acc == 0)


def bch_decode(word, code: BchCode) -> DecodeResult:
    """Correct up to ``t`` errors; returns the info part.

    A decode is accepted only if the locator degree matches its root count and
    the corrected word has a zero syndrome; otherwise ``converged`` is False
    and the received info bits pass through untouched.
    """
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (code.n_bch,):
        raise InputShapeError(f"BCH decoder needs {code.n_bch} bits, got {word.shape}")
    synd = syndromes(word, code)
    if not any(synd):
        return DecodeResult(word[: code.k_bch].copy(), 0, True)
    lam = berlekamp_massey(synd, code.gf)
    n_err = len(lam) - 1
    if n_err > code.t:
        return DecodeResult(word[: code.k_bch].copy(), 1, False)
    roots = chien_search(lam, code)
    if roots.size != n_err:
        return DecodeResult(word[: code.k_bch].copy(), 1, False)
    fixed = word.copy()
    fixed[code.n_bch - 1 - roots] ^= 1
    if any(syndromes(fixed, code)):
        return DecodeResult(word[: code.k_bch].copy(), 1, False)
    return DecodeResult(fixed[: code.k_bch], 1, True)
