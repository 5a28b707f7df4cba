"""DVB-S2 rate-1/2 LDPC code built from the standard's accumulator address tables."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numba
import numpy as np
import scipy.sparse as sp

from ..errors import ConfigurationError, InputShapeError

GROUP = 360
SUM_PRODUCT = "sum-product"
MIN_SUM = "min-sum"
MIN_SUM_SCALE = 0.875
DEFAULT_MAX_ITER = 50




@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    iterations_used: int
    converged: bool


def read_table(path_or_text) -> tuple[dict, list[list[int]]]:
    """Parse a parity-table file: ``key value`` header, ``---``, then address rows."""
    text = path_or_text
    header, rows, in_body = {}, [], False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == "---":
            in_body = True
            continue
        if in_body:
            rows.append([int(x) for x in line.split()])
        else:
            key, _, value = line.partition(" ")
            header[key] = value.strip()
    return header, rows


def table_checksum(rows: list[list[int]]) -> str:
    body = "".join(" ".join(map(str, r)) + "\n" for r in rows)
    return hashlib.sha256(body.encode()).hexdigest()


def load_table_text(frame_length: int) -> str:
    name = f"dvbs2_ldpc_{frame_length}_r1_2.txt"
    try:
        return resources.files("ppbsim.fec").joinpath("data", name).read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"no rate-1/2 parity table for frame length {frame_length}") from None


@dataclass(frozen=True, eq=False)
class LdpcCode:
    """Systematic IRA code: info bits followed by accumulated parity bits.

    Check ``i`` ties parity bits ``p[i-1]`` and ``p[i]`` to the info bits whose
    table addresses land on ``i``.
    """

    frame_length: int
    info_length: int
    parity_tables: tuple[tuple[int, ...], ...]
    checksum: str
    # derived graph, check-major edge order
    chk_ptr: np.ndarray = field(repr=False, default=None)
    edge_var: np.ndarray = field(repr=False, default=None)
    var_ptr: np.ndarray = field(repr=False, default=None)
    var_edge: np.ndarray = field(repr=False, default=None)
    info_to_check: sp.csr_matrix = field(repr=False, default=None)

    @property
    def n_checks(self) -> int:
        return self.frame_length - self.info_length

    @property
    def rate(self) -> float:
        return self.info_length / self.frame_length

    @property
    def n_edges(self) -> int:
        return int(self.edge_var.size)

    @classmethod
    def from_text(cls, text: str) -> "LdpcCode":
        header, rows = read_table(text)
        try:
            n = int(header["frame_length"])
            k = int(header["info_length"])
            expected = header["sha256"]
        except KeyError as exc:
            raise ConfigurationError(f"parity table header lacks {exc.args[0]!r}") from None
        if header.get("rate") != "1/2":
            raise ConfigurationError(f"only rate 1/2 tables are supported, got {header.get('rate')!r}")
        actual = table_checksum(rows)
        if actual != expected:
            raise ConfigurationError(f"parity table checksum mismatch: {actual} != {expected}")
        if len(rows) * GROUP != k:
            raise ConfigurationError(f"{len(rows)} table rows do not cover {k} info bits")
        return cls._build(n, k, tuple(tuple(r) for r in rows), actual)

    @classmethod
    def _build(cls, n, k, rows, checksum):
        m = n - k
        q = m // GROUP
        if q * GROUP != m:
            raise ConfigurationError("parity length must be a multiple of 360")

        # info bit -> check addresses, (x + j*q) mod m for bit j of each group
        info_idx, chk_idx = [], []
        j = np.arange(GROUP)
        for g, row in enumerate(rows):
            for x in row:
                if not 0 <= x < m:
                    raise ConfigurationError(f"table address {x} outside [0, {m})")
                info_idx.append(g * GROUP + j)
                chk_idx.append((x + j * q) % m)
        info_idx = np.concatenate(info_idx)
        chk_idx = np.concatenate(chk_idx)
        a = sp.csr_matrix((np.ones(info_idx.size, dtype=np.int8), (chk_idx, info_idx)), shape=(m, k))
        if a.max() > 1:
            raise ConfigurationError("parity table repeats an address within a group")
        a.sort_indices()

        # staircase part for the accumulator
        p_rows = np.concatenate([np.arange(m), np.arange(1, m)])
        p_cols = np.concatenate([np.arange(m), np.arange(m - 1)]) + k
        h = sp.csr_matrix(
            (np.ones(a.nnz + p_rows.size, dtype=np.int8),
             (np.concatenate([a.nonzero()[0], p_rows]), np.concatenate([a.nonzero()[1], p_cols]))),
            shape=(m, n),
        )
        h.sort_indices()
        chk_ptr = h.indptr.astype(np.int64)
        edge_var = h.indices.astype(np.int64)
        order = np.argsort(edge_var, kind="stable")
        var_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(edge_var, minlength=n), out=var_ptr[1:])
        return cls(n, k, rows, checksum, chk_ptr, edge_var, var_ptr, order.astype(np.int64), a.astype(np.int32))

    def parity_check_matrix(self) -> sp.csr_matrix:
        data = np.ones(self.edge_var.size, dtype=np.int8)
        return sp.csr_matrix((data, self.edge_var, self.chk_ptr), shape=(self.n_checks, self.frame_length))

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.uint8)
        return _syndrome(self.chk_ptr, self.edge_var, word)

    def degree_profile(self) -> tuple[dict[int, int], dict[int, int]]:
        vdeg = np.diff(self.var_ptr)
        cdeg = np.diff(self.chk_ptr)
        return ({int(d): int(c) for d, c in zip(*np.unique(vdeg, return_counts=True))},
                {int(d): int(c) for d, c in zip(*np.unique(cdeg, return_counts=True))})


@lru_cache(maxsize=None)
def dvbs2_code(frame_length: int = 64800) -> LdpcCode:
    return LdpcCode.from_text(load_table_text(frame_length))


def ldpc_encode(info, code: LdpcCode) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (code.info_length,):
        raise InputShapeError(f"LDPC encoder needs {code.info_length} info bits, got {info.shape}")
    acc = (code.info_to_check @ info.astype(np.int32)) & 1
    parity = np.bitwise_xor.accumulate(acc.astype(np.uint8))
    return np.concatenate([info, parity])


def ldpc_decode(llrs, code: LdpcCode, max_iter: int = DEFAULT_MAX_ITER,
                algorithm: str = SUM_PRODUCT) -> DecodeResult:
    """Flooding belief propagation with early exit on a zero syndrome.

    ``algorithm`` is ``"sum-product"`` or ``"min-sum"`` (normalised by ``MIN_SUM_SCALE``).
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.frame_length,):
        raise InputShapeError(f"LDPC decoder needs {code.frame_length} LLRs, got {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("non-finite LLR input")
    if max_iter < 1:
        raise ConfigurationError("max_iter must be >= 1")
    if algorithm == SUM_PRODUCT:
        mode = 0
    elif algorithm == MIN_SUM:
        mode = 1
    else:
        raise ConfigurationError(f"unknown decoder {algorithm!r}; use {SUM_PRODUCT!r} or {MIN_SUM!r}")
    hard = np.empty(code.frame_length, dtype=np.uint8)
    iters, ok = _bp_decode(code.chk_ptr, code.edge_var, code.var_ptr, code.var_edge,
                           llrs, max_iter, mode, MIN_SUM_SCALE, hard)
    return DecodeResult(hard, int(iters), bool(ok))


@numba.njit(cache=True)
def _syndrome(chk_ptr, edge_var, word):
    m = chk_ptr.size - 1
    out = np.zeros(m, dtype=np.uint8)
    for c in range(m):
        s = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            s ^= word[edge_var[e]]
        out[c] = s
    return out


@numba.njit(cache=True, fastmath=False)
def _bp_decode(chk_ptr, edge_var, var_ptr, var_edge, llr, max_iter, mode, scale, hard):
    m = chk_ptr.size - 1
    n = var_ptr.size - 1
    n_edges = edge_var.size
    v2c = np.empty(n_edges)
    c2v = np.zeros(n_edges)
    buf = np.empty(64)
    for e in range(n_edges):
        v2c[e] = llr[edge_var[e]]

    for it in range(1, max_iter + 1):
        # check nodes
        for c in range(m):
            lo = chk_ptr[c]
            d = chk_ptr[c + 1] - lo
            if mode == 0:
                # leave-one-out tanh products via prefix/suffix sweeps
                for i in range(d):
                    x = v2c[lo + i]
                    # tanh(x/2) = (1 - e^-|x|) / (1 + e^-|x|), sign restored
                    ex = np.exp(-abs(x))
                    t = (1.0 - ex) / (1.0 + ex)
                    buf[i] = -t if x < 0 else t
                prefix = 1.0
                for i in range(d):
                    c2v[lo + i] = prefix
                    prefix *= buf[i]
                suffix = 1.0
                for i in range(d - 1, -1, -1):
                    t = c2v[lo + i] * suffix
                    suffix *= buf[i]
                    if t > 0.9999999999999936:
                        t = 0.9999999999999936
                    elif t < -0.9999999999999936:
                        t = -0.9999999999999936
                    c2v[lo + i] = np.log((1.0 + t) / (1.0 - t))
            else:
                sign = 1.0
                min1 = np.inf
                min2 = np.inf
                arg = -1
                for i in range(d):
                    x = v2c[lo + i]
                    if x < 0:
                        sign = -sign
                        x = -x
                    if x < min1:
                        min2 = min1
                        min1 = x
                        arg = i
                    elif x < min2:
                        min2 = x
                for i in range(d):
                    x = v2c[lo + i]
                    s = -sign if x < 0 else sign
                    mag = min2 if i == arg else min1
                    c2v[lo + i] = scale * s * mag

        # variable nodes and hard decisions
        for v in range(n):
            total = llr[v]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                total += c2v[var_edge[k]]
            for k in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edge[k]
                v2c[e] = total - c2v[e]
            hard[v] = 1 if total < 0 else 0

        ok = True
        for c in range(m):
            s = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                s ^= hard[edge_var[e]]
            if s:
                ok = False
                break
        if ok:
            return it, True
    return max_iter, False
