import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from ppbsim.errors import ConfigurationError, InputShapeError
from ppbsim.fec import ldpc
from ppbsim.fec.ldpc import LdpcCode, dvbs2_code, ldpc_decode, ldpc_encode

CLAMP = 0.9999999999999936


def oracle_h(frame_length):
    """Parity-check matrix rebuilt from the raw table file with the standard's address rule."""
    text = ldpc.load_table_text(frame_length)
    body = text.split("---\n", 1)[1]
    rows = [list(map(int, line.split())) for line in body.splitlines() if line.strip()]
    k = 360 * len(rows)
    m = frame_length - k
    q = m // 360
    r, c = [], []
    for g, row in enumerate(rows):
        for j in range(360):
            for x in row:
                r.append((x + j * q) % m)
                c.append(360 * g + j)
    r += list(range(m)) + list(range(1, m))
    c += list(range(k, k + m)) + list(range(k, k + m - 1))
    h = sp.coo_matrix((np.ones(len(r), dtype=np.int64), (r, c)), shape=(m, frame_length)).tocsr()
    assert h.max() == 1
    return h


@pytest.fixture(scope="module")
def short_code():
    return dvbs2_code(16200)


@pytest.fixture(scope="module")
def short_h():
    return oracle_h(16200)


def reference_decode(h, llr, max_iter):
    """Plain numpy flooding sum-product with tanh/arctanh check updates."""
    rows, cols = h.nonzero()
    m = h.shape[0]
    v2c = llr[cols].astype(float)
    hard = (llr < 0).astype(np.uint8)
    for it in range(1, max_iter + 1):
        t = np.tanh(v2c / 2)
        c2v = np.empty_like(v2c)
        for c in range(m):
            sel = slice(*np.searchsorted(rows, [c, c + 1]))
            tt = t[sel]
            loo = np.array([np.prod(np.delete(tt, i)) for i in range(tt.size)])
            loo = np.clip(loo, -CLAMP, CLAMP)
            c2v[sel] = 2 * np.arctanh(loo)
        total = llr + np.bincount(cols, weights=c2v, minlength=h.shape[1])
        v2c = total[cols] - c2v
        hard = (total < 0).astype(np.uint8)
        if not np.any((h @ hard.astype(np.int64)) % 2):
            return hard, it, True
    return hard, max_iter, False


def test_table_first_rows_and_checksums():
    _, rows = ldpc.read_table(ldpc.load_table_text(64800))
    assert rows[0] == [54, 9318, 14392, 27561, 26909, 10219, 2534, 8597]
    _, rows = ldpc.read_table(ldpc.load_table_text(16200))
    assert rows[0] == [20, 712, 2386, 6354, 4061, 1062, 5045, 5158]
    assert dvbs2_code(64800).checksum == "654da4f95304d9002f4f85f315aeeac3b25b129ef1baa105f82fe94e7d39b5ae"


def test_tampered_table_rejected():
    text = ldpc.load_table_text(16200).replace("20 712", "21 712", 1)
    with pytest.raises(ConfigurationError, match="checksum"):
        LdpcCode.from_text(text)
    with pytest.raises(ConfigurationError):
        ldpc.load_table_text(1234)


@pytest.mark.parametrize("frame", [16200, 64800])
def test_matches_oracle_h(frame):
    code = dvbs2_code(frame)
    ours = sp.csr_matrix(code.parity_check_matrix(), dtype=np.int64)
    assert (ours != oracle_h(frame)).nnz == 0


def test_degree_profiles():
    vdeg, cdeg = dvbs2_code(64800).degree_profile()
    assert vdeg == {1: 1, 2: 32399, 3: 19440, 8: 12960}
    assert cdeg == {6: 1, 7: 32399}
    vdeg, cdeg = dvbs2_code(16200).degree_profile()
    assert vdeg == {1: 1, 2: 8999, 3: 5400, 8: 1800}
    h = oracle_h(16200)
    assert cdeg == dict(zip(*map(np.ndarray.tolist, np.unique(np.diff(h.indptr), return_counts=True))))
    code = dvbs2_code(64800)
    assert (code.frame_length, code.info_length, code.rate) == (64800, 32400, 0.5)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_encoder_codewords_in_null_space(seed):
    for frame in (16200, 64800):
        code = dvbs2_code(frame)
        info = np.random.default_rng(seed).integers(0, 2, code.info_length, dtype=np.uint8)
        cw = ldpc_encode(info, code)
        assert np.array_equal(cw[: code.info_length], info)
        assert not np.any(code.syndrome(cw))
        h = sp.csr_matrix(code.parity_check_matrix())
        assert not np.any((h @ cw.astype(np.int64)) % 2)


def test_encoder_null_space_independent_h(short_code, short_h):
    rng = np.random.default_rng(99)
    for _ in range(5):
        cw = ldpc_encode(rng.integers(0, 2, short_code.info_length, dtype=np.uint8), short_code)
        assert not np.any((short_h @ cw.astype(np.int64)) % 2)


def test_encoder_shape_checked(short_code):
    with pytest.raises(InputShapeError):
        ldpc_encode(np.zeros(10, dtype=np.uint8), short_code)


@pytest.mark.parametrize("algorithm", [ldpc.SUM_PRODUCT, ldpc.MIN_SUM])
def test_clean_codeword_unchanged(short_code, algorithm):
    info = np.random.default_rng(1).integers(0, 2, short_code.info_length, dtype=np.uint8)
    cw = ldpc_encode(info, short_code)
    res = ldpc_decode(4.0 * (1.0 - 2.0 * cw), short_code, algorithm=algorithm)
    assert res.converged and res.iterations_used == 1
    assert np.array_equal(res.bits, cw)


def test_matches_reference_decoder(short_code, short_h):
    rng = np.random.default_rng(5)
    cw = ldpc_encode(rng.integers(0, 2, short_code.info_length, dtype=np.uint8), short_code)
    llr = (1.0 - 2.0 * cw) * rng.uniform(1.0, 6.0, cw.size)
    flips = rng.choice(cw.size, 5, replace=False)
    llr[flips] = -llr[flips]
    ours = ldpc_decode(llr, short_code, max_iter=20)
    ref_bits, ref_it, ref_ok = reference_decode(short_h, llr, 20)
    assert ours.converged and ref_ok
    assert ours.iterations_used == ref_it
    assert np.array_equal(ours.bits, ref_bits)
    assert np.array_equal(ours.bits, cw)


def test_noisy_decode_recovers(short_code):
    rng = np.random.default_rng(12)
    cw = ldpc_encode(rng.integers(0, 2, short_code.info_length, dtype=np.uint8), short_code)
    # BPSK-equivalent rail at Es/N0 = 2.5 dB: LLR ~ N(2 es_n0, 4 es_n0)
    es_n0 = 10 ** 0.25
    llr = (1.0 - 2.0 * cw) * 2 * es_n0 + rng.normal(0, 2 * np.sqrt(es_n0), cw.size)
    for algorithm in (ldpc.SUM_PRODUCT, ldpc.MIN_SUM):
        res = ldpc_decode(llr, short_code, algorithm=algorithm)
        assert res.converged and np.array_equal(res.bits, cw)
        assert not np.any(short_code.syndrome(res.bits))


def test_all_zero_llrs(short_code):
    res = ldpc_decode(np.zeros(short_code.frame_length), short_code, max_iter=3)
    # every hard decision ties to 0, which is a codeword
    assert res.converged and not np.any(res.bits)


def test_pure_noise_does_not_converge(short_code):
    llr = np.random.default_rng(0).normal(0, 1, short_code.frame_length)
    res = ldpc_decode(llr, short_code, max_iter=5)
    assert not res.converged and res.iterations_used == 5


def test_decoder_input_validation(short_code):
    with pytest.raises(InputShapeError):
        ldpc_decode(np.zeros(5), short_code)
    with pytest.raises(ValueError):
        ldpc_decode(np.full(short_code.frame_length, np.nan), short_code)
    with pytest.raises(ConfigurationError):
        ldpc_decode(np.zeros(short_code.frame_length), short_code, algorithm="layered")
    with pytest.raises(ConfigurationError):
        ldpc_decode(np.zeros(short_code.frame_length), short_code, max_iter=0)
