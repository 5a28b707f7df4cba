import math

import numpy as np
import pytest

from ppbsim.errors import ConfigurationError, InputShapeError
from ppbsim.fec import FecChain, crossing_es_n0_db, dvbs2_bch, dvbs2_code, fec_decode_chain, fec_encode_chain, waterfall
from ppbsim.fec.chain import WaterfallPoint, simulate_point
from ppbsim.metrics import StopRule, ber_with_ci


def db(x):
    return 10 ** (x / 10)


def test_rate_bookkeeping():
    full = FecChain.dvbs2(64800)
    assert full.net_bits_per_symbol == 2 * 32208 / 64800
    assert full.net_bits_per_symbol == pytest.approx(0.994, abs=1e-3)
    assert FecChain.dvbs2(64800, ldpc_only=True).net_bits_per_symbol == 1.0
    assert FecChain.dvbs2(16200).net_bits_per_symbol == 2 * 7032 / 16200
    assert FecChain.dvbs2(16200, ldpc_only=True).net_bits_per_symbol == 2 * 7200 / 16200


def test_dimension_mismatch_rejected():
    with pytest.raises(ConfigurationError, match="does not match"):
        FecChain(dvbs2_code(16200), dvbs2_bch(64800))
    with pytest.raises(ConfigurationError):
        FecChain(dvbs2_code(16200), max_iter=0)
    with pytest.raises(ConfigurationError):
        FecChain(dvbs2_code(16200), algorithm="bitflip")


@pytest.mark.parametrize("frame,ldpc_only", [(16200, False), (16200, True), (64800, False)])
def test_round_trip(frame, ldpc_only):
    chain = FecChain.dvbs2(frame, ldpc_only)
    info = np.random.default_rng(frame).integers(0, 2, chain.info_length, dtype=np.uint8)
    cw = chain.encode(info)
    assert cw.size == chain.frame_length
    assert not np.any(chain.ldpc.syndrome(cw))
    res = chain.decode(2.0 * (1.0 - 2.0 * cw))
    assert res.converged and np.array_equal(res.bits, info)


def test_default_chain_helpers():
    chain = FecChain.dvbs2()
    info = np.zeros(chain.info_length, dtype=np.uint8)
    cw = fec_encode_chain(info)
    assert fec_decode_chain(1.0 - 2.0 * cw).bits.sum() == 0
    with pytest.raises(InputShapeError):
        chain.encode(np.zeros(3, dtype=np.uint8))


def test_weakly_wrong_bits_recovered():
    chain = FecChain.dvbs2(16200)
    rng = np.random.default_rng(4)
    info = rng.integers(0, 2, chain.info_length, dtype=np.uint8)
    cw = chain.encode(info)
    # a handful of weakly wrong systematic bits
    llr = 3.0 * (1.0 - 2.0 * cw)
    flip = rng.choice(chain.ldpc.info_length, 8, replace=False)
    llr[flip] *= -0.2
    res = chain.decode(llr)
    assert np.array_equal(res.bits, info)


def test_noiseless_point_is_clean():
    chain = FecChain.dvbs2(16200, ldpc_only=True)
    pt = simulate_point(chain, math.inf, StopRule(1, 3 * 7200), seed=0)
    assert pt.prefec.errors == 0 and pt.postfec.errors == 0 and pt.frames == 3
    assert pt.gmi == pytest.approx(2.0)
    assert pt.mean_iterations == 1


def test_short_frame_waterfall_shape():
    chain = FecChain.dvbs2(16200, ldpc_only=True, algorithm="min-sum")
    grid = [db(x) for x in (-1.0, 0.5, 2.5)]
    pts = waterfall(grid, chain, StopRule(200, 20 * 7200), seed=3)
    assert [p.es_n0 for p in pts] == grid
    assert pts[0].postfec.ber > 1e-2
    assert pts[-1].postfec.errors == 0
    assert pts[0].prefec.ber > pts[1].prefec.ber > pts[2].prefec.ber
    assert pts[-1].mean_iterations < pts[0].mean_iterations
    for p in pts:
        assert p.prefec.bits == p.frames * 16200 and p.postfec.bits == p.frames * 7200
        assert 0 <= p.gmi <= 2


def test_stop_after_clean():
    chain = FecChain.dvbs2(16200, ldpc_only=True, algorithm="min-sum")
    pts = waterfall([db(3.0), db(4.0)], chain, StopRule(10, 2 * 7200), seed=1, stop_after_clean=True)
    assert len(pts) == 1
    with pytest.raises(ConfigurationError):
        waterfall([], chain)


def test_point_deterministic_and_worker_independent():
    chain = FecChain.dvbs2(16200, ldpc_only=True, algorithm="min-sum")
    stop = StopRule(300, 12 * 7200)
    a = simulate_point(chain, db(0.6), stop, seed=9, point=2)
    b = simulate_point(chain, db(0.6), stop, seed=9, point=2)
    c = simulate_point(chain, db(0.6), stop, seed=9, point=2, workers=2)
    d = simulate_point(chain, db(0.6), stop, seed=9, point=2, workers=2, batch_frames=1)
    assert a == b == c == d
    e = simulate_point(chain, db(0.6), stop, seed=10, point=2)
    assert e != a


def _pt(es_n0_db, errors, bits):
    r = ber_with_ci(errors, bits)
    return WaterfallPoint(db(es_n0_db), r, r, 1, int(errors > 0), 1.0, 1.0)


def test_crossing_interpolation():
    pts = [_pt(0.0, 10**4, 10**6), _pt(1.0, 1, 10**6)]
    # log10 BER goes -2 -> -6 over 1 dB, so 1e-5 sits at 0.75 dB
    assert crossing_es_n0_db(pts, 1e-5) == pytest.approx(0.75, abs=1e-9)
    # order does not matter
    assert crossing_es_n0_db(pts[::-1], 1e-5) == pytest.approx(0.75, abs=1e-9)


def test_crossing_uses_upper_bound_for_clean_points():
    pts = [_pt(0.0, 10**4, 10**6), _pt(1.0, 0, 10**7)]
    upper = ber_with_ci(0, 10**7).ci95_high
    expect = (math.log10(1e-5) + 2) / (math.log10(upper) + 2)
    assert crossing_es_n0_db(pts, 1e-5) == pytest.approx(expect, abs=1e-9)
    with pytest.raises(ValueError):
        crossing_es_n0_db([_pt(0.0, 10**4, 10**6), _pt(1.0, 10**3, 10**6)], 1e-5)
