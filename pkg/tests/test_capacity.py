import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppbsim import capacity as cap
from ppbsim.errors import ConfigurationError, OutOfRangeError
from ppbsim.linkmodel import QUANTUM_LIMIT_NF_DB

# Closed-form PPM envelope (K = -ln(1 - se M / log2 M)) crossed with PSA by brentq, frozen.
PSA_PPM_ENVELOPE_SE = 0.15251937600144544
EDFA_PPM_ENVELOPE_SE = 0.3254876142314594

N_GRID = np.geomspace(1e-4, 1e3, 2000)
positive_n = st.floats(min_value=1e-6, max_value=1e4)


def closed_form_envelope(se):
    best = math.inf
    for b in range(1, 21):
        m = 2**b
        x = se * m / b
        if x < 1:
            best = min(best, -math.log1p(-x) / (se * m))
    return best


def test_low_snr_limits():
    assert cap.low_snr_limit(cap.PSA) == pytest.approx(math.log(2) / 2, abs=1e-15)
    assert cap.low_snr_limit(cap.EDFA) == pytest.approx(math.log(2), abs=1e-15)
    assert cap.low_snr_limit(cap.preamp(QUANTUM_LIMIT_NF_DB)) == pytest.approx(math.log(2), rel=1e-14)
    with pytest.raises(ConfigurationError):
        cap.low_snr_limit(cap.GORDON)


@pytest.mark.parametrize("model", [cap.PSA, cap.EDFA, cap.preamp(4.0), cap.SQ])
def test_curve_infimum_is_low_snr_limit(model):
    ppb = cap.ppb_of(model, np.geomspace(1e-9, 10, 300))
    assert np.all(np.diff(ppb) > 0)
    assert ppb[0] == pytest.approx(cap.low_snr_limit(model), rel=1e-6)


@given(positive_n, st.floats(min_value=1.0001, max_value=3))
def test_monotone_in_n(n, factor):
    for model in (cap.PSA, cap.EDFA, cap.preamp(5.0)):
        assert cap.se_of(model, n * factor) > cap.se_of(model, n)
        assert cap.ppb_of(model, n * factor) > cap.ppb_of(model, n)


def test_preamp_at_quantum_limit_is_edfa():
    assert np.allclose(cap.cap_preamp(N_GRID, QUANTUM_LIMIT_NF_DB), cap.cap_edfa(N_GRID), rtol=1e-14, atol=0)
    # log2(1 + n) itself rounds 1 + n, hence the looser bound
    assert np.allclose(cap.cap_edfa(N_GRID), np.log2(1 + N_GRID), rtol=1e-11, atol=0)
    # the rounded "3 dB" figure is within 0.03% of the exact factor two
    assert np.allclose(cap.cap_preamp(N_GRID, 3.0), cap.cap_edfa(N_GRID), rtol=3e-3)


def test_sq_equals_psa():
    sq, psa = cap.model_curve(cap.SQ, N_GRID), cap.psa_curve(N_GRID)
    for a, b in zip(sq, psa):
        assert abs(a.se - b.se) <= 1e-12 and abs(a.ppb - b.ppb) <= 1e-12


def test_rx_bandwidth_view():
    std, rx = cap.psa_curve(N_GRID), cap.psa_curve(N_GRID, rx_bandwidth_view=True)
    assert [p.ppb for p in rx] == [p.ppb for p in std]
    assert all(r.se == 2 * s.se for r, s in zip(rx, std))


def test_three_db_gap_at_low_snr():
    n = np.array([1e-4, 1e-6, 1e-8])
    se = cap.se_of(cap.PSA, n)
    edfa = np.array([cap.sensitivity_at(cap.EDFA, s) for s in se])
    ratio = edfa / cap.ppb_of(cap.PSA, n)
    assert np.all(np.abs(ratio - 2) < 1e-3)
    assert abs(ratio[-1] - 2) < abs(ratio[0] - 2)


def test_ppm_closed_form():
    for m in (2, 16, 1024):
        k = np.geomspace(1e-3, 20, 50)
        pts = cap.ppm_curve(m, k)
        for p, kk in zip(pts, k):
            assert p.se == pytest.approx((1 - math.exp(-kk)) * math.log2(m) / m, rel=1e-12)
            assert p.ppb == pytest.approx(kk / ((1 - math.exp(-kk)) * math.log2(m)), rel=1e-12)
        assert cap.ppm(m).se_supremum == math.log2(m) / m


def test_ppm_order_validation():
    for bad in (1, 3, 12):
        with pytest.raises(ConfigurationError):
            cap.ppm(bad)


def test_envelope_matches_closed_form():
    se = np.linspace(0.005, 0.49, 60)
    env = cap.ppm_envelope(se)
    assert len(env) == se.size
    for p in env:
        assert p.ppb == pytest.approx(closed_form_envelope(p.se), rel=1e-8)
        assert p.slots & (p.slots - 1) == 0


def test_envelope_omits_unreachable():
    assert cap.ppm_envelope([0.6]) == []


def test_gordon_dominates():
    se = np.linspace(0.01, 3.0, 150)
    others = [cap.PSA, cap.EDFA, cap.SQ, cap.preamp(1.0)]
    for s in se:
        g = cap.sensitivity_at(cap.GORDON, s)
        for model in others:
            assert g < cap.sensitivity_at(model, s)
        if s < 0.5:
            assert g < closed_form_envelope(s)


def test_theory_point():
    assert cap.sensitivity_at(cap.PSA, 0.5) == pytest.approx(0.5, abs=1e-9)


def test_sensitivity_out_of_range():
    with pytest.raises(OutOfRangeError):
        cap.sensitivity_at(cap.ppm(4), 0.5)
    with pytest.raises(OutOfRangeError):
        cap.sensitivity_at(cap.PSA, 0.0)


def test_crossover_psa_edfa():
    psa, edfa = cap.model_curve(cap.PSA, N_GRID), cap.model_curve(cap.EDFA, N_GRID)
    assert cap.find_crossover(psa, edfa) == pytest.approx(math.log2(3), abs=1e-3)


def test_crossover_psa_envelope():
    psa = cap.model_curve(cap.PSA, N_GRID)
    env = cap.ppm_envelope(np.linspace(0.0005, 0.4995, 1000))
    assert cap.find_crossover(psa, env) == pytest.approx(PSA_PPM_ENVELOPE_SE, abs=2e-4)
    edfa = cap.model_curve(cap.EDFA, N_GRID)
    assert cap.find_crossover(edfa, env) == pytest.approx(EDFA_PPM_ENVELOPE_SE, abs=2e-4)


def test_crossover_none_for_identical_or_disjoint():
    psa = cap.model_curve(cap.PSA, N_GRID)
    assert cap.find_crossover(psa, cap.model_curve(cap.SQ, N_GRID)) is None
    assert cap.find_crossover(psa, cap.model_curve(cap.GORDON, N_GRID)) is None
    far = [cap.CurvePoint(10.0, 1.0, 1.0), cap.CurvePoint(11.0, 2.0, 2.0)]
    near = [cap.CurvePoint(0.1, 1.0, 1.0), cap.CurvePoint(0.2, 2.0, 2.0)]
    assert cap.find_crossover(far, near) is None


def test_crossover_on_grid_point():
    a = [cap.CurvePoint(x, y, 1.0) for x, y in [(0, 0.0), (1, 1.0), (2, 2.0)]]
    b = [cap.CurvePoint(x, y, 1.0) for x, y in [(0, 1.0), (1, 1.0), (2, 1.0)]]
    assert cap.find_crossover(a, b) == pytest.approx(1.0, abs=1e-4)


def test_parse_model():
    assert cap.parse_model("PPM64") == cap.ppm(64)
    assert cap.parse_model("preamp4.5").nf_db == 4.5
    assert cap.parse_model("psa_rx") is not cap.PSA and cap.parse_model("psa_rx") == cap.PSA_RX_BANDWIDTH
    with pytest.raises(ConfigurationError):
        cap.parse_model("qam")
