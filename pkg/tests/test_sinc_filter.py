import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hnsf import sinc_filter as sf
from hnsf.autodiff import Tensor, ops
from hnsf.checks import merge_chain_error, tap_jacobian_error

SWEEP = np.round(np.arange(0.1, 0.9001, 0.05), 10)
CENTER = 15


def _n(M=31):
    return np.arange(M) - (M - 1) // 2


def test_center_tap_equals_cutoff():
    for fc in (0.1, 0.37, 0.9):
        assert sf.raw_lowpass(fc)[CENTER] == pytest.approx(fc, abs=1e-15)
        assert sf.raw_highpass(fc)[CENTER] == pytest.approx(1 - fc, abs=1e-15)


def test_raw_taps_complement_to_impulse():
    delta = (_n() == 0).astype(float)
    for fc in SWEEP:
        np.testing.assert_allclose(sf.raw_lowpass(fc) + sf.raw_highpass(fc), delta,
                                   rtol=0, atol=1e-12)


def test_hamming_window_shape():
    w = sf.hamming_centered(31)
    assert w[CENTER] == 1.0
    # edge uses the 2*pi*n/M form, not the M-1 denominator
    assert w[0] == pytest.approx(0.54 + 0.46 * np.cos(2 * np.pi * 15 / 31), abs=1e-15)
    np.testing.assert_array_equal(w, w[::-1])


@pytest.mark.parametrize("fc", SWEEP)
def test_normalised_gains(fc):
    lo = sf.design_lowpass(fc)
    hi = sf.design_highpass(fc)
    assert abs(lo.sum() - 1.0) < 1e-10
    assert abs(abs(np.sum(hi * (-1.0) ** np.arange(31))) - 1.0) < 1e-10
    # half amplitude at the cutoff for both filters
    w = np.pi * fc
    resp = lambda h: abs(np.sum(h * np.exp(-1j * w * np.arange(31))))
    assert abs(resp(lo) - 0.5) < 0.05
    assert abs(resp(hi) - 0.5) < 0.05


def test_taps_are_symmetric():
    for fc in (0.2, 0.6):
        lo = sf.design_lowpass(fc)
        np.testing.assert_allclose(lo, lo[::-1], atol=1e-15)


def test_impulse_response_is_causal_taps():
    x = np.zeros(64)
    x[0] = 1.0
    out = sf.merge_waveforms(x, np.zeros(64), 0.3)
    np.testing.assert_allclose(out[:31], sf.design_lowpass(0.3), atol=1e-15)
    assert np.all(out[31:] == 0.0)


def test_constant_cutoff_is_ordinary_convolution(rng):
    op, oa = rng.normal(size=200), rng.normal(size=200)
    fc = 0.42
    ref = (np.convolve(op, sf.design_lowpass(fc))[:200]
           + np.convolve(oa, sf.design_highpass(fc))[:200])
    np.testing.assert_allclose(sf.merge_waveforms(op, oa, fc), ref, atol=1e-12)


def test_group_delay_passes_dc_after_warmup():
    out = sf.merge_waveforms(np.ones(100), np.zeros(100), 0.5)
    np.testing.assert_allclose(out[30:], 1.0, atol=1e-12)


def test_merge_matches_brute_force(rng):
    T = 300
    op, oa = rng.normal(size=T), rng.normal(size=T)
    fc = rng.uniform(0.05, 0.95, size=T)
    np.testing.assert_allclose(sf.merge_waveforms(op, oa, fc),
                               sf.merge_brute_force(op, oa, fc, fc), rtol=0, atol=1e-12)


def test_separate_high_cutoff_matches_brute_force(rng):
    op, oa = rng.normal(size=120), rng.normal(size=120)
    np.testing.assert_allclose(sf.merge_waveforms(op, oa, 0.625, fc_high=0.875),
                               sf.merge_brute_force(op, oa, 0.625, 0.875), atol=1e-12)


def test_jacobian_identities():
    for fc in SWEEP:
        d_low, d_high = sf.tap_jacobian(fc)
        assert abs(d_low.sum()) < 1e-12
        assert abs(np.sum(d_high * (-1.0) ** np.arange(31))) < 1e-12


@pytest.mark.parametrize("fc", [0.1, 0.5, 0.9])
def test_jacobian_absolute_fd(fc):
    eps = 1e-6
    d_low, d_high = sf.tap_jacobian(fc)
    n_low = (sf.design_lowpass(fc + eps) - sf.design_lowpass(fc - eps)) / (2 * eps)
    n_high = (sf.design_highpass(fc + eps) - sf.design_highpass(fc - eps)) / (2 * eps)
    assert np.max(np.abs(d_low - n_low)) < 1e-7
    assert np.max(np.abs(d_high - n_high)) < 1e-7


@pytest.mark.parametrize("M", [5, 31, 63])
def test_jacobian_relative_fd_other_lengths(M):
    for fc in (0.1, 0.5, 0.9):
        assert tap_jacobian_error(fc, M) < 1e-4


def test_chain_rule_through_merge():
    assert merge_chain_error(T=400, seed=5) < 1e-3


def test_zero_signals_give_zero_cutoff_gradient():
    g = sf.backward_fc(np.ones(50), np.zeros(50), np.zeros(50), np.full(50, 0.4))
    assert np.all(g == 0.0)


def test_sinc_merge_gradients_reach_all_inputs(rng):
    p = Tensor(rng.normal(size=60), requires_grad=True)
    a = Tensor(rng.normal(size=60), requires_grad=True)
    f = Tensor(rng.uniform(0.2, 0.8, size=60), requires_grad=True)
    ops.sum_(ops.square(sf.sinc_merge(p, a, f))).backward()
    for t in (p, a, f):
        assert t.grad is not None and np.any(t.grad != 0)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.5, np.nan])
def test_cutoff_outside_open_interval_rejected(bad):
    with pytest.raises(ValueError, match="inside"):
        sf.design_lowpass(bad)


def test_even_length_rejected():
    with pytest.raises(ValueError, match="odd"):
        sf.design_lowpass(0.3, 30)


def test_branch_length_mismatch_rejected():
    with pytest.raises(ValueError, match="differ"):
        sf.merge_waveforms(np.zeros(10), np.zeros(11), 0.3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.99), st.sampled_from([3, 11, 31, 51]))
def test_gain_normalisation_property(fc, M):
    lo = sf.design_lowpass(fc, M)
    hi = sf.design_highpass(fc, M)
    assert abs(lo.sum() - 1.0) < 1e-9
    assert abs(abs(np.sum(hi * (-1.0) ** np.arange(M))) - 1.0) < 1e-9
