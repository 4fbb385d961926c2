import numpy as np
import pytest

from hnsf.autodiff import Tensor, ops, zero_parameters
from hnsf.autodiff.gradcheck import check
from hnsf.source import (AliasingWarning, HarmonicMerge, SourceConfig, make_excitation,
                         noise_excitation, sine_harmonic)

CFG = SourceConfig()


def test_default_constants():
    assert (CFG.alpha, CFG.sigma, CFG.num_harmonics) == (0.1, 0.003, 8)


def test_unvoiced_std():
    x = sine_harmonic(np.zeros(16000), 1, CFG, np.random.default_rng(0))
    assert abs(x.std() - CFG.alpha / 3) < 0.1 * CFG.alpha / 3


def test_unvoiced_bounded_and_zero_mean():
    x = sine_harmonic(np.zeros(16000), 1, CFG, np.random.default_rng(1))
    assert np.max(np.abs(x)) < 6 * CFG.alpha / 3
    assert abs(x.mean()) < 3 * x.std() / np.sqrt(x.size)


def test_sine_peak_and_amplitude():
    cfg = SourceConfig(sigma=1e-9)
    x = sine_harmonic(np.full(16000, 200.0), 1, cfg, np.random.default_rng(2))
    spec = np.abs(np.fft.rfft(x)) * 2 / x.size
    assert np.argmax(spec) == 200
    assert spec[200] == pytest.approx(cfg.alpha, rel=1e-3)


@pytest.mark.parametrize("i", range(1, 9))
def test_harmonic_frequency_by_zero_crossings(i):
    cfg = SourceConfig(sigma=1e-9)
    x = sine_harmonic(np.full(16000, 200.0), i, cfg, np.random.default_rng(i))
    crossings = np.count_nonzero(np.signbit(x[1:]) != np.signbit(x[:-1]))
    assert crossings / 2 == pytest.approx(200.0 * i, rel=0.01)


def test_same_seed_same_excitation():
    f = np.r_[np.full(500, 120.0), np.zeros(300)]
    a = make_excitation(f, CFG, np.random.default_rng(9))
    b = make_excitation(f, CFG, np.random.default_rng(9))
    assert np.array_equal(a.harmonics, b.harmonics) and np.array_equal(a.noise, b.noise)


def test_excitation_shapes():
    ex = make_excitation(np.full(321, 100.0), CFG, np.random.default_rng(0))
    assert ex.harmonics.shape == (321, 8) and ex.noise.shape == (321,)


def test_noise_source():
    rng = np.random.default_rng(3)
    assert noise_excitation(0, CFG, rng).size == 0
    x = noise_excitation(16000, CFG, rng)
    assert abs(x.std() - CFG.alpha / 3) < 0.1 * CFG.alpha / 3
    assert np.array_equal(noise_excitation(50, CFG, np.random.default_rng(4)),
                          noise_excitation(50, CFG, np.random.default_rng(4)))


def test_empty_f0():
    assert sine_harmonic(np.zeros(0), 1, CFG, np.random.default_rng(0)).size == 0


def test_aliasing_only_warns():
    with pytest.warns(AliasingWarning):
        x = sine_harmonic(np.full(100, 1500.0), 8, CFG, np.random.default_rng(0))
    assert np.all(np.isfinite(x))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        sine_harmonic(np.array([-1.0]), 1, CFG, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sine_harmonic(np.array([100.0]), 9, CFG, np.random.default_rng(0))
    with pytest.raises(ValueError):
        SourceConfig(alpha=0.0)


def test_long_utterance_phase_stays_accurate():
    # 10 minutes at a constant F0 still lands on the right bin at the end
    f = np.full(16000 * 600, 220.0)
    cfg = SourceConfig(sigma=1e-9)
    x = sine_harmonic(f, 1, cfg, np.random.default_rng(0), phase=0.0)
    tail = x[-16000:]
    assert np.argmax(np.abs(np.fft.rfft(tail))) == 220


def test_harmonic_merge_examples(rng):
    merge = HarmonicMerge(8, rng)
    h = rng.normal(size=(50, 8))
    zero_parameters(merge)
    assert np.all(merge(Tensor(h)).data == 0.0)
    merge.ff.weight.data[0, 0] = 1.0
    small = 1e-4 * h
    np.testing.assert_allclose(merge(Tensor(small)).data[:, 0], small[:, 0], rtol=1e-7)


def test_harmonic_merge_bounded_and_gradcheck(rng):
    merge = HarmonicMerge(8, rng)
    h = Tensor(rng.normal(scale=5.0, size=(40, 8)))
    out = merge(h).data
    assert np.all(np.abs(out) <= 1.0)
    err = check(lambda: ops.sum_(ops.square(merge(h))), merge.parameters(), eps=1e-6)
    assert err < 1e-5
