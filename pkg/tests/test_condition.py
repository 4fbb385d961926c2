import numpy as np
import pytest

from hnsf import dsp
from hnsf.autodiff import Tensor, ops, zero_parameters
from hnsf.autodiff.gradcheck import check
from hnsf.condition import (ConditionNet, FeatureNorm, FusionSpec, fuse_cutoff, smooth,
                            uv_trajectory)


def _feats(rng, B=4, voiced=None):
    f0 = np.where(rng.random(B) < 0.6, rng.uniform(90, 250, B), 0.0) if voiced is None \
        else np.where(voiced, 150.0, 0.0)
    return dsp.AcousticFeatures(f0, rng.normal(size=(B, 80)))


def test_condition_shapes(rng):
    net = ConditionNet("sinc1", rng)
    out = net(_feats(rng, B=5))
    assert out.cond.shape == (400, 64)
    for x in (out.f_up, out.uv, out.r.data, out.fc.data):
        assert x.shape == (400,)


def test_zero_network_passes_f0_only(rng):
    net = ConditionNet("base", rng)
    zero_parameters(net)
    feats = _feats(rng, B=3)
    cond = net.condition_features(feats).data
    assert np.all(cond[:, :63] == 0.0)
    np.testing.assert_array_equal(cond[:, 63], dsp.upsample_repeat(feats.f0))


def test_uv_examples():
    np.testing.assert_array_equal(uv_trajectory([200.0, 0.0]), [0.7] * 80 + [0.3] * 80)
    assert np.all(uv_trajectory(np.full(3, 120.0)) == 0.7)
    assert np.all(uv_trajectory(np.zeros(3)) == 0.3)


def test_residual_range(rng):
    net = ConditionNet("sinc1", rng)
    for p in net.parameters():
        p.data *= 20.0
    r = net.mvf_residual(_feats(rng, B=6)).data
    assert np.all(np.abs(r) < 1.0)
    zero_parameters(net)
    assert np.all(net.mvf_residual(_feats(rng)).data == 0.0)


def test_fusion_examples():
    v = np.full(200, 0.7)
    zero = Tensor(np.zeros(200))
    raw, _ = fuse_cutoff(v, zero, FusionSpec.for_variant("sinc1"))
    np.testing.assert_allclose(raw.data, 0.7, atol=1e-15)
    raw, fc = fuse_cutoff(v, zero, FusionSpec.for_variant("sinc2"))
    np.testing.assert_allclose(raw.data, 0.5, atol=1e-15)
    np.testing.assert_allclose(fc.data, 0.5, atol=1e-15)


def test_sinc1_ranges_before_smoothing(rng):
    f0 = np.where(rng.random(50) < 0.5, 140.0, 0.0)
    v = uv_trajectory(f0)
    r = Tensor(np.tanh(rng.normal(scale=5.0, size=v.size)))
    raw, fc = fuse_cutoff(v, r, FusionSpec.for_variant("sinc1"))
    voiced = v == 0.7
    assert np.all((raw.data[voiced] > 0.5) & (raw.data[voiced] < 0.9))
    assert np.all((raw.data[~voiced] > 0.1) & (raw.data[~voiced] < 0.5))
    assert raw.data.min() - 1e-12 <= fc.data.min() and fc.data.max() <= raw.data.max() + 1e-12


def test_sinc3_stays_in_open_interval(rng):
    spec = FusionSpec.for_variant("sinc3")
    v = uv_trajectory(np.r_[np.zeros(3), np.full(3, 100.0)])
    r = Tensor(rng.uniform(-1, 1, v.size))
    for _ in range(20):
        abc = Tensor(rng.normal(scale=10.0, size=3))
        _, fc = fuse_cutoff(v, r, spec, abc)
        assert np.all((fc.data > 0) & (fc.data < 1))


def test_non_finite_fusion_parameters_abort():
    v = np.full(10, 0.7)
    with pytest.raises(FloatingPointError, match="non-finite"):
        fuse_cutoff(v, Tensor(np.zeros(10)), FusionSpec.for_variant("sinc3"),
                    Tensor([np.nan, 0.0, 0.0]))


def test_fusion_length_mismatch():
    with pytest.raises(ValueError, match="shape"):
        fuse_cutoff(np.zeros(10), Tensor(np.zeros(9)), FusionSpec.for_variant("sinc1"))


def test_unknown_fusion():
    with pytest.raises(ValueError):
        FusionSpec.for_variant("sinc4")


def test_gradient_reaches_r_and_fusion_parameters(rng):
    net = ConditionNet("sinc3", rng)
    out = net(_feats(rng, B=3))
    ops.sum_(ops.square(out.fc)).backward()
    assert np.any(net.fusion.grad != 0)
    assert all(np.any(p.grad != 0) for p in net.mvf_bilstm.parameters())


def test_smoothing_gradcheck(rng):
    x = Tensor(rng.normal(size=300), requires_grad=True)
    w = Tensor(rng.normal(size=300))
    assert check(lambda: ops.sum_(ops.mul(smooth(x), w)), [x]) < 1e-8


def test_condition_branch_gradcheck(rng):
    net = ConditionNet("base", rng)
    feats = _feats(rng, B=4)
    w = Tensor(rng.normal(size=(320, 64)))
    err = check(lambda: ops.sum_(ops.mul(net.condition_features(feats), w)),
                net.parameters(), eps=1e-6, max_entries=48)
    assert err < 1e-5


def test_residual_branch_gradcheck(rng):
    net = ConditionNet("sinc1", rng)
    feats = _feats(rng, B=4)
    w = Tensor(rng.normal(size=320))
    params = net.mvf_bilstm.parameters() + net.mvf_conv.parameters()
    err = check(lambda: ops.sum_(ops.mul(net.mvf_residual(feats), w)), params,
                eps=1e-6, max_entries=48)
    assert err < 1e-5


def test_feature_norm_fit_and_roundtrip(rng):
    feats = [_feats(rng, B=20), _feats(rng, B=10)]
    norm = FeatureNorm.fit(feats)
    z = norm.f0(feats[0])
    assert np.all(z[~feats[0].voiced] == 0.0)
    again = FeatureNorm.from_arrays(norm.to_arrays())
    np.testing.assert_array_equal(again.mel(feats[1]), norm.mel(feats[1]))
    assert again.f0_mean == norm.f0_mean and again.f0_std == norm.f0_std


def test_default_norm_is_identity(rng):
    feats = _feats(rng)
    norm = FeatureNorm()
    np.testing.assert_array_equal(norm.mel(feats), feats.mel)
    np.testing.assert_array_equal(norm.f0(feats), feats.f0)
