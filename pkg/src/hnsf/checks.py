"""Gradient-check suite shared by the ``gradcheck`` CLI command and the tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sinc_filter as sf
from .autodiff import BiLSTM, Conv1d, Linear, Tensor, ops
from .autodiff.gradcheck import check, relative_error
from .loss import spectral_loss

TAP_TOL = 1e-4
CHAIN_TOL = 1e-3
LAYER_TOL = 1e-5


@dataclass
class CheckResult:
    name: str
    error: float
    tol: float

    @property
    def passed(self):
        return self.error < self.tol

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max rel err {self.error:.3e} (tol {self.tol:.0e})"


def tap_jacobian_error(fc, M=31, eps=1e-4):
    """Worst relative error of the closed-form tap derivatives vs central differences."""
    d_low, d_high = sf.tap_jacobian(fc, M)
    n_low = (sf.design_lowpass(fc + eps, M) - sf.design_lowpass(fc - eps, M)) / (2 * eps)
    n_high = (sf.design_highpass(fc + eps, M) - sf.design_highpass(fc - eps, M)) / (2 * eps)
    return max(relative_error(d_low, n_low), relative_error(d_high, n_high))


def merge_chain_error(T=1000, M=31, eps=1e-4, seed=0, fc_value=None):
    """dL/dfc from the custom backward vs perturbing each fc[t] on its own.

    L = sum_t w_t * out_t with random weights, so dL/dout is a known random vector.
    """
    rng = np.random.default_rng(seed)
    op = rng.normal(size=T)
    oa = rng.normal(size=T)
    w = rng.normal(size=T)
    if fc_value is None:
        fc = np.clip(0.5 + 0.3 * np.sin(np.arange(T) / 37.0) + 0.05 * rng.normal(size=T),
                     0.05, 0.95)
    else:
        fc = np.full(T, fc_value)
    analytic = sf.backward_fc(w, op, oa, fc, M)
    numeric = np.empty(T)
    for t in range(T):
        # fc[t] only affects out[t]
        lo = hi = fc[t]
        past_p = np.concatenate([np.zeros(M), op])[t + 1:t + M + 1][::-1]
        past_a = np.concatenate([np.zeros(M), oa])[t + 1:t + M + 1][::-1]
        up = past_p @ sf.design_lowpass(lo + eps, M) + past_a @ sf.design_highpass(hi + eps, M)
        dn = past_p @ sf.design_lowpass(lo - eps, M) + past_a @ sf.design_highpass(hi - eps, M)
        numeric[t] = w[t] * (up - dn) / (2 * eps)
    return relative_error(analytic, numeric)


def _layer_cases(rng):
    x = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
    y = Tensor(rng.normal(size=(6, 3)), requires_grad=True)
    w = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
    pos = Tensor(rng.uniform(0.5, 2.0, size=(6, 3)), requires_grad=True)
    wk = rng.normal(size=(6, 3))

    weights = {}

    def weighted(t):
        # fixed random projection per output shape turns any output into a scalar
        if t.shape not in weights:
            weights[t.shape] = rng.normal(size=t.shape)
        return ops.sum_(ops.mul(t, Tensor(weights[t.shape])))

    cases = {
        "matmul": (lambda: weighted(ops.matmul(x, w)), [x, w]),
        "add": (lambda: weighted(ops.add(x, y)), [x, y]),
        "mul": (lambda: weighted(ops.mul(x, y)), [x, y]),
        "tanh": (lambda: weighted(ops.tanh(x)), [x]),
        "sigmoid": (lambda: weighted(ops.sigmoid(x)), [x]),
        "slice": (lambda: weighted(x[1:4, ::2]), [x]),
        "concat": (lambda: weighted(ops.concat([x, y], axis=1)), [x, y]),
        "sum": (lambda: ops.sum_(ops.mul(ops.sum_(x, axis=0), Tensor(wk[0]))), [x]),
        "mean": (lambda: ops.sum_(ops.mul(ops.mean(x, axis=1), Tensor(wk[:, 0]))), [x]),
        "square": (lambda: weighted(ops.square(x)), [x]),
        "log": (lambda: weighted(ops.log(pos)), [pos]),
    }
    conv = Conv1d(3, 2, 3, rng, dilation=2)
    cases["conv1d-dilated"] = (lambda: weighted(conv(x)), [x, conv.weight, conv.bias])
    lstm = BiLSTM(3, 2, rng)
    cases["bilstm"] = (lambda: weighted(lstm(x)), [x] + lstm.parameters())
    ff = Linear(3, 2, rng)
    cases["linear"] = (lambda: weighted(ops.tanh(ff(x))), [x, ff.weight, ff.bias])
    fc = Tensor(rng.uniform(0.2, 0.8, size=40), requires_grad=True)
    hp = Tensor(rng.normal(size=40), requires_grad=True)
    na = Tensor(rng.normal(size=40), requires_grad=True)
    cases["custom-backward (sinc merge)"] = (
        lambda: weighted(sf.sinc_merge(hp, na, fc, 31)), [hp, na, fc])
    sig = Tensor(rng.normal(size=512), requires_grad=True)
    ref = rng.normal(size=512)
    cases["custom-backward (spectral loss)"] = (
        lambda: spectral_loss(sig, ref).total, [sig])
    return cases


def layer_errors(seed=0, eps=1e-5):
    rng = np.random.default_rng(seed)
    out = {}
    for name, (fn, tensors) in _layer_cases(rng).items():
        out[name] = check(fn, tensors, eps=eps, max_entries=64)
    return out


def run_all(M=31, fcs=(0.1, 0.3, 0.5, 0.7, 0.9), eps=1e-4, seed=0):
    results = [CheckResult(f"tap jacobian fc={fc:g} M={M}", tap_jacobian_error(fc, M, eps), TAP_TOL)
               for fc in fcs]
    results.append(CheckResult(f"merge chain T=1000 M={M}",
                               merge_chain_error(1000, M, eps, seed), CHAIN_TOL))
    for name, err in layer_errors(seed).items():
        # spectral loss goes through a log of small powers; its tolerance is 1e-4
        tol = 1e-4 if "spectral" in name else LAYER_TOL
        results.append(CheckResult(f"op {name}", err, tol))
    return results
