"""Central finite-difference gradient checks."""
import numpy as np


def numeric_grad(fn, tensor, eps=1e-5, indices=None):
    """d fn() / d tensor by central differences, perturbing ``tensor.data`` in place.

    ``indices`` optionally restricts the check to a subset of flat positions;
    other entries of the result are NaN.
    """
    flat = tensor.data.reshape(-1)
    out = np.full(flat.shape, np.nan)
    positions = range(flat.size) if indices is None else indices
    for i in positions:
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(fn())
        flat[i] = orig - eps
        lo = float(fn())
        flat[i] = orig
        out[i] = (hi - lo) / (2.0 * eps)
    return out.reshape(tensor.shape)


def relative_error(analytic, numeric):
    """max |a - n| / max(|a|, |n|), over entries where ``numeric`` is defined."""
    a = np.asarray(analytic, dtype=np.float64).reshape(-1)
    n = np.asarray(numeric, dtype=np.float64).reshape(-1)
    mask = ~np.isnan(n)
    a, n = a[mask], n[mask]
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(n), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(a - n)) / scale)


def check(loss_fn, tensors, eps=1e-5, max_entries=None, rng=None):
    """Compare backprop against finite differences for each tensor.

    ``loss_fn`` rebuilds the graph and returns a scalar Tensor. Returns the
    worst relative error across ``tensors``.
    """
    for t in tensors:
        t.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [t.grad.copy() if t.grad is not None else np.zeros(t.shape) for t in tensors]
    worst = 0.0
    for t, a in zip(tensors, analytic):
        idx = None
        if max_entries is not None and t.size > max_entries:
            rng = rng or np.random.default_rng(0)
            idx = rng.choice(t.size, size=max_entries, replace=False)
        num = numeric_grad(lambda: loss_fn().item(), t, eps, idx)
        worst = max(worst, relative_error(a, num))
    return worst
