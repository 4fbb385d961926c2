"""Reverse-mode autodiff over numpy arrays.

Every op builds a new :class:`Tensor` holding its parents and a closure that
pushes the output gradient back to them. ``Tensor.backward`` walks the graph
in reverse topological order. All values are float64.
"""
from __future__ import annotations

import contextlib
import itertools

import numpy as np

from .. import kernels

_ids = itertools.count()
_grad_enabled = True


class ShapeError(ValueError):
    """Operands with incompatible shapes."""


@contextlib.contextmanager
def no_grad():
    """Evaluate ops without recording the graph."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "parents", "op", "node_id",
                 "_backward", "__weakref__")

    def __init__(self, data, requires_grad=False, parents=(), op="leaf"):
        self.data = np.array(data, dtype=np.float64, copy=True) if op == "leaf" \
            else np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.parents = parents
        self.op = op
        self.node_id = next(_ids)
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op!r})"

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def backward(self):
        """Populate ``.grad`` of every reachable tensor with d(self)/d(tensor)."""
        if self.data.size != 1:
            raise ShapeError(f"backward() needs a scalar loss, got shape {self.shape}")
        order = _topological(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return slice_(self, index)


def _topological(root):
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.node_id in seen:
            continue
        seen.add(node.node_id)
        stack.append((node, True))
        for p in reversed(node.parents):
            if p.node_id not in seen:
                stack.append((p, False))
    return order


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, op, backward):
    needs = _grad_enabled and any(p.requires_grad for p in parents)
    out = Tensor(data, requires_grad=needs, parents=parents if needs else (), op=op)
    if needs:
        out._backward = backward
    return out


def _check_broadcast(a, b, op):
    sa, sb = a.shape, b.shape
    if sa == sb or a.size == 1 or b.size == 1:
        return
    # bias-style: one shape is a trailing suffix of the other
    short, long_ = (sa, sb) if len(sa) < len(sb) else (sb, sa)
    if len(short) < len(long_) and long_[len(long_) - len(short):] == short:
        return
    raise ShapeError(f"{op}: incompatible shapes {sa} and {sb}")


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    if len(shape) == 0 or int(np.prod(shape)) == 1:
        return np.array(g.sum()).reshape(shape)
    lead = g.ndim - len(shape)
    return g.sum(axis=tuple(range(lead))).reshape(shape)


# ---------------------------------------------------------------------------
# elementwise / reduction ops
# ---------------------------------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), "add", backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _make(a.data - b.data, (a, b), "sub", backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), "mul", backward)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.outer(g, b.data) if b.data.ndim == 1 else g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _make(a.data @ b.data, (a, b), "matmul", backward)


def tanh(a):
    a = as_tensor(a)
    y = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - y * y))

    return _make(y, (a,), "tanh", backward)


def sigmoid(a):
    a = as_tensor(a)
    y = 0.5 * (np.tanh(0.5 * a.data) + 1.0)

    def backward(g):
        a._accumulate(g * y * (1.0 - y))

    return _make(y, (a,), "sigmoid", backward)


def square(a):
    a = as_tensor(a)

    def backward(g):
        a._accumulate(2.0 * g * a.data)

    return _make(a.data * a.data, (a,), "square", backward)


def log(a):
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g / a.data)

    return _make(np.log(a.data), (a,), "log", backward)


def clip(a, lo, hi):
    """Clamp to [lo, hi]; gradient passes only where the input is inside."""
    a = as_tensor(a)
    inside = (a.data >= lo) & (a.data <= hi)

    def backward(g):
        a._accumulate(g * inside)

    return _make(np.clip(a.data, lo, hi), (a,), "clip", backward)


def sum_(a, axis=None):
    a = as_tensor(a)

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape))
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.shape))

    return _make(a.data.sum(axis=axis), (a,), "sum", backward)


def mean(a, axis=None):
    a = as_tensor(a)
    n = a.size if axis is None else a.shape[axis]

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g / n, a.shape))
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g / n, axis), a.shape))

    return _make(a.data.mean(axis=axis), (a,), "mean", backward)


# ---------------------------------------------------------------------------
# shape ops
# ---------------------------------------------------------------------------

def slice_(a, index):
    a = as_tensor(a)

    def backward(g):
        full = np.zeros(a.shape)
        full[index] += g
        a._accumulate(full)

    return _make(a.data[index], (a,), "slice", backward)


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    ax = axis % tensors[0].data.ndim
    ref = tensors[0].shape
    for t in tensors[1:]:
        if t.data.ndim != len(ref) or any(
                t.shape[d] != ref[d] for d in range(len(ref)) if d != ax):
            raise ShapeError(f"concat: incompatible shapes {ref} and {t.shape}")
    bounds = np.cumsum([0] + [t.shape[ax] for t in tensors])

    def backward(g):
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[ax] = slice(lo, hi)
                t._accumulate(g[tuple(idx)])

    data = np.concatenate([t.data for t in tensors], axis=ax)
    return _make(data, tuple(tensors), "concat", backward)


def reshape(a, shape):
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g.reshape(a.shape))

    return _make(a.data.reshape(shape), (a,), "reshape", backward)


def repeat_rows(a, factor):
    """Repeat every row ``factor`` times along axis 0 (frame -> sample rate)."""
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g.reshape((a.shape[0], factor) + a.shape[1:]).sum(axis=1))

    return _make(np.repeat(a.data, factor, axis=0), (a,), "repeat", backward)


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------

def conv1d(x, w, b=None, dilation=1):
    """Length-preserving dilated convolution.

    ``x``: (T, C_in); ``w``: (C_out, C_in, k) with odd k; ``b``: (C_out,).
    Output (T, C_out), zero-padded by (k-1)*dilation/2 on each side.
    """
    x, w = as_tensor(x), as_tensor(w)
    if x.data.ndim != 2 or w.data.ndim != 3 or w.shape[1] != x.shape[1]:
        raise ShapeError(f"conv1d: incompatible shapes {x.shape} and {w.shape}")
    k = w.shape[2]
    if k % 2 == 0:
        raise ShapeError(f"conv1d: kernel width must be odd, got shape {w.shape}")
    if dilation < 1:
        raise ValueError(f"dilation must be >= 1, got {dilation}")
    T, c_in = x.shape
    c_out = w.shape[0]
    pad = (k - 1) * dilation // 2
    xp = np.pad(x.data, ((pad, pad), (0, 0)))
    # im2col: column block j holds the input shifted by j*dilation
    cols = np.concatenate([xp[j * dilation:j * dilation + T] for j in range(k)], axis=1)
    w2 = w.data.transpose(0, 2, 1).reshape(c_out, k * c_in)
    out = cols @ w2.T
    del cols  # rebuilt in backward; keeping it costs k times the activation memory
    parents = (x, w)
    if b is not None:
        b = as_tensor(b)
        if b.shape != (c_out,):
            raise ShapeError(f"conv1d: bias shape {b.shape} vs weight shape {w.shape}")
        out += b.data
        parents = (x, w, b)

    def backward(g):
        if x.requires_grad:
            gcols = g @ w2
            gxp = np.zeros_like(xp)
            for j in range(k):
                gxp[j * dilation:j * dilation + T] += gcols[:, j * c_in:(j + 1) * c_in]
            x._accumulate(gxp[pad:pad + T])
        if w.requires_grad:
            gw2 = g.T @ np.concatenate(
                [xp[j * dilation:j * dilation + T] for j in range(k)], axis=1)
            w._accumulate(gw2.reshape(c_out, k, c_in).transpose(0, 2, 1))
        if b is not None and b.requires_grad:
            b._accumulate(g.sum(axis=0))

    return _make(out, parents, "conv1d", backward)


def lstm(x, w_ih, w_hh, b, reverse=False):
    """Single-direction LSTM over ``x`` of shape (T, D); returns (T, H)."""
    x, w_ih, w_hh, b = (as_tensor(t) for t in (x, w_ih, w_hh, b))
    H4 = w_ih.shape[0]
    if (x.data.ndim != 2 or w_ih.shape != (H4, x.shape[1])
            or w_hh.shape != (H4, H4 // 4) or b.shape != (H4,)):
        raise ShapeError(
            f"lstm: incompatible shapes {x.shape} and {w_ih.shape}/{w_hh.shape}/{b.shape}")
    xs = x.data[::-1] if reverse else x.data
    xw = np.ascontiguousarray(xs @ w_ih.data.T + b.data)
    w_rec = np.ascontiguousarray(w_hh.data)
    hidden, cell, gates = kernels.lstm_forward(xw, w_rec)
    out = hidden[::-1] if reverse else hidden

    def backward(g):
        gs = np.ascontiguousarray(g[::-1] if reverse else g)
        dz, dw_hh = kernels.lstm_backward(gs, w_rec, hidden, cell, gates)
        if x.requires_grad:
            dx = dz @ w_ih.data
            x._accumulate(dx[::-1] if reverse else dx)
        if w_ih.requires_grad:
            w_ih._accumulate(dz.T @ xs)
        if w_hh.requires_grad:
            w_hh._accumulate(dw_hh)
        if b.requires_grad:
            b._accumulate(dz.sum(axis=0))

    return _make(np.ascontiguousarray(out), (x, w_ih, w_hh, b), "lstm", backward)


def bilstm(x, forward_params, backward_params):
    """Two independent LSTMs, outputs concatenated as [forward, backward]."""
    return concat([lstm(x, *forward_params), lstm(x, *backward_params, reverse=True)],
                  axis=1)


def custom(forward_fn, backward_fn, *inputs, op="custom"):
    """Op with a hand-written gradient.

    ``forward_fn(*arrays) -> (out, ctx)``; ``backward_fn(g, ctx)`` returns one
    gradient (or None) per input.
    """
    inputs = tuple(as_tensor(t) for t in inputs)
    out, ctx = forward_fn(*(t.data for t in inputs))

    def backward(g):
        grads = backward_fn(g, ctx)
        for t, gt in zip(inputs, grads):
            if gt is not None and t.requires_grad:
                t._accumulate(gt)

    return _make(out, inputs, op, backward)
