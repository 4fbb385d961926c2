"""Minimal reverse-mode autodiff engine."""
from . import tensor as ops
from .nn import BiLSTM, Conv1d, LSTM, Linear, Module, Parameter, zero_parameters
from .optim import Adam, adam_step, clip_grad_norm
from .tensor import ShapeError, Tensor, as_tensor, no_grad

_OPS = {
    "matmul": ops.matmul,
    "add": ops.add,
    "sub": ops.sub,
    "mul": ops.mul,
    "tanh": ops.tanh,
    "sigmoid": ops.sigmoid,
    "conv1d-dilated": ops.conv1d,
    "lstm": ops.lstm,
    "bilstm": ops.bilstm,
    "slice": ops.slice_,
    "concat": lambda *xs, axis=-1: ops.concat(list(xs), axis=axis),
    "sum": ops.sum_,
    "mean": ops.mean,
    "square": ops.square,
    "log": ops.log,
    "clip": ops.clip,
    "repeat": ops.repeat_rows,
    "custom-backward": ops.custom,
}


def forward_op(kind, *inputs, **attrs):
    """Apply a named op; see ``_OPS`` for the accepted kinds."""
    try:
        fn = _OPS[kind]
    except KeyError:
        raise ValueError(f"unknown op kind {kind!r}; known: {sorted(_OPS)}") from None
    return fn(*inputs, **attrs)


__all__ = [
    "Adam", "BiLSTM", "Conv1d", "LSTM", "Linear", "Module", "Parameter",
    "ShapeError", "Tensor", "adam_step", "as_tensor", "clip_grad_norm",
    "forward_op", "no_grad", "ops", "zero_parameters",
]
