"""Hot loops, dispatched to numba or numpy per ``HNSF_BACKEND``."""
from .._backend import BACKEND
from . import lstm, sinc

if BACKEND == "numba":
    merge_forward = sinc.merge_forward_nb
    merge_backward = sinc.merge_backward_nb
    lstm_forward = lstm.lstm_forward_nb
    lstm_backward = lstm.lstm_backward_nb
else:
    merge_forward = sinc.merge_forward_np
    merge_backward = sinc.merge_backward_np
    lstm_forward = lstm.lstm_forward_np
    lstm_backward = lstm.lstm_backward_np

__all__ = [
    "BACKEND",
    "merge_forward",
    "merge_backward",
    "lstm_forward",
    "lstm_backward",
]
