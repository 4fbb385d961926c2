"""Unidirectional LSTM recurrence, forward and backward through time.

The input projection ``x @ W_ih.T + b`` is done by the caller with a single
matmul; these kernels only run the sequential part. Gate order is
(input, forget, cell, output).
"""
import math

import numpy as np

from .._backend import njit


def _sigmoid(z):
    return 0.5 * (np.tanh(0.5 * z) + 1.0)


def lstm_forward_np(xw, w_hh):
    T, H4 = xw.shape
    H = H4 // 4
    gates = np.empty((T, H4))
    cell = np.empty((T, H))
    hidden = np.empty((T, H))
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(T):
        z = xw[t] + w_hh @ h
        i = _sigmoid(z[:H])
        f = _sigmoid(z[H:2 * H])
        g = np.tanh(z[2 * H:3 * H])
        o = _sigmoid(z[3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[t, :H] = i
        gates[t, H:2 * H] = f
        gates[t, 2 * H:3 * H] = g
        gates[t, 3 * H:] = o
        cell[t] = c
        hidden[t] = h
    return hidden, cell, gates


def lstm_backward_np(dh_out, w_hh, hidden, cell, gates):
    """Returns (dz, dW_hh) where dz is the gradient w.r.t. gate pre-activations."""
    T, H = hidden.shape
    dz = np.empty((T, 4 * H))
    dw_hh = np.zeros_like(w_hh)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in range(T - 1, -1, -1):
        i = gates[t, :H]
        f = gates[t, H:2 * H]
        g = gates[t, 2 * H:3 * H]
        o = gates[t, 3 * H:]
        tc = np.tanh(cell[t])
        c_prev = cell[t - 1] if t > 0 else np.zeros(H)
        h_prev = hidden[t - 1] if t > 0 else np.zeros(H)
        dh = dh_out[t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        dz[t, :H] = dc * g * i * (1.0 - i)
        dz[t, H:2 * H] = dc * c_prev * f * (1.0 - f)
        dz[t, 2 * H:3 * H] = dc * i * (1.0 - g * g)
        dz[t, 3 * H:] = dh * tc * o * (1.0 - o)
        dw_hh += np.outer(dz[t], h_prev)
        dh_next = w_hh.T @ dz[t]
        dc_next = dc * f
    return dz, dw_hh


@njit
def _sig(z):
    return 0.5 * (math.tanh(0.5 * z) + 1.0)


@njit
def lstm_forward_nb(xw, w_hh):
    T, H4 = xw.shape
    H = H4 // 4
    gates = np.empty((T, H4))
    cell = np.empty((T, H))
    hidden = np.empty((T, H))
    h = np.zeros(H)
    c = np.zeros(H)
    z = np.empty(H4)
    for t in range(T):
        for r in range(H4):
            acc = xw[t, r]
            for k in range(H):
                acc += w_hh[r, k] * h[k]
            z[r] = acc
        for k in range(H):
            i = _sig(z[k])
            f = _sig(z[H + k])
            g = math.tanh(z[2 * H + k])
            o = _sig(z[3 * H + k])
            c[k] = f * c[k] + i * g
            h[k] = o * math.tanh(c[k])
            gates[t, k] = i
            gates[t, H + k] = f
            gates[t, 2 * H + k] = g
            gates[t, 3 * H + k] = o
            cell[t, k] = c[k]
            hidden[t, k] = h[k]
    return hidden, cell, gates


@njit
def lstm_backward_nb(dh_out, w_hh, hidden, cell, gates):
    T, H = hidden.shape
    H4 = 4 * H
    dz = np.empty((T, H4))
    dw_hh = np.zeros_like(w_hh)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in range(T - 1, -1, -1):
        for k in range(H):
            i = gates[t, k]
            f = gates[t, H + k]
            g = gates[t, 2 * H + k]
            o = gates[t, 3 * H + k]
            tc = math.tanh(cell[t, k])
            c_prev = cell[t - 1, k] if t > 0 else 0.0
            dh = dh_out[t, k] + dh_next[k]
            dc = dh * o * (1.0 - tc * tc) + dc_next[k]
            dz[t, k] = dc * g * i * (1.0 - i)
            dz[t, H + k] = dc * c_prev * f * (1.0 - f)
            dz[t, 2 * H + k] = dc * i * (1.0 - g * g)
            dz[t, 3 * H + k] = dh * tc * o * (1.0 - o)
            dc_next[k] = dc * f
        if t > 0:
            for r in range(H4):
                for k in range(H):
                    dw_hh[r, k] += dz[t, r] * hidden[t - 1, k]
        for k in range(H):
            acc = 0.0
            for r in range(H4):
                acc += w_hh[r, k] * dz[t, r]
            dh_next[k] = acc
    return dz, dw_hh
