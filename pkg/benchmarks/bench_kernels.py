"""numba vs pure-numpy timings for the hot kernels.

    python benchmarks/bench_kernels.py [--T 16000] [--repeat 5]

Each kernel is called once before timing so JIT compilation is excluded.
The last column is numpy time / numba time.
"""
import argparse
import time

import numpy as np

from hnsf._backend import HAVE_NUMBA
from hnsf.kernels import lstm, sinc


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(T, rng):
    op, oa, g = rng.normal(size=(3, T))
    # per-sample cutoff that changes every sample (worst case for tap reuse)
    fc = np.clip(0.5 + 0.3 * np.sin(np.arange(T) / 50.0), 0.05, 0.95)
    # frame-constant cutoff, as produced by the baseline U/V switch
    fc_frames = np.repeat(rng.uniform(0.1, 0.9, size=T // 80 + 1), 80)[:T]
    H, B = 32, T // 80
    xw = rng.normal(size=(B, 4 * H))
    w_hh = rng.normal(scale=0.3, size=(4 * H, H))
    hidden, cell, gates = lstm.lstm_forward_np(xw, w_hh)
    dh = rng.normal(size=(B, H))
    return {
        "merge fwd (fc per sample)": (
            lambda: sinc.merge_forward_nb(op, oa, fc, fc, 31),
            lambda: sinc.merge_forward_np(op, oa, fc, fc, 31)),
        "merge bwd (fc per sample)": (
            lambda: sinc.merge_backward_nb(g, op, oa, fc, fc, 31),
            lambda: sinc.merge_backward_np(g, op, oa, fc, fc, 31)),
        "merge fwd (fc per frame)": (
            lambda: sinc.merge_forward_nb(op, oa, fc_frames, fc_frames, 31),
            lambda: sinc.merge_forward_np(op, oa, fc_frames, fc_frames, 31)),
        f"lstm fwd ({B} frames, H={H})": (
            lambda: lstm.lstm_forward_nb(xw, w_hh),
            lambda: lstm.lstm_forward_np(xw, w_hh)),
        f"lstm bwd ({B} frames, H={H})": (
            lambda: lstm.lstm_backward_nb(dh, w_hh, hidden, cell, gates),
            lambda: lstm.lstm_backward_np(dh, w_hh, hidden, cell, gates)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=16000, help="samples (16000 = 1 s)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (nb, npy) in cases(args.T, rng).items():
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(npy, args.repeat)
        print(f"{name:32s} {1e3 * t_nb:10.2f} {1e3 * t_np:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
