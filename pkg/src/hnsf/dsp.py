"""Signal-processing primitives: framing, STFT, mel/F0 features, resampling helpers.

Nothing here is differentiable; the loss module wraps :func:`frame_signal`
and friends in custom autodiff ops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SAMPLE_RATE = 16000
FRAME_SHIFT = 80  # 5 ms at 16 kHz
LOG_FLOOR = 1e-9


@dataclass(frozen=True)
class StftConfig:
    dft_bins: int
    frame_length: int
    frame_shift: int

    def __post_init__(self):
        if self.frame_length > self.dft_bins:
            raise ValueError(f"frame_length {self.frame_length} exceeds dft_bins {self.dft_bins}")
        if not 0 < self.frame_shift <= self.frame_length:
            raise ValueError(f"frame_shift must be in (0, frame_length], got {self.frame_shift}")

    @property
    def n_bins(self):
        return self.dft_bins // 2 + 1


# short-time analysis settings of the three spectral distances
LOSS_CONFIGS = (
    StftConfig(512, 320, 80),
    StftConfig(128, 80, 40),
    StftConfig(2048, 1920, 640),
)


@dataclass
class AcousticFeatures:
    """Per-frame F0 in Hz (0 = unvoiced) and 80-dim log-mel, 5 ms shift."""

    f0: np.ndarray
    mel: np.ndarray
    frame_shift_ms: float = 5.0

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64).reshape(-1)
        self.mel = np.asarray(self.mel, dtype=np.float64)
        if self.mel.ndim != 2 or self.mel.shape[0] != self.f0.shape[0]:
            raise ValueError(f"f0 has {self.f0.shape[0]} frames but mel has shape {self.mel.shape}")
        if np.any(self.f0 < 0):
            raise ValueError("f0 must be >= 0")

    @property
    def n_frames(self):
        return self.f0.shape[0]

    @property
    def voiced(self):
        return self.f0 > 0


def hann(n):
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def num_frames(n_samples, frame_length, frame_shift):
    return 1 + math.ceil(max(n_samples - frame_length, 0) / frame_shift)


def frame_signal(x, frame_length, frame_shift):
    """(n_frames, frame_length) view-copy; the tail is zero-padded."""
    x = np.asarray(x, dtype=np.float64)
    n = num_frames(x.shape[0], frame_length, frame_shift)
    total = (n - 1) * frame_shift + frame_length
    padded = np.zeros(total)
    padded[:x.shape[0]] = x
    idx = np.arange(frame_length)[None, :] + frame_shift * np.arange(n)[:, None]
    return padded[idx]


def overlap_add(frames, n_samples, frame_shift):
    """Adjoint of :func:`frame_signal`: scatter-add frames back onto a signal."""
    n, length = frames.shape
    total = (n - 1) * frame_shift + length
    out = np.zeros(max(total, n_samples))
    for i in range(n):
        out[i * frame_shift:i * frame_shift + length] += frames[i]
    return out[:n_samples]


def stft(x, cfg: StftConfig):
    """Complex one-sided spectrum, shape (n_frames, dft_bins/2 + 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty waveform")
    frames = frame_signal(x, cfg.frame_length, cfg.frame_shift) * hann(cfg.frame_length)
    return np.fft.rfft(frames, n=cfg.dft_bins, axis=1)


def stft_log_amplitude(x, cfg: StftConfig):
    """log(|X|^2 + 1e-9) on Hann-windowed frames."""
    spec = stft(x, cfg)
    return np.log(spec.real ** 2 + spec.imag ** 2 + LOG_FLOOR)


def upsample_repeat(frames, factor=FRAME_SHIFT):
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    return np.repeat(np.asarray(frames, dtype=np.float64), factor, axis=0)


def smoothing_taps(window_ms=5.0, sample_rate=SAMPLE_RATE):
    """Odd tap count covering ``window_ms`` (80 samples -> 81 taps)."""
    n = int(round(window_ms * sample_rate / 1000.0))
    return n + 1 if n % 2 == 0 else n


def moving_average(x, window_ms=5.0, sample_rate=SAMPLE_RATE):
    """Centred boxcar average with edge replication; length preserving."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    taps = smoothing_taps(window_ms, sample_rate)
    half = taps // 2
    padded = np.pad(x, half, mode="edge")
    return np.convolve(padded, np.full(taps, 1.0 / taps), mode="valid")


def moving_average_adjoint(g, window_ms=5.0, sample_rate=SAMPLE_RATE):
    """Transpose of :func:`moving_average` (used for backprop)."""
    g = np.asarray(g, dtype=np.float64)
    if g.size == 0:
        return g.copy()
    taps = smoothing_taps(window_ms, sample_rate)
    half = taps // 2
    full = np.convolve(g, np.full(taps, 1.0 / taps), mode="full")
    out = full[half:half + g.size].copy()
    out[0] += full[:half].sum()
    out[-1] += full[half + g.size:].sum()
    return out


# ---------------------------------------------------------------------------
# feature extraction
# ---------------------------------------------------------------------------

MEL_BANDS = 80
MEL_DFT = 512
MEL_FRAME = 320
F0_WINDOW = 400  # 25 ms
F0_MIN = 60.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.45


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_bands=MEL_BANDS, n_fft=MEL_DFT, sample_rate=SAMPLE_RATE,
                   fmin=0.0, fmax=None):
    """Triangular filters on the HTK mel scale, shape (n_bands, n_fft/2 + 1)."""
    fmax = sample_rate / 2 if fmax is None else fmax
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_bands + 2))
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    lower = (freqs[None, :] - edges[:-2, None]) / (edges[1:-1, None] - edges[:-2, None])
    upper = (edges[2:, None] - freqs[None, :]) / (edges[2:, None] - edges[1:-1, None])
    return np.maximum(0.0, np.minimum(lower, upper))


def _centered_frames(x, n_frames, length, shift=FRAME_SHIFT):
    # frame b is centred on sample b*shift + shift/2
    offset = length // 2 - shift // 2
    padded = np.concatenate([np.zeros(offset), x, np.zeros(length)])
    idx = np.arange(length)[None, :] + shift * np.arange(n_frames)[:, None]
    return padded[idx]


def log_mel(x, n_frames=None):
    x = np.asarray(x, dtype=np.float64)
    n_frames = x.size // FRAME_SHIFT if n_frames is None else n_frames
    frames = _centered_frames(x, n_frames, MEL_FRAME) * hann(MEL_FRAME)
    mag = np.abs(np.fft.rfft(frames, n=MEL_DFT, axis=1))
    return np.log(np.maximum(mag @ mel_filterbank().T, LOG_FLOOR))


def estimate_f0(x, n_frames=None, sample_rate=SAMPLE_RATE):
    """Normalised-autocorrelation F0 per 5 ms frame; 0 marks unvoiced frames."""
    x = np.asarray(x, dtype=np.float64)
    n_frames = x.size // FRAME_SHIFT if n_frames is None else n_frames
    lag_min = int(math.floor(sample_rate / F0_MAX))
    lag_max = int(math.ceil(sample_rate / F0_MIN))
    span = F0_WINDOW + lag_max + 1
    frames = _centered_frames(x, n_frames, span)
    f0 = np.zeros(n_frames)
    silence = 1e-10 * F0_WINDOW
    for b in range(n_frames):
        seg = frames[b]
        ref = seg[:F0_WINDOW]
        e_ref = ref @ ref
        if e_ref < silence:
            continue
        shifted = np.lib.stride_tricks.sliding_window_view(seg, F0_WINDOW)[lag_min:lag_max + 1]
        energy = np.einsum("ij,ij->i", shifted, shifted)
        corr = shifted @ ref / np.sqrt(e_ref * np.maximum(energy, 1e-300))
        best = corr.max()
        if best < VOICING_THRESHOLD:
            continue
        # earliest local peak close to the global one avoids period doubling
        k = None
        for j in range(1, corr.size - 1):
            if corr[j] >= corr[j - 1] and corr[j] >= corr[j + 1] and corr[j] >= 0.9 * best:
                k = j
                break
        if k is None:
            k = int(np.argmax(corr))
        shift = 0.0
        if 0 < k < corr.size - 1:
            denom = corr[k - 1] - 2.0 * corr[k] + corr[k + 1]
            if denom < 0:
                shift = 0.5 * (corr[k - 1] - corr[k + 1]) / denom
        f0[b] = sample_rate / (lag_min + k + shift)
    return f0


def extract_features(x, sample_rate=SAMPLE_RATE):
    """Log-mel + F0 at a 5 ms shift; one frame per 80 samples (tail dropped)."""
    if sample_rate != SAMPLE_RATE:
        raise ValueError(f"expected {SAMPLE_RATE} Hz input, got {sample_rate}")
    x = np.asarray(x, dtype=np.float64)
    n = x.size // FRAME_SHIFT
    return AcousticFeatures(f0=estimate_f0(x, n), mel=log_mel(x, n))
