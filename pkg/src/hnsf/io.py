"""WAV (PCM16 mono 16 kHz), feature files, and trajectory CSVs."""
from __future__ import annotations

import csv
import json
import os
import wave

import numpy as np

from . import dsp


class FormatError(ValueError):
    pass


def wav_read(path):
    """Samples scaled to [-1, 1) by 1/32768."""
    try:
        with wave.open(os.fspath(path), "rb") as w:
            channels, width, rate = w.getnchannels(), w.getsampwidth(), w.getframerate()
            comptype = w.getcomptype()
            raw = w.readframes(w.getnframes())
    except wave.Error as exc:
        raise FormatError(f"{path}: not a PCM WAV file ({exc})") from None
    if comptype != "NONE":
        raise FormatError(f"{path}: compressed WAV ({comptype}) not supported; expected PCM16")
    if width != 2:
        raise FormatError(f"{path}: {8 * width}-bit samples; expected 16-bit PCM")
    if channels != 1:
        raise FormatError(f"{path}: {channels} channels; expected mono")
    if rate != dsp.SAMPLE_RATE:
        raise FormatError(f"{path}: sample rate {rate} Hz; expected {dsp.SAMPLE_RATE} Hz")
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def wav_write(samples, path):
    """Clip to [-1, 1], scale by 32767, write PCM16 mono 16 kHz."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype("<i2")
    with wave.open(os.fspath(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(dsp.SAMPLE_RATE)
        w.writeframes(pcm.tobytes())


def _sidecar(path):
    return os.fspath(path) + ".json"


def write_features(feats: dsp.AcousticFeatures, path):
    """Raw float32 payload (F0 then mel per frame) plus a JSON sidecar."""
    mel_dim = feats.mel.shape[1]
    payload = np.concatenate([feats.f0[:, None], feats.mel], axis=1).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(payload.tobytes())
    header = {"frames": int(feats.n_frames), "f0_dim": 1, "mel_dim": int(mel_dim),
              "frame_shift_ms": float(feats.frame_shift_ms)}
    with open(_sidecar(path), "w") as fh:
        json.dump(header, fh, sort_keys=True)


def read_features(path) -> dsp.AcousticFeatures:
    try:
        with open(_sidecar(path)) as fh:
            header = json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"{path}: missing sidecar {_sidecar(path)}") from None
    dim = header["f0_dim"] + header["mel_dim"]
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) != header["frames"] * dim * 4:
        raise FormatError(f"{path}: payload has {len(raw)} bytes, header implies "
                          f"{header['frames'] * dim * 4}")
    data = np.frombuffer(raw, dtype="<f4").reshape(header["frames"], dim).astype(np.float64)
    return dsp.AcousticFeatures(f0=data[:, 0], mel=data[:, header["f0_dim"]:],
                                frame_shift_ms=header["frame_shift_ms"])


def write_loss_curve(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["step", "L1", "L2", "L3", "total"])
        for row in rows:
            wr.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_mvf_csv(v, r, fc, path, frame_shift=dsp.FRAME_SHIFT):
    """Per-frame means of the per-sample v, r and smoothed fc tracks."""
    n = len(v) // frame_shift

    def frames(x):
        return np.asarray(x)[:n * frame_shift].reshape(n, frame_shift).mean(axis=1)

    fv, fr, ff = frames(v), frames(r), frames(fc)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["frame_index", "time_sec", "v", "r", "fc_smoothed"])
        for b in range(n):
            wr.writerow([b, f"{b * frame_shift / dsp.SAMPLE_RATE:.4f}",
                         f"{fv[b]:.6f}", f"{fr[b]:.6f}", f"{ff[b]:.6f}"])


def write_filter_response(fc, M, path, n_fft=1024):
    from .sinc_filter import design_highpass, design_lowpass, frequency_response

    lo = frequency_response(design_lowpass(fc, M), n_fft)
    hi = frequency_response(design_highpass(fc, M), n_fft)
    floor = 1e-12
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["normalized_frequency", "lowpass_magnitude_db", "highpass_magnitude_db"])
        for k in range(lo.size):
            db_lo = round(20 * np.log10(max(lo[k], floor)), 6) + 0.0
            db_hi = round(20 * np.log10(max(hi[k], floor)), 6) + 0.0
            wr.writerow([f"{k / (n_fft // 2):.6f}", f"{db_lo:.6f}", f"{db_hi:.6f}"])
