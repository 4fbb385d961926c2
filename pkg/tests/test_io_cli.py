import csv
import json
import wave

import numpy as np
import pytest

from hnsf import dsp
from hnsf import io as hio
from hnsf.cli import main
from hnsf.config import RunConfig
from hnsf.model import HNSF, ModelConfig
from hnsf.train import save_checkpoint


def _write_raw_wav(path, rate=16000, channels=1, width=2, frames=100):
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(width)
        w.setframerate(rate)
        w.writeframes(b"\0" * frames * channels * width)


def test_wav_roundtrip(tmp_path, rng):
    x = rng.uniform(-0.99, 0.99, size=4000)
    hio.wav_write(x, tmp_path / "a.wav")
    y = hio.wav_read(tmp_path / "a.wav")
    assert y.shape == x.shape
    assert np.max(np.abs(x - y)) <= 1 / 32768 + 1 / 65536


def test_wav_write_clips(tmp_path):
    hio.wav_write(np.array([2.0, -3.0, 0.0]), tmp_path / "c.wav")
    y = hio.wav_read(tmp_path / "c.wav")
    np.testing.assert_allclose(y, [32767 / 32768, -32767 / 32768, 0.0])


@pytest.mark.parametrize("kw,msg", [
    ({"channels": 2}, "2 channels"),
    ({"rate": 44100}, "44100"),
    ({"width": 1}, "8-bit"),
])
def test_wav_rejections(tmp_path, kw, msg):
    path = tmp_path / "bad.wav"
    _write_raw_wav(path, **kw)
    with pytest.raises(hio.FormatError, match=msg):
        hio.wav_read(path)


def test_not_a_wav(tmp_path):
    path = tmp_path / "x.wav"
    path.write_bytes(b"hello world, not RIFF")
    with pytest.raises(hio.FormatError, match="PCM WAV"):
        hio.wav_read(path)


def test_feature_roundtrip_is_bit_identical(tmp_path, clip_features):
    a = tmp_path / "a.f32"
    b = tmp_path / "b.f32"
    hio.write_features(clip_features, a)
    got = hio.read_features(a)
    assert np.array_equal(got.f0, clip_features.f0.astype(np.float32))
    assert np.array_equal(got.mel, clip_features.mel.astype(np.float32))
    hio.write_features(got, b)
    assert a.read_bytes() == b.read_bytes()
    header = json.loads((tmp_path / "a.f32.json").read_text())
    assert header == {"frames": 200, "f0_dim": 1, "mel_dim": 80, "frame_shift_ms": 5.0}


def test_feature_truncated_payload(tmp_path, clip_features):
    path = tmp_path / "a.f32"
    hio.write_features(clip_features, path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(hio.FormatError, match="bytes"):
        hio.read_features(path)


def test_filter_response_csv(tmp_path):
    out = tmp_path / "resp.csv"
    hio.write_filter_response(0.5, 31, out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["normalized_frequency", "lowpass_magnitude_db", "highpass_magnitude_db"]
    assert len(rows) == 514
    assert float(rows[1][1]) == pytest.approx(0.0, abs=1e-9)
    assert float(rows[-1][2]) == pytest.approx(0.0, abs=1e-9)
    assert float(rows[257][1]) == pytest.approx(20 * np.log10(0.5), abs=0.9)


# --- CLI -------------------------------------------------------------------

def _json_line(out):
    return json.loads(out.splitlines()[0])


def test_cli_unknown_command(capsys):
    assert main(["frobnicate"]) == 1


def test_cli_missing_argument(capsys):
    assert main(["filter-inspect", "--fc", "0.5"]) == 1


def test_cli_filter_inspect(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["filter-inspect", "--fc", "0.3", "--M", "31", "--out", str(out)]) == 0
    record = _json_line(capsys.readouterr().out)
    assert record["command"] == "filter-inspect" and record["fc"] == 0.3
    assert record["config"]["optim"]["lr"] == 3e-4
    assert len(out.read_text().splitlines()) == 514


def test_cli_filter_inspect_bad_cutoff(tmp_path, capsys):
    assert main(["filter-inspect", "--fc", "1.5", "--out", str(tmp_path / "r.csv")]) == 2
    assert "inside" in capsys.readouterr().err


def test_cli_gradcheck(capsys):
    assert main(["gradcheck", "--M", "31", "--fc", "0.1", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "PASS tap jacobian fc=0.1" in out and "FAIL" not in out


def test_cli_extract(tmp_path, clip, capsys):
    wav = tmp_path / "clip.wav"
    hio.wav_write(clip, wav)
    feats = tmp_path / "clip.f32"
    assert main(["extract", "--wav", str(wav), "--out", str(feats)]) == 0
    f = hio.read_features(feats)
    assert f.n_frames == 200 and f.voiced.any() and not f.voiced.all()


def test_cli_extract_rejects_stereo(tmp_path, capsys):
    wav = tmp_path / "st.wav"
    _write_raw_wav(wav, channels=2)
    assert main(["extract", "--wav", str(wav), "--out", str(tmp_path / "o.f32")]) == 2
    assert "channels" in capsys.readouterr().err


def test_cli_synth_and_mvf(tmp_path, clip_features, capsys):
    model = HNSF(ModelConfig.tiny("sinc1"))
    ckpt = tmp_path / "m.ckpt"
    save_checkpoint(ckpt, model, run_config=RunConfig(variant="sinc1", profile="tiny"))
    feats = tmp_path / "f.f32"
    hio.write_features(clip_features, feats)

    wav = tmp_path / "o.wav"
    assert main(["synth", "--ckpt", str(ckpt), "--feats", str(feats), "--out", str(wav)]) == 0
    assert _json_line(capsys.readouterr().out)["config"]["profile"] == "tiny"
    assert hio.wav_read(wav).size == 16000

    assert main(["synth", "--ckpt", str(ckpt), "--feats", str(feats), "--out", str(wav),
                 "--variant", "base"]) == 2
    assert "sinc1" in capsys.readouterr().err

    mvf = tmp_path / "mvf.csv"
    assert main(["mvf", "--ckpt", str(ckpt), "--feats", str(feats), "--out", str(mvf)]) == 0
    rows = hio.read_csv(mvf)
    assert len(rows) == 200
    assert list(rows[0]) == ["frame_index", "time_sec", "v", "r", "fc_smoothed"]
    assert all(0 < float(r["fc_smoothed"]) < 1 for r in rows)


def test_cli_mvf_rejects_base(tmp_path, clip_features, capsys):
    ckpt = tmp_path / "b.ckpt"
    save_checkpoint(ckpt, HNSF(ModelConfig.tiny("base")))
    feats = tmp_path / "f.f32"
    hio.write_features(clip_features, feats)
    assert main(["mvf", "--ckpt", str(ckpt), "--feats", str(feats),
                 "--out", str(tmp_path / "m.csv")]) == 2


def test_cli_train_zero_steps(tmp_path, clip, capsys):
    hio.wav_write(clip, tmp_path / "clip.wav")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variant": "sinc1", "profile": "tiny", "seed": 3}))
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--data", str(tmp_path / "clip.wav"),
                 "--out", str(out), "--steps", "0"]) == 0
    assert _json_line(capsys.readouterr().out)["config"]["steps"] == 0
    assert len(hio.read_csv(out / "loss.csv")) == 1
    assert sorted(p.name for p in out.iterdir()) == ["config.json", "loss.csv", "model.ckpt"]


def test_cli_train_bad_config(tmp_path, clip, capsys):
    hio.wav_write(clip, tmp_path / "clip.wav")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variant": "sinc1", "learning_rate": 1.0}))
    assert main(["train", "--config", str(cfg), "--data", str(tmp_path / "clip.wav"),
                 "--out", str(tmp_path / "run")]) == 2
    assert "learning_rate" in capsys.readouterr().err


def test_run_config_roundtrip():
    cfg = RunConfig(variant="sinc3", profile="tiny", steps=7, seed=9)
    again = RunConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.model_config().channels == 16
