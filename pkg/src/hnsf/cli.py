"""Command-line entry point: extract, train, synth, gradcheck, filter-inspect, mvf.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import dsp
from . import io as hio
from .config import RunConfig

log = logging.getLogger("hnsf")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit_config(command, cfg: RunConfig, **extra):
    record = {"command": command, "config": cfg.to_dict()}
    record.update(extra)
    print(json.dumps(record, sort_keys=True), flush=True)


def _extract_one(job):
    wav_path, out_path = job
    feats = dsp.extract_features(hio.wav_read(wav_path))
    hio.write_features(feats, out_path)
    return out_path, feats.n_frames, int(feats.voiced.sum())


def cmd_extract(args):
    _emit_config("extract", RunConfig(), wav=args.wav, out=args.out)
    if len(args.wav) == 1:
        jobs = [(args.wav[0], args.out)]
    else:
        os.makedirs(args.out, exist_ok=True)
        jobs = [(w, os.path.join(args.out, os.path.splitext(os.path.basename(w))[0] + ".f32"))
                for w in args.wav]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = list(pool.map(_extract_one, jobs))
    else:
        done = [_extract_one(j) for j in jobs]
    for path, frames, voiced in done:
        print(f"wrote {path}: {frames} frames, {voiced} voiced")
    return EXIT_OK


def _load_dataset(data):
    from .train import Utterance

    if os.path.isdir(data):
        wavs = sorted(os.path.join(data, f) for f in os.listdir(data) if f.endswith(".wav"))
    else:
        wavs = [data]
    if not wavs:
        raise FileNotFoundError(f"no .wav files under {data}")
    utts = []
    for w in wavs:
        x = hio.wav_read(w)
        feat_path = os.path.splitext(w)[0] + ".f32"
        feats = hio.read_features(feat_path) if os.path.exists(feat_path) \
            else dsp.extract_features(x)
        utts.append(Utterance(x, feats))
    return utts


def cmd_train(args):
    from .train import train

    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.steps is not None:
        cfg.steps = args.steps
    _emit_config("train", cfg, data=args.data, out=args.out)
    dataset = _load_dataset(args.data)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.json"), "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
    res = train(dataset, cfg, out_dir=args.out)
    hio.write_loss_curve(res.curve, os.path.join(args.out, "loss.csv"))
    first, last = res.curve[0][-1], res.curve[-1][-1]
    print(f"trained {cfg.steps} steps: loss {first:.4f} -> {last:.4f}; "
          f"checkpoint {res.checkpoint}")
    return EXIT_OK


def _config_from_meta(meta):
    if "run" in meta:
        return RunConfig.from_dict(meta["run"])
    return RunConfig(variant=meta["model"]["variant"])


def cmd_synth(args):
    from .train import load_checkpoint, synthesize

    model, _, meta = load_checkpoint(args.ckpt, variant=args.variant)
    _emit_config("synth", _config_from_meta(meta), ckpt=args.ckpt, seed=args.seed)
    feats = hio.read_features(args.feats)
    y = synthesize(model, feats, seed=args.seed)
    hio.wav_write(y, args.out)
    print(f"wrote {args.out}: {y.size} samples ({y.size / dsp.SAMPLE_RATE:.3f} s)")
    return EXIT_OK


def cmd_mvf(args):
    from .train import load_checkpoint, mvf_trajectory

    model, _, meta = load_checkpoint(args.ckpt)
    _emit_config("mvf", _config_from_meta(meta), ckpt=args.ckpt)
    v, r, fc = mvf_trajectory(model, hio.read_features(args.feats))
    hio.write_mvf_csv(v, r, fc, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_gradcheck(args):
    from . import checks

    _emit_config("gradcheck", RunConfig(), M=args.M, fc=args.fc, eps=args.eps)
    results = checks.run_all(M=args.M, fcs=tuple(args.fc), eps=args.eps)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


def cmd_filter_inspect(args):
    _emit_config("filter-inspect", RunConfig(), fc=args.fc, M=args.M)
    hio.write_filter_response(args.fc, args.M, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="hnsf", description="h-NSF vocoder with a trainable maximum voice frequency")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("extract", help="WAV -> F0 + log-mel feature file")
    s.add_argument("--wav", nargs="+", required=True)
    s.add_argument("--out", required=True, help="feature file, or directory for several WAVs")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train", help="train a model")
    s.add_argument("--config", help="RunConfig JSON (defaults if omitted)")
    s.add_argument("--data", required=True, help="WAV file or directory of WAVs")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--steps", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("synth", help="generate a waveform from features")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--feats", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--variant", choices=("base", "sinc1", "sinc2", "sinc3"))
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("gradcheck", help="closed-form vs finite-difference gradients")
    s.add_argument("--M", type=int, default=31)
    s.add_argument("--fc", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9])
    s.add_argument("--eps", type=float, default=1e-4)
    s.set_defaults(func=cmd_gradcheck)

    s = sub.add_parser("filter-inspect", help="CSV magnitude response of the designed filters")
    s.add_argument("--fc", type=float, required=True)
    s.add_argument("--M", type=int, default=31)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_filter_inspect)

    s = sub.add_parser("mvf", help="export the predicted cutoff trajectory as CSV")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--feats", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mvf)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
