"""Command-line front end.

Every subcommand prints (or writes with ``--output``) one JSON object carrying
``toolkit_version`` and ``config_hash``; ``created`` is added unless
``--no-meta`` is given. Exit codes: 0 success, 1 bad flags or invalid input,
2 I/O or numeric failure. Errors go to stderr only.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .activations import GRADCHECK_OPS, gradient_check
from .audio_io import Waveform, default_config, load_config, read_wav, write_wav
from .dumps import read_dump, write_dump
from .envelope import MODES, DEFAULT_ORDER, extract_envelope
from .errors import ValidationError, VocodeKitError
from .losses import LossWeights, total_losses
from .metrics import (
    embedding_stats,
    evaluate_pair,
    frechet_distance,
    length_consistency,
    summarize,
    write_summary_csv,
)
from .netgraph import (
    COMBINATIONS,
    WeightBundle,
    build_discriminators,
    build_generator,
    build_med,
    build_mpd,
    build_mrd,
    build_msd,
    count_parameters,
    ensemble_forward,
    generator_forward,
    load_bundle,
    random_init,
)
from .spectral import StftPlan, log_magnitude, mel_spectrogram, stft


class UsageError(ValidationError):
    """Bad command-line flags."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _config(args):
    return load_config(args.config) if args.config else default_config()


def _emit(args, cfg, payload: dict) -> None:
    doc = {"toolkit_version": __version__, "config_hash": cfg.fingerprint(), **payload}
    if not args.no_meta:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _weights(specs, args) -> WeightBundle:
    if args.weights:
        bundles = [load_bundle(stem) for stem in args.weights]
        bundle = bundles[0]
        for other in bundles[1:]:
            bundle = bundle.merged(other)
        return bundle
    bundle = None
    for spec in specs:
        part = random_init(spec, args.seed)
        bundle = part if bundle is None else bundle.merged(part)
    return bundle


def cmd_envelope(args) -> None:
    cfg = _config(args)
    w = read_wav(args.input)
    env = extract_envelope(w, args.mode, args.order)
    if args.out_audio:
        if str(args.out_audio).endswith(".wav"):
            write_wav(env, args.out_audio)
        else:
            write_dump(args.out_audio, env.samples, kind="envelope", mode=int(args.mode),
                       sample_rate=env.sample_rate)
    x = env.samples
    _emit(args, cfg, {"command": "envelope", "mode": int(args.mode), "order": args.order,
                      "samples": int(x.size), "sample_rate": env.sample_rate,
                      "min": float(x.min()), "max": float(x.max()), "mean": float(x.mean()),
                      "written": args.out_audio})


def cmd_spectrogram(args) -> None:
    cfg = _config(args)
    w = read_wav(args.input)
    if args.kind == "mel":
        values = mel_spectrogram(w, cfg).values
        header = {"kind": "mel", "hop": cfg.hop_size}
    else:
        triple = args.resolution or [cfg.n_fft, cfg.hop_size, cfg.win_size]
        spec = stft(w, StftPlan.from_triple(triple))
        if args.kind == "log":
            spec = log_magnitude(spec)
        values = spec.values
        header = {"kind": args.kind, "resolution": list(triple), "hop": triple[1]}
    if args.dump:
        write_dump(args.dump, values, sample_rate=w.sample_rate, **header)
    _emit(args, cfg, {"command": "spectrogram", **header, "rows": int(values.shape[0]),
                      "frames": int(values.shape[1]), "written": args.dump})


def cmd_synth(args) -> None:
    cfg = _config(args)
    if (args.mel is None) == (args.input is None):
        raise UsageError("synth: give exactly one of --mel or --input")
    if args.mel:
        mel, _ = read_dump(args.mel)
    else:
        mel = mel_spectrogram(read_wav(args.input), cfg).values
    spec = build_generator(cfg)
    weights = _weights([spec], args)
    out = generator_forward(spec, weights, mel, cfg.sampling_rate)
    if args.wav:
        write_wav(out, args.wav, encoding=args.encoding)
    report = length_consistency(mel.shape[1], len(out), cfg.hop_size, cfg.sampling_rate)
    _emit(args, cfg, {"command": "synth", "frames": int(mel.shape[1]), "samples": len(out),
                      "length": report.to_dict(), "written": args.wav,
                      "weights": args.weights or f"random_init(seed={args.seed})"})


def cmd_loss(args) -> None:
    cfg = _config(args)
    real = read_wav(args.real)
    gen = read_wav(args.gen)
    specs = build_discriminators(cfg, args.disc)
    weights = _weights(specs, args)
    real_out = ensemble_forward(specs, weights, real)
    gen_out = ensemble_forward(specs, weights, gen)
    lw = LossWeights(args.lambda_fm, args.lambda_mel)
    breakdown = total_losses(real_out, gen_out, real, gen, cfg, lw)
    _emit(args, cfg, {"command": "loss", "disc": args.disc, "k": len(real_out),
                      "losses": breakdown.to_dict(),
                      "weights": args.weights or f"random_init(seed={args.seed})"})


def _wav_list(path) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        return sorted(p.glob("*.wav"))
    if not p.exists():
        raise FileNotFoundError(f"no such file or directory: {p}")
    return [p]


def _pairs(ref, gen) -> list[tuple[Path, Path]]:
    refs, gens = _wav_list(ref), _wav_list(gen)
    if len(refs) == 1 and len(gens) == 1:
        return [(refs[0], gens[0])]
    by_name = {g.name: g for g in gens}
    pairs = [(r, by_name[r.name]) for r in refs if r.name in by_name]
    if not pairs:
        raise ValidationError("no reference/generated files share a name")
    return pairs


def _evaluate(job):
    ref_path, gen_path, cfg, fad = job
    return evaluate_pair(read_wav(ref_path), read_wav(gen_path), cfg, fad,
                         {"ref": Path(ref_path).name, "gen": Path(gen_path).name})


def cmd_metrics(args) -> None:
    cfg = _config(args)
    if (args.embeddings_ref is None) != (args.embeddings_gen is None):
        raise UsageError("metrics: --embeddings-ref and --embeddings-gen go together")
    fad = None
    if args.embeddings_ref:
        fad = frechet_distance(embedding_stats(read_dump(args.embeddings_ref)[0]),
                               embedding_stats(read_dump(args.embeddings_gen)[0]))
    jobs = [(r, g, cfg, fad) for r, g in _pairs(args.ref, args.gen)]
    workers = args.jobs or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            reports = list(pool.map(_evaluate, jobs))
    else:
        reports = [_evaluate(j) for j in jobs]
    summary = summarize(reports)
    write_summary_csv(args.csv, summary)
    _emit(args, cfg, {"command": "metrics", "reports": [r.to_dict() for r in reports],
                      "summary": summary, "csv": str(args.csv)})


def cmd_gradcheck(args) -> None:
    cfg = _config(args)
    result = gradient_check(args.op, args.n, args.seed)
    result["pass"] = result["max_rel_err"] < 1e-6 and result.get("derivative_zero_residual", 0) < 1e-9
    _emit(args, cfg, {"command": "gradcheck", **result})


NETS = {"generator": build_generator, "med": build_med, "mrd": build_mrd, "mpd": build_mpd,
        "msd": build_msd}


def cmd_paramcount(args) -> None:
    cfg = _config(args)
    counts = {name: count_parameters(build(cfg)) for name, build in NETS.items()}
    counts["total"] = counts["generator"] + counts["med"] + counts["mrd"]
    payload = {"command": "paramcount", "net": args.net}
    if args.net == "all":
        payload["parameters"] = counts
    else:
        payload["parameters"] = counts[args.net]
        payload["millions"] = round(counts[args.net] / 1e6, 2)
    _emit(args, cfg, payload)


def cmd_lencheck(args) -> None:
    cfg = _config(args)
    frames = args.mel_frames
    if args.mel:
        frames = read_dump(args.mel)[0].shape[1]
    wav_len = args.wav_len
    if args.wav:
        wav_len = len(read_wav(args.wav))
    if frames is None or wav_len is None:
        raise UsageError("lencheck: need --mel-frames/--mel and --wav-len/--wav")
    hop = args.hop or cfg.hop_size
    report = length_consistency(frames, wav_len, hop, args.sr or cfg.sampling_rate)
    _emit(args, cfg, {"command": "lencheck", **report.to_dict()})


def _resolution(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("resolution is n_fft,hop,win") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("resolution is n_fft,hop,win")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config (default: packaged config_v1)")
    common.add_argument("--output", help="write the JSON result here instead of stdout")
    common.add_argument("--no-meta", action="store_true", help="omit the creation timestamp")

    weights = _Parser(add_help=False)
    weights.add_argument("--weights", nargs="+", metavar="STEM",
                         help="weight bundle stem(s); merged in order")
    weights.add_argument("--seed", type=int, default=0,
                         help="seed for random weights when --weights is absent")

    parser = _Parser(prog="vocodekit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vocodekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("envelope", parents=[common], help="extract one envelope mode")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", type=int, required=True, choices=[int(m) for m in MODES])
    p.add_argument("--order", type=int, default=DEFAULT_ORDER)
    p.add_argument("--out-audio", help=".wav (float32) or float32 dump path")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("spectrogram", parents=[common], help="mel, linear or log spectrogram")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["mel", "linear", "log"], default="mel")
    p.add_argument("--resolution", type=_resolution, help="n_fft,hop,win for linear/log")
    p.add_argument("--dump", help="float32 dump path for the matrix")
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("synth", parents=[common, weights], help="generator forward pass")
    p.add_argument("--mel", help="mel dump (mels x frames)")
    p.add_argument("--input", help="WAV to analyse and resynthesize")
    p.add_argument("--wav", help="output WAV path")
    p.add_argument("--encoding", choices=["float32", "pcm16"], default="float32")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("loss", parents=[common, weights], help="training objective on a pair")
    p.add_argument("--real", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--disc", choices=list(COMBINATIONS), default="med+mrd")
    p.add_argument("--lambda-fm", type=float, default=LossWeights.lambda_fm)
    p.add_argument("--lambda-mel", type=float, default=LossWeights.lambda_mel)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("metrics", parents=[common], help="objective metrics for WAV pairs")
    p.add_argument("--ref", required=True, help="reference WAV or directory")
    p.add_argument("--gen", required=True, help="generated WAV or directory")
    p.add_argument("--embeddings-ref", help="n x d embedding dump for FAD")
    p.add_argument("--embeddings-gen", help="n x d embedding dump for FAD")
    p.add_argument("--csv", default="metrics_summary.csv", help="summary CSV path")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gradcheck", parents=[common], help="activation derivatives vs finite differences")
    p.add_argument("--op", choices=GRADCHECK_OPS, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("paramcount", parents=[common], help="parameter counts from a config")
    p.add_argument("--net", choices=list(NETS) + ["total", "all"], default="all")
    p.set_defaults(func=cmd_paramcount)

    p = sub.add_parser("lencheck", parents=[common], help="mel frames vs waveform length")
    p.add_argument("--mel-frames", type=int)
    p.add_argument("--mel", help="mel dump to take the frame count from")
    p.add_argument("--wav-len", type=int)
    p.add_argument("--wav", help="WAV to take the length from")
    p.add_argument("--hop", type=int, help="default: config hop_size")
    p.add_argument("--sr", type=int, help="default: config sampling_rate")
    p.set_defaults(func=cmd_lencheck)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "jobs", None) is not None and args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VocodeKitError, OSError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
