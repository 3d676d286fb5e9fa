"""Command-line pipeline: corpus training, free sampling, query-based
generation through the bit-rate-limited channel, and information-dynamics
analysis.

Every command is a pure function of its inputs, flags and seed; re-running
produces byte-identical outputs. Exit codes: 0 success, 2 input/parse error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import channel, pianoroll, vae, vmo
from .bundle import ModelBundle, load_bundle, save_bundle
from .smf import MidiParseError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _load_corpus_frames(corpus_dir, pitch_lo: int, pitch_hi: int) -> np.ndarray:
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise ValueError(f"corpus directory not found: {corpus_dir}")
    all_frames = []
    for path in sorted(corpus_dir.iterdir()):
        if path.suffix.lower() not in (".mid", ".midi"):
            continue
        roll = pianoroll.parse_midi(path.read_bytes(), pitch_lo, pitch_hi)
        frames = pianoroll.to_frames(roll)
        if frames.shape[0]:
            all_frames.append(frames)
    if not all_frames:
        raise ValueError(f"no parseable MIDI files with full bars in {corpus_dir}")
    return np.vstack(all_frames)


def cmd_train(args) -> int:
    frames = _load_corpus_frames(args.corpus, args.pitch_lo, args.pitch_hi)
    input_dim = frames.shape[1]
    model = vae.init_model((input_dim, args.hidden, args.latent),
                           beta=args.beta, seed=args.seed)
    config = vae.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                             batch_size=args.batch, seed=args.seed)
    model, curve = vae.train(model, frames, config)
    stats_mean, stats_var = vae.marginal_latent_stats(model, frames)
    save_bundle(ModelBundle(model=model, stats_mean=stats_mean, stats_var=stats_var,
                            pitch_lo=args.pitch_lo, pitch_hi=args.pitch_hi),
                args.out)
    loss_path = args.loss_out or str(args.out) + ".loss.csv"
    with open(loss_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "objective_nats"])
        for epoch, value in enumerate(curve):
            writer.writerow([epoch, _fmt(value)])
    print(f"trained on {frames.shape[0]} frames; model -> {args.out}, "
          f"loss curve -> {loss_path}")
    return EXIT_OK


def cmd_sample(args) -> int:
    bundle = load_bundle(args.model)
    rng = np.random.default_rng(args.seed)
    frames = vae.sample_prior(bundle.model, args.bars, rng)
    roll = pianoroll.frames_to_pianoroll(frames, bundle.pitch_lo, bundle.pitch_hi)
    Path(args.out).write_bytes(pianoroll.pianoroll_to_midi(roll))
    print(f"sampled {args.bars} bars -> {args.out}")
    return EXIT_OK


def _transmit_frames(z_e, bundle, mu, logvar, bits, stats_mode, rng):
    """Returns (z_d, allocation rows for the CSV)."""
    latent_dim = bundle.model.latent_dim
    if bits is None or bits >= channel.INFINITE_RATE_BITS * latent_dim:
        rows = None
        if bits is not None:
            alloc = channel.allocate_bits(bundle.stats_var, bits)
            rows = [("all", i, alloc.variances[i], int(alloc.rates[i]),
                     alloc.residual[i]) for i in range(latent_dim)]
        return z_e.copy(), rows

    rows = []
    z_d = np.empty_like(z_e)
    if stats_mode == "marginal":
        alloc = channel.allocate_bits(bundle.stats_var, bits)
        params = channel.ChannelParams(mean=bundle.stats_mean,
                                       variance=bundle.stats_var,
                                       rates=alloc.rates)
        rows = [("all", i, alloc.variances[i], int(alloc.rates[i]),
                 alloc.residual[i]) for i in range(latent_dim)]
        for f in range(z_e.shape[0]):
            z_d[f] = channel.transmit(z_e[f], params, rng)
    else:
        for f in range(z_e.shape[0]):
            variances = np.exp(logvar[f])
            alloc = channel.allocate_bits(variances, bits)
            params = channel.ChannelParams(mean=mu[f], variance=variances,
                                           rates=alloc.rates)
            rows.extend((f, i, alloc.variances[i], int(alloc.rates[i]),
                         alloc.residual[i]) for i in range(latent_dim))
            z_d[f] = channel.transmit(z_e[f], params, rng)
    return z_d, rows


def cmd_query(args) -> int:
    bundle = load_bundle(args.model)
    roll = pianoroll.parse_midi(Path(args.midi).read_bytes(),
                                bundle.pitch_lo, bundle.pitch_hi)
    frames = pianoroll.to_frames(roll)
    if frames.shape[0] == 0:
        raise ValueError("query yields zero full bars")
    mu, logvar = vae.encode_batch(bundle.model, frames)
    rng = np.random.default_rng(args.seed)
    z_e = mu + np.exp(0.5 * logvar) * rng.standard_normal(mu.shape)

    z_d, alloc_rows = _transmit_frames(z_e, bundle, mu, logvar,
                                       args.bits, args.stats, rng)
    out_frames = vae.binarize(vae.decode(bundle.model, z_d))
    out_roll = pianoroll.frames_to_pianoroll(out_frames, bundle.pitch_lo,
                                             bundle.pitch_hi)
    Path(args.out).write_bytes(pianoroll.pianoroll_to_midi(out_roll))

    if alloc_rows is not None:
        alloc_path = args.alloc_out or str(args.out) + ".alloc.csv"
        with open(alloc_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "component", "variance", "rate_bits",
                             "residual"])
            for frame, comp, var, rate, residual in alloc_rows:
                writer.writerow([frame, comp, _fmt(var), rate, _fmt(residual)])
    if args.dump_latents:
        with open(args.dump_latents, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"z{i}" for i in range(z_d.shape[1])])
            for row in z_d:
                writer.writerow([_fmt(v) for v in row])
    print(f"query of {frames.shape[0]} bars -> {args.out}"
          + (f" at {args.bits} bits/frame" if args.bits is not None
             else " at full rate"))
    return EXIT_OK


def _load_ir_frames(path: str):
    """Returns (frames, default distance id) for a MIDI or latent-CSV input."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0] and not _is_number(rows[0][0]):
            rows = rows[1:]
        frames = np.array([[float(v) for v in row] for row in rows])
        return frames, "cosine"
    roll = pianoroll.parse_midi(path.read_bytes())
    bars = pianoroll.to_frames(roll)
    chromas = np.array([pianoroll.chroma(bar, roll.pitch_lo) for bar in bars])
    return chromas, "tonnetz"


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def cmd_ir(args) -> int:
    frames, default_distance = _load_ir_frames(args.input)
    distance = args.distance or default_distance
    if frames.shape[0] < 2:
        raise ValueError("need at least two frames for information-rate analysis")
    thetas = "auto" if args.thetas == "auto" else \
        [float(v) for v in args.thetas.split(",")]
    curve, oracle = vmo.threshold_search(frames, distance, thetas)
    profile = vmo.ir_of_oracle(oracle)
    motifs = vmo.find_motifs(oracle, args.min_len, args.min_occ)

    prefix = args.out_prefix
    with open(prefix + "_ir.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "ir_bits"])
        for pos, value in enumerate(profile.per_frame, start=1):
            writer.writerow([pos, _fmt(value)])
    with open(prefix + "_thresholds.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "total_ir_bits"])
        for theta, total in curve.points:
            writer.writerow([_fmt(theta), _fmt(total)])
    with open(prefix + "_motifs.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["motif_id", "length", "end_position"])
        for motif_id, motif in enumerate(motifs):
            for pos in motif.occurrences:
                writer.writerow([motif_id, motif.length, pos])
    print(f"theta* = {oracle.theta:g}, total IR = {profile.total:g} bits, "
          f"{len(motifs)} motifs -> {prefix}_*.csv")
    return EXIT_OK


def cmd_rd_report(args) -> int:
    bundle = load_bundle(args.model)
    frames = _load_corpus_frames(args.corpus, bundle.pitch_lo, bundle.pitch_hi)
    rng = np.random.default_rng(args.seed)
    report = vae.loss(bundle.model, frames, rng=rng)
    mi, stderr = vae.estimate_mutual_information(
        bundle.model, frames, rng, samples_per_frame=args.samples,
        return_stderr=True)
    violated = mi > report.rate + 3.0 * stderr
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rate_nats", "distortion_nats", "neg_elbo_beta", "beta",
                         "mi_estimate_nats", "mi_stderr", "bound_violated"])
        writer.writerow([_fmt(report.rate), _fmt(report.distortion),
                         _fmt(report.neg_elbo_beta), _fmt(report.beta),
                         _fmt(mi), _fmt(stderr), int(violated)])
    if violated:
        print("warning: mutual-information estimate exceeds the rate "
              "beyond 3 standard errors", file=sys.stderr)
    print(f"rate = {report.rate:g} nats, distortion = {report.distortion:g} nats, "
          f"I_e = {mi:g} +/- {stderr:g} nats -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="improvae",
        description="Bar-level VAE, bit-rate-limited latent channel, and "
                    "variable-Markov-oracle information dynamics.")
    parser.add_argument("--config", help="key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommand_parsers = []

    p = sub.add_parser("train", help="train a model on a MIDI corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", type=int, default=500)
    p.add_argument("--latent", type=int, default=120)
    p.add_argument("--pitch-lo", type=int, default=pianoroll.DEFAULT_PITCH_LO)
    p.add_argument("--pitch-hi", type=int, default=pianoroll.DEFAULT_PITCH_HI)
    p.add_argument("--loss-out", help="loss curve CSV path (default: OUT.loss.csv)")
    p.set_defaults(func=cmd_train)
    parser.subcommand_parsers.append(p)

    p = sub.add_parser("sample", help="free generation from the latent prior")
    p.add_argument("--model", required=True)
    p.add_argument("--bars", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)
    parser.subcommand_parsers.append(p)

    p = sub.add_parser("query", help="reconstruct a query through the channel")
    p.add_argument("--model", required=True)
    p.add_argument("--midi", required=True)
    p.add_argument("--bits", type=int, default=None,
                   help="bit budget per frame; omit for full rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stats", choices=("marginal", "posterior"),
                   default="marginal")
    p.add_argument("--dump-latents", help="CSV path for transmitted latents")
    p.add_argument("--out", required=True)
    p.add_argument("--alloc-out", help="allocation CSV path (default: OUT.alloc.csv)")
    p.set_defaults(func=cmd_query)
    parser.subcommand_parsers.append(p)

    p = sub.add_parser("ir", help="information-rate and motif analysis")
    p.add_argument("--in", dest="input", required=True,
                   help="MIDI file or latent CSV")
    p.add_argument("--distance", choices=vmo.DISTANCE_IDS, default=None,
                   help="default: tonnetz for MIDI, cosine for latent CSV")
    p.add_argument("--thetas", default="auto",
                   help='"auto" or comma-separated threshold list')
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--min-occ", type=int, default=2)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_ir)
    parser.subcommand_parsers.append(p)

    p = sub.add_parser("rd-report", help="rate/distortion/ELBO diagnostics")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=64,
                   help="Monte-Carlo samples per frame for the MI estimate")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rd_report)
    parser.subcommand_parsers.append(p)
    return parser


def _load_config_defaults(path: str) -> dict:
    defaults = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        for cast in (int, float):
            try:
                defaults[key] = cast(raw)
                break
            except ValueError:
                continue
        else:
            defaults[key] = raw
    return defaults


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--config" in argv:
        config_path = argv[argv.index("--config") + 1]
        defaults = _load_config_defaults(config_path)
        for subparser in parser.subcommand_parsers:
            subparser.set_defaults(**{k: v for k, v in defaults.items()
                                      if any(a.dest == k
                                             for a in subparser._actions)})
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (MidiParseError, ValueError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
