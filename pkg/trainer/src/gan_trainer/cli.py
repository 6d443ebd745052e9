"""Command line for the trainer: pretrain-cda, train, generate."""
from __future__ import annotations

import argparse
import sys


from . import cda_net as cda
from . import data, generate as gen, train as tr
from .config import CdaConfig, GanConfig


def _cmd_pretrain_cda(args) -> int:
    bounds = data.read_sidecar(args.stream)
    pairs = data.load_pairs(args.pairs, bounds)
    net, report = cda.pretrain_cda(
        pairs, bounds, CdaConfig(epochs=args.epochs, seed=args.seed)
    )
    cda.save_cda(net, args.out)
    print(
        f"pretrained on {len(pairs.inputs)} pairs: held-out mse {report.mse:.2e}, "
        f"exact {report.exact_accuracy:.3f} "
        f"(recoverable {report.recoverable_accuracy:.3f} @ {report.recoverable_fraction:.2f}, "
        f"non-recoverable {report.nonrecoverable_accuracy:.3f}) -> {args.out}"
    )
    return 0


def _cmd_train(args) -> int:
    feats, buckets, _bounds = data.load_stream(args.stream)
    net = cda.load_cda(args.cda)
    cfg = GanConfig(
        iterations=args.iterations,
        critic_steps_per_iter=args.critic_steps,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    result = tr.train(feats, buckets, net, cfg)
    tr.save_checkpoint(result, cfg, args.out)
    tr.write_log(result.log, args.log)
    last = result.log[-1]
    print(
        f"trained {cfg.iterations} iterations x {cfg.critic_steps_per_iter} critic steps; "
        f"final critic estimate {last.critic_wasserstein:.4f} -> {args.out}"
    )
    return 0


def _cmd_generate(args) -> int:
    feats, _buckets, bounds = data.load_stream(args.seed_stream)
    generator = tr.load_generator(args.checkpoint)
    net = cda.load_cda(args.cda)
    k = args.k
    rows = gen.generate_rows(generator, net, feats[-k:], bounds, args.n, seed=args.seed)
    gen.write_generated_stream(rows, args.seed_stream, args.out)
    print(f"generated {len(rows)} observations -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gan-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("pretrain-cda", help="fit the book-update surrogate")
    p.add_argument("--pairs", required=True)
    p.add_argument("--stream", required=True, help="stream file whose sidecar carries bounds")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_pretrain_cda)

    p = sub.add_parser("train", help="run WGAN-GP training")
    p.add_argument("--stream", required=True)
    p.add_argument("--cda", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--iterations", type=int, default=30)
    p.add_argument("--critic-steps", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("generate", help="autoregressively generate a stream file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--cda", required=True)
    p.add_argument("--seed-stream", dest="seed_stream", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)
    return parser


def dispatch(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
