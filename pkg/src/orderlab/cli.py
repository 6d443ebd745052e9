"""Command-line pipelines over the stream laboratory.

Every subcommand is deterministic given (inputs, config, seed) and emits a
run manifest recording input/output hashes: <out>.manifest.json next to file
outputs, manifest.json inside directory outputs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import (
    cda_surrogate_data,
    evaluation,
    history_sampler,
    markov_baseline,
    stream_io,
    synthetic_simulator,
)
from .matching_engine import replay


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(
    subcommand: str,
    args: argparse.Namespace,
    inputs: list[Path],
    outputs: list[Path],
    started: float,
) -> None:
    out_paths = []
    for p in outputs:
        if p.is_dir():
            out_paths.extend(sorted(q for q in p.rglob("*") if q.is_file() and q.name != "manifest.json"))
        elif p.exists():
            out_paths.append(p)
    manifest = {
        "subcommand": subcommand,
        "config": getattr(args, "config", None),
        "seed": getattr(args, "seed", None),
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "outputs": {str(p): _sha256(p) for p in out_paths},
        "duration_s": round(time.monotonic() - started, 6),
    }
    primary = outputs[0]
    target = primary / "manifest.json" if primary.is_dir() else Path(str(primary) + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _stream_inputs(path: Path) -> list[Path]:
    return [path, stream_io.sidecar_path(path)]


def _cmd_simulate(args) -> int:
    cfg_dict = {}
    if args.config:
        cfg_dict = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    cfg = synthetic_simulator.sim_config_from_dict(cfg_dict)
    stream = synthetic_simulator.simulate(cfg)
    stream_io.write_stream(stream, args.out)
    print(f"simulated {len(stream)} orders -> {args.out}")
    return 0


def _cmd_replay(args) -> int:
    raw = stream_io.read_stream(args.inp)
    stream = replay([obs.order for obs in raw.observations], raw.config)
    stream_io.write_stream(stream, args.out)
    print(f"replayed {len(stream)} orders -> {args.out}")
    return 0


def _cmd_preprocess(args) -> int:
    raw = stream_io.read_stream(args.inp)
    result = stream_io.preprocess([obs.order for obs in raw.observations], raw.config)
    stream_io.write_stream(result.stream, args.out)
    print(
        f"kept {len(result.stream)} of {len(raw)} orders "
        f"(dropped {result.dropped_orders} orders, {result.dropped_cancels} cancels) -> {args.out}"
    )
    return 0


def _cmd_fit(args) -> int:
    stream = stream_io.read_stream(args.inp)
    model = markov_baseline.fit(stream, k_eff=args.k_eff, alpha=args.alpha, gamma=args.gamma)
    model.save(args.out)
    print(f"fit order-{args.k_eff} model on {len(stream)} observations -> {args.out}")
    return 0


def _cmd_generate(args) -> int:
    model = markov_baseline.MarkovModel.load(args.model)
    seed_stream = stream_io.read_stream(args.seed_stream)
    history = seed_stream.observations
    rng = np.random.default_rng(args.seed)
    stream = markov_baseline.generate(model, history, args.n, seed_stream.config, rng)
    stream_io.write_stream(stream, args.out)
    print(f"generated {len(stream)} observations -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    stream = stream_io.read_stream(args.inp)
    cfg = evaluation.CompareConfig(intensity_chunk_s=args.chunk_s)
    evaluation.evaluate_single(stream, cfg, out_dir=args.out)
    print(f"evaluated {len(stream)} observations -> {args.out}")
    return 0


def _cmd_compare(args) -> int:
    ref = stream_io.read_stream(args.ref)
    cand = stream_io.read_stream(args.cand)
    cfg = evaluation.CompareConfig(intensity_chunk_s=args.chunk_s)
    report = evaluation.compare(ref, cand, cfg, out_dir=args.out)
    pooled = {k: round(v, 6) for k, v in report.ks.items() if "/" not in k}
    print(f"compared streams; pooled KS {pooled} -> {args.out}")
    return 0


def _cmd_export_cda(args) -> int:
    stream = stream_io.read_stream(args.inp)
    pairs = cda_surrogate_data.export_pairs(stream)
    cda_surrogate_data.write_pairs(pairs, args.out)
    n_rec = sum(p.recoverable for p in pairs)
    print(f"exported {len(pairs)} pairs ({n_rec} recoverable) -> {args.out}")
    return 0


def _cmd_sample_batches(args) -> int:
    stream = stream_io.read_stream(args.inp)
    rng = np.random.default_rng(args.seed)
    min_gap = args.min_gap if args.min_gap is not None else args.k + 1
    history_sampler.export_batches(
        stream, args.out, args.batches, args.batch_size, min_gap, args.k, rng
    )
    print(f"exported {args.batches} batches of {args.batch_size} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orderlab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="run the synthetic market")
    p.add_argument("--config", help="JSON simulator config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate, inputs=lambda a: [Path(a.config)] if a.config else [])

    p = sub.add_parser("replay", help="recompute quotes by exact replay")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_replay, inputs=lambda a: _stream_inputs(Path(a.inp)))

    p = sub.add_parser("preprocess", help="ten-level relevance filter")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_preprocess, inputs=lambda a: _stream_inputs(Path(a.inp)))

    p = sub.add_parser("fit", help="fit the Markov baseline")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k-eff", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=5.0)
    p.set_defaults(func=_cmd_fit, inputs=lambda a: _stream_inputs(Path(a.inp)))

    p = sub.add_parser("generate", help="generate from a fitted baseline")
    p.add_argument("--model", required=True)
    p.add_argument("--seed-stream", dest="seed_stream", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(
        func=_cmd_generate,
        inputs=lambda a: [Path(a.model)] + _stream_inputs(Path(a.seed_stream)),
    )

    p = sub.add_parser("evaluate", help="statistics for a single stream")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--chunk-s", type=float, default=100.0)
    p.set_defaults(func=_cmd_evaluate, inputs=lambda a: _stream_inputs(Path(a.inp)))

    p = sub.add_parser("compare", help="reference/candidate statistic report")
    p.add_argument("--ref", required=True)
    p.add_argument("--cand", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--chunk-s", type=float, default=100.0)
    p.set_defaults(
        func=_cmd_compare,
        inputs=lambda a: _stream_inputs(Path(a.ref)) + _stream_inputs(Path(a.cand)),
    )

    p = sub.add_parser("export-cda", help="export book-update training pairs")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_cda, inputs=lambda a: _stream_inputs(Path(a.inp)))

    p = sub.add_parser("sample-batches", help="export spaced training batches")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--batches", type=int, required=True)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--min-gap", type=int, default=None)
    p.add_argument("--k", type=int, default=history_sampler.DEFAULT_K)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample_batches, inputs=lambda a: _stream_inputs(Path(a.inp)))

    return parser


def dispatch(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        code = args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        out = Path(args.out)
        _write_manifest(args.subcommand, args, args.inputs(args), [out], started)
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
