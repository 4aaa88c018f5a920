"""Command-line entry point: ``tccbench <eval|stats|split|synth|train|gradcheck>``.

Failures exit with status 2 and a single JSON line on stderr, e.g.
``{"error": "validation", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, dataset, synth
from .errors import TccError


def _lengths(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_eval(args, method_args) -> int:
    spec = bench.resolve(args.method)
    params = spec.parse(method_args)
    config = bench.RunConfig(Path(args.manifest), args.method, params, args.fold,
                             Path(args.out) if args.out else None, args.seed, args.workers)
    table = bench.run_benchmark(config)
    sys.stdout.buffer.write(bench.emit_table(table, args.format))
    return 0


def cmd_stats(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    st = dataset.dataset_statistics(manifest)
    report = {
        "sequences": len(manifest),
        "mean_length": st.mean_length,
        "median_length": st.median_length,
        "length_histogram": {str(k): v for k, v in st.length_histogram.items()},
        "length_chroma_correlation": {
            k: (None if math.isnan(v) else v) for k, v in st.length_chroma_correlation.items()
        },
        "correlation_flags": st.correlation_flags,
    }
    print(json.dumps(report, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "chroma.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "r", "g", "length"])
            for rec, pt in zip(manifest.records, st.chroma_points):
                w.writerow([rec.id, f"{pt.r:.6f}", f"{pt.g:.6f}", rec.length])
        with open(out / "lengths.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["length", "count"])
            for k, v in st.length_histogram.items():
                w.writerow([k, v])
    return 0


def cmd_split(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    if args.from_file:
        manifest = dataset.apply_split(manifest, dataset.read_split_file(args.from_file))
    else:
        manifest = dataset.fixed_split(manifest, args.ratio, args.seed)
    target = Path(args.output or args.manifest)
    dataset.write_manifest(target, manifest)
    counts = {s: len(manifest.fold(s)) for s in dataset.SPLITS}
    print(json.dumps({"manifest": str(target), **counts}))
    return 0


def cmd_synth(args) -> int:
    if args.lengths:
        lengths = _lengths(args.lengths)
    else:
        rng = np.random.default_rng(args.seed)
        lengths = rng.integers(args.min_length, args.max_length + 1, size=args.count).tolist()
    spec = synth.SceneSpec(
        height=args.size, width=args.size, grid=args.grid,
        achromatic_fraction=args.achromatic_fraction, balanced=args.balanced,
        noise=args.noise, drift=args.drift, drift_amount=args.drift_amount,
    )
    out = Path(args.out)
    manifest, _ = synth.generate_dataset(out, lengths, spec, args.seed)
    if args.split_ratio:
        manifest = dataset.fixed_split(manifest, args.split_ratio, args.seed)
    dataset.write_manifest(out / "manifest.jsonl", manifest)
    print(json.dumps({"manifest": str(out / "manifest.jsonl"), "sequences": len(manifest)}))
    return 0


def cmd_train(args) -> int:
    from .net import checkpoint, model, train

    manifest = dataset.read_manifest(args.manifest)
    records = manifest.fold(args.fold)
    if not records:
        raise TccError(f"fold {args.fold!r} is empty")
    data = [(manifest.load_frames(r), r.ground_truth) for r in records]
    config = model.PRESETS[args.preset]()
    hyper = train.TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, seed=args.seed, init_seed=args.seed,
        augment=not args.no_augment, target_error=args.target_error,
    )
    result = train.train(data, config, hyper, progress_every=args.log_every)
    checkpoint.save_checkpoint(args.out, config, result.params)
    errors = train.evaluate(data, config, result.params)
    curve = Path(str(args.out) + ".loss.csv")
    curve.write_text("epoch,loss_deg\n" + "".join(
        f"{i + 1},{v:.6f}\n" for i, v in enumerate(result.epoch_loss)))
    print(json.dumps({
        "checkpoint": str(args.out), "epochs": len(result.epoch_loss),
        "train_mean_error": float(np.mean(errors)), "hyper": hyper.to_dict(),
    }))
    return 0


def cmd_gradcheck(args) -> int:
    from .net import gradcheck, model

    config = model.tiny(branches=args.branches, activation=args.activation)
    checks = gradcheck.check_gradients(
        *gradcheck.random_problem(config, args.length, args.seed), step=args.step
    )
    worst = 0.0
    for c in checks:
        status = "ok" if c.relative_error < args.tol else "FAIL"
        print(f"{status:4s} {c.name:36s} n={c.size:5d} rel={c.relative_error:.3e}")
        worst = max(worst, c.relative_error)
    print(json.dumps({"tensors": len(checks), "max_relative_error": worst, "tolerance": args.tol}))
    return 0 if worst < args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tccbench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="score a method on a manifest fold; method options follow the name")
    e.add_argument("manifest")
    e.add_argument("method", help=f"one of: {', '.join(sorted(bench.REGISTRY))}")
    e.add_argument("--fold", default="test", choices=bench.FOLDS)
    e.add_argument("--out", help="directory for table.md, table.csv and errors.csv")
    e.add_argument("--format", default="markdown", choices=("markdown", "csv"))
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("stats", help="dataset statistics; --out writes plot CSVs")
    s.add_argument("manifest")
    s.add_argument("--out")

    sp = sub.add_parser("split", help="write fixed train/test labels into a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--ratio", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--from-file", help="CSV of id,split rows to adopt instead of shuffling")
    sp.add_argument("--output", help="defaults to rewriting the input manifest")

    sy = sub.add_parser("synth", help="generate a synthetic sequence dataset")
    sy.add_argument("out")
    sy.add_argument("--lengths", help="comma-separated frame counts, one per sequence")
    sy.add_argument("--count", type=int, default=20)
    sy.add_argument("--min-length", type=int, default=3)
    sy.add_argument("--max-length", type=int, default=17)
    sy.add_argument("--size", type=int, default=64)
    sy.add_argument("--grid", type=int, default=4)
    sy.add_argument("--achromatic-fraction", type=float, default=0.25)
    sy.add_argument("--balanced", action="store_true")
    sy.add_argument("--noise", type=float, default=0.0)
    sy.add_argument("--drift", default="constant", choices=synth.DRIFTS)
    sy.add_argument("--drift-amount", type=float, default=0.0)
    sy.add_argument("--split-ratio", type=float, default=0.0)
    sy.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="train the recurrent net; writes a checkpoint")
    t.add_argument("manifest")
    t.add_argument("--out", required=True)
    t.add_argument("--fold", default="train", choices=bench.FOLDS)
    t.add_argument("--preset", default="desk", choices=("desk", "small", "tiny", "model-g"))
    t.add_argument("--epochs", type=int, default=2000)
    t.add_argument("--lr", type=float, default=3e-5)
    t.add_argument("--target-error", type=float)
    t.add_argument("--no-augment", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log-every", type=int, default=0)

    g = sub.add_parser("gradcheck", help="finite-difference check of every parameter tensor")
    g.add_argument("--branches", type=int, default=2, choices=(1, 2))
    g.add_argument("--activation", default="tanh", choices=("tanh", "relu"))
    g.add_argument("--length", type=int, default=3)
    g.add_argument("--step", type=float, default=1e-4)
    g.add_argument("--tol", type=float, default=1e-3)
    g.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if extra and args.command != "eval":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    handlers = {
        "stats": cmd_stats, "split": cmd_split, "synth": cmd_synth,
        "train": cmd_train, "gradcheck": cmd_gradcheck,
    }
    try:
        if args.command == "eval":
            return cmd_eval(args, extra)
        return handlers[args.command](args)
    except TccError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
