"""Table-1 style comparison of every non-learned method on a synthetic suite.

The suite mixes sequences whose gray content is visible only in the early
viewfinder frames with slowly drifting illuminants, so temporal methods have
something to gain over the shot frame alone.

    python scripts/synthetic_benchmark.py --out runs/synthetic --count 40
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from tccbench import bench, dataset, synth
from tccbench.bench import ResultsTable, RunConfig

METHODS = [
    ("white-patch", {}),
    ("gray-world", {}),
    ("shades-of-gray", {"p": 4.0}),
    ("general-gray-world", {}),
    ("grey-edge-1", {}),
    ("grey-edge-2", {}),
    ("grayness-index", {}),
    ("t-gi", {}),
    ("kalman-smooth", {"base": "gray-world"}),
    ("kalman-smooth", {"base": "grayness-index"}),
    ("moving-average", {"base": "grayness-index"}),
]


def build_suite(root: Path, count: int, seed: int) -> Path:
    rng = np.random.default_rng(seed)
    lengths = rng.integers(3, 18, size=count).tolist()
    spec = synth.SceneSpec(gray_frames=(0, 1), hue_spread=0.15, noise=0.003,
                           drift="walk", drift_amount=0.005)
    manifest, _ = synth.generate_dataset(root, lengths, spec, seed)
    manifest = dataset.fixed_split(manifest, 0.5, seed)
    path = root / "manifest.jsonl"
    dataset.write_manifest(path, manifest)
    return path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/synthetic")
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fold", default="test", choices=bench.FOLDS)
    args = ap.parse_args()

    out = Path(args.out)
    manifest = build_suite(out / "data", args.count, args.seed)
    rows = []
    for name, params in METHODS:
        spec = bench.resolve(name)
        table = bench.run_benchmark(RunConfig(manifest, name, {**spec.defaults(), **params}, args.fold))
        rows.extend(table.rows)
    table = ResultsTable(rows)
    (out / "table.md").write_bytes(bench.emit_table(table, "markdown"))
    (out / "table.csv").write_bytes(bench.emit_table(table, "csv"))
    sys.stdout.buffer.write(bench.emit_table(table, "markdown"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
