"""Memorize four synthetic sequences with the small two-branch net.

Uses the training recipe (RMSprop, batch 1, rotation / crop / flip
augmentation) at ten times the reference learning rate, stopping once the
clean training error drops below --target. Writes the per-epoch loss curve,
its window-50 moving average and the final checkpoint.

    python scripts/overfit.py --out runs/overfit
"""

import argparse
import json
from pathlib import Path

import numpy as np

from tccbench import synth
from tccbench.net import checkpoint, model
from tccbench.net.train import REFERENCE_LEARNING_RATE, TrainConfig, evaluate, smooth, train


def overfit_set(data_seed: int, grid: int = 16):
    rng = np.random.default_rng(data_seed)
    spec = synth.SceneSpec(height=32, width=32, grid=grid)
    data = []
    for i, length in enumerate([3, 4, 5, 3]):
        light = synth.sample_illuminant(rng)
        _, frames = synth.generate_synthetic_sequence(spec, light, length, 100 * data_seed + i)
        data.append((frames, light))
    return data


def run(init_seed: int, data_seed: int, grid: int = 16, epochs: int = 500, target: float = 0.4,
        lr_scale: float = 10.0):
    config = model.small()
    hyper = TrainConfig(learning_rate=lr_scale * REFERENCE_LEARNING_RATE, epochs=epochs,
                        seed=init_seed, init_seed=init_seed, target_error=target)
    data = overfit_set(data_seed, grid)
    result = train(data, config, hyper)
    errors = evaluate(data, config, result.params)
    return config, hyper, result, errors


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/overfit")
    ap.add_argument("--init-seed", type=int, default=0)
    ap.add_argument("--data-seed", type=int, default=1)
    ap.add_argument("--grid", type=int, default=16)
    ap.add_argument("--epochs", type=int, default=500)
    ap.add_argument("--target", type=float, default=0.4)
    args = ap.parse_args()

    config, hyper, result, errors = run(args.init_seed, args.data_seed, args.grid, args.epochs, args.target)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    smoothed = smooth(result.epoch_loss, 50)
    with open(out / "loss.csv", "w") as fh:
        fh.write("epoch,loss_deg,train_error_deg\n")
        for i, loss in enumerate(result.epoch_loss):
            fh.write(f"{i + 1},{loss:.6f},{result.train_error[i]:.6f}\n")
    np.savetxt(out / "loss_smoothed.csv", smoothed, fmt="%.6f", header="loss_deg_window50", comments="")
    checkpoint.save_checkpoint(out / "net.bin", config, result.params)
    summary = {
        "epochs": len(result.epoch_loss),
        "stopped_early": result.stopped_early,
        "train_mean_error_deg": float(np.mean(errors)),
        "smoothed_increases": int(np.sum(np.diff(smoothed) > 0)),
        "hyper": hyper.to_dict(),
        "config": config.to_dict(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps({k: summary[k] for k in list(summary)[:4]}))


if __name__ == "__main__":
    main()
