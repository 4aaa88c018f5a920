"""Repeat the overfit run over init and data seeds.

Reports, per seed pair, the epochs needed, the final training error and how
often the window-50 smoothed loss went up. Takes roughly 15 s per run.

    python scripts/overfit_sweep.py --grid 16 --init-seeds 0 1 2 --data-seeds 1 2 3
"""

import argparse
import itertools

import numpy as np

from overfit import run
from tccbench.net.train import smooth


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=16)
    ap.add_argument("--init-seeds", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--data-seeds", type=int, nargs="+", default=[1, 2])
    args = ap.parse_args()

    print("init data epochs error_deg rises max_rise")
    clean = 0
    pairs = list(itertools.product(args.init_seeds, args.data_seeds))
    for init_seed, data_seed in pairs:
        _, _, result, errors = run(init_seed, data_seed, args.grid)
        d = np.diff(smooth(result.epoch_loss, 50))
        rises = int(np.sum(d > 0))
        clean += rises == 0 and np.mean(errors) < 0.5
        max_rise = float(d.max()) if d.size else 0.0
        print(f"{init_seed:4d} {data_seed:4d} {len(result.epoch_loss):6d} {np.mean(errors):9.3f} "
              f"{rises:5d} {max_rise:8.4f}")
    print(f"{clean}/{len(pairs)} runs under 0.5 deg with a non-increasing smoothed curve")


if __name__ == "__main__":
    main()
