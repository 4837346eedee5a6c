"""Desk-scale stabilization run: uniform and Gaussian clouds, with and without control.

    python3 scripts/desk_experiment.py --seed 0 --characteristics forward-stream reversed
"""

import argparse
from pathlib import Path

from kinetic_feedback.experiment import desk_config, stabilization_experiment
from kinetic_feedback.io import emit_quiver, write_control


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--characteristics", nargs="+", default=["forward-stream"],
                    choices=["forward-stream", "reversed"])
    ap.add_argument("--out", type=Path, help="write controls and quiver tables here")
    args = ap.parse_args()

    for mode in args.characteristics:
        cfg = desk_config(seed=args.seed, workers=args.workers, adjoint_characteristics=mode)
        result = stabilization_experiment(cfg)
        print(f"== adjoint characteristics: {mode}")
        print(result.to_text())
        if args.out:
            out = args.out / mode
            out.mkdir(parents=True, exist_ok=True)
            write_control(out / "u.kcf", result.adjoint.control)
            emit_quiver(out / "quiver_ubar.csv", result.adjoint.control, cfg.grid())


if __name__ == "__main__":
    main()
