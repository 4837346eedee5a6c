"""Full-size pipeline (50x50 grid, 10^4 particles): adjoint solve, then controlled and free runs.

    python3 scripts/full_scale_run.py --out runs/full --workers 4
"""

import argparse
from pathlib import Path

from kinetic_feedback.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/full"))
    ap.add_argument("--config", help="config file (published defaults if omitted)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    common = ["--seed", str(args.seed), "--workers", str(args.workers)]
    if args.config:
        common += ["--config", args.config]
    steps = [
        ["solve-adjoint", "--out", str(out / "u.kcf"), "--q-dir", str(out / "q_tilde"), *common],
        ["simulate", "--report", str(out / "free.txt"), "--hist-dir", str(out / "hist_free"),
         *common],
        ["simulate", "--control", str(out / "u.kcf"), "--report", str(out / "controlled.txt"),
         "--hist-dir", str(out / "hist_controlled"), *common],
        ["average-control", "--in", str(out / "u.kcf"), "--out", str(out / "ubar.kcf"),
         "--seed", str(args.seed)],
        ["emit-plots", "--in", str(out / "u.kcf"), "--out", str(out / "plots"), *common],
    ]
    for argv in steps:
        print("kinetic-feedback", " ".join(argv))
        code = cli(argv)
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
