"""Run the 3-agent demo system under all four kernels and render charts.

Writes one trajectory CSV, one metrics CSV, and one SVG per kernel into
the output directory (default results/toy).
"""
import argparse
import sys
from pathlib import Path

from odyn.cli import main as cli_main


def run(out_dir: str, seed: int) -> int:
    out = Path(out_dir)
    code = cli_main(["toy", "--out", str(out), "--seed", str(seed)])
    if code != 0:
        return code
    for name in ("grand-l", "grand++-l", "graphcon-tran", "bimp"):
        code = cli_main([
            "plot", "--in", str(out / f"{name}.csv"),
            "--out", str(out / f"{name}.svg"), "--title", name,
        ]) or cli_main([
            "plot", "--in", str(out / f"{name}-metrics.csv"),
            "--out", str(out / f"{name}-metrics.svg"), "--title", f"{name} metrics",
        ])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/toy")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sys.exit(run(args.out, args.seed))
