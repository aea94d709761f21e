"""Sweep the attention parameter and render the pitchfork diagram.

The symmetric diagram (zero input) and its unfolding under a positive
input are written side by side into the output directory.
"""
import argparse
import sys
from pathlib import Path

from odyn.cli import main as cli_main


def run(out_dir: str, d: float, alpha: float) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for label, b in (("pitchfork", 0.0), ("unfolded", 0.05)):
        csv = out / f"{label}.csv"
        code = cli_main([
            "bifurcation", "--d", str(d), "--alpha", str(alpha),
            "--u-min", "0.05", "--u-max", "0.6", "--points", "180",
            "--b", str(b), "--out", str(csv),
        ]) or cli_main([
            "plot", "--in", str(csv), "--out", str(out / f"{label}.svg"),
            "--title", f"{label} (d={d}, alpha={alpha}, b={b})",
        ])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/bifurcation")
    parser.add_argument("--d", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=1.0)
    args = parser.parse_args()
    sys.exit(run(args.out, args.d, args.alpha))
