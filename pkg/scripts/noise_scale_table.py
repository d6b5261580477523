#!/usr/bin/env python3
"""Noise-scale table: per-release Laplace scales across the privacy grid.

Evaluated at unit claim norm so the numbers are directly comparable across
regimes; the data behind the noise-scale figure.
"""

import argparse
from pathlib import Path

from dpalloc import approx_scale, pure_scale
from dpalloc.sweep import DEFAULT_DELTAS, DEFAULT_EPSILONS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, default=100)
    ap.add_argument("--out", type=str, default="results/noise_scales.csv")
    args = ap.parse_args()

    fmt = lambda x: format(float(x), ".12g")  # noqa: E731
    lines = ["regime,epsilon,delta,scale"]
    for eps in DEFAULT_EPSILONS:
        lines.append(f"pure,{fmt(eps)},0,{fmt(pure_scale(1.0, eps, args.T))}")
    for delta in DEFAULT_DELTAS:
        for eps in DEFAULT_EPSILONS:
            lines.append(
                f"approx,{fmt(eps)},{fmt(delta)},{fmt(approx_scale(1.0, eps, delta, args.T))}"
            )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
