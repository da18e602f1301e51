#!/usr/bin/env python3
"""Monte Carlo size of the shelter LR test on data without a shelter (delta = 0).

Reports how often the shelter term is wrongly kept, for a fixed shelter
category and for auto selection over all m categories.

    python3 scripts/shelter_size.py --reps 200 --n 500 2000
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from cubfuzz.cub import CubParams, select_model, simulate


@dataclass
class SizeConfig:
    pi: float = 0.7
    xi: float = 0.3
    m: int = 7
    reps: int = 200
    alpha: float = 0.05
    fixed_c: int = 7


def size(cfg: SizeConfig, n: int) -> dict:
    kept = {"fixed": 0, "auto": 0}
    for seed in range(cfg.reps):
        s = simulate(CubParams(cfg.pi, cfg.xi), cfg.m, n, [seed, n])
        kept["fixed"] += select_model(s, cfg.m, cfg.fixed_c, cfg.alpha).retained
        kept["auto"] += select_model(s, cfg.m, "auto", cfg.alpha).retained
    return {k: v / cfg.reps for k, v in kept.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--n", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()
    cfg = SizeConfig(reps=args.reps, alpha=args.alpha)
    print(f"CUB({cfg.pi}, {cfg.xi}), m={cfg.m}, alpha={cfg.alpha}, {cfg.reps} replications")
    print(f"{'n':>6}{'kept (c=' + str(cfg.fixed_c) + ')':>14}{'kept (auto)':>14}")
    for n in args.n:
        r = size(cfg, n)
        print(f"{n:>6}{r['fixed']:>14.3f}{r['auto']:>14.3f}")


if __name__ == "__main__":
    main()
