"""FGTS with alpha in {0, 0.01, 0.1, 1} at d = 5, 10, 15 on paired seeds.

    python3 scripts/reproduce_figure2.py --out-dir results/figure2
"""

import argparse
from pathlib import Path

from fgts_cdb.harness.config import preset
from fgts_cdb.harness.runner import ablation_sweep, default_workers


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", default="5,10,15")
    p.add_argument("--alphas", default="0,0.01,0.1,1")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--T", type=int, default=2500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out-dir", default="results/figure2")
    args = p.parse_args()

    alphas = [float(a) for a in args.alphas.split(",")]
    for d in (int(x) for x in args.dims.split(",")):
        base = preset("paper-experiment", d=d, runs=args.runs, T=args.T, master_seed=args.seed)
        results = ablation_sweep(base, alphas, out_dir=Path(args.out_dir) / f"d{d}", workers=args.workers)
        finals = {a: agg.final_mean for a, agg in results.items()}
        centre = sum(finals.values()) / len(finals)
        for a, v in finals.items():
            print(f"d={d} alpha={a:<5g} final mean regret {v:9.2f} ({v / centre - 1:+.0%} vs mean)", flush=True)


if __name__ == "__main__":
    main()
