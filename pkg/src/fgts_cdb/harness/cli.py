"""Command-line entry point: ``fgts-cdb {bench,sweep,compare,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ALGORITHMS, HYPER_GRID, preset
from .runner import (
    ablation_sweep,
    aggregate,
    compare_algorithms,
    emit_csv,
    run_experiment,
    write_manifest,
)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--T", type=int, default=2500)
    p.add_argument("--K", type=int, default=32)
    p.add_argument("--runs", type=int, default=10, help="independent repetitions (10 or 30 in the reference setup)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--preset", default="paper-experiment", choices=("paper-experiment", "theory"))
    p.add_argument("--convention", default="raw", choices=("raw", "unit"))
    p.add_argument("--resample-arms", action="store_true", help="draw a fresh arm set every round")
    p.add_argument("--eta", type=float)
    p.add_argument("--mu", type=float, help="overrides alpha/sqrt(T)")
    p.add_argument("--beta", type=float, default=1.0, help="confidence radius for UCB baselines")
    p.add_argument("--lam", type=float, default=0.001)
    p.add_argument("--scale", type=float, default=1.0, help="CoLSTIM perturbation scale")
    p.add_argument("--step0", type=float, default=0.005)
    p.add_argument("--decay", type=float, default=0.99)
    p.add_argument("--inner-steps", type=int, default=100)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--workers", type=int, default=1)


def _config(args, **extra):
    overrides = dict(
        T=args.T, d=args.d, K=args.K, runs=args.runs, master_seed=args.seed,
        convention=args.convention, resample_arms=args.resample_arms,
        beta=args.beta, lam=args.lam, scale=args.scale, step0=args.step0,
        decay=args.decay, inner_steps=args.inner_steps, warm_start=not args.no_warm_start,
    )
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.mu is not None:
        overrides["mu"] = args.mu
    overrides.update(extra)
    return preset(args.preset, **overrides)


def cmd_bench(args) -> int:
    extra = {"algo": args.algo}
    if args.alpha is not None:
        extra["alpha"] = args.alpha
    config = _config(args, **extra)
    traces = run_experiment(config, workers=args.workers)
    failed = [tr for tr in traces if tr.failed]
    for tr in failed:
        print(f"run {tr.run_index} failed: {tr.error}", file=sys.stderr)
    agg = aggregate(traces)
    out = Path(args.out)
    emit_csv(agg, out)
    write_manifest(config, traces, out.with_suffix(".manifest.json"))
    print(f"{config.algo} d={config.d} T={config.T}: final mean cumulative regret "
          f"{agg.final_mean:.3f} (std {agg.std[-1]:.3f}, {agg.runs} ok / {len(failed)} failed) -> {out}")
    return 0


def cmd_sweep(args) -> int:
    config = _config(args, algo="fgts")
    results = ablation_sweep(config, args.alphas, out_dir=args.out_dir, workers=args.workers)
    for alpha, agg in results.items():
        print(f"alpha={alpha:g}: final mean cumulative regret {agg.final_mean:.3f} (std {agg.std[-1]:.3f})")
    return 0


def cmd_compare(args) -> int:
    config = _config(args, alpha=args.alpha if args.alpha is not None else 0.1)
    results = compare_algorithms(config, args.algos, args.grid, workers=args.workers)
    out_dir = Path(args.out_dir)
    for algo, (value, agg, finals) in results.items():
        emit_csv(agg, out_dir / f"{algo}_d{config.d}.csv")
        tuned = "" if value is None else f" (tuned value {value:g}; grid {finals})"
        print(f"{algo}: final mean cumulative regret {agg.final_mean:.3f}{tuned}")
    return 0


def cmd_validate(args) -> int:
    from .validate import run_all

    ok = run_all(quick=args.quick)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgts-cdb", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run one algorithm and write its aggregate regret CSV")
    bench.add_argument("--algo", choices=ALGORITHMS, default="fgts")
    bench.add_argument("--alpha", type=float, help="Feel-Good weight: mu = alpha / sqrt(T)")
    bench.add_argument("--out", default="results/bench.csv")
    _common(bench)
    bench.set_defaults(func=cmd_bench)

    sweep = sub.add_parser("sweep", help="FGTS over several alpha values with paired seeds")
    sweep.add_argument("--alphas", type=_floats, default=[0.0, 0.01, 0.1, 1.0])
    sweep.add_argument("--out-dir", default="results/sweep")
    _common(sweep)
    sweep.set_defaults(func=cmd_sweep)

    compare = sub.add_parser("compare", help="FGTS against grid-tuned baselines")
    compare.add_argument("--algos", type=lambda s: s.split(","), default=list(ALGORITHMS))
    compare.add_argument("--grid", type=_floats, default=list(HYPER_GRID))
    compare.add_argument("--alpha", type=float)
    compare.add_argument("--out-dir", default="results/compare")
    _common(compare)
    compare.set_defaults(func=cmd_compare)

    validate = sub.add_parser("validate", help="run the invariant and oracle checks")
    validate.add_argument("--quick", action="store_true", help="smaller sample sizes")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
