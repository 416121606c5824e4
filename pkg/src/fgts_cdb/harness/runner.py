"""Seeded multi-run execution, aggregation and file output."""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ..agents import (
    Agent,
    CoLSTIMAgent,
    EstimationError,
    FGTSAgent,
    MaxInPAgent,
    MaxPairUCBAgent,
    VACDBAgent,
)
from ..core import DuelingRecord
from ..env import (
    BanditInstance,
    RegretTrace,
    draw_arms,
    generate_instance,
    per_round_regret,
    sample_preference,
)
from ..posterior import PriorSpec, SamplerDivergenceError, SgldConfig
from .config import AGENT, ARMS, CHAIN1, CHAIN2, FEEDBACK, INSTANCE, ExperimentConfig, stream

log = logging.getLogger(__name__)

SEED_TAGS = {"instance": INSTANCE, "feedback": FEEDBACK, "agent": AGENT,
             "chain1": CHAIN1, "chain2": CHAIN2, "arms": ARMS}
CSV_HEADER = ("round", "mean_cum_regret", "std_cum_regret")


class AggregationError(ValueError):
    pass


@dataclass
class AggregateTrace:
    mean: np.ndarray
    std: np.ndarray
    runs: int

    def __len__(self):
        return len(self.mean)

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])


def make_instance(config: ExperimentConfig, run: int) -> BanditInstance:
    seed = np.random.SeedSequence(entropy=config.master_seed, spawn_key=(run, INSTANCE))
    return generate_instance(seed, config.d, config.K, config.convention)


def make_agent(config: ExperimentConfig, run: int) -> Agent:
    d, K = config.d, config.K
    if config.algo == "fgts":
        sgld = SgldConfig(config.step0, config.decay, config.inner_steps, config.warm_start)
        return FGTSAgent(
            d,
            (stream(config.master_seed, run, CHAIN1), stream(config.master_seed, run, CHAIN2)),
            eta=config.eta, mu=config.resolved_mu,
            prior=PriorSpec(config.prior_kind, config.prior_scale), sgld=sgld,
        )
    if config.algo == "maxinp":
        return MaxInPAgent(d, beta=config.beta, lam=config.lam)
    if config.algo == "maxpairucb":
        return MaxPairUCBAgent(d, beta=config.beta, lam=config.lam)
    if config.algo == "colstim":
        return CoLSTIMAgent(d, stream(config.master_seed, run, AGENT), scale=config.scale,
                            beta=config.beta, lam=config.lam)
    if config.algo == "vacdb":
        return VACDBAgent(d, K, beta=config.beta, lam=config.lam, n_layers=config.vacdb_layers,
                          elim_factor=config.vacdb_elim_factor)
    raise ValueError(config.algo)


def simulate(instance: BanditInstance, agent: Agent, T: int, feedback_rng: np.random.Generator,
             arms_rng: Optional[np.random.Generator] = None,
             log_records: Optional[list] = None) -> np.ndarray:
    """Play ``T`` rounds and return the per-round regret.

    With ``arms_rng`` a fresh distinct arm set is drawn every round instead of
    reusing the instance's arms.
    """
    regret = np.empty(T)
    for t in range(1, T + 1):
        if arms_rng is None:
            arms, action_set = instance.arms, None
        else:
            arms = draw_arms(arms_rng, instance.d, instance.K, instance.convention)
            action_set = arms
        a1, a2 = agent.select(arms, t)
        y = sample_preference(feedback_rng, instance, a1, a2, arms)
        regret[t - 1] = per_round_regret(instance, a1, a2, arms)
        record = DuelingRecord(t, a1, a2, y, action_set)
        agent.update(record, arms)
        if log_records is not None:
            log_records.append(record)
    return regret


def run_single(config: ExperimentConfig, run: int) -> RegretTrace:
    instance = make_instance(config, run)
    agent = make_agent(config, run)
    arms_rng = stream(config.master_seed, run, ARMS) if config.resample_arms else None
    try:
        regret = simulate(instance, agent, config.T, stream(config.master_seed, run, FEEDBACK), arms_rng)
    except (SamplerDivergenceError, EstimationError) as exc:
        log.warning("run %d of %s failed: %s", run, config.algo, exc)
        return RegretTrace(np.empty(0), run, instance.fingerprint(), error=str(exc))
    return RegretTrace(regret, run, instance.fingerprint())


def _run_single_args(args):
    return run_single(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   run_indices: Optional[Iterable[int]] = None) -> list[RegretTrace]:
    """Execute the independent runs; results are ordered by run index.

    Failed runs come back with ``error`` set and an empty regret vector.
    """
    indices = list(range(config.runs) if run_indices is None else run_indices)
    if workers <= 1 or len(indices) <= 1:
        traces = [run_single(config, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_single_args, [(config, i) for i in indices]))
    return sorted(traces, key=lambda tr: tr.run_index)


def aggregate(traces: Sequence[RegretTrace]) -> AggregateTrace:
    """Per-round mean and sample standard deviation (ddof=1) of cumulative regret."""
    traces = [tr for tr in traces if not tr.failed]
    if not traces:
        raise AggregationError("no successful traces to aggregate")
    lengths = {len(tr) for tr in traces}
    if len(lengths) != 1:
        raise AggregationError(f"traces have different lengths: {sorted(lengths)}")
    cum = np.stack([tr.cumulative for tr in traces])
    mean = cum.mean(axis=0)
    std = cum.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros_like(mean)
    return AggregateTrace(mean, std, len(traces))


def emit_csv(agg: AggregateTrace, path) -> Path:
    if agg is None or len(agg) == 0:
        raise AggregationError("refusing to write an empty aggregate")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for t, (m, s) in enumerate(zip(agg.mean, agg.std), start=1):
                writer.writerow((t, repr(float(m)), repr(float(s))))
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    return path


def read_csv(path) -> AggregateTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    mean = np.array([float(r[1]) for r in rows[1:]])
    std = np.array([float(r[2]) for r in rows[1:]])
    return AggregateTrace(mean, std, runs=-1)


def write_manifest(config: ExperimentConfig, traces: Sequence[RegretTrace], path, **extra) -> Path:
    path = Path(path)
    manifest = {
        "config": config.to_dict(),
        "runs": [
            {
                "run": tr.run_index,
                "seed_streams": {name: [tr.run_index, tag] for name, tag in SEED_TAGS.items()},
                "instance_hash": tr.instance_hash,
                "status": "failed" if tr.failed else "ok",
                "error": tr.error,
                "final_cum_regret": None if tr.failed else float(tr.cumulative[-1]),
            }
            for tr in traces
        ],
        **extra,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def ablation_sweep(base: ExperimentConfig, alphas: Sequence[float], out_dir=None,
                   workers: int = 1) -> dict[float, AggregateTrace]:
    """FGTS at each alpha with the same instance and feedback seeds (paired design)."""
    if any(a < 0 for a in alphas):
        raise ValueError("alpha values must be >= 0")
    results: dict[float, AggregateTrace] = {}
    summary = []
    for alpha in alphas:
        config = base.replace(algo="fgts", alpha=float(alpha), mu=None)
        traces = run_experiment(config, workers=workers)
        agg = aggregate(traces)
        results[float(alpha)] = agg
        summary.append((alpha, agg.final_mean, float(agg.std[-1]), sum(tr.failed for tr in traces)))
        if out_dir is not None:
            out = Path(out_dir)
            emit_csv(agg, out / f"fgts_alpha_{alpha:g}.csv")
            write_manifest(config, traces, out / f"fgts_alpha_{alpha:g}.manifest.json")
    if out_dir is not None:
        with open(Path(out_dir) / "summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("alpha", "final_mean_cum_regret", "final_std_cum_regret", "failed_runs"))
            for row in summary:
                writer.writerow((f"{row[0]:g}", repr(row[1]), repr(row[2]), row[3]))
    return results


def tuned_baseline(base: ExperimentConfig, algo: str, grid: Sequence[float],
                   workers: int = 1) -> tuple[float, AggregateTrace, dict[float, float]]:
    """Best value of the algorithm's tuned knob over ``grid``, judged by final mean regret.

    The knob is the perturbation scale for CoLSTIM and the confidence radius
    for the others.
    """
    knob = "scale" if algo == "colstim" else "beta"
    best = None
    finals = {}
    for value in grid:
        config = base.replace(algo=algo, **{knob: float(value)})
        agg = aggregate(run_experiment(config, workers=workers))
        finals[float(value)] = agg.final_mean
        if best is None or agg.final_mean < best[1].final_mean:
            best = (float(value), agg)
    return best[0], best[1], finals


def compare_algorithms(base: ExperimentConfig, algos: Sequence[str] = ("fgts", "maxinp", "maxpairucb", "colstim", "vacdb"),
                       grid: Sequence[float] = (1e-2, 1e-1, 1e0, 1e1), workers: int = 1) -> dict:
    """FGTS at the base configuration and every baseline at its best grid value.

    Returns ``{algo: (tuned_value_or_None, AggregateTrace, {value: final_mean})}``.
    """
    out = {}
    for algo in algos:
        if algo == "fgts":
            agg = aggregate(run_experiment(base.replace(algo="fgts"), workers=workers))
            out[algo] = (None, agg, {base.alpha: agg.final_mean})
        else:
            out[algo] = tuned_baseline(base, algo, grid, workers=workers)
    return out


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))
