"""Oracle and invariant checks shared by ``fgts-cdb validate`` and the acceptance tests.

Each check compares an implementation path against an independent route
(brute-force enumeration, finite differences, exact quadrature, or a
goodness-of-fit test) and returns a :class:`CheckResult`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..agents import colstim_challenger, maxinp_select, maxpairucb_select
from ..core import DuelingRecord
from ..env import BanditInstance, generate_instance, per_round_regret, regret_decomposition_check, sample_preference
from ..model_classes import FiniteModelSet, LinearRewardClass, finite_posterior
from ..posterior import (
    LikelihoodConfig,
    PriorSpec,
    SgldConfig,
    exact_posterior_grid,
    potential,
    potential_gradient,
    sgld_sample,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3g} (threshold {self.threshold:g}) {self.detail}".rstrip()


def _random_records(rng, n, K, start=1):
    out = []
    for t in range(start, start + n):
        a1, a2 = rng.integers(0, K, size=2)
        out.append(DuelingRecord(t, int(a1), int(a2), int(rng.choice([-1, 1]))))
    return out


# -- regret decomposition ---------------------------------------------------


def check_decomposition(trials: int = 1000, d: int = 5, K: int = 32, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(trials):
        inst = generate_instance(rng.integers(2 ** 32), d, K)
        th1, th2 = rng.standard_normal(d) * rng.exponential(2.0), rng.standard_normal(d)
        a1 = int(np.argmax(inst.arms @ th1))
        a2 = int(np.argmax(inst.arms @ th2))
        worst = max(worst, regret_decomposition_check(inst, th1, th2, a1, a2))
    return CheckResult("regret decomposition residual", worst < 1e-9, worst, 1e-9, f"max over {trials} trials")


# -- BTL feedback ----------------------------------------------------------


def chi_square_binary_pvalue(successes: int, n: int, p: float) -> float:
    """Pearson goodness-of-fit p-value for a two-cell table (1 degree of freedom)."""
    expected1, expected0 = n * p, n * (1 - p)
    stat = (successes - expected1) ** 2 / expected1 + ((n - successes) - expected0) ** 2 / expected0
    return math.erfc(math.sqrt(stat / 2.0))


def check_btl_law(pairs: int = 20, draws: int = 100_000, level: float = 1e-3, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    inst = generate_instance(seed, 5, 32)
    r = inst.rewards()
    worst_p = 1.0
    for _ in range(pairs):
        a1, a2 = (int(x) for x in rng.integers(0, inst.K, size=2))
        wins = sum(sample_preference(rng, inst, a1, a2) == 1 for _ in range(draws))
        p = math.exp(r[a1]) / (math.exp(r[a1]) + math.exp(r[a2]))
        worst_p = min(worst_p, chi_square_binary_pvalue(wins, draws, p))
    return CheckResult("BTL chi-square (min p-value)", worst_p >= level, worst_p, level,
                       f"{pairs} pairs x {draws} draws")


# -- selectors against enumeration -----------------------------------------


def _random_selector_state(rng, d, K):
    inst = generate_instance(rng.integers(2 ** 32), d, K)
    theta_hat = rng.standard_normal(d) * rng.choice([0.1, 1.0, 3.0])
    sigma = 0.001 * np.eye(d)
    for _ in range(int(rng.integers(0, 40))):
        a, b = rng.integers(0, K, size=2)
        diff = inst.arms[a] - inst.arms[b]
        sigma += np.outer(diff, diff)
    return inst.arms, theta_hat, np.linalg.inv(sigma)


def _mahalanobis(v, sigma_inv):
    total = 0.0
    for i in range(len(v)):
        for j in range(len(v)):
            total += v[i] * sigma_inv[i, j] * v[j]
    return math.sqrt(max(total, 0.0))


def _best_pair(score_fn, K, allowed=None, tol=1e-12):
    scores = {}
    for x in range(K):
        for y in range(K):
            if allowed is None or (allowed[x] and allowed[y]):
                scores[(x, y)] = score_fn(x, y)
    top = max(scores.values())
    return min(p for p, s in scores.items() if s >= top - tol * max(1.0, abs(top)))


def brute_maxpairucb(theta_hat, sigma_inv, arms, beta):
    K = len(arms)
    r = [float(sum(theta_hat[i] * arms[a][i] for i in range(len(theta_hat)))) for a in range(K)]
    return _best_pair(lambda x, y: r[x] + r[y] + beta * _mahalanobis(arms[x] - arms[y], sigma_inv), K)


def brute_maxinp(theta_hat, sigma_inv, arms, beta):
    K = len(arms)
    r = [float(sum(theta_hat[i] * arms[a][i] for i in range(len(theta_hat)))) for a in range(K)]
    width = [[_mahalanobis(arms[x] - arms[y], sigma_inv) for y in range(K)] for x in range(K)]
    active = [all(r[x] - r[y] + beta * width[x][y] >= 0 for y in range(K)) for x in range(K)]
    return _best_pair(lambda x, y: width[x][y], K, active)


def brute_colstim_challenger(theta_hat, sigma_inv, arms, beta, first):
    K = len(arms)
    scores = [float(theta_hat @ arms[b]) + beta * _mahalanobis(arms[b] - arms[first], sigma_inv) for b in range(K)]
    top = max(scores)
    return min(b for b in range(K) if scores[b] >= top - 1e-12 * max(1.0, abs(top)))


def check_selectors(states: int = 100, d: int = 5, K: int = 32, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    mismatches = []
    for i in range(states):
        arms, theta_hat, sigma_inv = _random_selector_state(rng, d, K)
        beta = float(rng.choice([0.0, 0.01, 0.1, 1.0, 10.0]))
        first = int(rng.integers(0, K))
        got = {
            "maxpairucb": maxpairucb_select(theta_hat, sigma_inv, arms, beta),
            "maxinp": maxinp_select(theta_hat, sigma_inv, arms, beta),
            "colstim": colstim_challenger(theta_hat, sigma_inv, arms, beta, first),
        }
        want = {
            "maxpairucb": brute_maxpairucb(theta_hat, sigma_inv, arms, beta),
            "maxinp": brute_maxinp(theta_hat, sigma_inv, arms, beta),
            "colstim": brute_colstim_challenger(theta_hat, sigma_inv, arms, beta, first),
        }
        for key in got:
            if tuple(np.atleast_1d(got[key])) != tuple(np.atleast_1d(want[key])):
                mismatches.append((i, key, got[key], want[key]))
    return CheckResult("selectors vs brute force (mismatches)", not mismatches, len(mismatches), 0,
                       f"{states} random states", {"mismatches": mismatches})


# -- finite posterior against grid oracle ----------------------------------


def check_finite_vs_grid(seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d, n_records, mu in ((1, 3, 0.0), (2, 5, 0.3), (2, 8, 1.0)):
        inst = generate_instance(rng.integers(2 ** 32), d, min(2 ** d, 4))
        records = _random_records(rng, n_records, inst.K)
        axis = np.linspace(-3, 3, 13)
        grid = np.array(np.meshgrid(*([axis] * d), indexing="ij")).reshape(d, -1).T
        prior = PriorSpec("gaussian", 1.0)
        for chain in (1, 2):
            lik = LikelihoodConfig(1.0, mu, chain)
            oracle = exact_posterior_grid(records, inst, lik, prior, grid)
            log_prior = -0.5 * np.sum(grid ** 2, axis=1)
            p0 = np.exp(log_prior - log_prior.max())
            model_set = FiniteModelSet(grid, p0 / p0.sum())
            weights = finite_posterior(records, LinearRewardClass(), model_set, lik, inst.arms)
            worst = max(worst, float(np.max(np.abs(weights - oracle))))
    return CheckResult("finite posterior vs grid oracle (max abs diff)", worst <= 1e-12, worst, 1e-12)


# -- gradient ---------------------------------------------------------------


def check_gradient(points: int = 100, d: int = 5, K: int = 32, h: float = 1e-6, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = skipped = 0
    while checked < points:
        inst = generate_instance(rng.integers(2 ** 32), d, K)
        records = _random_records(rng, int(rng.integers(1, 40)), K)
        lik = LikelihoodConfig(float(rng.uniform(0.25, 2.0)), float(rng.uniform(0.0, 1.0)), int(rng.integers(1, 3)))
        prior = PriorSpec("gaussian", float(rng.uniform(0.5, 2.0)))
        theta = rng.standard_normal(d) * 1.5
        scores = np.sort(inst.arms @ theta)
        # a central difference straddling an argmax switch is meaningless
        if lik.mu and scores[-1] - scores[-2] < 100 * h * math.sqrt(d):
            skipped += 1
            continue
        analytic = potential_gradient(theta, records, inst, lik, prior)
        fd = np.empty(d)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            fd[i] = (potential(theta + e, records, inst, lik, prior)
                     - potential(theta - e, records, inst, lik, prior)) / (2 * h)
        rel = np.linalg.norm(fd - analytic) / max(np.linalg.norm(analytic), 1e-8)
        worst = max(worst, float(rel))
        checked += 1
    return CheckResult("gradient vs central differences (max rel err)", worst <= 1e-5, worst, 1e-5,
                       f"{checked} points, {skipped} argmax-tie points excluded", {"skipped": skipped})


# -- sampler fidelity -------------------------------------------------------


def fidelity_problems():
    """Small problems with at most five records: (name, instance, records, likelihood, prior)."""
    inst1 = BanditInstance(np.array([1.0]), np.array([[1.0], [-1.0]]))
    rec1 = [DuelingRecord(1, 0, 1, 1), DuelingRecord(2, 0, 1, 1), DuelingRecord(3, 1, 0, 1)]
    arms2 = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    inst2 = BanditInstance(np.array([0.6, 0.8]), arms2)
    rec2 = [DuelingRecord(1, 0, 3, 1), DuelingRecord(2, 1, 2, -1), DuelingRecord(3, 0, 1, 1),
            DuelingRecord(4, 2, 3, 1), DuelingRecord(5, 1, 0, -1)]
    prior = PriorSpec("gaussian", 1.0)
    return [
        ("1-D, 3 records", inst1, rec1, LikelihoodConfig(1.0, 0.5, 1), prior),
        ("2-D, 5 records", inst2, rec2, LikelihoodConfig(1.0, 0.3, 2), prior),
    ]


def cell_masses(records, inst, lik, prior, lo, hi, cells, refine=6):
    """Exact posterior mass of each histogram cell, by refined midpoint quadrature."""
    d = inst.d
    edges = np.linspace(lo, hi, cells + 1)
    width = (hi - lo) / cells
    sub = lo + (np.arange(cells * refine) + 0.5) * width / refine
    grid = np.array(np.meshgrid(*([sub] * d), indexing="ij")).reshape(d, -1).T
    w = exact_posterior_grid(records, inst, lik, prior, grid)
    w = w.reshape((cells * refine,) * d)
    for axis in range(d):
        w = np.add.reduceat(w, np.arange(0, cells * refine, refine), axis=axis)
    return edges, w


def sgld_draws(records, inst, lik, prior, n_samples, seed, calls_per_sample=10,
               sgld: SgldConfig = SgldConfig()):
    """Independent SGLD draws, each from its own chain of ``calls_per_sample`` round-1 calls."""
    rng = np.random.default_rng(seed)
    from ..posterior import DuelStats
    stats = DuelStats.from_history(records, inst)
    out = np.empty((n_samples, inst.d))
    for s in range(n_samples):
        theta = np.zeros(inst.d)
        for _ in range(calls_per_sample):
            theta = sgld_sample(rng, theta, stats, inst, lik, prior, sgld, round=1)
        out[s] = theta
    return out


def total_variation(samples, edges, masses) -> float:
    d = samples.shape[1]
    hist, _ = np.histogramdd(samples, bins=[edges] * d)
    emp = hist / len(samples)
    outside = 1.0 - emp.sum()
    return 0.5 * (np.abs(emp - masses).sum() + outside + max(0.0, 1.0 - masses.sum()))


def check_sampler_fidelity(n_samples: int = 10_000, seed: int = 5) -> CheckResult:
    worst = 0.0
    details = []
    for (name, inst, records, lik, prior), cells in zip(fidelity_problems(), (40, 12)):
        lo, hi = -4.0, 4.0
        edges, masses = cell_masses(records, inst, lik, prior, lo, hi, cells)
        samples = sgld_draws(records, inst, lik, prior, n_samples, seed)
        tv = total_variation(samples, edges, masses)
        details.append(f"{name}: TV={tv:.3f}")
        worst = max(worst, tv)
    return CheckResult("SGLD vs grid posterior (max TV)", worst < 0.1, worst, 0.1, "; ".join(details))


ALL_CHECKS = {
    "decomposition": check_decomposition,
    "btl": check_btl_law,
    "selectors": check_selectors,
    "finite_vs_grid": check_finite_vs_grid,
    "gradient": check_gradient,
    "sampler": check_sampler_fidelity,
}


def run_all(quick: bool = False) -> bool:
    quick_args = {
        "decomposition": {"trials": 200},
        "btl": {"pairs": 5, "draws": 20_000},
        "selectors": {"states": 20},
        "gradient": {"points": 30},
        "sampler": {"n_samples": 3000},
    }
    ok = True
    for key, fn in ALL_CHECKS.items():
        result = fn(**quick_args.get(key, {})) if quick else fn()
        print(result.line(), flush=True)
        ok &= result.passed
    return ok
