"""Post-study analysis: difficulty calibration, hypothesis tests,
paired central intervals and bootstrap effect sizes.

Operates on flat response tables (as exported from the study database
or produced by simulated agents); every randomized routine takes an
explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps

from .errors import InsufficientData, SchemaMismatch, UndefinedEffect

ANIMATED = ("hop", "bhop")
INTERACTIVE = ("interactive_boxplot", "bhop")


@dataclass(frozen=True)
class TestResult:
    statistic: float  # Mann-Whitney U for the first sample
    p_value: float
    n_a: int
    n_b: int
    rejected: bool = False


def mann_whitney_u(a, b) -> TestResult:
    """Two-sided Mann-Whitney U with midranks, tie and continuity
    correction (normal approximation)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 1 or b.size < 1:
        raise InsufficientData("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        # fully degenerate: no evidence against the null
        return TestResult(statistic=a.size * b.size / 2.0, p_value=1.0,
                          n_a=a.size, n_b=b.size)
    u, p = sps.mannwhitneyu(a, b, alternative="two-sided",
                            method="asymptotic", use_continuity=True)
    return TestResult(statistic=float(u), p_value=float(min(p, 1.0)),
                      n_a=a.size, n_b=b.size)


def bonferroni_reject(p_values, alpha: float = 0.05):
    """Flag i is set iff p_i <= alpha / m with m = len(p_values)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    m = len(p_values)
    return [p <= alpha / m for p in p_values]


def _factor_levels(factor: str):
    if factor == "animation":
        return ANIMATED, ("boxplot", "interactive_boxplot")
    if factor == "interactivity":
        return INTERACTIVE, ("boxplot", "hop")
    raise ValueError(f"unknown factor {factor!r}")


def _subset_filter(row, subset):
    is_rationality = row["objective"] == "expected_utility"
    if subset == "rationality":
        return is_rationality
    if subset == "comprehension":
        return not is_rationality
    raise ValueError(f"unknown subset {subset!r}")


def paired_differences(rows, factor: str, measure: str,
                       subset: str, swap_levels: bool = False):
    """Within-subject differences stratified by task.

    Pairs the two responses a participant gave to the same underlying
    query under opposite factor levels; returns {query_id: [diffs]}.
    """
    col = {"reward": "reward", "response_time": "response_time_s"}[measure]
    level_a, level_b = _factor_levels(factor)
    if swap_levels:
        level_a, level_b = level_b, level_a
    cells = {}
    for row in rows:
        if not _subset_filter(row, subset):
            continue
        key = (row["user_id"], row["query_id"])
        side = "a" if row["visualisation"] in level_a else "b"
        cells.setdefault(key, {})[side] = float(row[col])
    by_task = {}
    for (user, query), sides in cells.items():
        if "a" in sides and "b" in sides:
            by_task.setdefault(query, []).append(sides["a"] - sides["b"])
    return by_task


def paired_central_interval(rows, factor: str, measure: str = "reward",
                            subset: str = "comprehension", level: float = 0.5,
                            swap_levels: bool = False,
                            per_task_average: bool = False):
    """Central interval of within-subject differences.

    Default: pairs are formed within each task stratum, all differences
    are pooled, then the empirical ((1-level)/2, (1+level)/2) quantiles
    (type-7) are taken.  With per_task_average, quantiles are computed
    per task and averaged instead.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    by_task = paired_differences(rows, factor, measure, subset, swap_levels)
    if not by_task:
        raise InsufficientData("no paired observations for this factor")
    lo_q, hi_q = (1.0 - level) / 2.0, (1.0 + level) / 2.0
    if per_task_average:
        los, his = [], []
        for diffs in by_task.values():
            lo, hi = np.quantile(diffs, [lo_q, hi_q])
            los.append(lo)
            his.append(hi)
        return float(np.mean(los)), float(np.mean(his))
    pooled = np.concatenate([np.asarray(d) for d in by_task.values()])
    lo, hi = np.quantile(pooled, [lo_q, hi_q])
    return float(lo), float(hi)


def bootstrap_effect_size(a, b, n_boot: int = 1000, seed: int = 0,
                          pooled_variance: bool = False):
    """Standardized difference of means with a bootstrap standard error.

    The scale term is sqrt((sd_a + sd_b) / 2) by default, or the
    root-mean-square of the two standard deviations when
    pooled_variance is set.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    rng = np.random.default_rng(seed)
    effects = np.empty(n_boot)
    for i in range(n_boot):
        ra = a[rng.integers(0, a.size, a.size)]
        rb = b[rng.integers(0, b.size, b.size)]
        sd_a, sd_b = ra.std(ddof=1), rb.std(ddof=1)
        if pooled_variance:
            scale = np.sqrt((sd_a ** 2 + sd_b ** 2) / 2.0)
        else:
            scale = np.sqrt((sd_a + sd_b) / 2.0)
        if scale == 0.0 or not np.isfinite(scale):
            raise UndefinedEffect("zero spread in a bootstrap replicate")
        effects[i] = (ra.mean() - rb.mean()) / scale
    return {"effect": float(effects.mean()), "se": float(effects.std(ddof=1))}


def calibration_report(rows, agent_rewards: dict, alpha: float = 0.05,
                       too_easy_median: float = 9.5):
    """Per-task difficulty summary against the random-agent baseline.

    For every task: reward quartiles stratified by visualisation, a
    Mann-Whitney comparison with the random agent's rewards (Bonferroni
    corrected over all tasks), and difficulty flags.
    """
    by_task = {}
    for row in rows:
        by_task.setdefault(row["query_id"], []).append(row)
    if set(by_task) != set(agent_rewards):
        raise SchemaMismatch(
            "response table and agent rewards cover different tasks")

    order = sorted(by_task)
    tests = []
    for query_id in order:
        rewards = [r["reward"] for r in by_task[query_id]]
        tests.append(mann_whitney_u(rewards, agent_rewards[query_id]))
    flags = bonferroni_reject([t.p_value for t in tests], alpha)

    report = {}
    for query_id, test, rejected in zip(order, tests, flags):
        task_rows = by_task[query_id]
        by_vis = {}
        for r in task_rows:
            by_vis.setdefault(r["visualisation"], []).append(r["reward"])
        strata = {vis: tuple(np.quantile(vals, [0.25, 0.5, 0.75]))
                  for vis, vals in sorted(by_vis.items())}
        median = float(np.median([r["reward"] for r in task_rows]))
        report[query_id] = {
            "n_responses": len(task_rows),
            "median_reward": median,
            "reward_quartiles_by_visualisation": strata,
            "test": replace(test, rejected=rejected),
            "too_easy": median >= too_easy_median,
            "indistinguishable_from_random": not rejected,
        }
    return report
