"""Hamiltonian Monte Carlo with a leapfrog integrator.

Identity mass matrix, fixed step size, Metropolis acceptance.  Divergent
trajectories (non-finite Hamiltonian) are rejected and counted, never
silently kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class HmcResult:
    samples: np.ndarray  # (n_samples, dim)
    acceptance_rate: float
    n_divergent: int
    step_size: float


def leapfrog(q, p, grad_fn, step_size, n_steps):
    """Integrate Hamiltonian dynamics; returns (q, p) after n_steps.

    Numerical blow-ups mid-trajectory are expected for too-large steps;
    they surface as a False flag, not as warnings.
    """
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        q = q.copy()
        p = p + 0.5 * step_size * grad_fn(q)
        for i in range(n_steps):
            q = q + step_size * p
            g = grad_fn(q)
            if not np.all(np.isfinite(g)):
                return q, p, False
            if i < n_steps - 1:
                p = p + step_size * g
            else:
                p = p + 0.5 * step_size * g
        return q, p, True


def hmc_sample(log_prob_fn, grad_fn, init, n_samples, warmup=1000,
               step_size=0.05, n_leapfrog=32, seed=0):
    """Draw n_samples post-warmup states from the target density."""
    rng = np.random.default_rng(seed)
    q = np.asarray(init, dtype=float).copy()
    dim = q.size
    logp = log_prob_fn(q)
    if not np.isfinite(logp):
        raise ValueError("initial point has non-finite log density")

    total = warmup + n_samples
    kept = np.empty((n_samples, dim))
    n_accept = 0
    n_divergent = 0
    for it in range(total):
        p0 = rng.standard_normal(dim)
        h0 = -logp + 0.5 * p0 @ p0
        q1, p1, ok = leapfrog(q, p0, grad_fn, step_size, n_leapfrog)
        accepted = False
        if ok:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                logp1 = log_prob_fn(q1)
                h1 = -logp1 + 0.5 * p1 @ p1
            if np.isfinite(h1):
                if np.log(rng.uniform()) < h0 - h1:
                    q, logp = q1, logp1
                    accepted = True
            else:
                n_divergent += 1
        else:
            n_divergent += 1
        if it >= warmup:
            if accepted:
                n_accept += 1
            kept[it - warmup] = q
    return HmcResult(
        samples=kept,
        acceptance_rate=n_accept / max(n_samples, 1),
        n_divergent=n_divergent,
        step_size=step_size,
    )


def tune_step_size(log_prob_fn, grad_fn, init, target=0.8, n_leapfrog=32,
                   initial=0.1, pilot_iters=200, max_rounds=12, seed=0):
    """Pick a fixed step size by pilot runs bracketing the target rate.

    Doubles / halves the step until the pilot acceptance rate straddles
    the target, then returns the best candidate seen.
    """
    step = initial
    best = (np.inf, step)
    for round_ in range(max_rounds):
        res = hmc_sample(log_prob_fn, grad_fn, init, n_samples=pilot_iters,
                         warmup=0, step_size=step, n_leapfrog=n_leapfrog,
                         seed=seed + round_)
        gap = abs(res.acceptance_rate - target)
        if gap < best[0]:
            best = (gap, step)
        if gap < 0.05:
            break
        step = step * 2.0 if res.acceptance_rate > target else step * 0.5
    return best[1]
