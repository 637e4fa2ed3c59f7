"""Simulated participants: random, optimal and mean-only agents.

The random agent draws uniformly from the space of permissible
responses and lower-bounds task difficulty.  The optimal agent answers
with the model's best response (optionally perturbed), and the
mean-only agent answers from point estimates alone, disregarding all
information on uncertainty.
"""

from __future__ import annotations

import numpy as np

from . import samples as se
from . import scoring, tasks


def _slider_grid(ai: tasks.SliderInput):
    n_steps = int(round((ai.maximum - ai.minimum) / ai.step))
    return ai.minimum, ai.step, n_steps


def _snap(ai: tasks.SliderInput, value: float) -> float:
    lo, step, n_steps = _slider_grid(ai)
    k = int(round((value - lo) / step))
    k = min(max(k, 0), n_steps)
    return lo + k * step


def random_slider(ai: tasks.SliderInput, rng) -> float:
    lo, step, n_steps = _slider_grid(ai)
    return lo + int(rng.integers(0, n_steps + 1)) * step


def random_composition(n: int, m: int, rng):
    """Uniform draw over {s in N_0^n : sum(s) = m} via stars and bars."""
    if n == 1:
        return [m]
    bars = np.sort(rng.choice(m + n - 1, size=n - 1, replace=False))
    parts = []
    prev = -1
    for b in bars:
        parts.append(int(b - prev - 1))
        prev = b
    parts.append(int(m + n - 2 - prev))
    return parts


def random_payload(task: tasks.TaskSpec, rng) -> dict:
    ai = task.answer_input
    if ai.type == "slider":
        return {"type": "slider", "value": random_slider(ai, rng)}
    # all chips placed: the permissible-response space for the baseline
    return {"type": "multibet",
            "s": random_composition(ai.n_options, ai.budget, rng)}


def _apportion_chips(probs, budget: int):
    """Largest-remainder allocation of `budget` chips proportional to probs."""
    raw = [p * budget for p in probs]
    base = [int(np.floor(r)) for r in raw]
    short = budget - sum(base)
    remainders = sorted(range(len(raw)), key=lambda i: raw[i] - base[i],
                        reverse=True)
    for i in remainders[:short]:
        base[i] += 1
    return base


def optimal_payload(task: tasks.TaskSpec, js: se.JointSamples,
                    rng=None, noise: float = 0.0) -> dict:
    """Best response under the task's objective, optionally perturbed."""
    obj = task.objective
    ai = task.answer_input
    js_c = scoring.conditioned_store(task, js)
    quantity = task.query_meta.quantity

    if quantity == "value":
        value = se.quantile_threshold(js_c, obj.variable, obj.target_confidence)
    elif quantity == "confidence":
        if obj.candidates:
            labels, probs = se.identity_posterior(
                js_c, obj.candidates, obj.observed, obj.window)
            value = probs[labels.index(obj.candidate_of_interest
                                       or obj.candidates[0])]
        else:
            value = se.prob_event(js_c, obj.variable, obj.threshold,
                                  obj.direction)
    else:
        if obj.kind == "expected_utility":
            values = obj.utility.option_values(js_c)
            best = max(ai.labels, key=lambda l: values[l])
            s = [ai.budget if l == best else 0 for l in ai.labels]
        else:
            p_star = scoring.identity_target(task, js_c)
            s = _apportion_chips(p_star.probs, ai.budget)
        if noise > 0.0 and rng is not None:
            s = _jitter_chips(s, ai.budget, noise, rng)
        return {"type": "multibet", "s": s}

    if noise > 0.0 and rng is not None:
        value += rng.normal(0.0, noise * (ai.maximum - ai.minimum))
    return {"type": "slider", "value": _snap(ai, value)}


def _jitter_chips(s, budget, noise, rng):
    s = list(s)
    n_moves = int(rng.binomial(budget, min(noise, 1.0)))
    for _ in range(n_moves):
        donors = [i for i, x in enumerate(s) if x > 0]
        src = donors[int(rng.integers(len(donors)))]
        dst = int(rng.integers(len(s)))
        s[src] -= 1
        s[dst] += 1
    return s


def mean_only_payload(task: tasks.TaskSpec, js: se.JointSamples) -> dict:
    """Respond from column means only, ignoring spread and correlation."""
    obj = task.objective
    ai = task.answer_input
    js_c = scoring.conditioned_store(task, js)
    quantity = task.query_meta.quantity

    if quantity == "value":
        return {"type": "slider",
                "value": _snap(ai, float(np.mean(js_c.column(obj.variable))))}
    if quantity == "confidence":
        if obj.candidates:
            means = {c: float(np.mean(js_c.column(c))) for c in obj.candidates}
            closest = min(means, key=lambda c: abs(means[c] - obj.observed))
            target = obj.candidate_of_interest or obj.candidates[0]
            value = 1.0 if closest == target else 0.0
        else:
            mean = float(np.mean(js_c.column(obj.variable)))
            hit = mean >= obj.threshold if obj.direction == "ge" else mean <= obj.threshold
            value = 1.0 if hit else 0.0
        return {"type": "slider", "value": _snap(ai, value)}

    if obj.kind == "expected_utility":
        scores = {}
        for o in obj.utility.options:
            if o.kind == "constant":
                scores[o.label] = o.value
            else:
                mean = float(np.mean(js_c.column(o.variable)))
                if o.kind == "linear":
                    scores[o.label] = o.scale * mean + o.offset
                else:
                    hit = mean >= o.threshold if o.direction == "ge" else mean <= o.threshold
                    scores[o.label] = o.payoff_hit if hit else o.payoff_miss
        best = max(ai.labels, key=lambda l: scores[l])
    elif obj.target == "identity_posterior":
        means = {c: float(np.mean(js_c.column(c))) for c in obj.candidates}
        best_candidate = min(means, key=lambda c: abs(means[c] - obj.observed))
        best = ai.labels[obj.candidates.index(best_candidate)]
    else:
        means = {c: float(np.mean(js_c.column(c))) for c in obj.candidates}
        key = (max if obj.direction == "ge" else min)(means, key=means.get)
        best = ai.labels[obj.candidates.index(key)]
    return {"type": "multibet",
            "s": [ai.budget if l == best else 0 for l in ai.labels]}


def simulate_random_agent(task: tasks.TaskSpec, js: se.JointSamples,
                          n: int = 1000, seed: int = 0) -> np.ndarray:
    """Rewards of n uniformly random permissible responses."""
    rng = np.random.default_rng(seed)
    rewards = np.empty(n)
    for i in range(n):
        score = scoring.evaluate_response(task, random_payload(task, rng), js)
        rewards[i] = score.reward
    return rewards


AGENTS = ("random", "optimal", "mean-only")


def agent_payload(agent: str, task, js, rng, noise: float = 0.0) -> dict:
    if agent == "random":
        return random_payload(task, rng)
    if agent == "optimal":
        return optimal_payload(task, js, rng=rng, noise=noise)
    if agent == "mean-only":
        return mean_only_payload(task, js)
    raise ValueError(f"unknown agent {agent!r}")


def simulate_study(template: tasks.StudyTemplate, resolve_blob,
                   n_participants: int, agent: str = "optimal",
                   seed: int = 0, noise: float = 0.0):
    """Run simulated participants through a template without the service.

    `resolve_blob` maps a task's model reference to its JointSamples.
    Returns response-table rows matching the study database export.
    """
    rows = []
    for p in range(n_participants):
        rng = np.random.default_rng(seed + 1000 * p)
        expansion = tasks.expand_for_user(template, seed=seed + p)
        for task in expansion:
            js = resolve_blob(task.model_ref)
            payload = agent_payload(agent, task, js, rng, noise=noise)
            score = scoring.evaluate_response(task, payload, js)
            rows.append({
                "user_id": f"sim-{agent}-{p:03d}",
                "task_id": task.id,
                "query_id": task.query_id or task.id,
                "visualisation": task.visualisation,
                "observability": task.query_meta.observability,
                "quantity": task.query_meta.quantity,
                "conditioning": task.query_meta.conditioning,
                "objective": score.objective,
                "objective_value": score.objective_value,
                "reward": score.reward,
                "response_time_s": 0.0,
            })
    return rows
