"""Response scoring: divergence objectives, expected utility, rewards.

Also owns the MultiBet chip-allocation state machine as pure logic so
the server and any client reimplementation can be exercised against the
same test vectors.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import samples as se
from .errors import (
    EmptyResponse,
    InvalidResponse,
    InvalidUtility,
    SchemaMismatch,
)

# pseudo-chips per option added before normalizing for KL only; raw
# proportions are what the participant sees
KL_SMOOTHING = 0.5


@dataclass(frozen=True)
class CategoricalDistribution:
    labels: tuple
    probs: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        probs = tuple(float(p) for p in self.probs)
        if len(labels) != len(probs):
            raise ValueError("labels and probs must align")
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    def to_dict(self):
        return {"labels": list(self.labels), "probs": list(self.probs)}


def bernoulli(p: float, labels=("yes", "no")) -> CategoricalDistribution:
    p = min(max(float(p), 0.0), 1.0)
    return CategoricalDistribution(labels=labels, probs=(p, 1.0 - p))


# ---------------------------------------------------------------------------
# MultiBet state machine

@dataclass(frozen=True)
class MultiBetState:
    """Chip allocation s over N options with budget M."""

    s: tuple
    m: int

    def __post_init__(self):
        s = tuple(int(x) for x in self.s)
        if any(x < 0 for x in s):
            raise ValueError("chip counts must be non-negative")
        if sum(s) > self.m:
            raise ValueError("chip counts exceed the budget")
        object.__setattr__(self, "s", s)

    @property
    def n(self):
        return len(self.s)

    @property
    def total(self):
        return sum(self.s)

    @property
    def remaining(self):
        return self.m - self.total

    def button_state(self, column: int, row: int) -> str:
        """Display rule for button `row` (1-based from the bottom).

        The bottom s_i buttons show as selected, the next M - sum(s) as
        deselected, and everything above as disabled.
        """
        if not (0 <= column < self.n and 1 <= row <= self.m):
            raise ValueError("button outside the widget grid")
        si = self.s[column]
        if row <= si:
            return "selected"
        if row <= si + self.remaining:
            return "deselected"
        return "disabled"


def multibet_click(state: MultiBetState, column: int, row: int) -> MultiBetState:
    """Apply one click; disabled positions leave the state unchanged.

    Clicking a deselected button raises s_i to that row; clicking a
    selected button removes that chip and every chip above it
    (s_i := row - 1), which allows clearing a column to zero.
    """
    kind = state.button_state(column, row)
    if kind == "disabled":
        return state
    s = list(state.s)
    s[column] = row if kind == "deselected" else row - 1
    return MultiBetState(s=tuple(s), m=state.m)


def entailed_distribution(state: MultiBetState, labels=None,
                          epsilon: float = 0.0) -> CategoricalDistribution:
    """Probability distribution entailed by a chip allocation.

    With smoothing epsilon > 0, p_i = (s_i + eps) / (sum(s) + N * eps).
    """
    if state.total < 1:
        raise EmptyResponse("at least one chip must be placed")
    if labels is None:
        labels = tuple(f"option{i + 1}" for i in range(state.n))
    denom = state.total + state.n * epsilon
    return CategoricalDistribution(
        labels=tuple(labels),
        probs=tuple((si + epsilon) / denom for si in state.s),
    )


# ---------------------------------------------------------------------------
# Divergence objectives

def _check_labels(p_star, p_hat):
    if tuple(p_star.labels) != tuple(p_hat.labels):
        raise SchemaMismatch("distributions are over different label sets")


def smooth_categorical(dist: CategoricalDistribution, budget: int,
                       epsilon: float = KL_SMOOTHING) -> CategoricalDistribution:
    """Regularize a distribution as if it were a chip allocation.

    Maps p_i to (p_i * budget + eps) / (budget + N * eps), the same
    pseudo-count scheme applied to responses, so divergences between a
    model target and a chip spread stay finite on empty options.
    """
    n = len(dist.probs)
    denom = budget + n * epsilon
    return CategoricalDistribution(
        labels=dist.labels,
        probs=tuple((p * budget + epsilon) / denom for p in dist.probs))


def kl_divergence(p_star: CategoricalDistribution,
                  p_hat: CategoricalDistribution) -> float:
    """D(p* || p_hat) in nats; terms with p*_i = 0 contribute zero."""
    _check_labels(p_star, p_hat)
    total = 0.0
    for ps, ph in zip(p_star.probs, p_hat.probs):
        if ps == 0.0:
            continue
        if ph == 0.0:
            return math.inf
        total += ps * math.log(ps / ph)
    return total


def symmetric_kl(p_star, p_hat) -> float:
    return kl_divergence(p_star, p_hat) + kl_divergence(p_hat, p_star)


def absolute_bias(p_star, p_hat) -> float:
    """Total-variation distance; reduces to |p_hat - p*| for Bernoulli."""
    _check_labels(p_star, p_hat)
    return 0.5 * sum(abs(ps - ph) for ps, ph in zip(p_star.probs, p_hat.probs))


def binary_criterion(p_star, p_hat, tolerance: float) -> int:
    return 1 if absolute_bias(p_star, p_hat) <= tolerance else 0


# ---------------------------------------------------------------------------
# Utility

@dataclass(frozen=True)
class OptionUtility:
    """Payoff description for one option of a choice set."""

    label: str
    kind: str  # "threshold", "linear", "constant"
    variable: str | None = None
    threshold: float = 0.0
    direction: str = "ge"
    payoff_hit: float = 1.0
    payoff_miss: float = 0.0
    scale: float = 1.0
    offset: float = 0.0
    value: float = 0.0

    def mean_utility(self, js: se.JointSamples) -> float:
        if self.kind == "constant":
            return float(self.value)
        if self.variable is None:
            raise InvalidUtility(f"option {self.label!r} names no variable")
        if self.kind == "threshold":
            p = se.prob_event(js, self.variable, self.threshold, self.direction)
            return self.payoff_hit * p + self.payoff_miss * (1.0 - p)
        if self.kind == "linear":
            col = js.column(self.variable)
            return float(np.mean(self.scale * col + self.offset))
        raise InvalidUtility(f"unknown utility kind {self.kind!r}")

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "label", "kind", "variable", "threshold", "direction",
            "payoff_hit", "payoff_miss", "scale", "offset", "value")}


@dataclass(frozen=True)
class UtilitySpec:
    options: tuple  # of OptionUtility

    def option(self, label):
        for o in self.options:
            if o.label == label:
                return o
        raise InvalidUtility(f"no utility defined for option {label!r}")

    def option_values(self, js) -> dict:
        return {o.label: o.mean_utility(js) for o in self.options}

    def to_dict(self):
        return {"options": [o.to_dict() for o in self.options]}

    @classmethod
    def from_dict(cls, d):
        return cls(options=tuple(OptionUtility(**o) for o in d["options"]))


def expected_utility(js: se.JointSamples, utility: UtilitySpec,
                     choice: CategoricalDistribution) -> float:
    """Monte Carlo expected utility of a (possibly spread) choice."""
    values = utility.option_values(js)
    total = 0.0
    for label, p in zip(choice.labels, choice.probs):
        if p == 0.0:
            continue
        if label not in values:
            raise InvalidUtility(f"no utility defined for option {label!r}")
        total += p * values[label]
    return total


# ---------------------------------------------------------------------------
# Rewards

def comprehension_reward(d_sym: float) -> float:
    """10 * exp(-D_sym), rounded to one decimal; 10 at the optimum."""
    return round(10.0 * math.exp(-max(d_sym, 0.0)), 1)


def rationality_reward(value: float, option_values) -> float:
    """Min-max normalization of expected utility over the option set."""
    vals = list(option_values)
    v_min, v_max = min(vals), max(vals)
    if v_max == v_min:
        return 10.0
    return round(10.0 * (value - v_min) / (v_max - v_min), 1)


COMPREHENSION_KINDS = ("kl", "symmetric_kl", "absolute_bias", "binary")


@dataclass(frozen=True)
class ScoreRecord:
    objective: str
    objective_value: float
    reward: float
    entailed: CategoricalDistribution | None = None
    optimal: object = None  # CategoricalDistribution or scalar

    def to_dict(self):
        optimal = self.optimal
        if isinstance(optimal, CategoricalDistribution):
            optimal = optimal.to_dict()
        value = self.objective_value
        # unbounded divergences (response put zero mass on a supported
        # option) cannot travel as JSON numbers
        if value is not None and not math.isfinite(value):
            value = None
        return {
            "objective": self.objective,
            "objective_value": value,
            "reward": self.reward,
            "entailed": self.entailed.to_dict() if self.entailed else None,
            "optimal": optimal,
        }


def _objective_value(kind, p_star, p_hat, tolerance):
    if kind == "kl":
        return kl_divergence(p_star, p_hat)
    if kind == "symmetric_kl":
        return symmetric_kl(p_star, p_hat)
    if kind == "absolute_bias":
        return absolute_bias(p_star, p_hat)
    if kind == "binary":
        return float(binary_criterion(p_star, p_hat, tolerance))
    raise ValueError(f"unknown objective kind {kind!r}")


def task_seed(task_id: str, base_seed: int = 0) -> int:
    """Stable per-task seed for condition resampling during scoring."""
    return (zlib.crc32(task_id.encode("utf-8")) ^ (base_seed & 0xFFFFFFFF)) & 0x7FFFFFFF


def conditioned_store(task, js: se.JointSamples) -> se.JointSamples:
    """Apply the task's declared interval conditions before scoring."""
    conds = task.objective.conditions
    if not conds:
        return js
    return se.condition(js, conds, resample_size=task.objective.resample_size,
                        seed=task_seed(task.id, js.seed))


def _comprehension_score(kind, p_star, p_hat, tolerance):
    value = _objective_value(kind, p_star, p_hat, tolerance)
    # reward always decays with the symmetric divergence so that 10 is
    # attained exactly at the optimum for every comprehension objective
    d_sym = symmetric_kl(p_star, p_hat)
    return value, comprehension_reward(d_sym)


def _slider_value(task, payload):
    if payload.get("type") != "slider":
        raise InvalidResponse("task expects a slider response")
    if "value" not in payload:
        raise InvalidResponse("slider payload missing value")
    v = float(payload["value"])
    ai = task.answer_input
    if not (ai.minimum <= v <= ai.maximum):
        raise InvalidResponse("slider value outside the permitted range")
    return v


def _multibet_state(task, payload):
    if payload.get("type") != "multibet":
        raise InvalidResponse("task expects a multibet response")
    ai = task.answer_input
    s = payload.get("s")
    if not isinstance(s, (list, tuple)) or len(s) != ai.n_options:
        raise InvalidResponse("multibet payload has the wrong option count")
    try:
        state = MultiBetState(s=tuple(int(x) for x in s), m=ai.budget)
    except (TypeError, ValueError) as exc:
        raise InvalidResponse(str(exc)) from exc
    if state.total < 1:
        raise EmptyResponse("no chips placed")
    return state


def evaluate_response(task, payload: dict, js: se.JointSamples) -> ScoreRecord:
    """Score a response payload against the task's objective.

    Dispatches on the task's query metadata: value queries compare the
    confidence the model assigns to the chosen threshold against the
    target confidence, confidence queries compare slider probabilities
    against model probabilities, and identity queries score chip spreads
    either by divergence from the model's identity distribution or by
    expected utility.
    """
    obj = task.objective
    js_c = conditioned_store(task, js)
    quantity = task.query_meta.quantity

    if quantity == "value":
        tau = _slider_value(task, payload)
        p_model = se.prob_event(js_c, obj.variable, tau, obj.direction)
        p_hat = bernoulli(p_model)
        p_star = bernoulli(obj.target_confidence)
        value, reward = _comprehension_score(obj.kind, p_star, p_hat,
                                             obj.tolerance)
        return ScoreRecord(objective=obj.kind, objective_value=value,
                           reward=reward, entailed=p_hat, optimal=p_star)

    if quantity == "confidence":
        conf = _slider_value(task, payload)
        if obj.candidates:
            labels, probs = se.identity_posterior(
                js_c, obj.candidates, obj.observed, obj.window)
            target = probs[labels.index(obj.candidate_of_interest
                                        or obj.candidates[0])]
        else:
            target = se.prob_event(js_c, obj.variable, obj.threshold,
                                   obj.direction)
        p_hat = bernoulli(conf)
        p_star = bernoulli(target)
        value, reward = _comprehension_score(obj.kind, p_star, p_hat,
                                             obj.tolerance)
        return ScoreRecord(objective=obj.kind, objective_value=value,
                           reward=reward, entailed=p_hat, optimal=p_star)

    if quantity == "id":
        state = _multibet_state(task, payload)
        labels = tuple(task.answer_input.labels)
        if obj.kind == "expected_utility":
            choice = entailed_distribution(state, labels=labels)
            values = obj.utility.option_values(js_c)
            for label in labels:
                if label not in values:
                    raise InvalidUtility(f"no utility for option {label!r}")
            v = expected_utility(js_c, obj.utility, choice)
            reward = rationality_reward(v, values.values())
            best = max(values, key=values.get)
            optimal = CategoricalDistribution(
                labels=labels,
                probs=tuple(1.0 if l == best else 0.0 for l in labels))
            return ScoreRecord(objective="expected_utility",
                               objective_value=v, reward=reward,
                               entailed=choice, optimal=optimal)
        p_star = smooth_categorical(identity_target(task, js_c),
                                    budget=task.answer_input.budget,
                                    epsilon=KL_SMOOTHING)
        p_hat = entailed_distribution(state, labels=labels,
                                      epsilon=KL_SMOOTHING)
        value, reward = _comprehension_score(obj.kind, p_star, p_hat,
                                             obj.tolerance)
        displayed = entailed_distribution(state, labels=labels)
        return ScoreRecord(objective=obj.kind, objective_value=value,
                           reward=reward, entailed=displayed, optimal=p_star)

    raise ValueError(f"unknown query quantity {quantity!r}")


def identity_target(task, js_c) -> CategoricalDistribution:
    """Model-entailed distribution over options for identity queries."""
    obj = task.objective
    labels = tuple(task.answer_input.labels)
    if obj.target == "identity_posterior":
        names, probs = se.identity_posterior(js_c, obj.candidates,
                                             obj.observed, obj.window)
        return CategoricalDistribution(labels=labels, probs=tuple(probs))
    if obj.target == "event_probability":
        raw = [se.prob_event(js_c, v, obj.threshold, obj.direction)
               for v in obj.candidates]
        total = sum(raw)
        if total == 0.0:
            probs = [1.0 / len(raw)] * len(raw)
        else:
            probs = [r / total for r in raw]
        return CategoricalDistribution(labels=labels, probs=tuple(probs))
    raise ValueError(f"unknown identity target {obj.target!r}")
