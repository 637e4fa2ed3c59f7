"""Quantitative evaluation framework for Bayesian model visualisations."""

from . import agents, analysis, cafe, cafe_study, hmc, samples, scoring, tasks
from .samples import (
    BoxStats,
    IntervalCondition,
    JointSamples,
    VariableSpec,
    condition,
    draw,
    identity_posterior,
    load_samples,
    marginal_stats,
    ordered_rows,
    prob_event,
    quantile_threshold,
    serialize,
)
from .scoring import (
    CategoricalDistribution,
    MultiBetState,
    ScoreRecord,
    UtilitySpec,
    entailed_distribution,
    evaluate_response,
    expected_utility,
    kl_divergence,
    multibet_click,
    symmetric_kl,
)
from .store import StudyStore
from .tasks import StudyTemplate, TaskSpec, expand_for_user, parse_template

__version__ = "0.1.0"
