"""Worked study definition over the cafe queuing-delay model.

Builds a joint sample blob for a handful of cafes plus study templates
covering the full query space: two observability levels, three query
quantities, plain and side-information conditioning, and two variants
of every combination (24 queries).  The default template assigns each
query one non-interactive and one interactive visualisation, grouped
into two blocks whose order is randomized per participant (48 tasks).
"""

from __future__ import annotations

import numpy as np

from . import cafe
from .samples import JointSamples
from .tasks import parse_template

CAFE_NAMES = ("Sandys", "Mesys", "Wichys", "Tommys")

SLIDER_MINUTES = {"type": "slider", "min": 0.0, "max": 15.0, "step": 0.05}
SLIDER_PROB = {"type": "slider", "min": 0.0, "max": 1.0, "step": 0.01}


def build_cafe_blob(n_rows: int = 4000, cafe_names=CAFE_NAMES,
                    seed: int = 7, chain: np.ndarray | None = None) -> JointSamples:
    """Joint samples over wait times and latent cafe effects.

    By default rows are generated from the synthetic ground truth:
    cafe-level effects are drawn from the global bivariate normal and
    wait times from the observation noise model.  Pass a posterior
    chain to build the blob from inference output instead.
    """
    n_cafes = len(cafe_names)
    if chain is None:
        truth = cafe.GROUND_TRUTH
        rng = np.random.default_rng(seed)
        g = cafe.CafeParams(**truth)
        effects = rng.multivariate_normal(
            np.asarray(truth["mu_g"]), g.covariance,
            size=(n_rows, n_cafes), method="cholesky")
        chain = np.empty((n_rows, cafe.dim_for(n_cafes)))
        chain[:, 0] = np.log(truth["sigma_g_peak"])
        chain[:, 1] = np.log(truth["sigma_g_diff"])
        chain[:, 2] = np.tan(truth["rho"])
        chain[:, 3] = truth["mu_g"][0]
        chain[:, 4] = truth["mu_g"][1]
        chain[:, 5] = np.log(truth["sigma_x"])
        chain[:, 6:6 + n_cafes] = effects[:, :, 0]
        chain[:, 6 + n_cafes:] = effects[:, :, 1]
    return cafe.posterior_predictive(chain, n_cafes, seed=seed + 1,
                                     cafe_names=cafe_names)


def _variant(i):
    return {
        "cafe": ("Mesys", "Wichys")[i],
        "threshold": (5.0, 7.0)[i],
        "confidence": (0.9, 0.75)[i],
        "observed": (6.0, 5.0)[i],
        "side_info": (
            {"variable": "wait_peak_Sandys", "lower": 3.5, "upper": 4.0},
            {"variable": "wait_peak_Tommys", "lower": 5.5, "upper": 6.5},
        )[i],
    }


def _multibet(labels):
    return {"type": "multibet", "n": len(labels), "m": 10,
            "labels": list(labels)}


def cafe_queries(model_ref: str):
    """The 24 query partials: observability x quantity x conditioning x
    two variants."""
    wait_vars = [f"wait_peak_{c}" for c in CAFE_NAMES]
    queries = []
    qn = 0
    for variant_idx in (0, 1):
        v = _variant(variant_idx)
        wait_var = f"wait_peak_{v['cafe']}"
        mean_var = f"mean_peak_{v['cafe']}"
        for conditioning in ("posterior", "posterior_side_info"):
            conds = [v["side_info"]] if conditioning == "posterior_side_info" else []
            side_text = (" You also know (not shown in the plot) that the "
                         f"wait at {v['side_info']['variable'].split('_')[-1]} "
                         f"is currently between {v['side_info']['lower']} and "
                         f"{v['side_info']['upper']} minutes."
                         if conds else "")
            base_context = ("A mobile app shows the long-term distribution of "
                            "wait times across nearby sandwich shops."
                            + side_text)

            def q(observability, quantity, query_text, answer_input, objective):
                nonlocal qn
                qn += 1
                objective = dict(objective)
                if conds:
                    objective["conditions"] = conds
                return {
                    "id": f"Q{qn:02d}",
                    "query_id": f"Q{qn:02d}",
                    "context": base_context,
                    "query": query_text,
                    "answer_input": answer_input,
                    "query_meta": {"observability": observability,
                                   "quantity": quantity,
                                   "conditioning": conditioning},
                    "objective": objective,
                    "model_ref": model_ref,
                    "feedback_enabled": True,
                }

            queries.append(q(
                "observable", "value",
                f"What wait do you expect at most at {v['cafe']} with "
                f"{int(v['confidence'] * 100)}% confidence?",
                SLIDER_MINUTES,
                {"kind": "symmetric_kl", "variable": wait_var,
                 "target_confidence": v["confidence"], "direction": "ge"}))
            queries.append(q(
                "latent", "value",
                f"What is the average peak wait at {v['cafe']} at least, "
                f"with {int(v['confidence'] * 100)}% confidence?",
                SLIDER_MINUTES,
                {"kind": "symmetric_kl", "variable": mean_var,
                 "target_confidence": v["confidence"], "direction": "ge"}))
            queries.append(q(
                "observable", "confidence",
                f"How confident are you that the next wait at {v['cafe']} "
                f"is at least {v['threshold']} minutes?",
                SLIDER_PROB,
                {"kind": "symmetric_kl", "variable": wait_var,
                 "threshold": v["threshold"], "direction": "ge"}))
            queries.append(q(
                "latent", "confidence",
                f"A friend waited exactly {v['observed']} minutes. How "
                f"confident are you that she visited {v['cafe']}?",
                SLIDER_PROB,
                {"kind": "symmetric_kl", "candidates": wait_vars,
                 "observed": v["observed"], "window": 0.5,
                 "candidate_of_interest": wait_var}))
            if variant_idx == 0:
                utility = {"options": [
                    {"label": c, "kind": "linear",
                     "variable": f"wait_peak_{c}", "scale": -1.0}
                    for c in CAFE_NAMES]}
                rationale = "Which shop do you pick to minimize your expected wait?"
            else:
                utility = {"options": [
                    {"label": c, "kind": "threshold",
                     "variable": f"wait_peak_{c}",
                     "threshold": v["threshold"], "direction": "le",
                     "payoff_hit": 1.0, "payoff_miss": 0.0}
                    for c in CAFE_NAMES]}
                rationale = (f"Which shop do you pick to be served within "
                             f"{v['threshold']} minutes?")
            queries.append(q(
                "observable", "id", rationale, _multibet(CAFE_NAMES),
                {"kind": "expected_utility", "utility": utility}))
            queries.append(q(
                "latent", "id",
                f"A friend waited exactly {v['observed']} minutes. Spread "
                "your chips over the shops she most likely visited.",
                _multibet(CAFE_NAMES),
                {"kind": "symmetric_kl", "target": "identity_posterior",
                 "candidates": wait_vars, "observed": v["observed"],
                 "window": 0.5}))
    return queries


def _with_vis(partial, vis):
    out = dict(partial)
    out["id"] = f"{partial['id']}__{vis}"
    out["visualisation"] = vis
    return out


def study_template_48(model_ref: str):
    """Two-block design: every query once non-interactively and once
    interactively; block order and within-block order randomized."""
    queries = cafe_queries(model_ref)
    non_interactive, interactive = [], []
    for i, partial in enumerate(queries):
        vis_pair = ("boxplot", "bhop") if i % 2 == 0 else ("hop", "interactive_boxplot")
        non_interactive.append(
            {"kind": "task", "spec": _with_vis(partial, vis_pair[0])})
        interactive.append(
            {"kind": "task", "spec": _with_vis(partial, vis_pair[1])})
    document = {"root": {
        "kind": "tasklist", "ordered": False, "children": [
            {"kind": "tasklist", "ordered": False, "children": non_interactive},
            {"kind": "tasklist", "ordered": False, "children": interactive},
        ]}}
    return parse_template(document)


def study_template_24(model_ref: str):
    """Compact outer-product design: 12 queries x 2 visualisations via a
    merge list inside an unordered list."""
    queries = cafe_queries(model_ref)[:12]
    document = {"root": {
        "kind": "tasklist", "ordered": False, "children": [
            {"kind": "mergelist",
             "left": queries,
             "right": [{"id": "boxplot", "visualisation": "boxplot"},
                       {"id": "hop", "visualisation": "hop"}]},
        ]}}
    return parse_template(document)
