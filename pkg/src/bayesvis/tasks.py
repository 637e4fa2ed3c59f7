"""Study task specifications and randomizable study templates.

A study template is a nested tree of task lists.  Ordered lists keep
their template order, unordered lists are shuffled per participant, and
merge lists expand to the outer product of two partial-task lists.  An
optional choose-k attribute on unordered lists selects a random subset
of children per participant.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace

from .errors import TemplateError
from .samples import IntervalCondition
from .scoring import UtilitySpec

VISUALISATIONS = ("boxplot", "hop", "interactive_boxplot", "bhop")
INTERACTIVE_VIS = ("interactive_boxplot", "bhop")
ANIMATED_VIS = ("hop", "bhop")

OBSERVABILITIES = ("observable", "latent")
QUANTITIES = ("value", "confidence", "id")
CONDITIONINGS = ("posterior", "posterior_side_info")

OBJECTIVE_KINDS = ("kl", "symmetric_kl", "absolute_bias", "binary",
                   "expected_utility")


@dataclass(frozen=True)
class SliderInput:
    minimum: float
    maximum: float
    step: float

    type = "slider"

    def to_dict(self):
        return {"type": "slider", "min": self.minimum, "max": self.maximum,
                "step": self.step}


@dataclass(frozen=True)
class MultiBetInput:
    n_options: int
    budget: int
    labels: tuple

    type = "multibet"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != self.n_options:
            raise ValueError("label count must equal the option count")
        if self.n_options < 1 or self.budget < 1:
            raise ValueError("need at least one option and one chip")

    def to_dict(self):
        return {"type": "multibet", "n": self.n_options, "m": self.budget,
                "labels": list(self.labels)}


def answer_input_from_dict(d):
    if d["type"] == "slider":
        return SliderInput(minimum=float(d["min"]), maximum=float(d["max"]),
                           step=float(d.get("step", 0.01)))
    if d["type"] == "multibet":
        return MultiBetInput(n_options=int(d["n"]), budget=int(d["m"]),
                             labels=tuple(d["labels"]))
    raise ValueError(f"unknown answer input type {d['type']!r}")


@dataclass(frozen=True)
class QueryMeta:
    observability: str
    quantity: str
    conditioning: str = "posterior"

    def __post_init__(self):
        if self.observability not in OBSERVABILITIES:
            raise ValueError(f"bad observability {self.observability!r}")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"bad quantity {self.quantity!r}")
        if self.conditioning not in CONDITIONINGS:
            raise ValueError(f"bad conditioning {self.conditioning!r}")

    def to_dict(self):
        return {"observability": self.observability, "quantity": self.quantity,
                "conditioning": self.conditioning}


@dataclass(frozen=True)
class ObjectiveSpec:
    """Numerical objective a task is scored against."""

    kind: str
    variable: str | None = None
    threshold: float | None = None
    direction: str = "ge"
    target_confidence: float | None = None
    candidates: tuple | None = None
    observed: float | None = None
    window: float | None = None
    candidate_of_interest: str | None = None
    target: str | None = None  # "identity_posterior" or "event_probability"
    tolerance: float | None = None
    utility: UtilitySpec | None = None
    conditions: tuple = ()
    resample_size: int = 1000

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.candidates is not None:
            object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "conditions", tuple(self.conditions))

    def to_dict(self):
        d = {"kind": self.kind, "direction": self.direction,
             "resample_size": self.resample_size}
        for k in ("variable", "threshold", "target_confidence", "observed",
                  "window", "candidate_of_interest", "target", "tolerance"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        if self.candidates is not None:
            d["candidates"] = list(self.candidates)
        if self.utility is not None:
            d["utility"] = self.utility.to_dict()
        if self.conditions:
            d["conditions"] = [c.to_dict() for c in self.conditions]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            variable=d.get("variable"),
            threshold=d.get("threshold"),
            direction=d.get("direction", "ge"),
            target_confidence=d.get("target_confidence"),
            candidates=tuple(d["candidates"]) if "candidates" in d else None,
            observed=d.get("observed"),
            window=d.get("window"),
            candidate_of_interest=d.get("candidate_of_interest"),
            target=d.get("target"),
            tolerance=d.get("tolerance"),
            utility=UtilitySpec.from_dict(d["utility"]) if d.get("utility") else None,
            conditions=tuple(IntervalCondition.from_dict(c)
                             for c in d.get("conditions", ())),
            resample_size=int(d.get("resample_size", 1000)),
        )


@dataclass(frozen=True)
class TaskSpec:
    id: str
    context: str
    query: str
    visualisation: str
    answer_input: object
    query_meta: QueryMeta
    objective: ObjectiveSpec
    model_ref: str = ""
    query_id: str = ""
    feedback_enabled: bool = True

    def __post_init__(self):
        if self.visualisation not in VISUALISATIONS:
            raise ValueError(f"unknown visualisation {self.visualisation!r}")
        self._check_consistency()

    def _check_consistency(self):
        q = self.query_meta.quantity
        ai = self.answer_input
        if q in ("value", "confidence") and ai.type != "slider":
            raise ValueError(f"{q} queries require a slider input")
        if q == "id":
            if ai.type != "multibet":
                raise ValueError("identity queries require a multibet input")
            obj = self.objective
            if obj.kind == "expected_utility":
                if obj.utility is None:
                    raise ValueError("expected_utility objective needs a utility")
                known = {o.label for o in obj.utility.options}
                if not set(ai.labels) <= known:
                    raise ValueError("utility must cover every option label")
            else:
                if obj.target is None or obj.candidates is None:
                    raise ValueError(
                        "identity comprehension needs a target and candidates")
                if len(obj.candidates) != ai.n_options:
                    raise ValueError(
                        "candidate count must match the option count")

    @property
    def interactive(self):
        return self.visualisation in INTERACTIVE_VIS

    @property
    def animated(self):
        return self.visualisation in ANIMATED_VIS

    def to_dict(self):
        return {
            "id": self.id,
            "query_id": self.query_id,
            "context": self.context,
            "query": self.query,
            "visualisation": self.visualisation,
            "answer_input": self.answer_input.to_dict(),
            "query_meta": self.query_meta.to_dict(),
            "objective": self.objective.to_dict(),
            "model_ref": self.model_ref,
            "feedback_enabled": self.feedback_enabled,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            query_id=d.get("query_id", ""),
            context=d.get("context", ""),
            query=d.get("query", ""),
            visualisation=d["visualisation"],
            answer_input=answer_input_from_dict(d["answer_input"]),
            query_meta=QueryMeta(**d["query_meta"]),
            objective=ObjectiveSpec.from_dict(d["objective"]),
            model_ref=d.get("model_ref", ""),
            feedback_enabled=bool(d.get("feedback_enabled", True)),
        )


# ---------------------------------------------------------------------------
# Template tree

@dataclass(frozen=True)
class TaskNode:
    spec: TaskSpec

    kind = "task"


@dataclass(frozen=True)
class MergeNode:
    left: tuple   # of partial task dicts
    right: tuple  # of partial task dicts

    kind = "mergelist"


@dataclass(frozen=True)
class ListNode:
    children: tuple
    ordered: bool = True
    choose_k: int | None = None

    kind = "tasklist"


@dataclass(frozen=True)
class StudyTemplate:
    root: object
    document: dict = field(default_factory=dict, compare=False)

    def leaves(self):
        return _resolve_leaves(self.root)


def _merge_partials(left: dict, right: dict, path):
    overlap = (set(left) & set(right)) - {"id"}
    if overlap:
        raise TemplateError(
            f"partial tasks share fields {sorted(overlap)}", path)
    merged = {**left, **right}
    if "id" in left and "id" in right:
        merged["id"] = f"{left['id']}__{right['id']}"
    return merged


def _parse_node(doc, path):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise TemplateError("node must be an object with a 'kind' field", path)
    kind = doc["kind"]
    if kind == "task":
        try:
            spec = TaskSpec.from_dict(doc["spec"])
        except (KeyError, ValueError, TypeError) as exc:
            raise TemplateError(f"invalid task: {exc}", path) from exc
        return TaskNode(spec=spec)
    if kind == "mergelist":
        left = tuple(doc.get("left", ()))
        right = tuple(doc.get("right", ()))
        if not left or not right:
            raise TemplateError("mergelist needs non-empty left and right", path)
        node = MergeNode(left=left, right=right)
        # validate every product leaf now so errors carry a path
        for i, l in enumerate(left):
            for j, r in enumerate(right):
                merged = _merge_partials(l, r, path + (f"left[{i}]xright[{j}]",))
                try:
                    TaskSpec.from_dict(merged)
                except (KeyError, ValueError, TypeError) as exc:
                    raise TemplateError(
                        f"incomplete merged task: {exc}",
                        path + (f"left[{i}]xright[{j}]",)) from exc
        return node
    if kind == "tasklist":
        children = doc.get("children", [])
        if not children:
            raise TemplateError("tasklist has no children", path)
        parsed = tuple(_parse_node(c, path + (i,))
                       for i, c in enumerate(children))
        choose_k = doc.get("choose_k")
        if choose_k is not None:
            choose_k = int(choose_k)
            if not 1 <= choose_k <= len(parsed):
                raise TemplateError("choose_k out of range", path)
        return ListNode(children=parsed, ordered=bool(doc.get("ordered", True)),
                        choose_k=choose_k)
    raise TemplateError(f"unknown node kind {kind!r}", path)


def _resolve_leaves(node):
    if node.kind == "task":
        return [node.spec]
    if node.kind == "mergelist":
        return [TaskSpec.from_dict(_merge_partials(l, r, ()))
                for l in node.left for r in node.right]
    out = []
    for c in node.children:
        out.extend(_resolve_leaves(c))
    return out


def parse_template(document) -> StudyTemplate:
    """Parse and validate a structured-text study template.

    Accepts a JSON string, a {"root": node} wrapper, or a bare node.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise TemplateError(f"not valid JSON: {exc}") from exc
    doc = document.get("root", document) if isinstance(document, dict) else document
    root = _parse_node(doc, ())
    template = StudyTemplate(root=root, document=document)
    ids = [t.id for t in template.leaves()]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise TemplateError(f"duplicate task ids: {sorted(dupes)}")
    return template


def _expand(node, rng: random.Random):
    if node.kind == "task":
        return [node.spec]
    if node.kind == "mergelist":
        return _resolve_leaves(node)
    blocks = [_expand(c, rng) for c in node.children]
    if node.choose_k is not None:
        idx = rng.sample(range(len(blocks)), node.choose_k)
        if node.ordered:
            idx.sort()
        blocks = [blocks[i] for i in idx]
    if not node.ordered:
        rng.shuffle(blocks)  # Fisher-Yates over immediate children
    return [t for block in blocks for t in block]


def expand_for_user(template: StudyTemplate, seed: int):
    """Depth-first expansion into one participant's ordered task list."""
    rng = random.Random(seed)
    return _expand(template.root, rng)
