"""Monte Carlo sample store for joint distributions.

A probabilistic model (prior or posterior) is represented by an N x D
matrix of joint draws with per-column metadata marking each variable as
observable or latent.  All queries are answered from the empirical
distribution; conditioning is implemented by filtering rows to the
condition's support and bootstrapping back to a fixed sample size, so no
round trip to an inference engine is ever required.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyConditionalSupport,
    InvalidSample,
    MalformedBlob,
    UnknownVariable,
)

BLOB_MAGIC = b"JSMP"
BLOB_VERSION = 1
_HEADER = struct.Struct("<4sHIH")  # magic, version, N, D

OBSERVABLE = "observable"
LATENT = "latent"


@dataclass(frozen=True)
class VariableSpec:
    """Metadata for one column of a joint sample matrix."""

    name: str
    observability: str  # "observable" or "latent"
    index: int
    unit: str = ""

    def __post_init__(self):
        if self.observability not in (OBSERVABLE, LATENT):
            raise ValueError(f"bad observability: {self.observability!r}")


@dataclass(frozen=True)
class IntervalCondition:
    """Closed interval restriction on one variable."""

    variable: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower must be <= upper")

    def to_dict(self):
        return {"variable": self.variable, "lower": self.lower, "upper": self.upper}

    @classmethod
    def from_dict(cls, d):
        return cls(d["variable"], float(d["lower"]), float(d["upper"]))


@dataclass(frozen=True)
class BoxStats:
    """Tukey box statistics: quartiles, 1.5*IQR whiskers and outliers."""

    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple = ()

    def to_dict(self):
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


def _check_schema(schema):
    names = [v.name for v in schema]
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names in schema")
    indices = sorted(v.index for v in schema)
    if indices != list(range(len(schema))):
        raise ValueError("schema indices must be a bijection onto columns")


@dataclass(frozen=True)
class JointSamples:
    """Immutable store of N joint Monte Carlo draws over D variables."""

    schema: tuple
    values: np.ndarray
    provenance: str = "posterior"  # "prior" or "posterior"
    seed: int = 0

    def __post_init__(self):
        schema = tuple(self.schema)
        object.__setattr__(self, "schema", schema)
        _check_schema(schema)
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be an N x D matrix")
        if values.shape[0] < 1:
            raise ValueError("need at least one sample row")
        if values.shape[1] != len(schema):
            raise ValueError("column count must match schema size")
        if not np.all(np.isfinite(values)):
            raise InvalidSample("non-finite value in sample matrix")
        if self.provenance not in ("prior", "posterior"):
            raise ValueError(f"bad provenance: {self.provenance!r}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_variables(self):
        return self.values.shape[1]

    def variable(self, name):
        for v in self.schema:
            if v.name == name:
                return v
        raise UnknownVariable(name)

    def column(self, name):
        return self.values[:, self.variable(name).index]


def serialize(js: JointSamples) -> bytes:
    """Encode the sample matrix as a binary blob (bit-exact round trip)."""
    n, d = js.values.shape
    header = _HEADER.pack(BLOB_MAGIC, BLOB_VERSION, n, d)
    body = np.ascontiguousarray(js.values, dtype="<f8").tobytes()
    return header + body


def load_samples(blob: bytes, schema, provenance="posterior", seed=0) -> JointSamples:
    """Decode a binary sample blob against a known schema.

    Raises MalformedBlob on any structural defect and InvalidSample if
    the payload contains non-finite values.
    """
    if len(blob) < _HEADER.size:
        raise MalformedBlob("blob shorter than header")
    magic, version, n, d = _HEADER.unpack_from(blob)
    if magic != BLOB_MAGIC:
        raise MalformedBlob("bad magic")
    if version != BLOB_VERSION:
        raise MalformedBlob(f"unsupported format version {version}")
    if d != len(schema):
        raise MalformedBlob(f"schema has {len(schema)} variables, header says {d}")
    expected = _HEADER.size + n * d * 8
    if len(blob) != expected:
        raise MalformedBlob(f"expected {expected} bytes, got {len(blob)}")
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(n, d)
    return JointSamples(schema=tuple(schema), values=values,
                        provenance=provenance, seed=seed)


def schema_to_json(schema) -> str:
    """Structured-text sidecar carrying names, observability and units."""
    ordered = sorted(schema, key=lambda v: v.index)
    return json.dumps(
        [{"name": v.name, "observability": v.observability, "unit": v.unit}
         for v in ordered],
        indent=2,
    )


def schema_from_json(text: str):
    entries = json.loads(text)
    return tuple(
        VariableSpec(name=e["name"], observability=e["observability"],
                     index=i, unit=e.get("unit", ""))
        for i, e in enumerate(entries)
    )


def marginal_stats(js: JointSamples, variable: str) -> BoxStats:
    """Box statistics of one marginal (type-7 quantiles, Tukey whiskers)."""
    col = js.column(variable)
    q1, med, q3 = np.quantile(col, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = col[(col >= lo_fence) & (col <= hi_fence)]
    # fences always bracket the quartiles, so inside is never empty
    whisker_low = float(inside.min())
    whisker_high = float(inside.max())
    outliers = col[(col < whisker_low) | (col > whisker_high)]
    return BoxStats(
        median=float(med), q1=float(q1), q3=float(q3),
        whisker_low=whisker_low, whisker_high=whisker_high,
        outliers=tuple(float(x) for x in np.sort(outliers)),
    )


def prob_event(js: JointSamples, variable: str, threshold: float,
               direction: str = "ge") -> float:
    """Empirical probability of {x >= t} or {x <= t} for one variable."""
    col = js.column(variable)
    if direction == "ge":
        return float(np.mean(col >= threshold))
    if direction == "le":
        return float(np.mean(col <= threshold))
    if direction == "lt":
        return float(np.mean(col < threshold))
    if direction == "gt":
        return float(np.mean(col > threshold))
    raise ValueError(f"bad direction: {direction!r}")


def quantile_threshold(js: JointSamples, variable: str, confidence: float) -> float:
    """Threshold t in the sample support minimizing |P(x >= t) - confidence|.

    Ties break toward the smaller threshold (conservative "at least"
    reading).
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    col = np.sort(js.column(variable))
    support = np.unique(col)
    # P(x >= t) for each candidate t in the support
    p_ge = 1.0 - np.searchsorted(col, support, side="left") / col.size
    gaps = np.abs(p_ge - confidence)
    # argmin returns the first (smallest) candidate on exact ties
    return float(support[int(np.argmin(gaps))])


def _support_mask(js: JointSamples, conditions):
    mask = np.ones(js.n_samples, dtype=bool)
    for c in conditions:
        col = js.column(c.variable)
        mask &= (col >= c.lower) & (col <= c.upper)
    return mask


def condition(js: JointSamples, conditions, resample_size: int = 1000,
              seed: int = 0) -> JointSamples:
    """Condition the joint on interval restrictions via bootstrap.

    Rows satisfying every condition are resampled i.i.d. with
    replacement up to `resample_size`.  Deterministic for a fixed seed.
    """
    mask = _support_mask(js, conditions)
    support = js.values[mask]
    if support.shape[0] == 0:
        raise EmptyConditionalSupport(
            "no samples satisfy the conditions; widen the intervals"
        )
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, support.shape[0], size=resample_size)
    return JointSamples(schema=js.schema, values=support[idx],
                        provenance=js.provenance, seed=seed)


def conditional_support(js: JointSamples, conditions) -> np.ndarray:
    """Rows satisfying all conditions, without resampling (oracle path)."""
    return js.values[_support_mask(js, conditions)]


def identity_posterior(js: JointSamples, candidates, observed: float,
                       window: float | None = None):
    """Posterior over which candidate variable generated an observed value.

    Mass for candidate i is proportional to the fraction of rows whose
    value of variable i lies within +-window/2 of the observation.  When
    `window` is None each candidate uses 1% of its own sample range.

    Returns (labels, probabilities).
    """
    if window is not None and window <= 0:
        raise ValueError("window must be positive")
    counts = []
    for name in candidates:
        col = js.column(name)
        w = window
        if w is None:
            w = 0.01 * float(col.max() - col.min())
            if w == 0.0:
                w = 1e-12
        counts.append(float(np.mean(np.abs(col - observed) <= w / 2.0)))
    total = sum(counts)
    if total == 0.0:
        raise EmptyConditionalSupport("no candidate has samples in the window")
    return list(candidates), [c / total for c in counts]


def draw(js: JointSamples, k: int, seed: int = 0) -> np.ndarray:
    """k full joint rows sampled uniformly with replacement."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, js.n_samples, size=k)
    return js.values[idx].copy()


def ordered_rows(js: JointSamples, variable: str, k: int, seed: int = 0) -> np.ndarray:
    """As draw(), then stably sorted ascending by the named variable."""
    rows = draw(js, k, seed)
    col_idx = js.variable(variable).index
    order = np.argsort(rows[:, col_idx], kind="stable")
    return rows[order]
