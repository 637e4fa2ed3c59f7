import numpy as np
import pytest

from bayesvis.samples import JointSamples, VariableSpec


def make_store(values, names=None, observability=None, provenance="posterior",
               seed=0):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == 1 and values.shape[1] > 1 and (
            names is None or len(names) == 1):
        values = values.T
    d = values.shape[1]
    if names is None:
        names = [f"v{i}" for i in range(d)]
    if observability is None:
        observability = ["observable"] * d
    schema = tuple(VariableSpec(name=n, observability=o, index=i)
                   for i, (n, o) in enumerate(zip(names, observability)))
    return JointSamples(schema=schema, values=values, provenance=provenance,
                        seed=seed)


@pytest.fixture(scope="session")
def correlated_store():
    """20,000 rows of a correlated trivariate Gaussian, means well away
    from zero so relative errors are meaningful."""
    rng = np.random.default_rng(1234)
    mean = np.array([10.0, 12.0, 8.0])
    cov = np.array([[1.0, 0.7, -0.3],
                    [0.7, 1.5, 0.2],
                    [-0.3, 0.2, 0.8]])
    values = rng.multivariate_normal(mean, cov, size=20000)
    return make_store(values, names=["a", "b", "c"])


@pytest.fixture(scope="session")
def cafe_blob():
    from bayesvis.cafe_study import build_cafe_blob
    return build_cafe_blob(n_rows=4000, seed=7)
