"""Hierarchical model of peak / off-peak queuing delays at cafes.

Cafe-level average peak wait times and peak/off-peak differences are
drawn from a global bivariate normal; observed wait times add Gaussian
noise.  Scale parameters carry normal priors on their log, and the
correlation carries a normal prior on its tangent, so sampling operates
directly on unconstrained coordinates with no Jacobian terms.

Layout of the unconstrained vector (dim = 6 + 2 * n_cafes):

    [log sigma_g_peak, log sigma_g_diff, tan rho,
     mu_g_peak, mu_g_diff, log sigma_x,
     mu_1..mu_n, b_1..b_n]
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import hmc
from .errors import InvalidParameters
from .samples import LATENT, OBSERVABLE, JointSamples, VariableSpec

_LOG_2PI = float(np.log(2.0 * np.pi))

# prior scales (standard deviations on the unconstrained coordinates)
PRIOR_SD_LOG_SIGMA_G = 0.1
PRIOR_SD_TAN_RHO = 1.0
PRIOR_SD_MU_G = 1.0
PRIOR_SD_LOG_SIGMA_X = 1.0

# synthetic ground truth used throughout tests and the demo study
GROUND_TRUTH = dict(sigma_g_peak=1.5, sigma_g_diff=0.75, rho=-0.7,
                    mu_g=(6.5, -1.75), sigma_x=0.5)


@dataclass(frozen=True)
class CafeParams:
    """Model parameters on the natural (constrained) scale."""

    sigma_g_peak: float
    sigma_g_diff: float
    rho: float
    mu_g: tuple
    sigma_x: float
    cafe_mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cafe_b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.sigma_g_peak <= 0 or self.sigma_g_diff <= 0 or self.sigma_x <= 0:
            raise InvalidParameters("scale parameters must be positive")
        if not -1.0 < self.rho < 1.0:
            raise InvalidParameters("correlation must lie in (-1, 1)")

    @property
    def covariance(self):
        sp, sd = self.sigma_g_peak, self.sigma_g_diff
        off = sp * self.rho * sd
        return np.array([[sp * sp, off], [off, sd * sd]])

    @property
    def n_cafes(self):
        return len(self.cafe_mu)


@dataclass(frozen=True)
class Dataset:
    """Rectangular design: wait times per (cafe, period, visit), minutes."""

    peak: np.ndarray      # (n_cafes, n_visits)
    off_peak: np.ndarray  # (n_cafes, n_visits)

    def __post_init__(self):
        peak = np.atleast_2d(np.asarray(self.peak, dtype=float))
        off = np.atleast_2d(np.asarray(self.off_peak, dtype=float))
        if peak.shape != off.shape:
            raise ValueError("peak and off-peak blocks must have equal shape")
        if not (np.all(np.isfinite(peak)) and np.all(np.isfinite(off))):
            raise ValueError("observations must be finite")
        object.__setattr__(self, "peak", peak)
        object.__setattr__(self, "off_peak", off)

    @property
    def n_cafes(self):
        return self.peak.shape[0]

    @property
    def n_visits(self):
        return self.peak.shape[1]

    @property
    def n_observations(self):
        return 2 * self.peak.size


def dim_for(n_cafes: int) -> int:
    return 6 + 2 * n_cafes


def to_unconstrained(params: CafeParams) -> np.ndarray:
    n = params.n_cafes
    u = np.empty(dim_for(n))
    u[0] = np.log(params.sigma_g_peak)
    u[1] = np.log(params.sigma_g_diff)
    u[2] = np.tan(params.rho)
    u[3], u[4] = params.mu_g
    u[5] = np.log(params.sigma_x)
    u[6:6 + n] = params.cafe_mu
    u[6 + n:] = params.cafe_b
    return u


def from_unconstrained(u: np.ndarray, n_cafes: int) -> CafeParams:
    u = np.asarray(u, dtype=float)
    if u.size != dim_for(n_cafes):
        raise ValueError("vector length does not match cafe count")
    return CafeParams(
        sigma_g_peak=float(np.exp(u[0])),
        sigma_g_diff=float(np.exp(u[1])),
        rho=float(np.arctan(u[2])),
        mu_g=(float(u[3]), float(u[4])),
        sigma_x=float(np.exp(u[5])),
        cafe_mu=u[6:6 + n_cafes].copy(),
        cafe_b=u[6 + n_cafes:].copy(),
    )


def simulate_dataset(globals_: CafeParams | dict, n_cafes: int, n_visits: int,
                     seed: int = 0):
    """Generate synthetic observations plus per-cafe ground truth.

    Returns (Dataset, CafeParams) where the second element carries the
    simulated cafe-level (mu_i, b_i) alongside the global parameters.
    """
    if isinstance(globals_, dict):
        globals_ = CafeParams(**globals_)
    if n_cafes < 1 or n_visits < 1:
        raise ValueError("need at least one cafe and one visit")
    cov = globals_.covariance
    # PSD is implied by |rho| < 1, but guard against degenerate input
    if np.linalg.det(cov) < 0:
        raise InvalidParameters("global covariance is not PSD")
    rng = np.random.default_rng(seed)
    effects = rng.multivariate_normal(np.asarray(globals_.mu_g), cov,
                                      size=n_cafes, method="cholesky")
    mu_i, b_i = effects[:, 0], effects[:, 1]
    peak = mu_i[:, None] + globals_.sigma_x * rng.standard_normal((n_cafes, n_visits))
    off = (mu_i + b_i)[:, None] + globals_.sigma_x * rng.standard_normal(
        (n_cafes, n_visits))
    truth = CafeParams(
        sigma_g_peak=globals_.sigma_g_peak, sigma_g_diff=globals_.sigma_g_diff,
        rho=globals_.rho, mu_g=tuple(globals_.mu_g), sigma_x=globals_.sigma_x,
        cafe_mu=mu_i, cafe_b=b_i,
    )
    return Dataset(peak=peak, off_peak=off), truth


def _unpack(u, n_cafes):
    lam_p, lam_d, eta = u[0], u[1], u[2]
    mu_g = u[3:5]
    lam_x = u[5]
    mu_i = u[6:6 + n_cafes]
    b_i = u[6 + n_cafes:]
    return lam_p, lam_d, eta, mu_g, lam_x, mu_i, b_i


def log_joint(u: np.ndarray, data: Dataset) -> float:
    """Log posterior density (up to a constant) on unconstrained coordinates."""
    u = np.asarray(u, dtype=float)
    n = data.n_cafes
    lam_p, lam_d, eta, mu_g, lam_x, mu_i, b_i = _unpack(u, n)
    rho = np.arctan(eta)
    if not abs(rho) < 1.0:
        return -np.inf
    sp, sd, sx = np.exp(lam_p), np.exp(lam_d), np.exp(lam_x)

    lp = 0.0
    # priors, evaluated directly on the unconstrained coordinates
    lp += -0.5 * (lam_p / PRIOR_SD_LOG_SIGMA_G) ** 2 - np.log(PRIOR_SD_LOG_SIGMA_G) - 0.5 * _LOG_2PI
    lp += -0.5 * (lam_d / PRIOR_SD_LOG_SIGMA_G) ** 2 - np.log(PRIOR_SD_LOG_SIGMA_G) - 0.5 * _LOG_2PI
    lp += -0.5 * (eta / PRIOR_SD_TAN_RHO) ** 2 - np.log(PRIOR_SD_TAN_RHO) - 0.5 * _LOG_2PI
    lp += float(-0.5 * np.sum((mu_g / PRIOR_SD_MU_G) ** 2)) - 2 * np.log(PRIOR_SD_MU_G) - _LOG_2PI
    lp += -0.5 * (lam_x / PRIOR_SD_LOG_SIGMA_X) ** 2 - np.log(PRIOR_SD_LOG_SIGMA_X) - 0.5 * _LOG_2PI

    # cafe-level bivariate normal
    one_m_r2 = 1.0 - rho * rho
    a = (mu_i - mu_g[0]) / sp
    c = (b_i - mu_g[1]) / sd
    quad = a * a - 2.0 * rho * a * c + c * c
    lp += float(np.sum(-_LOG_2PI - lam_p - lam_d - 0.5 * np.log(one_m_r2)
                       - quad / (2.0 * one_m_r2)))

    # likelihood
    if data.n_visits > 0:
        res_p = data.peak - mu_i[:, None]
        res_o = data.off_peak - (mu_i + b_i)[:, None]
        m = data.n_observations
        lp += float(-m * (lam_x + 0.5 * _LOG_2PI)
                    - (np.sum(res_p ** 2) + np.sum(res_o ** 2)) / (2.0 * sx * sx))
    return float(lp)


def grad_log_joint(u: np.ndarray, data: Dataset) -> np.ndarray:
    """Analytic gradient of log_joint for every unconstrained coordinate."""
    u = np.asarray(u, dtype=float)
    n = data.n_cafes
    lam_p, lam_d, eta, mu_g, lam_x, mu_i, b_i = _unpack(u, n)
    rho = np.arctan(eta)
    sp, sd, sx = np.exp(lam_p), np.exp(lam_d), np.exp(lam_x)
    g = 1.0 / (1.0 - rho * rho)

    a = (mu_i - mu_g[0]) / sp
    c = (b_i - mu_g[1]) / sd
    quad = a * a - 2.0 * rho * a * c + c * c
    am = a - rho * c
    cm = c - rho * a

    grad = np.zeros_like(u)
    grad[0] = -lam_p / PRIOR_SD_LOG_SIGMA_G ** 2 + float(np.sum(-1.0 + g * a * am))
    grad[1] = -lam_d / PRIOR_SD_LOG_SIGMA_G ** 2 + float(np.sum(-1.0 + g * c * cm))
    dlp_drho = float(np.sum(rho * g - rho * g * g * quad + g * a * c))
    grad[2] = -eta / PRIOR_SD_TAN_RHO ** 2 + dlp_drho / (1.0 + eta * eta)
    grad[3] = -mu_g[0] / PRIOR_SD_MU_G ** 2 + float(np.sum(g * am / sp))
    grad[4] = -mu_g[1] / PRIOR_SD_MU_G ** 2 + float(np.sum(g * cm / sd))
    grad[5] = -lam_x / PRIOR_SD_LOG_SIGMA_X ** 2

    d_mu = -g * am / sp
    d_b = -g * cm / sd

    if data.n_visits > 0:
        res_p = data.peak - mu_i[:, None]
        res_o = data.off_peak - (mu_i + b_i)[:, None]
        inv_var = 1.0 / (sx * sx)
        d_mu = d_mu + inv_var * (res_p.sum(axis=1) + res_o.sum(axis=1))
        d_b = d_b + inv_var * res_o.sum(axis=1)
        grad[5] += float(-data.n_observations
                         + (np.sum(res_p ** 2) + np.sum(res_o ** 2)) * inv_var)

    grad[6:6 + n] = d_mu
    grad[6 + n:] = d_b
    return grad


def initial_point(data: Dataset) -> np.ndarray:
    """Data-driven starting point with finite density."""
    mu0 = data.peak.mean(axis=1)
    b0 = data.off_peak.mean(axis=1) - mu0
    u = np.zeros(dim_for(data.n_cafes))
    u[3] = np.clip(mu0.mean(), -3, 10)
    u[4] = np.clip(b0.mean(), -5, 5)
    resid = np.concatenate([
        (data.peak - mu0[:, None]).ravel(),
        (data.off_peak - (mu0 + b0)[:, None]).ravel(),
    ])
    s = resid.std()
    u[5] = np.log(s) if s > 0 else 0.0
    u[6:6 + data.n_cafes] = mu0
    u[6 + data.n_cafes:] = b0
    return u


def fit(data: Dataset, n_samples=20000, warmup=1000, step_size=None,
        n_leapfrog=32, seed=0) -> hmc.HmcResult:
    """Posterior sampling via HMC; tunes the step size with a pilot run
    when none is given."""
    logp = lambda q: log_joint(q, data)
    grad = lambda q: grad_log_joint(q, data)
    init = initial_point(data)
    if step_size is None:
        step_size = hmc.tune_step_size(logp, grad, init, target=0.8,
                                       n_leapfrog=n_leapfrog, initial=0.05,
                                       seed=seed + 1)
    return hmc.hmc_sample(logp, grad, init, n_samples=n_samples, warmup=warmup,
                          step_size=step_size, n_leapfrog=n_leapfrog, seed=seed)


GLOBAL_NAMES = ("sigma_g_peak", "sigma_g_diff", "rho",
                "mu_g_peak", "mu_g_diff", "sigma_x")


def chain_params(chain: np.ndarray, n_cafes: int) -> dict:
    """Constrained-scale views of an unconstrained chain."""
    chain = np.asarray(chain)
    return {
        "sigma_g_peak": np.exp(chain[:, 0]),
        "sigma_g_diff": np.exp(chain[:, 1]),
        "rho": np.arctan(chain[:, 2]),
        "mu_g_peak": chain[:, 3],
        "mu_g_diff": chain[:, 4],
        "sigma_x": np.exp(chain[:, 5]),
        "cafe_mu": chain[:, 6:6 + n_cafes],
        "cafe_b": chain[:, 6 + n_cafes:],
    }


def posterior_predictive(chain: np.ndarray, n_cafes: int, seed: int = 0,
                         cafe_names=None) -> JointSamples:
    """One joint predictive draw per retained posterior draw.

    Output columns cover predictive wait times (observable) and the
    latent cafe-level and global parameters.
    """
    chain = np.asarray(chain)
    if chain.ndim != 2 or chain.shape[0] < 1:
        raise ValueError("chain must be a non-empty (S, dim) matrix")
    if chain.shape[1] != dim_for(n_cafes):
        raise ValueError("chain width does not match cafe count")
    if cafe_names is None:
        cafe_names = [f"cafe{i + 1}" for i in range(n_cafes)]
    p = chain_params(chain, n_cafes)
    rng = np.random.default_rng(seed)
    s = chain.shape[0]
    sx = p["sigma_x"][:, None]
    x_peak = p["cafe_mu"] + sx * rng.standard_normal((s, n_cafes))
    x_off = p["cafe_mu"] + p["cafe_b"] + sx * rng.standard_normal((s, n_cafes))

    columns = []
    schema = []

    def add(name, obs, values, unit="minutes"):
        schema.append(VariableSpec(name=name, observability=obs,
                                   index=len(columns), unit=unit))
        columns.append(values)

    for i, name in enumerate(cafe_names):
        add(f"wait_peak_{name}", OBSERVABLE, x_peak[:, i])
        add(f"wait_offpeak_{name}", OBSERVABLE, x_off[:, i])
        add(f"mean_peak_{name}", LATENT, p["cafe_mu"][:, i])
        add(f"diff_offpeak_{name}", LATENT, p["cafe_b"][:, i])
    add("sigma_g_peak", LATENT, p["sigma_g_peak"])
    add("sigma_g_diff", LATENT, p["sigma_g_diff"])
    add("rho", LATENT, p["rho"], unit="")
    add("mu_g_peak", LATENT, p["mu_g_peak"])
    add("mu_g_diff", LATENT, p["mu_g_diff"])
    add("sigma_x", LATENT, p["sigma_x"])

    return JointSamples(schema=tuple(schema), values=np.column_stack(columns),
                        provenance="posterior", seed=seed)


def run_manifest(ground_truth: CafeParams, data_seed: int, chain_seed: int,
                 n_samples: int, warmup: int, step_size: float,
                 n_leapfrog: int) -> str:
    """Structured-text record of a simulation + inference run."""
    return json.dumps({
        "ground_truth": {
            "sigma_g_peak": ground_truth.sigma_g_peak,
            "sigma_g_diff": ground_truth.sigma_g_diff,
            "rho": ground_truth.rho,
            "mu_g": list(ground_truth.mu_g),
            "sigma_x": ground_truth.sigma_x,
            "cafe_mu": ground_truth.cafe_mu.tolist(),
            "cafe_b": ground_truth.cafe_b.tolist(),
        },
        "seeds": {"data": data_seed, "chain": chain_seed},
        "hmc": {"n_samples": n_samples, "warmup": warmup,
                "step_size": step_size, "n_leapfrog": n_leapfrog},
    }, indent=2)
