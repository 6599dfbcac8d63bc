"""Monte Carlo checks of the coverage quadrature.

Two levels:

* reduced form: draw (G, H) bivariate normal with means (0, gamma), W an
  independent scaled chi, and Z = (G - rho (H - gamma)) / sqrt(1 - rho^2);
* full regression: draw the response vector, fit least squares and build
  the intervals I and J directly.

Both also draw an independent replicate (the genie data) that reuses the
original test decision, which gives K*. Replications are cut into fixed
blocks; block ``b`` draws from a Philox generator keyed on ``(seed, b)``, so
results do not depend on how many worker streams process the blocks.
Indicator counts are integers and float moments are merged with ``fsum``
in block order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .coverage import DeficitBreakdown, Scenario
from .distributions import t_quantile

MIN_REPLICATIONS = 10_000

ESTIMATE_FIELDS = (
    "p_accept", "p_J", "p_J_and_accept", "p_I_and_accept",
    "coverage_K", "coverage_K_star", "d_wm", "d_rd",
)
_COUNTS = ("accept", "I", "J", "J_accept", "I_accept", "K", "K_star", "K_and_K_star")
_MOMENTS = ("g", "h", "gg", "hh", "gh", "z", "zz", "zh")


@dataclass(frozen=True)
class MonteCarloConfig:
    replications: int = 10_000_000
    seed: int = 42
    stream_count: int = 1
    block_size: int = 65_536

    def __post_init__(self):
        if self.replications < MIN_REPLICATIONS:
            raise ValueError(f"replications must be at least {MIN_REPLICATIONS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_count < 1 or self.block_size < 1:
            raise ValueError("stream_count and block_size must be positive")

    def blocks(self) -> list[tuple[int, int]]:
        n_full, rest = divmod(self.replications, self.block_size)
        sizes = [self.block_size] * n_full + ([rest] if rest else [])
        return list(enumerate(sizes))


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(block)))


@dataclass
class ReducedDraw:
    """Arrays of (G, H, W, Z) for one batch of replications."""

    g: np.ndarray
    h: np.ndarray
    w: np.ndarray
    z: np.ndarray


def draw_reduced(rho: float, gamma: float, m: int, size: int, rng: np.random.Generator) -> ReducedDraw:
    e = rng.standard_normal((2, size))
    r = rng.chisquare(m, size)
    s = math.sqrt(1.0 - rho * rho)
    g = e[0]
    h = gamma + rho * e[0] + s * e[1]
    z = (g - rho * (h - gamma)) / s
    return ReducedDraw(g=g, h=h, w=np.sqrt(r / m), z=z)


class Estimate(NamedTuple):
    value: float
    se: float


@dataclass
class MCEstimates:
    replications: int
    p_accept: Estimate
    p_J: Estimate
    p_J_and_accept: Estimate
    p_I_and_accept: Estimate
    coverage_K: Estimate
    coverage_K_star: Estimate
    d_wm: Estimate
    d_rd: Estimate
    p_I: Estimate
    counts: dict = field(default_factory=dict)
    moments: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)

    def field_items(self):
        return [(name, getattr(self, name)) for name in ESTIMATE_FIELDS]

    def as_dict(self) -> dict:
        out = {name: {"estimate": e.value, "se": e.se} for name, e in self.field_items()}
        out["p_I"] = {"estimate": self.p_I.value, "se": self.p_I.se}
        out["replications"] = self.replications
        if self.derived:
            out["derived"] = dict(self.derived)
        return out


def _proportion(count: int, n: int) -> Estimate:
    p = count / n
    return Estimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / n))


def _tally(acc, in_i, in_j, in_i_star, in_j_star, g, h, z) -> dict:
    k = np.where(acc, in_j, in_i)
    k_star = np.where(acc, in_j_star, in_i_star)
    counts = {
        "accept": int(np.count_nonzero(acc)),
        "I": int(np.count_nonzero(in_i)),
        "J": int(np.count_nonzero(in_j)),
        "J_accept": int(np.count_nonzero(in_j & acc)),
        "I_accept": int(np.count_nonzero(in_i & acc)),
        "K": int(np.count_nonzero(k)),
        "K_star": int(np.count_nonzero(k_star)),
        "K_and_K_star": int(np.count_nonzero(k & k_star)),
    }
    moments = {
        "g": float(np.sum(g)), "h": float(np.sum(h)),
        "gg": float(np.dot(g, g)), "hh": float(np.dot(h, h)), "gh": float(np.dot(g, h)),
        "z": float(np.sum(z)), "zz": float(np.dot(z, z)), "zh": float(np.dot(z, h)),
    }
    return {"counts": counts, "moments": moments}


def _run_blocks(work, config: MonteCarloConfig) -> tuple[dict, dict]:
    blocks = config.blocks()
    if config.stream_count == 1:
        parts = [work(b, n) for b, n in blocks]
    else:
        with ThreadPoolExecutor(max_workers=config.stream_count) as pool:
            parts = list(pool.map(lambda bn: work(*bn), blocks))
    counts = {k: sum(p["counts"][k] for p in parts) for k in _COUNTS}
    moments = {k: math.fsum(p["moments"][k] for p in parts) for k in _MOMENTS}
    return counts, moments


def _estimates(counts: dict, moments: dict, n: int, nominal: float) -> MCEstimates:
    k = _proportion(counts["K"], n)
    k_star = _proportion(counts["K_star"], n)
    d_rd = k_star.value - k.value
    # the genie and original coverage indicators are dependent: the SE of the
    # difference uses P(exactly one of them covers)
    disagree = (counts["K"] + counts["K_star"] - 2 * counts["K_and_K_star"]) / n
    d_rd_se = math.sqrt(max(disagree - d_rd * d_rd, 0.0) / n)
    return MCEstimates(
        replications=n,
        p_accept=_proportion(counts["accept"], n),
        p_J=_proportion(counts["J"], n),
        p_J_and_accept=_proportion(counts["J_accept"], n),
        p_I_and_accept=_proportion(counts["I_accept"], n),
        coverage_K=k,
        coverage_K_star=k_star,
        d_wm=Estimate(nominal - k_star.value, k_star.se),
        d_rd=Estimate(d_rd, d_rd_se),
        p_I=_proportion(counts["I"], n),
        counts=counts,
        moments={key: v / n for key, v in moments.items()},
    )


def simulate_reduced(scenario: Scenario, gamma: float, config: MonteCarloConfig = MonteCarloConfig()) -> MCEstimates:
    """Estimate every coverage quantity from reduced-form draws of (G, H, W, Z)."""
    m, rho = scenario.m, scenario.rho
    t_acc, t_full, t_sub = scenario.t_accept, scenario.t_full, scenario.t_sub
    shift = rho * gamma / math.sqrt(1.0 - rho * rho)

    def intervals(d: ReducedDraw):
        in_i = np.abs(d.g) <= t_full * d.w
        half = t_sub * np.sqrt((m * d.w * d.w + d.h * d.h) / (m + 1.0))
        in_j = (d.z >= shift - half) & (d.z <= shift + half)
        return in_i, in_j

    def work(block, size):
        rng = block_rng(config.seed, block)
        d = draw_reduced(rho, gamma, m, size, rng)
        genie = draw_reduced(rho, gamma, m, size, rng)
        acc = np.abs(d.h) < t_acc * d.w
        in_i, in_j = intervals(d)
        in_i_star, in_j_star = intervals(genie)
        return _tally(acc, in_i, in_j, in_i_star, in_j_star, d.g, d.h, d.z)

    counts, moments = _run_blocks(work, config)
    est = _estimates(counts, moments, config.replications, scenario.nominal_coverage)
    est.derived = {"gamma": float(gamma), "rho": float(rho), "m": m}
    return est


@dataclass(frozen=True, eq=False)
class RegressionSpec:
    """Full linear model Y = X beta + eps, eps ~ N(0, sigma^2 I), with the
    parameter of interest theta = a'beta and the constraint tau = c'beta - r."""

    X: np.ndarray
    beta: np.ndarray
    sigma: float
    a: np.ndarray
    c: np.ndarray
    r: float = 0.0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        n, p = X.shape
        for name in ("beta", "a", "c"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if v.shape != (p,):
                raise ValueError(f"{name} must have length {p}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "X", X)
        if not n > p:
            raise ValueError("need n > p")
        if np.linalg.matrix_rank(X) < p:
            raise ValueError("X must have full column rank")
        if np.linalg.matrix_rank(np.column_stack([self.a, self.c])) < 2:
            raise ValueError("a and c must be linearly independent")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        q, rfac = np.linalg.qr(X)
        # l_a . Y = a' beta_hat
        object.__setattr__(self, "_q", q)
        object.__setattr__(self, "_la", q @ np.linalg.solve(rfac.T, self.a))
        object.__setattr__(self, "_lc", q @ np.linalg.solve(rfac.T, self.c))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[0] - self.X.shape[1]

    @property
    def v_theta(self) -> float:
        return float(self._la @ self._la)

    @property
    def v_tau(self) -> float:
        return float(self._lc @ self._lc)

    @property
    def rho(self) -> float:
        return float(self._la @ self._lc) / math.sqrt(self.v_theta * self.v_tau)

    @property
    def theta(self) -> float:
        return float(self.a @ self.beta)

    @property
    def tau(self) -> float:
        return float(self.c @ self.beta) - self.r

    @property
    def gamma(self) -> float:
        return self.tau / (self.sigma * math.sqrt(self.v_tau))

    def scenario(self, nominal_coverage: float, test_size: float) -> Scenario:
        return Scenario(self.m, self.rho, nominal_coverage, test_size)


def regression_fixture(variant: int = 0, rho: float = 0.6, gamma: float = 2.0,
                       n: int = 45, p: int = 5, sigma: float | None = None) -> RegressionSpec:
    """Intercept plus centred covariates, with ``c`` and ``r`` tuned so that the
    derived correlation and scaled constraint equal ``rho`` and ``gamma``.
    Different ``variant`` values give different (X, a, c, beta, sigma)."""
    rng = np.random.default_rng(1000 + variant)
    cov = rng.normal(size=(n, p - 1)) * rng.uniform(0.5, 3.0, size=p - 1)
    X = np.column_stack([np.ones(n), cov - cov.mean(axis=0)])
    M = np.linalg.inv(X.T @ X)
    a = rng.normal(size=p)
    d = rng.normal(size=p)
    d -= (a @ M @ d) / (a @ M @ a) * a
    v_a, q = a @ M @ a, d @ M @ d
    kappa = math.copysign(abs(rho) * math.sqrt(q / (v_a * (1.0 - rho * rho))), rho)
    c = kappa * a + d
    beta = rng.normal(scale=2.0, size=p)
    sigma = float(rng.uniform(0.5, 2.0)) if sigma is None else sigma
    r = float(c @ beta) - gamma * sigma * math.sqrt(c @ M @ c)
    return RegressionSpec(X=X, beta=beta, sigma=sigma, a=a, c=c, r=r)


def simulate_regression(spec: RegressionSpec, nominal_coverage: float, test_size: float,
                        config: MonteCarloConfig = MonteCarloConfig()) -> MCEstimates:
    """Estimate the coverage quantities by fitting the regression on simulated
    data and on an independent genie replicate."""
    scenario = spec.scenario(nominal_coverage, test_size)
    m, rho = spec.m, spec.rho
    t_acc = t_quantile(m, 1.0 - test_size / 2.0)
    alpha = 1.0 - nominal_coverage
    t_full = t_quantile(m, 1.0 - alpha / 2.0)
    t_sub = t_quantile(m + 1, 1.0 - alpha / 2.0)
    sv_t, sv_c = math.sqrt(spec.v_theta), math.sqrt(spec.v_tau)
    theta, gamma = spec.theta, spec.gamma
    mean = spec.X @ spec.beta
    q, la, lc = spec._q, spec._la, spec._lc

    def fit(y):
        theta_hat = y @ la
        tau_hat = y @ lc - spec.r
        resid = y - (y @ q) @ q.T
        sigma_hat = np.sqrt(np.einsum("ij,ij->i", resid, resid) / m)
        in_i = np.abs(theta_hat - theta) <= t_full * sv_t * sigma_hat
        centre = theta_hat - rho * sv_t * tau_hat / sv_c
        half = (t_sub * sv_t * math.sqrt(1.0 - rho * rho)
                * np.sqrt((m * sigma_hat**2 + tau_hat**2 / spec.v_tau) / (m + 1.0)))
        in_j = np.abs(theta - centre) <= half
        return theta_hat, tau_hat, sigma_hat, in_i, in_j

    def work(block, size):
        rng = block_rng(config.seed, block)
        y = mean + spec.sigma * rng.standard_normal((size, spec.n))
        y_star = mean + spec.sigma * rng.standard_normal((size, spec.n))
        theta_hat, tau_hat, sigma_hat, in_i, in_j = fit(y)
        _, _, _, in_i_star, in_j_star = fit(y_star)
        acc = np.abs(tau_hat / (sigma_hat * sv_c)) < t_acc
        g = (theta_hat - theta) / (spec.sigma * sv_t)
        h = tau_hat / (spec.sigma * sv_c)
        z = (g - rho * (h - gamma)) / math.sqrt(1.0 - rho * rho)
        return _tally(acc, in_i, in_j, in_i_star, in_j_star, g, h, z)

    counts, moments = _run_blocks(work, config)
    est = _estimates(counts, moments, config.replications, nominal_coverage)
    est.derived = {"gamma": gamma, "rho": rho, "m": m, "scenario": scenario}
    return est


Z_LIMIT = 4.0
# A breakdown field combines at most four integrals.
QUAD_BOUND_FACTOR = 4.0


class ValidationRow(NamedTuple):
    field: str
    quadrature: float
    estimate: float
    se: float
    z: float
    quad_bound: float

    @property
    def resolved(self) -> bool:
        """The quadrature error bound is below the Monte Carlo standard error."""
        return self.se == 0.0 or self.quad_bound <= self.se

    @property
    def passed(self) -> bool:
        return abs(self.z) <= Z_LIMIT and self.resolved


def compare(estimates: MCEstimates, breakdown: DeficitBreakdown, abs_tol: float = 1e-9) -> list[ValidationRow]:
    """z-score of every Monte Carlo field against its quadrature value.

    A row only passes if ``|z| <= 4`` and the quadrature value is accurate
    enough to act as a reference, i.e. its error bound does not exceed the
    standard error of the estimate.
    """
    rows = []
    bound = QUAD_BOUND_FACTOR * abs_tol
    for name, est in estimates.field_items():
        quad = getattr(breakdown, name)
        diff = est.value - quad
        if est.se > 0:
            z = diff / est.se
        else:
            z = 0.0 if abs(diff) <= bound else math.copysign(math.inf, diff)
        rows.append(ValidationRow(name, quad, est.value, est.se, z, bound))
    return rows
