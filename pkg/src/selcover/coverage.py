"""Coverage of the post-model-selection interval K and its two deficits.

With ``T = H/W`` the preliminary test statistic, the test accepts the
submodel when ``|T| < t_{m, 1 - test_size/2}``. Then

    P(theta in K)  = (1 - alpha) + P(J, accept) - P(I, accept)
    P(theta in K*) = (1 - alpha) - d_wm
    d_wm = P(accept) * ((1 - alpha) - P(J))
    d_rd = P(I, accept) - P(J, accept) + P(accept) * (P(J) - (1 - alpha))

so that ``P(theta in K) = (1 - alpha) - d_wm - d_rd``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import NamedTuple

from . import distributions as dist
from ._backend import kernels
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

_EDGE = 1e-12


@dataclass(frozen=True)
class Scenario:
    """The four known quantities: residual degrees of freedom ``m``, the
    correlation ``rho`` of the two estimators, the nominal coverage
    ``1 - alpha`` and the size of the preliminary test."""

    m: int
    rho: float
    nominal_coverage: float
    test_size: float

    def __post_init__(self):
        object.__setattr__(self, "m", dist.check_dof(self.m))
        if not abs(self.rho) < 1.0:
            raise ValueError(f"rho must satisfy |rho| < 1, got {self.rho!r}")
        for name in ("nominal_coverage", "test_size"):
            v = getattr(self, name)
            if not _EDGE < v < 1.0 - _EDGE:
                raise ValueError(f"{name} must lie in (0, 1) away from the endpoints, got {v!r}")

    @property
    def alpha(self) -> float:
        return 1.0 - self.nominal_coverage

    @cached_property
    def t_full(self) -> float:
        """t_{m, 1 - alpha/2}: half-width multiplier of the full-model interval I."""
        return dist.t_quantile(self.m, 1.0 - self.alpha / 2.0)

    @cached_property
    def t_sub(self) -> float:
        """t_{m+1, 1 - alpha/2}: multiplier of the submodel interval J."""
        return dist.t_quantile(self.m + 1, 1.0 - self.alpha / 2.0)

    @cached_property
    def t_accept(self) -> float:
        """t_{m, 1 - test_size/2}: critical value of the preliminary test."""
        return dist.t_quantile(self.m, 1.0 - self.test_size / 2.0)

    def with_rho(self, rho: float) -> "Scenario":
        return Scenario(self.m, rho, self.nominal_coverage, self.test_size)


@dataclass(frozen=True)
class DeficitBreakdown:
    gamma: float
    p_accept: float
    p_J: float
    p_J_and_accept: float
    p_I_and_accept: float
    d_wm: float
    d_rd: float
    coverage_K: float
    coverage_K_star: float

    FIELDS = (
        "gamma", "p_accept", "p_J", "p_J_and_accept", "p_I_and_accept",
        "d_wm", "d_rd", "coverage_K", "coverage_K_star",
    )

    def as_dict(self) -> dict:
        return asdict(self)


class PsiArgs(NamedTuple):
    x: float
    u: float


def _shift(scenario: Scenario, gamma: float) -> float:
    rho = scenario.rho
    return rho * gamma / math.sqrt(1.0 - rho * rho)


def _halfwidth(args: PsiArgs, scenario: Scenario) -> float:
    m = scenario.m
    return scenario.t_sub * args.x * math.sqrt((m + args.u * args.u) / (m + 1.0))


def _check_x(args: PsiArgs):
    if not args.x > 0:
        raise ValueError(f"x must be positive, got {args.x!r}")


def g1(args: PsiArgs, scenario: Scenario, gamma: float) -> float:
    _check_x(args)
    return -_halfwidth(args, scenario) + _shift(scenario, gamma)


def g2(args: PsiArgs, scenario: Scenario, gamma: float) -> float:
    _check_x(args)
    return _halfwidth(args, scenario) + _shift(scenario, gamma)


def psi(args: PsiArgs, scenario: Scenario, gamma: float) -> float:
    """Conditional probability that Z lands in [g1, g2]."""
    return kernels.normal_between(g1(args, scenario, gamma), g2(args, scenario, gamma))


def prob_accept(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    return dist.central_interval_prob(scenario.t_accept, scenario.m, gamma, config)


def prob_J(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    m = scenario.m
    raw = kernels.prob_j(
        m, float(scenario.rho), float(gamma), scenario.t_sub,
        dist.w_breakpoints(m, config), config.w_trunc_prob,
        config.abs_tol, config.rel_tol, config.h_trunc_halfwidth, config.max_subdivisions,
    )
    return dist.clamp_probability(raw)


def prob_J_and_accept(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    m = scenario.m
    t_acc = scenario.t_accept
    raw = kernels.prob_j_accept(
        m, float(scenario.rho), float(gamma), scenario.t_sub, t_acc,
        dist.w_breakpoints(m, config, (abs(gamma) / t_acc,)), config.w_trunc_prob,
        config.abs_tol, config.rel_tol, config.h_trunc_halfwidth, config.max_subdivisions,
    )
    return dist.clamp_probability(raw)


def prob_I_and_accept(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    c, t = scenario.t_full, scenario.t_accept
    return dist.bvnt_rect(-c, c, -t, t, scenario.m, scenario.rho, gamma, config)


def assemble(scenario: Scenario, gamma: float, p_accept: float, p_J: float,
             p_J_and_accept: float, p_I_and_accept: float) -> DeficitBreakdown:
    nominal = scenario.nominal_coverage
    d_wm = p_accept * (nominal - p_J)
    d_rd = p_I_and_accept - p_J_and_accept + p_accept * (p_J - nominal)
    return DeficitBreakdown(
        gamma=float(gamma),
        p_accept=p_accept,
        p_J=p_J,
        p_J_and_accept=p_J_and_accept,
        p_I_and_accept=p_I_and_accept,
        d_wm=d_wm,
        d_rd=d_rd,
        coverage_K=nominal + p_J_and_accept - p_I_and_accept,
        coverage_K_star=nominal - d_wm,
    )


def deficits(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> DeficitBreakdown:
    """All five component probabilities, both deficits and both coverages at ``gamma``."""
    return assemble(
        scenario,
        gamma,
        prob_accept(scenario, gamma, config),
        prob_J(scenario, gamma, config),
        prob_J_and_accept(scenario, gamma, config),
        prob_I_and_accept(scenario, gamma, config),
    )


def coverage(scenario: Scenario, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """P(theta in K) alone; needs only the two joint probabilities."""
    return (scenario.nominal_coverage + prob_J_and_accept(scenario, gamma, config)
            - prob_I_and_accept(scenario, gamma, config))
