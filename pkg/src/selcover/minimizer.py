"""Minimum over gamma of the coverage of K.

Coverage is even in gamma, so the search runs over [0, gamma_max]: a full
coarse scan first (coverage can be multimodal), then golden-section
refinement inside every grid cell whose coarse value is within
``2 * abs_tol`` of the best one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .coverage import DeficitBreakdown, Scenario, coverage, deficits
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MinSearchConfig:
    gamma_max: float = 15.0
    coarse_step: float = 0.05
    refine_tol: float = 1e-4

    def __post_init__(self):
        if not (self.gamma_max > 0 and self.coarse_step > 0 and self.refine_tol > 0):
            raise ValueError("gamma_max, coarse_step and refine_tol must be positive")
        if not self.coarse_step < self.gamma_max:
            raise ValueError("coarse_step must be smaller than gamma_max")
        if not self.refine_tol < self.coarse_step:
            raise ValueError("refine_tol must be smaller than coarse_step")


@dataclass
class MinResult:
    scenario: Scenario
    gamma_star: float = math.nan
    min_coverage: float = math.nan
    breakdown_at_min: DeficitBreakdown | None = None
    at_boundary: bool = False
    error: str | None = None
    coarse: list[tuple[float, float]] = field(default_factory=list, repr=False)
    trace: list[float] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None


def grid_points(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive grid from lo to hi; the last step is truncated to land on hi."""
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = [lo + i * step for i in range(n + 1)]
    if hi - pts[-1] > 1e-9 * max(1.0, abs(hi)):
        pts.append(hi)
    else:
        pts[-1] = hi
    return pts


def golden_section(f, a: float, b: float, tol: float, best: tuple[float, float]):
    """Golden-section search on [a, b] seeded with a known point ``best``.

    Returns the best (x, f(x)) seen and the running minimum after every
    evaluation, which is nonincreasing by construction.
    """
    bx, bv = best
    trace = [bv]

    def consider(x, v):
        nonlocal bx, bv
        if v < bv or (v == bv and x < bx):
            bx, bv = x, v
        trace.append(bv)

    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    consider(c, fc)
    consider(d, fd)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
            consider(c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
            consider(d, fd)
    return (bx, bv), trace


def min_coverage(
    scenario: Scenario,
    config: MinSearchConfig = MinSearchConfig(),
    quad: QuadratureConfig = DEFAULT_CONFIG,
    gamma_range: tuple[float, float] | None = None,
) -> MinResult:
    """Locate min over gamma of P(theta in K); ``gamma_range`` defaults to [0, gamma_max]."""
    lo, hi = gamma_range if gamma_range is not None else (0.0, config.gamma_max)
    step = config.coarse_step

    def f(g):
        return coverage(scenario, g, quad)

    gammas = grid_points(lo, hi, step)
    values = [f(g) for g in gammas]
    coarse = list(zip(gammas, values))
    best_val = min(values)
    slack = 2.0 * quad.abs_tol

    candidates = []
    trace = [best_val]
    for i, (g, v) in enumerate(coarse):
        if v > best_val + slack:
            continue
        a = gammas[max(i - 1, 0)]
        b = gammas[min(i + 1, len(gammas) - 1)]
        (x, fx), tr = golden_section(f, a, b, config.refine_tol, (g, v))
        candidates.append((x, fx))
        trace.extend(min(t, trace[-1]) for t in tr)

    # ties within tolerance resolve to the smallest gamma
    top = min(v for _, v in candidates)
    gamma_star = min(x for x, v in candidates if v <= top + slack)
    breakdown = deficits(scenario, gamma_star, quad)
    return MinResult(
        scenario=scenario,
        gamma_star=gamma_star,
        min_coverage=breakdown.coverage_K,
        breakdown_at_min=breakdown,
        at_boundary=gamma_star >= hi - step,
        coarse=coarse,
        trace=trace,
    )


def _safe_min(scenario, config, quad):
    try:
        return min_coverage(scenario, config, quad)
    except (ArithmeticError, ValueError) as exc:
        return MinResult(scenario=scenario, error=f"{type(exc).__name__}: {exc}")


def min_table(
    scenarios,
    config: MinSearchConfig = MinSearchConfig(),
    quad: QuadratureConfig = DEFAULT_CONFIG,
    workers: int = 1,
) -> list[MinResult]:
    """One MinResult per scenario, in input order. A failing scenario yields a
    row with ``error`` set; the other rows are unaffected."""
    scenarios = list(scenarios)
    if workers <= 1 or len(scenarios) <= 1:
        return [_safe_min(s, config, quad) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: _safe_min(s, config, quad), scenarios))


def standard_grid(
    ms=(1, 2, 5, 10, 40, 100),
    rhos=(0.0, 0.3, 0.6, 0.8),
    coverages=(0.9, 0.95, 0.98),
    test_sizes=(0.02, 0.05, 0.1),
) -> list[Scenario]:
    return [
        Scenario(m, rho, c, a)
        for m in ms
        for rho in rhos
        for c in coverages
        for a in test_sizes
    ]
