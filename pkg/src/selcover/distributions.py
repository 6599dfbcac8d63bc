"""Distribution primitives: normal, central t, the scaled chi W = sqrt(chi2_m / m),
bivariate normal rectangles and the bivariate noncentral t (Kshirsagar) rectangle.

Every integral over W runs on ``[q(eps), q(1 - eps)]`` where ``q`` is the
W quantile and ``eps = config.w_trunc_prob``.
"""

from __future__ import annotations

import math
from functools import lru_cache

from scipy import special

from ._backend import kernels
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

BVN_TOL = 1e-13


def check_dof(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {m!r}")
    return int(m)


def _check_prob(a, name="probability"):
    if not 0.0 < a < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {a!r}")


def clamp_probability(p: float) -> float:
    return min(1.0, max(0.0, p))


def std_normal_cdf(x: float) -> float:
    return kernels.normal_cdf(float(x))


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def central_t_cdf(m: int, t: float) -> float:
    return float(special.stdtr(check_dof(m), t))


@lru_cache(maxsize=4096)
def t_quantile(m: int, a: float) -> float:
    """Quantile ``t_{m,a}`` of the central t distribution with ``m`` degrees of freedom."""
    m = check_dof(m)
    _check_prob(a)
    if a == 0.5:
        return 0.0
    t = float(special.stdtrit(m, a))
    # stdtrit alone is good to ~1e-11 relative; one Newton step on stdtr fixes that
    return t - (float(special.stdtr(m, t)) - a) / central_t_pdf(m, t)


def central_t_pdf(m: int, t: float) -> float:
    m = check_dof(m)
    log_c = math.lgamma((m + 1) / 2) - math.lgamma(m / 2) - 0.5 * math.log(m * math.pi)
    return math.exp(log_c - (m + 1) / 2 * math.log1p(t * t / m))


def scaled_chi_pdf(w: float, m: int) -> float:
    """Density of W = (R/m)^(1/2) with R ~ chi2_m; zero for w <= 0."""
    return kernels.scaled_chi_pdf(float(w), check_dof(m))


def scaled_chi_cdf(w: float, m: int) -> float:
    m = check_dof(m)
    if w <= 0:
        return 0.0
    return float(special.gammainc(0.5 * m, 0.5 * m * w * w))


def scaled_chi_quantile(p: float, m: int) -> float:
    m = check_dof(m)
    _check_prob(p)
    if p <= 0.5:
        r = 2.0 * special.gammaincinv(0.5 * m, p)
    else:
        r = 2.0 * special.gammainccinv(0.5 * m, 1.0 - p)
    return math.sqrt(r / m)


@lru_cache(maxsize=512)
def _base_w_breaks(m: int, eps: float) -> tuple[float, ...]:
    probs = (eps, 1e-3, 0.1, 0.5, 0.9, 1 - 1e-3, 1 - eps)
    points = {scaled_chi_quantile(p, m) for p in probs}
    if m >= 2:
        points.add(math.sqrt((m - 1) / m))  # density mode
    return tuple(sorted(points))


def w_breakpoints(m: int, config: QuadratureConfig = DEFAULT_CONFIG, hints=()) -> list[float]:
    """Seed panel edges for a W-axis integral; ``hints`` are extra interior
    points where the conditional integrand changes quickly."""
    base = _base_w_breaks(check_dof(m), config.w_trunc_prob)
    lo, hi = base[0], base[-1]
    extra = {h for h in hints if math.isfinite(h) and lo < h < hi}
    return sorted(set(base) | extra)


def bvn_cdf(x: float, y: float, corr: float) -> float:
    """P(X <= x, Y <= y) for standard margins with correlation ``corr``."""
    _check_corr(corr)
    return clamp_probability(kernels.bvn_cdf(float(x), float(y), float(corr), BVN_TOL, 200))


def _check_corr(corr):
    if not abs(corr) < 1.0:
        raise ValueError(f"correlation must satisfy |corr| < 1, got {corr!r}")


def bvn_rect(x_lo, x_hi, y_lo, y_hi, mean_x, mean_y, corr) -> float:
    """P(x_lo <= X <= x_hi, y_lo <= Y <= y_hi) for a unit-variance bivariate normal."""
    _check_corr(corr)
    if x_lo > x_hi or y_lo > y_hi:
        raise ValueError("rectangle bounds must satisfy lo <= hi")
    raw = kernels.bvn_rect(
        float(x_lo - mean_x), float(x_hi - mean_x), float(y_lo - mean_y), float(y_hi - mean_y),
        float(corr), BVN_TOL, 200,
    )
    return clamp_probability(raw)


def noncentral_t_cdf(t: float, m: int, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """P(H/W <= t) with H ~ N(gamma, 1) independent of W."""
    m = check_dof(m)
    hints = (gamma / t,) if t != 0 else ()
    raw = kernels.nct_cdf(
        float(t), m, float(gamma), w_breakpoints(m, config, hints), config.w_trunc_prob,
        config.abs_tol, config.rel_tol, config.max_subdivisions,
    )
    return clamp_probability(raw)


def central_interval_prob(t: float, m: int, gamma: float, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """P(|H/W| < t), computed as a single mixture integral (no CDF differencing)."""
    m = check_dof(m)
    hints = (abs(gamma) / t,) if t > 0 else ()
    raw = kernels.accept_prob(
        float(t), m, float(gamma), w_breakpoints(m, config, hints), config.w_trunc_prob,
        config.abs_tol, config.rel_tol, config.max_subdivisions,
    )
    return clamp_probability(raw)


def bvnt_rect_raw(g_lo, g_hi, h_lo, h_hi, m, rho, gamma, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    m = check_dof(m)
    _check_corr(rho)
    if g_lo > g_hi or h_lo > h_hi:
        raise ValueError("rectangle bounds must satisfy lo <= hi")
    hints = [gamma / h for h in (h_lo, h_hi) if h != 0 and math.isfinite(h)]
    return kernels.bvnt_rect(
        float(g_lo), float(g_hi), float(h_lo), float(h_hi), m, float(rho), float(gamma),
        w_breakpoints(m, config, hints), config.w_trunc_prob, config.abs_tol, config.rel_tol,
        config.max_subdivisions,
    )


def bvnt_rect(g_lo, g_hi, h_lo, h_hi, m, rho, gamma, config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """P(g_lo <= G/W <= g_hi, h_lo <= H/W <= h_hi) where (G, H) is bivariate normal
    with means (0, gamma), unit variances and correlation ``rho``, and W is the
    independent scaled chi with ``m`` degrees of freedom."""
    return clamp_probability(bvnt_rect_raw(g_lo, g_hi, h_lo, h_hi, m, rho, gamma, config))
