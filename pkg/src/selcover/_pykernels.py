"""Pure-Python kernels: fallback for the compiled ``_kernels`` extension.

Same functions, same signatures and the same quadrature decisions as the
Cython module. Every W-axis integral has the form ``int F(w) f_W(w) dw``
with ``F`` a conditional probability given ``W = w``; the truncated tails
(mass ``eps`` each) are credited with ``eps * F`` at the cut point.
"""

import math

from .quadrature import INNER_TOL_FACTOR, integrate

SQRT1_2 = 0.7071067811865475244
INV_SQRT_2PI = 0.3989422804014326779
BVN_LIMIT = 9.0


def normal_cdf(x):
    return 0.5 * math.erfc(-x * SQRT1_2)


def normal_pdf(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_between(lo, hi):
    """P(lo < Z < hi), evaluated on whichever tail keeps precision."""
    if lo >= hi:
        return 0.0
    if lo >= 0.0:
        return 0.5 * (math.erfc(lo * SQRT1_2) - math.erfc(hi * SQRT1_2))
    if hi <= 0.0:
        return 0.5 * (math.erfc(-hi * SQRT1_2) - math.erfc(-lo * SQRT1_2))
    return 1.0 - 0.5 * (math.erfc(hi * SQRT1_2) + math.erfc(-lo * SQRT1_2))


def chi_log_const(m):
    half = 0.5 * m
    return math.log(2.0) + half * math.log(half) - math.lgamma(half)


def scaled_chi_pdf(w, m):
    if not w > 0.0:
        return 0.0
    if math.isinf(w):
        return 0.0
    return math.exp(chi_log_const(m) + (m - 1) * math.log(w) - 0.5 * m * w * w)


def _w_mixture(cond, m, wbreaks, eps, abs_tol, rel_tol, max_sub):
    lc = chi_log_const(m)

    def integrand(w):
        return cond(w) * math.exp(lc + (m - 1) * math.log(w) - 0.5 * m * w * w)

    value, _ = integrate(integrand, wbreaks, abs_tol, rel_tol, max_sub)
    return value + eps * (cond(wbreaks[0]) + cond(wbreaks[-1]))


def nct_cdf(t, m, gamma, wbreaks, eps, abs_tol, rel_tol, max_sub):
    return _w_mixture(lambda w: normal_cdf(t * w - gamma), m, wbreaks, eps, abs_tol, rel_tol, max_sub)


def accept_prob(t_acc, m, gamma, wbreaks, eps, abs_tol, rel_tol, max_sub):
    return _w_mixture(
        lambda w: normal_between(-t_acc * w - gamma, t_acc * w - gamma),
        m, wbreaks, eps, abs_tol, rel_tol, max_sub,
    )


def _psi(w, h, m, t_sub, shift):
    half = t_sub * math.sqrt((m * w * w + h * h) / (m + 1.0))
    return normal_between(shift - half, shift + half)


def _inner_breaks(lo, hi, points):
    inside = sorted(p for p in points if lo < p < hi)
    return [lo, *inside, hi]


def prob_j(m, rho, gamma, t_sub, wbreaks, eps, abs_tol, rel_tol, h_half, max_sub):
    shift = rho * gamma / math.sqrt(1.0 - rho * rho)
    inner_tol = abs_tol * INNER_TOL_FACTOR
    hb = _inner_breaks(gamma - h_half, gamma + h_half, (0.0, gamma))

    def cond(w):
        def f(h):
            d = h - gamma
            return _psi(w, h, m, t_sub, shift) * INV_SQRT_2PI * math.exp(-0.5 * d * d)

        return integrate(f, hb, inner_tol, 1.0, max_sub)[0]

    return _w_mixture(cond, m, wbreaks, eps, abs_tol, rel_tol, max_sub)


def prob_j_accept(m, rho, gamma, t_sub, t_acc, wbreaks, eps, abs_tol, rel_tol, h_half, max_sub):
    shift = rho * gamma / math.sqrt(1.0 - rho * rho)
    inner_tol = abs_tol * INNER_TOL_FACTOR

    def cond(w):
        tw = t_acc * w
        lo = max(-1.0, (gamma - h_half) / tw)
        hi = min(1.0, (gamma + h_half) / tw)
        if not lo < hi:
            return 0.0

        def f(y):
            h = tw * y
            d = h - gamma
            return tw * _psi(w, h, m, t_sub, shift) * INV_SQRT_2PI * math.exp(-0.5 * d * d)

        return integrate(f, _inner_breaks(lo, hi, (0.0, gamma / tw)), inner_tol, 1.0, max_sub)[0]

    return _w_mixture(cond, m, wbreaks, eps, abs_tol, rel_tol, max_sub)


def bvn_cdf(x, y, rho, tol, max_sub):
    """P(X <= x, Y <= y) for a standard bivariate normal with correlation rho."""
    if x == -math.inf or y == -math.inf:
        return 0.0
    if x == math.inf:
        return normal_cdf(y)
    if y == math.inf:
        return normal_cdf(x)
    if rho == 0.0:
        return normal_cdf(x) * normal_cdf(y)
    upper = min(y, BVN_LIMIT)
    if upper <= -BVN_LIMIT:
        return 0.0
    s = math.sqrt(1.0 - rho * rho)

    def f(t):
        return INV_SQRT_2PI * math.exp(-0.5 * t * t) * normal_cdf((x - rho * t) / s)

    breaks = _inner_breaks(-BVN_LIMIT, upper, (0.0, x / rho))
    return integrate(f, breaks, tol, 1.0, max_sub)[0]


def bvn_rect(xlo, xhi, ylo, yhi, rho, tol, max_sub):
    """Rectangle probability from four corner CDFs (standardised margins)."""
    if not (xlo < xhi and ylo < yhi):
        return 0.0
    return (
        bvn_cdf(xhi, yhi, rho, tol, max_sub)
        - bvn_cdf(xlo, yhi, rho, tol, max_sub)
        - bvn_cdf(xhi, ylo, rho, tol, max_sub)
        + bvn_cdf(xlo, ylo, rho, tol, max_sub)
    )


def bvnt_rect(glo, ghi, hlo, hhi, m, rho, gamma, wbreaks, eps, abs_tol, rel_tol, max_sub):
    corner_tol = 0.25 * abs_tol * INNER_TOL_FACTOR

    def cond(w):
        return bvn_rect(glo * w, ghi * w, hlo * w - gamma, hhi * w - gamma, rho, corner_tol, max_sub)

    return _w_mixture(cond, m, wbreaks, eps, abs_tol, rel_tol, max_sub)
