import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

import oracles
from selcover import distributions as d
from selcover.quadrature import DEFAULT_CONFIG

INF = math.inf
MS = [1, 2, 5, 10, 40, 100]
ABS_TOL = DEFAULT_CONFIG.abs_tol

# frozen from tests/oracles.py (mpmath, 40 digits)
T40_975 = 2.0210753903062734
PHI_1959963985 = 0.97500000002688156
CHI40_PDF_AT_1 = 3.5534126956834087
BVN_SQUARE_06 = 0.5138684875445338


def test_oracle_values_are_current():
    assert float(oracles.t_quantile(40, 0.975)) == pytest.approx(T40_975, abs=1e-15)
    assert float(oracles.normal_cdf(1.959963985)) == pytest.approx(PHI_1959963985, abs=1e-16)
    w = 1.0
    assert float(2 * 40 * w * oracles.chi2_pdf(40 * w * w, 40)) == pytest.approx(CHI40_PDF_AT_1, rel=1e-15)


# normal

def test_normal_cdf_values():
    assert d.std_normal_cdf(0.0) == 0.5
    assert d.std_normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)
    assert d.std_normal_cdf(1.959963985) == pytest.approx(PHI_1959963985, abs=1e-15)
    assert d.std_normal_cdf(-40.0) == 0.0 and d.std_normal_cdf(40.0) == 1.0


@given(st.floats(-38.0, 38.0))
def test_normal_cdf_reflection(x):
    assert d.std_normal_cdf(x) + d.std_normal_cdf(-x) == pytest.approx(1.0, abs=2e-16)


@pytest.mark.parametrize("x", [-30.0, -8.0, -3.0, -0.5, 0.7, 2.5, 6.0])
def test_normal_cdf_against_mpmath(x):
    ref = float(oracles.normal_cdf(x))
    assert d.std_normal_cdf(x) == pytest.approx(ref, abs=1e-15, rel=1e-13)


# central t

@pytest.mark.parametrize("m", MS)
def test_t_quantile_median(m):
    assert d.t_quantile(m, 0.5) == 0.0


def test_t_quantile_40():
    v = d.t_quantile(40, 0.975)
    assert d.central_t_cdf(40, v) == pytest.approx(0.975, abs=1e-10)
    assert v == pytest.approx(2.0211, abs=5e-4)
    assert v == pytest.approx(T40_975, abs=1e-12)


@given(st.sampled_from(MS), st.floats(1e-6, 1 - 1e-6))
def test_t_quantile_round_trip(m, a):
    assert d.central_t_cdf(m, d.t_quantile(m, a)) == pytest.approx(a, abs=1e-10)


@pytest.mark.parametrize("m, a", [(1, 0.95), (2, 0.99), (5, 0.975), (100, 0.9)])
def test_t_quantile_against_mpmath(m, a):
    assert d.t_quantile(m, a) == pytest.approx(float(oracles.t_quantile(m, a)), rel=1e-14)


def test_central_t_pdf():
    from scipy.stats import t as t_dist
    for m, x in [(1, 0.3), (40, -2.0), (100, 5.0)]:
        assert d.central_t_pdf(m, x) == pytest.approx(t_dist.pdf(x, m), rel=1e-13)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.1, 1.5])
def test_t_quantile_rejects(a):
    with pytest.raises(ValueError):
        d.t_quantile(10, a)


@pytest.mark.parametrize("m", [0, -1, 2.5, True])
def test_rejects_bad_dof(m):
    with pytest.raises(ValueError):
        d.check_dof(m)


# scaled chi

@pytest.mark.parametrize("m", MS)
def test_scaled_chi_normalised(m):
    f = lambda w: d.scaled_chi_pdf(w, m)  # noqa: E731
    mode = math.sqrt((m - 1) / m) if m > 1 else 0.0
    pts = [mode, 1.0, 2.0] if m > 1 else [0.05, 0.5, 1.0]
    total, _ = sci_integrate.quad(f, 0, 50, points=pts, epsabs=1e-13, epsrel=1e-13, limit=200)
    second, _ = sci_integrate.quad(lambda w: w * w * f(w), 0, 50, points=pts,
                                   epsabs=1e-13, epsrel=1e-13, limit=200)
    assert total == pytest.approx(1.0, abs=1e-10)
    assert second == pytest.approx(1.0, abs=1e-9)


def test_scaled_chi_pdf_value():
    assert d.scaled_chi_pdf(1.0, 40) == pytest.approx(CHI40_PDF_AT_1, abs=1e-12)
    assert d.scaled_chi_pdf(0.0, 5) == 0.0 and d.scaled_chi_pdf(-1.0, 5) == 0.0


@pytest.mark.parametrize("m", MS)
@pytest.mark.parametrize("p", [1e-6, 0.01, 0.5, 0.99, 1 - 1e-6])
def test_scaled_chi_quantile_round_trip(m, p):
    assert d.scaled_chi_cdf(d.scaled_chi_quantile(p, m), m) == pytest.approx(p, abs=1e-9)


@given(st.sampled_from(MS), st.floats(1e-9, 1 - 1e-9), st.floats(1e-9, 1 - 1e-9))
def test_scaled_chi_quantile_monotone(m, p, q):
    if p < q:
        assert d.scaled_chi_quantile(p, m) < d.scaled_chi_quantile(q, m)


def test_scaled_chi_truncation_mass():
    upper = 1 - 1e-10
    lo, hi = d.scaled_chi_quantile(1e-10, 40), d.scaled_chi_quantile(upper, 40)
    assert d.scaled_chi_cdf(hi, 40) - d.scaled_chi_cdf(lo, 40) >= 1 - 2e-10 - 1e-15
    # same interval from the chi-square quantiles of an independent routine
    from scipy.stats import chi2
    assert lo == pytest.approx(math.sqrt(chi2.ppf(1e-10, 40) / 40), rel=1e-10)
    assert hi == pytest.approx(math.sqrt(chi2.isf(1 - upper, 40) / 40), rel=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_scaled_chi_quantile_rejects(p):
    with pytest.raises(ValueError):
        d.scaled_chi_quantile(p, 3)


# bivariate normal

@given(st.floats(-6, 6), st.floats(0, 6), st.floats(-6, 6), st.floats(0, 6))
def test_bvn_independence(x, dx, y, dy):
    got = d.bvn_rect(x, x + dx, y, y + dy, 0.0, 0.0, 0.0)
    px = d.std_normal_cdf(x + dx) - d.std_normal_cdf(x)
    py = d.std_normal_cdf(y + dy) - d.std_normal_cdf(y)
    assert got == pytest.approx(px * py, abs=1e-12)


@pytest.mark.parametrize("corr", [-0.95, -0.3, 0.0, 0.6, 0.99])
def test_bvn_full_plane(corr):
    assert d.bvn_rect(-INF, INF, -INF, INF, 1.0, -2.0, corr) == pytest.approx(1.0, abs=1e-12)


def test_bvn_square_against_simpson():
    got = d.bvn_rect(-1, 1, -1, 1, 0, 0, 0.6)
    assert got == pytest.approx(BVN_SQUARE_06, abs=1e-8)
    assert got == pytest.approx(oracles.bvn_rect_simpson(-1, 1, -1, 1, 0.6), abs=1e-8)


@pytest.mark.parametrize("x, y, corr", [(0.0, 0.0, 0.6), (0.0, 0.0, -0.5), (1.0, -1.0, 0.3)])
def test_bvn_cdf_orthant(x, y, corr):
    if x == y == 0.0:
        assert d.bvn_cdf(x, y, corr) == pytest.approx(0.25 + math.asin(corr) / (2 * math.pi), abs=1e-13)
    else:
        from scipy.stats import multivariate_normal
        ref = multivariate_normal([0, 0], [[1, corr], [corr, 1]]).cdf([x, y])
        assert d.bvn_cdf(x, y, corr) == pytest.approx(ref, abs=1e-6)


@given(st.floats(-4, 4), st.floats(0.01, 4), st.floats(0, 1), st.floats(-4, 4), st.floats(0.01, 4),
       st.floats(-0.95, 0.95))
def test_bvn_additivity(x_lo, width, frac, y_lo, height, corr):
    x_hi, y_hi = x_lo + width, y_lo + height
    x_mid = x_lo + frac * width
    whole = d.bvn_rect(x_lo, x_hi, y_lo, y_hi, 0.0, 0.0, corr)
    parts = d.bvn_rect(x_lo, x_mid, y_lo, y_hi, 0.0, 0.0, corr) + d.bvn_rect(x_mid, x_hi, y_lo, y_hi, 0.0, 0.0, corr)
    assert parts == pytest.approx(whole, abs=1e-12)


@pytest.mark.parametrize("corr", [1.0, -1.0, 1.5])
def test_bvn_rejects_corr(corr):
    with pytest.raises(ValueError):
        d.bvn_rect(0, 1, 0, 1, 0, 0, corr)
    with pytest.raises(ValueError):
        d.bvnt_rect(0, 1, 0, 1, 10, corr, 0.0)


def test_bvn_rejects_inverted_rectangle():
    with pytest.raises(ValueError):
        d.bvn_rect(1, 0, 0, 1, 0, 0, 0.2)


# noncentral t

@pytest.mark.parametrize("m", MS)
@pytest.mark.parametrize("t", [-3.0, -0.4, 0.0, 1.0, 2.5])
def test_nct_central_reduction(m, t):
    assert d.noncentral_t_cdf(t, m, 0.0) == pytest.approx(d.central_t_cdf(m, t), abs=1e-10)


@pytest.mark.parametrize("m", MS)
def test_nct_symmetry_at_zero(m):
    assert d.noncentral_t_cdf(0.0, m, 0.0) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("m", [1, 5, 40])
def test_nct_monotone(m):
    ts = np.linspace(-6, 8, 29)
    gammas = np.linspace(-3, 6, 19)
    by_t = [d.noncentral_t_cdf(t, m, 1.5) for t in ts]
    by_g = [d.noncentral_t_cdf(1.0, m, g) for g in gammas]
    assert all(b >= a - ABS_TOL for a, b in zip(by_t, by_t[1:]))
    assert all(b <= a + ABS_TOL for a, b in zip(by_g, by_g[1:]))


def test_nct_against_scipy():
    from scipy.stats import nct
    for t, m, g in [(2.0, 40, 1.5), (-1.0, 5, 0.7), (3.0, 2, 2.0)]:
        assert d.noncentral_t_cdf(t, m, g) == pytest.approx(nct.cdf(t, m, g), abs=1e-8)


def test_nct_monte_carlo():
    n = 10**7
    h, w, _ = oracles.appendix_draws(40, 0.0, 1.5, n, seed=2024)
    p, se = oracles.mc_proportion(h / w <= 2.0)
    assert abs(d.noncentral_t_cdf(2.0, 40, 1.5) - p) <= 4 * se


# bivariate noncentral t

@pytest.mark.parametrize("m, rho, gamma", [(1, 0.6, 2.0), (40, -0.8, 0.0), (5, 0.3, 5.0)])
def test_bvnt_full_plane(m, rho, gamma):
    assert d.bvnt_rect(-INF, INF, -INF, INF, m, rho, gamma) == pytest.approx(1.0, abs=ABS_TOL)


@pytest.mark.parametrize("m", MS)
@pytest.mark.parametrize("rho, gamma", [(0.6, 2.0), (-0.8, 4.0), (0.3, 0.0)])
def test_bvnt_g_marginal(m, rho, gamma):
    c = d.t_quantile(m, 0.975)
    assert d.bvnt_rect(-c, c, -INF, INF, m, rho, gamma) == pytest.approx(0.95, abs=ABS_TOL)


@pytest.mark.parametrize("gamma", [-3.0, 0.0, 1.0, 6.0])
def test_bvnt_marginal_free_of_gamma(gamma):
    lo, hi = -0.7, 2.1
    ref = d.central_t_cdf(10, hi) - d.central_t_cdf(10, lo)
    assert d.bvnt_rect(lo, hi, -INF, INF, 10, 0.5, gamma) == pytest.approx(ref, abs=2 * ABS_TOL)


def test_bvnt_monte_carlo():
    n = 10**7
    g, h, w = oracles.gh_draws(40, 0.6, 2.0, n, seed=77)
    p, se = oracles.mc_proportion((np.abs(g / w) <= 2.021) & (np.abs(h / w) <= 1.684))
    got = d.bvnt_rect(-2.021, 2.021, -1.684, 1.684, 40, 0.6, 2.0)
    assert abs(got - p) <= 4 * se


@given(st.sampled_from(MS), st.floats(-0.95, 0.95), st.floats(-6, 6),
       st.floats(-5, 5), st.floats(0, 5), st.floats(-5, 5), st.floats(0, 5))
def test_bvnt_raw_excursion_within_tolerance(m, rho, gamma, g_lo, g_w, h_lo, h_w):
    raw = d.bvnt_rect_raw(g_lo, g_lo + g_w, h_lo, h_lo + h_w, m, rho, gamma)
    assert -ABS_TOL <= raw <= 1 + ABS_TOL
    assert 0.0 <= d.bvnt_rect(g_lo, g_lo + g_w, h_lo, h_lo + h_w, m, rho, gamma) <= 1.0


def test_w_breakpoints():
    pts = d.w_breakpoints(40, DEFAULT_CONFIG, hints=(1.0, 100.0, math.nan))
    assert pts == sorted(pts) and 1.0 in pts and 100.0 not in pts
    assert pts[0] == pytest.approx(d.scaled_chi_quantile(1e-10, 40))
    assert math.sqrt(39 / 40) in d.w_breakpoints(40)
