# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the nested W-mixture integrals.

Mirrors ``_pykernels`` function for function. Integrals run without the GIL;
a failed (sub)integral is recorded in a ``Status`` block and re-raised as
``QuadratureError`` once control is back in Python.
"""

from libc.math cimport erfc, exp, log, sqrt, lgamma, fabs, pow, INFINITY
from libc.stdlib cimport malloc, free

from .quadrature import QuadratureError, INNER_TOL_FACTOR as _INNER_TOL_FACTOR

cdef double SQRT1_2 = 0.7071067811865475244
cdef double INV_SQRT_2PI = 0.3989422804014326779
cdef double BVN_LIMIT = 9.0
cdef double EPMACH = 2.220446049250313e-16
cdef double UFLOW = 2.2250738585072014e-308
cdef double INNER = _INNER_TOL_FACTOR

cdef double[11] XGK = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
]
cdef double[11] WGK = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525452302,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
]
cdef double[5] WG = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
]

ctypedef double (*func_t)(double, void*) noexcept nogil


cdef struct Status:
    int failed
    int panels
    double estimate
    double error
    double wa
    double wb
    double wr
    double we


cdef struct Params:
    double m
    double lc
    double rho
    double s
    double gamma
    double shift
    double t_sub
    double t_acc
    double t
    double glo
    double ghi
    double hlo
    double hhi
    double x
    double w
    double h_half
    double tol
    int max_sub
    func_t cond
    Status* st


cdef inline double ncdf(double x) noexcept nogil:
    return 0.5 * erfc(-x * SQRT1_2)


cdef inline double nbetween(double lo, double hi) noexcept nogil:
    if lo >= hi:
        return 0.0
    if lo >= 0.0:
        return 0.5 * (erfc(lo * SQRT1_2) - erfc(hi * SQRT1_2))
    if hi <= 0.0:
        return 0.5 * (erfc(-hi * SQRT1_2) - erfc(-lo * SQRT1_2))
    return 1.0 - 0.5 * (erfc(hi * SQRT1_2) + erfc(-lo * SQRT1_2))


cdef inline double chi_log_const(double m) noexcept nogil:
    cdef double half = 0.5 * m
    return log(2.0) + half * log(half) - lgamma(half)


cdef double gk21(func_t f, void* ctx, double a, double b, double* abserr) noexcept nogil:
    cdef double centr = 0.5 * (a + b)
    cdef double hlgth = 0.5 * (b - a)
    cdef double fc = f(centr, ctx)
    cdef double resg = 0.0
    cdef double resk = WGK[10] * fc
    cdef double resabs = fabs(resk)
    cdef double fv1[10]
    cdef double fv2[10]
    cdef double dx, f1, f2, reskh, resasc, err
    cdef int j
    for j in range(10):
        dx = hlgth * XGK[j]
        f1 = f(centr - dx, ctx)
        f2 = f(centr + dx, ctx)
        fv1[j] = f1
        fv2[j] = f2
        resk += WGK[j] * (f1 + f2)
        resabs += WGK[j] * (fabs(f1) + fabs(f2))
        if j & 1:
            resg += WG[j >> 1] * (f1 + f2)
    reskh = resk * 0.5
    resasc = WGK[10] * fabs(fc - reskh)
    for j in range(10):
        resasc += WGK[j] * (fabs(fv1[j] - reskh) + fabs(fv2[j] - reskh))
    resabs *= fabs(hlgth)
    resasc *= fabs(hlgth)
    err = fabs((resk - resg) * hlgth)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, pow(200.0 * err / resasc, 1.5))
    if resabs > UFLOW / (50.0 * EPMACH):
        err = max(EPMACH * 50.0 * resabs, err)
    abserr[0] = err
    return resk * hlgth


cdef double adapt(func_t f, void* ctx, const double* breaks, int nb, double abs_tol,
                  double rel_tol, int max_sub, Status* st) noexcept nogil:
    cdef int budget = max_sub if max_sub > nb - 1 else nb - 1
    cdef double* pa = <double*> malloc(4 * budget * sizeof(double))
    cdef double* pb = pa + budget
    cdef double* pr = pb + budget
    cdef double* pe = pr + budget
    cdef int n = 0
    cdef int i, worst
    cdef double total, err, tol, mid, e1, e2, r1, r2, a, b
    if pa == NULL:
        st.failed = 1
        return 0.0
    for i in range(nb - 1):
        if breaks[i + 1] > breaks[i]:
            pa[n] = breaks[i]
            pb[n] = breaks[i + 1]
            pr[n] = gk21(f, ctx, pa[n], pb[n], &pe[n])
            n += 1
    if n == 0:
        free(pa)
        return 0.0
    while True:
        total = 0.0
        err = 0.0
        for i in range(n):
            total += pr[i]
        for i in range(n):
            err += pe[i]
        tol = min(abs_tol, rel_tol * fabs(total))
        if tol < abs_tol * 1e-3:
            tol = abs_tol * 1e-3
        if err <= tol:
            break
        worst = 0
        for i in range(1, n):
            if pe[i] > pe[worst]:
                worst = i
        if n >= budget:
            if not st.failed:
                st.failed = 1
                st.panels = n
                st.estimate = total
                st.error = err
                st.wa = pa[worst]
                st.wb = pb[worst]
                st.wr = pr[worst]
                st.we = pe[worst]
            break
        a = pa[worst]
        b = pb[worst]
        mid = 0.5 * (a + b)
        r1 = gk21(f, ctx, a, mid, &e1)
        r2 = gk21(f, ctx, mid, b, &e2)
        pb[worst] = mid
        pr[worst] = r1
        pe[worst] = e1
        pa[n] = mid
        pb[n] = b
        pr[n] = r2
        pe[n] = e2
        n += 1
    free(pa)
    return total


cdef int inner_breaks(double lo, double hi, double p1, double p2, double* out) noexcept nogil:
    cdef int n = 1
    cdef double a = p1 if p1 < p2 else p2
    cdef double b = p2 if p1 < p2 else p1
    out[0] = lo
    if lo < a < hi:
        out[n] = a
        n += 1
    if lo < b < hi:
        out[n] = b
        n += 1
    out[n] = hi
    return n + 1


cdef double w_integrand(double w, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    return p.cond(w, ctx) * exp(p.lc + (p.m - 1.0) * log(w) - 0.5 * p.m * w * w)


cdef double w_mixture(Params* p, const double* wb, int nb, double eps, double abs_tol,
                      double rel_tol) noexcept nogil:
    cdef double v = adapt(w_integrand, <void*> p, wb, nb, abs_tol, rel_tol, p.max_sub, p.st)
    return v + eps * (p.cond(wb[0], <void*> p) + p.cond(wb[nb - 1], <void*> p))


cdef double cond_nct(double w, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    return ncdf(p.t * w - p.gamma)


cdef double cond_accept(double w, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    return nbetween(-p.t_acc * w - p.gamma, p.t_acc * w - p.gamma)


cdef inline double psi(double w, double h, Params* p) noexcept nogil:
    cdef double half = p.t_sub * sqrt((p.m * w * w + h * h) / (p.m + 1.0))
    return nbetween(p.shift - half, p.shift + half)


cdef double j_h_integrand(double h, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    cdef double d = h - p.gamma
    return psi(p.w, h, p) * INV_SQRT_2PI * exp(-0.5 * d * d)


cdef double cond_j(double w, void* ctx) noexcept nogil:
    cdef Params inner = (<Params*> ctx)[0]
    cdef double hb[4]
    cdef int nb
    inner.w = w
    nb = inner_breaks(inner.gamma - inner.h_half, inner.gamma + inner.h_half, 0.0, inner.gamma, hb)
    return adapt(j_h_integrand, <void*> &inner, hb, nb, inner.tol, 1.0, inner.max_sub, inner.st)


cdef double ja_y_integrand(double y, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    cdef double tw = p.t_acc * p.w
    cdef double h = tw * y
    cdef double d = h - p.gamma
    return tw * psi(p.w, h, p) * INV_SQRT_2PI * exp(-0.5 * d * d)


cdef double cond_ja(double w, void* ctx) noexcept nogil:
    cdef Params inner = (<Params*> ctx)[0]
    cdef double yb[4]
    cdef double tw = inner.t_acc * w
    cdef double lo = max(-1.0, (inner.gamma - inner.h_half) / tw)
    cdef double hi = min(1.0, (inner.gamma + inner.h_half) / tw)
    cdef int nb
    if not lo < hi:
        return 0.0
    inner.w = w
    nb = inner_breaks(lo, hi, 0.0, inner.gamma / tw, yb)
    return adapt(ja_y_integrand, <void*> &inner, yb, nb, inner.tol, 1.0, inner.max_sub, inner.st)


cdef double bvn_integrand(double t, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    return INV_SQRT_2PI * exp(-0.5 * t * t) * ncdf((p.x - p.rho * t) / p.s)


cdef double bvn_cdf_c(double x, double y, double rho, double tol, int max_sub,
                      Status* st) noexcept nogil:
    cdef Params p
    cdef double bb[4]
    cdef double upper
    cdef int nb
    if x == -INFINITY or y == -INFINITY:
        return 0.0
    if x == INFINITY:
        return ncdf(y)
    if y == INFINITY:
        return ncdf(x)
    if rho == 0.0:
        return ncdf(x) * ncdf(y)
    upper = min(y, BVN_LIMIT)
    if upper <= -BVN_LIMIT:
        return 0.0
    p.x = x
    p.rho = rho
    p.s = sqrt(1.0 - rho * rho)
    nb = inner_breaks(-BVN_LIMIT, upper, 0.0, x / rho, bb)
    return adapt(bvn_integrand, <void*> &p, bb, nb, tol, 1.0, max_sub, st)


cdef double bvn_rect_c(double xlo, double xhi, double ylo, double yhi, double rho, double tol,
                       int max_sub, Status* st) noexcept nogil:
    if not (xlo < xhi and ylo < yhi):
        return 0.0
    return (bvn_cdf_c(xhi, yhi, rho, tol, max_sub, st)
            - bvn_cdf_c(xlo, yhi, rho, tol, max_sub, st)
            - bvn_cdf_c(xhi, ylo, rho, tol, max_sub, st)
            + bvn_cdf_c(xlo, ylo, rho, tol, max_sub, st))


cdef double cond_rect(double w, void* ctx) noexcept nogil:
    cdef Params* p = <Params*> ctx
    return bvn_rect_c(p.glo * w, p.ghi * w, p.hlo * w - p.gamma, p.hhi * w - p.gamma,
                      p.rho, p.tol, p.max_sub, p.st)


# ---------------------------------------------------------------- Python API

cdef _raise(Status* st):
    raise QuadratureError(
        f"no convergence after {st.panels} panels: estimate {st.estimate:.3e}, "
        f"error {st.error:.3e}; worst panel [{st.wa:.6g}, {st.wb:.6g}] = "
        f"{st.wr:.3e} +- {st.we:.3e}",
        estimate=st.estimate,
        error=st.error,
        worst_panel=(st.wa, st.wb, st.wr, st.we),
    )


cdef class _Breaks:
    cdef double* data
    cdef int n

    def __cinit__(self, seq):
        cdef int i
        values = [float(v) for v in seq]
        self.n = len(values)
        self.data = <double*> malloc(max(self.n, 1) * sizeof(double))
        for i in range(self.n):
            self.data[i] = values[i]

    def __dealloc__(self):
        free(self.data)


cdef void init_params(Params* p, double m, double gamma, int max_sub, Status* st) noexcept:
    p.m = m
    p.lc = chi_log_const(m)
    p.gamma = gamma
    p.max_sub = max_sub
    p.st = st
    st.failed = 0


def normal_cdf(double x):
    return ncdf(x)


def normal_between(double lo, double hi):
    return nbetween(lo, hi)


def scaled_chi_pdf(double w, int m):
    if not w > 0.0 or w == INFINITY:
        return 0.0
    return exp(chi_log_const(m) + (m - 1.0) * log(w) - 0.5 * m * w * w)


def nct_cdf(double t, int m, double gamma, wbreaks, double eps, double abs_tol,
            double rel_tol, int max_sub):
    cdef _Breaks wb = _Breaks(wbreaks)
    cdef Status st
    cdef Params p
    cdef double v
    init_params(&p, m, gamma, max_sub, &st)
    p.t = t
    p.cond = cond_nct
    with nogil:
        v = w_mixture(&p, wb.data, wb.n, eps, abs_tol, rel_tol)
    if st.failed:
        _raise(&st)
    return v


def accept_prob(double t_acc, int m, double gamma, wbreaks, double eps, double abs_tol,
                double rel_tol, int max_sub):
    cdef _Breaks wb = _Breaks(wbreaks)
    cdef Status st
    cdef Params p
    cdef double v
    init_params(&p, m, gamma, max_sub, &st)
    p.t_acc = t_acc
    p.cond = cond_accept
    with nogil:
        v = w_mixture(&p, wb.data, wb.n, eps, abs_tol, rel_tol)
    if st.failed:
        _raise(&st)
    return v


def prob_j(int m, double rho, double gamma, double t_sub, wbreaks, double eps,
           double abs_tol, double rel_tol, double h_half, int max_sub):
    cdef _Breaks wb = _Breaks(wbreaks)
    cdef Status st
    cdef Params p
    cdef double v
    init_params(&p, m, gamma, max_sub, &st)
    p.rho = rho
    p.shift = rho * gamma / sqrt(1.0 - rho * rho)
    p.t_sub = t_sub
    p.h_half = h_half
    p.tol = abs_tol * INNER
    p.cond = cond_j
    with nogil:
        v = w_mixture(&p, wb.data, wb.n, eps, abs_tol, rel_tol)
    if st.failed:
        _raise(&st)
    return v


def prob_j_accept(int m, double rho, double gamma, double t_sub, double t_acc, wbreaks,
                  double eps, double abs_tol, double rel_tol, double h_half, int max_sub):
    cdef _Breaks wb = _Breaks(wbreaks)
    cdef Status st
    cdef Params p
    cdef double v
    init_params(&p, m, gamma, max_sub, &st)
    p.rho = rho
    p.shift = rho * gamma / sqrt(1.0 - rho * rho)
    p.t_sub = t_sub
    p.t_acc = t_acc
    p.h_half = h_half
    p.tol = abs_tol * INNER
    p.cond = cond_ja
    with nogil:
        v = w_mixture(&p, wb.data, wb.n, eps, abs_tol, rel_tol)
    if st.failed:
        _raise(&st)
    return v


def bvn_cdf(double x, double y, double rho, double tol, int max_sub):
    cdef Status st
    cdef double v
    st.failed = 0
    with nogil:
        v = bvn_cdf_c(x, y, rho, tol, max_sub, &st)
    if st.failed:
        _raise(&st)
    return v


def bvn_rect(double xlo, double xhi, double ylo, double yhi, double rho, double tol, int max_sub):
    cdef Status st
    cdef double v
    st.failed = 0
    with nogil:
        v = bvn_rect_c(xlo, xhi, ylo, yhi, rho, tol, max_sub, &st)
    if st.failed:
        _raise(&st)
    return v


def bvnt_rect(double glo, double ghi, double hlo, double hhi, int m, double rho, double gamma,
              wbreaks, double eps, double abs_tol, double rel_tol, int max_sub):
    cdef _Breaks wb = _Breaks(wbreaks)
    cdef Status st
    cdef Params p
    cdef double v
    init_params(&p, m, gamma, max_sub, &st)
    p.rho = rho
    p.glo = glo
    p.ghi = ghi
    p.hlo = hlo
    p.hhi = hhi
    p.tol = 0.25 * abs_tol * INNER
    p.cond = cond_rect
    with nogil:
        v = w_mixture(&p, wb.data, wb.n, eps, abs_tol, rel_tol)
    if st.failed:
        _raise(&st)
    return v
