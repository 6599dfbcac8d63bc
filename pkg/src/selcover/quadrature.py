"""Adaptive Gauss-Kronrod quadrature and the shared tolerance configuration.

The pure-Python integrator here is the reference used by the fallback kernels.
The compiled kernels implement the same panel rule, error estimate and
bisection order, so both backends agree to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
XGK = (
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
    0.000000000000000000000000000000000,
)
WGK = (
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
)
# Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
WG = (
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
)

EPMACH = 2.220446049250313e-16
UFLOW = 2.2250738585072014e-308

# Tolerance given to nested inner integrals, relative to the outer abs_tol.
INNER_TOL_FACTOR = 1e-2


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance.

    ``estimate`` and ``error`` are the integral and error estimates at the point
    of failure; ``worst_panel`` is ``(a, b, panel_estimate, panel_error)`` for
    the panel with the largest error.
    """

    def __init__(self, message, estimate=math.nan, error=math.nan, worst_panel=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.worst_panel = worst_panel


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances, truncation and subdivision limits for every integral.

    abs_tol
        Target absolute error per integral.
    rel_tol
        Relative target; it only tightens the absolute target for small
        integrals (never below ``abs_tol * 1e-3``).
    w_trunc_prob
        Probability mass cut from each end of the W axis.
    h_trunc_halfwidth
        Half-width, in standard deviations, of inner normal integrals.
    max_subdivisions
        Panel budget per integral.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    w_trunc_prob: float = 1e-10
    h_trunc_halfwidth: float = 8.5
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not 0 < self.w_trunc_prob <= 1e-6:
            raise ValueError(f"w_trunc_prob must lie in (0, 1e-6], got {self.w_trunc_prob}")
        if not self.h_trunc_halfwidth > 0:
            raise ValueError("h_trunc_halfwidth must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be a positive integer")

    def with_abs_tol(self, abs_tol: float) -> "QuadratureConfig":
        return replace(self, abs_tol=abs_tol)

    @property
    def inner_tol(self) -> float:
        return self.abs_tol * INNER_TOL_FACTOR

    def as_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "w_trunc_prob": self.w_trunc_prob,
            "h_trunc_halfwidth": self.h_trunc_halfwidth,
            "max_subdivisions": self.max_subdivisions,
        }


DEFAULT_CONFIG = QuadratureConfig()


def target_tolerance(abs_tol: float, rel_tol: float, estimate: float) -> float:
    return max(abs_tol * 1e-3, min(abs_tol, rel_tol * abs(estimate)))


def gk21(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One 21-point Gauss-Kronrod panel on [a, b]: (estimate, error estimate)."""
    centr = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    fc = f(centr)
    resg = 0.0
    resk = WGK[10] * fc
    resabs = abs(resk)
    fv1 = [0.0] * 10
    fv2 = [0.0] * 10
    for j in range(10):
        dx = hlgth * XGK[j]
        f1 = f(centr - dx)
        f2 = f(centr + dx)
        fv1[j] = f1
        fv2[j] = f2
        resk += WGK[j] * (f1 + f2)
        resabs += WGK[j] * (abs(f1) + abs(f2))
        if j & 1:
            resg += WG[j >> 1] * (f1 + f2)
    reskh = resk * 0.5
    resasc = WGK[10] * abs(fc - reskh)
    for j in range(10):
        resasc += WGK[j] * (abs(fv1[j] - reskh) + abs(fv2[j] - reskh))
    result = resk * hlgth
    resabs *= abs(hlgth)
    resasc *= abs(hlgth)
    abserr = abs((resk - resg) * hlgth)
    if resasc != 0.0 and abserr != 0.0:
        abserr = resasc * min(1.0, (200.0 * abserr / resasc) ** 1.5)
    if resabs > UFLOW / (50.0 * EPMACH):
        abserr = max(EPMACH * 50.0 * resabs, abserr)
    return result, abserr


def integrate(
    f: Callable[[float], float],
    breaks: Sequence[float],
    abs_tol: float = 1e-9,
    rel_tol: float = 1e-8,
    max_subdivisions: int = 200,
) -> tuple[float, float]:
    """Globally adaptive integral of ``f`` over ``[breaks[0], breaks[-1]]``.

    Every interval between consecutive breakpoints starts as its own panel;
    the panel with the largest error estimate is bisected until the summed
    error meets :func:`target_tolerance`. Raises :class:`QuadratureError`
    when the panel budget is exhausted.
    """
    panels = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            r, e = gk21(f, a, b)
            panels.append([a, b, r, e])
    if not panels:
        return 0.0, 0.0
    budget = max(max_subdivisions, len(panels))
    while True:
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if err <= target_tolerance(abs_tol, rel_tol, total):
            return total, err
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        if len(panels) >= budget:
            a, b, r, e = panels[worst]
            raise QuadratureError(
                f"no convergence after {len(panels)} panels: estimate {total:.3e}, "
                f"error {err:.3e}; worst panel [{a:.6g}, {b:.6g}] = {r:.3e} +- {e:.3e}",
                estimate=total,
                error=err,
                worst_panel=(a, b, r, e),
            )
        a, b = panels[worst][0], panels[worst][1]
        mid = 0.5 * (a + b)
        r1, e1 = gk21(f, a, mid)
        r2, e2 = gk21(f, mid, b)
        panels[worst] = [a, mid, r1, e1]
        panels.append([mid, b, r2, e2])
