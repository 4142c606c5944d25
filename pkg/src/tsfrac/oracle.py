"""Reference values used to check the numerical operators.

Nothing here calls into :mod:`tsfrac.calculus`, :mod:`tsfrac.fracops` or
:mod:`tsfrac.solver`: jumps are recomputed from the raw pieces of the time
scale, sums are accumulated with :mod:`mpmath`, continuous parts use
tanh-sinh quadrature from :mod:`mpmath`, and the Volterra solver is a
product-integration scheme on a uniform grid.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import mpmath
import numpy as np

from tsfrac.errors import ConfigError, DomainError, NonFiniteValue, ScaleHasContinuousPart
from tsfrac.fracops import GridFunction
from tsfrac.solver import IVProblem
from tsfrac.timescale import TimeScale

METHODS = ("closed_form", "finite_sum", "dense_quadrature", "volterra_grid")

#: Distance from the singular end below which ``z(t) - z(s)`` is expanded.
TAYLOR_WINDOW = 1e-5


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str
    est_error: float

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown oracle method {self.method!r}")
        if not self.est_error >= 0:
            raise ConfigError(f"estimated error must be >= 0, got {self.est_error}")


def _scalar(fn: Callable | None) -> Callable[[float], float]:
    if fn is None:
        return lambda x: x
    return lambda x: float(fn(float(x)))


# {{{ closed forms


def rl_power_rule(alpha: float, nu: float, t: float) -> float:
    """Riemann-Liouville integral of order ``alpha`` of ``s^nu`` from 0 to ``t``.

    >>> round(rl_power_rule(0.5, 0.0, 1.0) * math.sqrt(math.pi), 12)
    2.0
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"order alpha must lie in (0, 1), got {alpha}")
    if not nu > -1.0:
        raise DomainError(f"power nu must exceed -1, got {nu}")
    if t < 0:
        raise DomainError(f"evaluation point must be >= 0, got {t}")
    if t == 0:
        return 0.0
    return math.exp(math.lgamma(nu + 1) - math.lgamma(nu + 1 + alpha)) * t ** (nu + alpha)


def weighted_constant_integral(alpha: float, z: Callable, a: float, t: float) -> float:
    """Fractional integral of ``h = 1`` with respect to ``z`` on the reals,
    ``(z(t) - z(a))^alpha / Gamma(alpha + 1)``."""
    dz = float(z(t)) - float(z(a))
    if dz < 0:
        raise DomainError(f"z(t) < z(a) for t={t}, a={a}")
    return dz**alpha / math.gamma(alpha + 1)


# }}}


# {{{ finite sums


def _points(T: TimeScale, a: float, t: float) -> list[float]:
    """Points of a pure-point scale up to and including the successor of ``t``."""
    xs = []
    for lo, hi in T.pieces:
        if lo != hi and hi > a and lo < t:
            raise ScaleHasContinuousPart(f"[{lo}, {hi}] meets [{a}, {t}]")
        xs.append(lo)
        if lo != hi:
            xs.append(hi)
    return sorted(xs)


def discrete_frac_sum(
    T: TimeScale,
    alpha: float,
    z: Callable | None,
    h: Callable,
    a: float,
    t: float,
) -> float:
    """Exact fractional integral with respect to ``z`` on a scale without
    continuous parts between ``a`` and ``t``.

    Every point ``s`` of ``[a, t)`` carries mass ``mu(s)``, so the integral is

        1/Gamma(alpha) sum_s (z(t) - z(s))^(alpha-1) (z(sigma(s)) - z(s)) h(s),

    which is accumulated in extended precision.  ``z=None`` is the identity.

    >>> T = TimeScale.points(range(5))
    >>> v = discrete_frac_sum(T, 0.5, None, lambda s: 1.0, 0, 2)
    >>> round(v * math.sqrt(math.pi), 12) == round(2**-0.5 + 1, 12)
    True
    """
    xs = _points(T, a, t)
    if t < a:
        raise ConfigError(f"t={t} lies left of the base point a={a}")
    zf, hf = _scalar(z), _scalar(h)
    zt = mpmath.mpf(zf(t))
    terms = []
    for i, s in enumerate(xs):
        if s < a or s >= t:
            continue
        sig = xs[i + 1]
        zs = mpmath.mpf(zf(s))
        jump = mpmath.mpf(zf(sig)) - zs
        terms.append((zt - zs) ** (alpha - 1) * jump * hf(s))
    return float(mpmath.fsum(terms) / mpmath.gamma(alpha))


def _five_point(fn: Callable[[float], float], x: float, h: float = 1e-4) -> float:
    return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h)


def dense_reference(
    T: TimeScale,
    alpha: float,
    z: Callable | None,
    h: Callable,
    a: float,
    t: float,
) -> OracleResult:
    """Fractional integral with respect to ``z`` on an arbitrary bounded scale.

    Scattered points are summed exactly.  On each continuous piece the
    singular kernel is removed by the substitution ``u = (t - s)^alpha`` and
    the bounded remainder is integrated with tanh-sinh quadrature.  ``z'`` is
    a five-point central difference, so ``z`` must be defined slightly beyond
    each piece, and ``z(t) - z(s)`` is Taylor-expanded within
    ``TAYLOR_WINDOW`` of ``t``.
    """
    if t < a:
        raise ConfigError(f"t={t} lies left of the base point a={a}")
    zf, hf = _scalar(z), _scalar(h)
    zt = mpmath.mpf(zf(t))
    pieces = [(lo, hi) for lo, hi in T.pieces if hi >= a and lo <= t]
    allp = list(T.pieces)
    total, err = mpmath.mpf(0), mpmath.mpf(0)
    for lo, hi in pieces:
        lo_c, hi_c = max(lo, a), min(hi, t)
        if hi_c > lo_c:
            if z is None:
                d1, d2 = 1.0, 0.0
            else:
                d1 = _five_point(zf, t)
                d2 = (zf(t - 1e-4) - 2 * zf(t) + zf(t + 1e-4)) / 1e-8

            # with x = t - s and u = x^alpha the kernel x^(alpha-1) dx becomes
            # du / alpha; what remains is the bounded factor quotient^(alpha-1),
            # quotient = (z(t) - z(s)) / x
            def integrand(u):
                x = u ** (1 / mpmath.mpf(alpha))
                s = float(t - x)
                if z is None:
                    quotient = 1
                elif x < TAYLOR_WINDOW:
                    # z(t) - z(s) cancels next to the singular end; expand instead
                    quotient = d1 - 0.5 * d2 * x
                else:
                    quotient = (zt - zf(s)) / x
                if quotient <= 0:
                    return mpmath.mpf(0)
                dz = _five_point(zf, s) if z is not None else 1
                return quotient ** (alpha - 1) * dz * hf(s) / alpha

            u_lo = (mpmath.mpf(t) - hi_c) ** alpha
            u_hi = (mpmath.mpf(t) - lo_c) ** alpha
            u_cut = mpmath.mpf(TAYLOR_WINDOW) ** alpha
            pts = [u_lo, *(u for u in (u_cut,) if u_lo < u < u_hi), u_hi]
            v, e = mpmath.quad(integrand, pts, error=True)
            total += v
            err += e
        # right endpoint of the piece is scattered unless it is the maximum
        if hi < t and hi >= a:
            k = allp.index((lo, hi))
            if k + 1 < len(allp):
                sig = allp[k + 1][0]
                zs = mpmath.mpf(zf(hi))
                total += (zt - zs) ** (alpha - 1) * (mpmath.mpf(zf(sig)) - zs) * hf(hi)
    g = mpmath.gamma(alpha)
    value = float(total / g)
    return OracleResult(value, "dense_quadrature", float(abs(err / g)) + 1e-10 * abs(value))


# }}}


# {{{ Volterra solver


def _linear_weights(U: float, u: np.ndarray, alpha: float) -> np.ndarray:
    """Weights ``w_j`` with ``int_{u_0}^{U} (U - v)^(alpha-1) g(v) dv = sum w_j g_j``
    for ``g`` piecewise linear on the increasing nodes ``u`` (``u[-1] = U``)."""
    A = U - u[:-1]
    B = np.maximum(U - u[1:], 0.0)
    d = u[1:] - u[:-1]
    m0 = (A**alpha - B**alpha) / alpha
    # moment of (v - u_j) over the panel
    m1 = A * m0 - (A ** (alpha + 1) - B ** (alpha + 1)) / (alpha + 1)
    w = np.zeros(u.size)
    w[:-1] += m0 - m1 / d
    w[1:] += m1 / d
    return w


def volterra_dense_solve(p: IVProblem, grid_n: int = 1024) -> GridFunction:
    """Solve ``y(t) = z'(t)/Gamma(alpha) int_t0^t (z(t)-z(s))^(alpha-1) z'(s) f(s, y(s)) ds``
    on ``J = [t0, t0 + horizon]``, which must lie in one interval of ``p.T``.

    The grid is uniform with ``grid_n`` nodes.  After the change of variable
    ``u = z(s)`` the kernel is a plain power of ``z(t) - u``, which is
    integrated exactly against the piecewise-linear interpolant of
    ``f(s, y(s))`` in ``u``; each step is implicit in its last node and is
    solved by fixed-point iteration.
    """
    if grid_n < 64:
        raise ConfigError(f"grid_n must be at least 64, got {grid_n}")
    alpha, t0, horizon, f, z = p.alpha, p.t0, p.horizon, p.f, p.z
    if not any(lo <= t0 and p.t_end <= hi and lo < hi for lo, hi in p.T.pieces):
        raise ScaleHasContinuousPart(
            f"the Volterra oracle needs [{t0}, {p.t_end}] inside one interval of the scale"
        )
    ts = np.linspace(t0, t0 + horizon, grid_n)
    if z is None:
        us = ts.copy()
        dz = np.ones_like(ts)
    else:
        zf = _scalar(z)
        us = np.array([zf(x) for x in ts])
        eps = 1e-6 * max(1.0, horizon)
        dz = np.array([(zf(x + eps) - zf(x - eps)) / (2 * eps) for x in ts])
        if np.any(np.diff(us) <= 0):
            raise ConfigError("weight z must be increasing on the horizon")

    def fv(t: float, y: float) -> float:
        v = float(f(t, y))
        if not math.isfinite(v):
            raise NonFiniteValue(f"f({t!r}, {y!r}) is not finite")
        return v

    inv_g = 1.0 / math.gamma(alpha)
    y = np.zeros(grid_n)
    g = np.zeros(grid_n)
    g[0] = fv(ts[0], 0.0)
    for n in range(1, grid_n):
        w = _linear_weights(us[n], us[: n + 1], alpha)
        c = dz[n] * inv_g
        known = c * float(w[:-1] @ g[:n])
        yn = y[n - 1]
        for _ in range(200):
            new = known + c * w[-1] * fv(ts[n], yn)
            if abs(new - yn) <= 1e-15 * max(1.0, abs(new)):
                yn = new
                break
            yn = new
        y[n] = yn
        g[n] = fv(ts[n], yn)
    return GridFunction(ts, y)


# }}}
