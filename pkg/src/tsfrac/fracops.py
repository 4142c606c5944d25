"""Fractional integrals and derivatives on time scales.

Two families are provided:

* the classical Riemann-Liouville operators with kernel ``(t - s)^(alpha-1)``,
* the operators taken with respect to a weight function ``z`` with kernel
  ``(z(t) - z(s))^(alpha-1) z^Delta(s)``; for ``z`` the identity they reduce to
  the classical ones.

For the weighted kernel the singular factor is split off as

    (z(t) - z(s))^e = (t - s)^e * ((z(t) - z(s)) / (t - s))^e,

where the difference quotient is smooth and positive for increasing ``z``, so
that the same endpoint-weighted quadrature serves both families.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from tsfrac.calculus import (
    QuadratureSpec,
    as_array_fn,
    delta_derivative_many,
    delta_integral,
)
from tsfrac.errors import ConfigError, NonMonotoneWeight, NotInKappa, ZeroWeightDerivative
from tsfrac.exprlang import gamma
from tsfrac.timescale import TimeScale, in_kappa, scattered_points, sigma

#: Smallest admissible ``|z^Delta|``.
WEIGHT_DERIVATIVE_FLOOR = 1e-12
#: Below this relative distance ``t - s`` the kernel's difference quotient is
#: replaced by a midpoint derivative.
QUOTIENT_CUTOFF = 1e-5


def _derivative_quad(spec: FracOpSpec) -> QuadratureSpec:
    # Inner integrals of derivative operators are differenced over steps down
    # to ~4e-6, so they need tight tolerances; a numerically differentiated
    # weight caps the attainable accuracy near 1e-11.
    if spec.z is None:
        return spec.quad.tightened(rel_tol=1e-13, abs_tol=1e-15)
    return spec.quad.tightened(rel_tol=1e-11, abs_tol=1e-13)


@dataclass(frozen=True)
class FracOpSpec:
    """Order, base point, weight function and time scale of an operator.

    ``z=None`` stands for the identity.
    """

    alpha: float
    a: float
    T: TimeScale
    z: Callable | None = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"order alpha must lie in (0, 1), got {self.alpha}")
        if self.a not in self.T:
            raise ConfigError(f"base point a={self.a} is not in the time scale {self.T!r}")


@dataclass
class GridFunction:
    """Values on an increasing node set, read by linear interpolation."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.nodes.shape != self.values.shape or self.nodes.ndim != 1:
            raise ConfigError("grid function needs equally long 1-d nodes and values")
        if np.any(np.diff(self.nodes) <= 0):
            raise ConfigError("grid nodes must be strictly increasing")

    def __call__(self, s):
        out = np.interp(s, self.nodes, self.values)
        return float(out) if np.ndim(s) == 0 else out


# {{{ weight function helpers


def weight_derivative(spec: FracOpSpec, s) -> np.ndarray:
    """``z^Delta`` at the points ``s`` (ones for the identity)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if spec.z is None:
        return np.ones_like(s)
    return delta_derivative_many(spec.z, spec.T, s)


def validate_weight(spec: FracOpSpec, b: float) -> None:
    """Check that ``z`` is increasing with ``z^Delta`` bounded away from zero.

    ``z^Delta`` is sampled at the right-scattered points of ``[a, b)`` and at
    the midpoints of the continuous segments.

    :raises NonMonotoneWeight: if ``z^Delta`` is negative somewhere.
    :raises ZeroWeightDerivative: if ``|z^Delta|`` falls below the floor.
    """
    if spec.z is None or b <= spec.a:
        return
    T = spec.T
    xs = [p[0] for p in scattered_points(T, spec.a, b)]
    xs += [0.5 * (lo + hi) for lo, hi in T.segments(spec.a, b)]
    if not xs:
        return
    d = delta_derivative_many(spec.z, T, xs)
    if np.any(d < 0):
        k = int(np.argmin(d))
        raise NonMonotoneWeight(
            f"weight z is not increasing: z^Delta({xs[k]!r}) = {d[k]!r}"
        )
    if np.any(np.abs(d) <= WEIGHT_DERIVATIVE_FLOOR):
        k = int(np.argmin(np.abs(d)))
        raise ZeroWeightDerivative(f"z^Delta({xs[k]!r}) = {d[k]!r} vanishes")


def _weighted_integrand(spec: FracOpSpec, h: Callable, t: float, exponent: float):
    """Smooth factor ``((z(t)-z(s))/(t-s))^e z^Delta(s) h(s)`` of the kernel."""
    hv = as_array_fn(h)
    if spec.z is None:
        return hv
    zv = as_array_fn(spec.z)
    zt = float(zv(np.array([t]))[0])

    def g(s: np.ndarray) -> np.ndarray:
        zd = weight_derivative(spec, s)
        gap = t - s
        with np.errstate(divide="ignore", invalid="ignore"):
            quotient = (zt - zv(s)) / gap
        # near s = t the quotient cancels; the derivative at the midpoint
        # matches it to second order in t - s
        close = gap <= QUOTIENT_CUTOFF * max(1.0, abs(t))
        if np.any(close):
            quotient[close] = weight_derivative(spec, 0.5 * (s[close] + t))
        return quotient**exponent * zd * hv(s)

    return g


def kernel_integral(
    spec: FracOpSpec,
    h: Callable,
    t: float,
    exponent: float,
    quad: QuadratureSpec | None = None,
    breakpoints: Sequence[float] = (),
) -> float:
    """``int_a^t (z(t) - z(s))^exponent z^Delta(s) h(s) Delta s`` for
    ``-1 < exponent <= 0`` (no gamma-function normalization)."""
    _, t = spec.T.locate(t)
    if t < spec.a:
        raise ConfigError(f"evaluation point t={t} lies left of the base point a={spec.a}")
    if t == spec.a:
        return 0.0
    q = (quad or spec.quad).with_exponent(exponent)
    return delta_integral(_weighted_integrand(spec, h, t, exponent), spec.T, spec.a, t, q,
                          breakpoints)


# }}}


# {{{ operators


def _identity(spec: FracOpSpec) -> FracOpSpec:
    if spec.z is None:
        return spec
    return FracOpSpec(spec.alpha, spec.a, spec.T, None, spec.quad)


def frac_integral(spec: FracOpSpec, h: Callable, t: float) -> float:
    """Riemann-Liouville fractional integral of order ``spec.alpha`` with
    kernel ``(t - s)^(alpha - 1) / Gamma(alpha)``; ``spec.z`` is ignored."""
    spec = _identity(spec)
    return kernel_integral(spec, h, t, spec.alpha - 1.0) / gamma(spec.alpha)


def gen_frac_integral(
    spec: FracOpSpec, h: Callable, t: float, breakpoints: Sequence[float] = ()
) -> float:
    """Fractional integral of ``h`` with respect to ``spec.z``.

    >>> from tsfrac.timescale import TimeScale
    >>> spec = FracOpSpec(0.5, 0.0, TimeScale.interval(0, 2), z=lambda t: t**2)
    >>> round(gen_frac_integral(spec, lambda s: 1.0 + 0 * s, 1.0), 8)
    1.12837917
    """
    _, t = spec.T.locate(t)
    validate_weight(spec, t)
    return kernel_integral(spec, h, t, spec.alpha - 1.0, breakpoints=breakpoints) / gamma(
        spec.alpha
    )


def order_integral(spec: FracOpSpec, order: float, h: Callable, t: float) -> float:
    """Fractional integral of any order in ``(0, 1]`` with respect to ``spec.z``;
    order 1 is ``int_a^t z^Delta(s) h(s) Delta s``."""
    if not 0.0 < order <= 1.0:
        raise ConfigError(f"order must lie in (0, 1], got {order}")
    return kernel_integral(spec, h, t, order - 1.0) / gamma(order)


def _outer_derivative(spec: FracOpSpec, w: Callable[[float], float], t: float) -> float:
    """Delta derivative at ``t`` of a function known only pointwise on ``T``."""
    T = spec.T
    if not in_kappa(T, t):
        raise NotInKappa(f"{t!r} is not in T^kappa")
    if t < spec.a:
        raise ConfigError(f"derivative needs t >= a, got t={t}, a={spec.a}")

    def wv(x: np.ndarray) -> np.ndarray:
        return np.array([w(float(v)) for v in x])

    return float(delta_derivative_many(wv, T, [t], domain=(spec.a, T.max))[0])


def frac_derivative(spec: FracOpSpec, h: Callable, t: float) -> float:
    """Riemann-Liouville fractional derivative: ``1 / Gamma(1 - alpha)`` times
    the delta derivative of ``int_a^t (t - s)^(-alpha) h(s) Delta s``."""
    spec = _identity(spec)
    _, t = spec.T.locate(t)
    q = _derivative_quad(spec)

    def w(x: float) -> float:
        return kernel_integral(spec, h, x, -spec.alpha, q)

    return _outer_derivative(spec, w, t) / gamma(1.0 - spec.alpha)


def gen_frac_derivative(spec: FracOpSpec, h: Callable, t: float) -> float:
    """Fractional derivative of ``h`` with respect to ``spec.z``."""
    _, t = spec.T.locate(t)
    zd = float(weight_derivative(spec, t)[0])
    if abs(zd) <= WEIGHT_DERIVATIVE_FLOOR:
        raise ZeroWeightDerivative(f"z^Delta({t!r}) = {zd!r} vanishes")
    validate_weight(spec, sigma(spec.T, t))
    q = _derivative_quad(spec)

    def v(x: float) -> float:
        return kernel_integral(spec, h, x, -spec.alpha, q)

    return _outer_derivative(spec, v, t) / (gamma(1.0 - spec.alpha) * zd)


def semigroup_defect(
    spec: FracOpSpec, h: Callable, alpha: float, beta: float, t: float
) -> float:
    """``I^alpha[I^beta h](t) - I^(alpha+beta) h(t)`` with respect to ``spec.z``.

    On ``T = R`` this vanishes up to quadrature error; on scales with
    scattered points it measures how far the composition rule is from exact.
    """
    if not (0 < alpha <= 1 and 0 < beta <= 1 and alpha + beta <= 1):
        raise ConfigError(f"need alpha, beta, alpha+beta in (0, 1], got {alpha}, {beta}")
    _, t = spec.T.locate(t)
    if t == spec.a:
        return 0.0
    validate_weight(spec, t)

    def inner(s: np.ndarray) -> np.ndarray:
        return np.array([order_integral(spec, beta, h, float(x)) for x in np.atleast_1d(s)])

    composed = order_integral(spec, alpha, inner, t)
    return composed - order_integral(spec, alpha + beta, h, t)


# }}}
