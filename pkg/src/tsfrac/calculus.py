"""Delta derivative and delta integral on a time scale.

The delta integral over ``[a, b]`` splits into a finite sum over the
right-scattered points of ``[a, b)`` (each weighted by its graininess) and
ordinary integrals over the continuous segments.  The latter are computed
with a vectorized adaptive Gauss-Kronrod rule.  An integrable endpoint
weight ``(b - s)^gamma`` with ``-1 < gamma < 0`` is removed by the change of
variables ``u = (b - s)^(gamma + 1)``, under which

    int_l^r (b - s)^gamma phi(s) ds = p int_{(b-r)^{1/p}}^{(b-l)^{1/p}} phi(b - u^p) du,

with ``p = 1 / (gamma + 1)``; the transformed integrand is bounded.

All integrands are called with 1-d numpy arrays and must return arrays of
the same shape.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace

import numpy as np

from tsfrac.errors import ConfigError, NoConvergence, NotIncreasing, NotInKappa, QuadratureFailure
from tsfrac.timescale import (
    EPS,
    TimeScale,
    extended_sigma,
    in_kappa,
    scattered_points,
    sigma,
)

ArrayFn = Callable[[np.ndarray], np.ndarray]

#: Largest first step of the one-sided difference quotients at dense points.
DERIVATIVE_H0 = 1e-3
#: Number of step halvings in the Richardson table.
DERIVATIVE_LEVELS = 9
#: Relative disagreement of successive extrapolants that counts as failure.
DERIVATIVE_TOL = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_subdivisions: int = 2000
    #: exponent of the weight ``(b - s)^gamma`` at the right endpoint
    endpoint_exponent: float = 0.0

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be positive")
        if not -1.0 < self.endpoint_exponent <= 0.0:
            raise ConfigError(
                f"endpoint_exponent must lie in (-1, 0], got {self.endpoint_exponent}"
            )

    def with_exponent(self, gamma: float) -> QuadratureSpec:
        return replace(self, endpoint_exponent=float(gamma))

    def tightened(self, rel_tol: float, abs_tol: float) -> QuadratureSpec:
        return replace(
            self,
            rel_tol=min(self.rel_tol, rel_tol),
            abs_tol=min(self.abs_tol, abs_tol),
        )


def as_array_fn(f: Callable) -> ArrayFn:
    """Wrap ``f`` so that it maps 1-d arrays to float arrays of equal shape.

    Callables that do not accept arrays are evaluated point by point.
    """

    def wrapped(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(f(x), dtype=float)
        except (TypeError, ValueError):
            out = np.array([f(float(v)) for v in x.ravel()], dtype=float).reshape(x.shape)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).astype(float)
        return out

    return wrapped


# {{{ Gauss-Kronrod 7-15

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (and the centre)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]


def _gk15(fn: ArrayFn, a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = fn(x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise QuadratureFailure("integrand is not finite at a quadrature node")
    kron = half * (fx @ _WK)
    gauss = half * (fx @ _WG15)
    resabs = np.abs(half) * (np.abs(fx) @ _WK)
    return kron, np.abs(kron - gauss), resabs


def adaptive_quad(
    fn: ArrayFn,
    breaks: Sequence[float],
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    max_subdivisions: int = 2000,
) -> tuple[float, float]:
    """Integrate ``fn`` over ``[breaks[0], breaks[-1]]``.

    Each panel between consecutive breakpoints is refined by bisection until
    its Kronrod/Gauss discrepancy is below its share of the tolerance.
    Returns the integral and an error estimate.
    """
    edges = np.asarray(breaks, dtype=float)
    a, b = edges[:-1], edges[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0, 0.0
    width = float(np.sum(b - a))

    parts: list[float] = []
    done_err = done_abs = 0.0
    npanels = a.size
    while True:
        vals, errs, absv = _gk15(fn, a, b)
        total = math.fsum(parts) + float(np.sum(vals))
        err = done_err + float(np.sum(errs))
        roundoff = 50 * np.finfo(float).eps * (done_abs + float(np.sum(absv)))
        tol = max(abs_tol, rel_tol * abs(total), roundoff)
        if err <= tol:
            return total, err

        share = tol * (b - a) / width
        ok = (errs <= share) | (errs <= 50 * np.finfo(float).eps * absv)
        parts.extend(vals[ok].tolist())
        done_err += float(np.sum(errs[ok]))
        done_abs += float(np.sum(absv[ok]))

        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        npanels += a.size
        if npanels > max_subdivisions:
            raise QuadratureFailure(
                f"tolerance {tol:.3g} not met within {max_subdivisions} subdivisions "
                f"(error estimate {err:.3g})"
            )
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])


def weighted_quad(
    fn: ArrayFn,
    lo: float,
    hi: float,
    c: float,
    gamma: float,
    q: QuadratureSpec,
    breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    """``int_lo^hi (c - s)^gamma fn(s) ds`` for ``c >= hi`` and ``gamma > -1``."""
    inner = sorted(x for x in breakpoints if lo < x < hi)
    if gamma == 0.0:
        return adaptive_quad(fn, [lo, *inner, hi], q.rel_tol, q.abs_tol, q.max_subdivisions)

    e = gamma + 1.0
    p = 1.0 / e
    ubreaks = [(c - x) ** e for x in reversed([lo, *inner, hi])]
    ubreaks[0] = max(c - hi, 0.0) ** e

    def g(u: np.ndarray) -> np.ndarray:
        return p * fn(c - u**p)

    return adaptive_quad(g, ubreaks, q.rel_tol, q.abs_tol, q.max_subdivisions)


# }}}


# {{{ delta integral


def delta_integral(
    f: Callable,
    T: TimeScale,
    a: float,
    b: float,
    q: QuadratureSpec = QuadratureSpec(),
    breakpoints: Sequence[float] = (),
) -> float:
    """``int_a^b (b - s)^gamma f(s) Delta s`` with ``gamma = q.endpoint_exponent``.

    With the default exponent 0 this is the plain delta integral.  Extra
    ``breakpoints`` (e.g. kinks of a piecewise-linear integrand) are used to
    seed the adaptive refinement on continuous segments.
    """
    _, a = T.locate(a)
    _, b = T.locate(b)
    if a > b:
        raise ConfigError(f"delta_integral needs a <= b, got [{a}, {b}]")
    fv = as_array_fn(f)
    g = q.endpoint_exponent

    total = 0.0
    pts = scattered_points(T, a, b)
    if pts:
        s = np.array([p[0] for p in pts])
        mu = np.array([p[1] for p in pts])
        w = mu * (b - s) ** g if g else mu
        total += math.fsum(w * fv(s))

    for lo, hi in T.segments(a, b):
        val, _ = weighted_quad(fv, lo, hi, b, g, q, breakpoints)
        total += val
    return total


def split_identity_check(
    f: Callable, T: TimeScale, a: float, b: float, q: QuadratureSpec = QuadratureSpec()
) -> tuple[float, float]:
    """Both sides of ``int_a^b f = mu(a) f(a) + int_sigma(a)^b f``."""
    _, a = T.locate(a)
    lhs = delta_integral(f, T, a, b, q)
    sa = sigma(T, a) if a < b else a
    fa = float(as_array_fn(f)(np.array([a]))[0])
    rhs = (sa - a) * fa + delta_integral(f, T, sa, b, q)
    return lhs, rhs


# }}}


# {{{ delta derivative


def _richardson(fn: ArrayFn, t: np.ndarray, h0: np.ndarray, d: np.ndarray):
    """Extrapolate one-sided difference quotients ``(f(t + d h) - f(t)) / (d h)``
    over the steps ``h0 / 2^i``; returns the best estimate and its error."""
    ft = fn(t)
    n = DERIVATIVE_LEVELS
    table = np.empty((n, n, t.size))
    best = np.full(t.size, np.nan)
    best_err = np.full(t.size, np.inf)
    for i in range(n):
        h = d * h0 / 2.0**i
        table[i, 0] = (fn(t + h) - ft) / h
        fac = 1.0
        for j in range(1, i + 1):
            fac *= 2.0
            table[i, j] = (fac * table[i, j - 1] - table[i - 1, j - 1]) / (fac - 1.0)
            err = np.maximum(
                np.abs(table[i, j] - table[i, j - 1]),
                np.abs(table[i, j] - table[i - 1, j - 1]),
            )
            better = err < best_err
            best = np.where(better, table[i, j], best)
            best_err = np.where(better, err, best_err)
    return best, best_err


def delta_derivative_many(
    f: Callable,
    T: TimeScale,
    ts: Sequence[float] | np.ndarray,
    domain: tuple[float, float] | None = None,
) -> np.ndarray:
    """Delta derivative of ``f`` at each point of ``ts``.

    Right-scattered points use the exact quotient ``(f(sigma t) - f(t)) / mu(t)``.
    Right-dense points use Richardson-extrapolated one-sided quotients inside
    the containing segment, optionally clipped to ``domain`` where ``f`` is
    defined.
    """
    fv = as_array_fn(f)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.empty(ts.size)

    idx, snapped = T.locate_many(ts)
    los, his = T.bounds_arrays
    last = len(T.pieces) - 1
    if last > 0 and los[last] == his[last]:
        bad = idx == last
        if np.any(bad):
            raise NotInKappa(f"{T.max!r} is a left-scattered maximum, not in T^kappa of {T!r}")
    scattered = (snapped == his[idx]) & (idx < last)
    room_f, room_b = his[idx] - snapped, snapped - los[idx]

    if np.any(scattered):
        s = snapped[scattered]
        sig = los[idx[scattered] + 1]
        out[scattered] = (fv(sig) - fv(s)) / (sig - s)

    dense = ~scattered
    if np.any(dense):
        t = snapped[dense]
        rf, rb = room_f[dense], room_b[dense]
        if domain is not None:
            rf = np.minimum(rf, domain[1] - t)
            rb = np.minimum(rb, t - domain[0])
        forward = (rf >= DERIVATIVE_H0) | (rf >= rb)
        h0 = np.where(forward, np.minimum(rf, DERIVATIVE_H0), np.minimum(rb, DERIVATIVE_H0))
        if np.any(h0 <= EPS):
            raise NoConvergence("no neighbourhood inside the time scale to differentiate on")
        d = np.where(forward, 1.0, -1.0)
        est, err = _richardson(fv, t, h0, d)
        bad = ~(err <= DERIVATIVE_TOL * np.maximum(1.0, np.abs(est)))
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NoConvergence(
                f"Richardson extrapolation stagnated at t={t[k]!r} "
                f"(estimate {est[k]!r}, disagreement {err[k]:.3g})"
            )
        out[dense] = est
    return out


def delta_derivative(
    f: Callable, T: TimeScale, t: float, domain: tuple[float, float] | None = None
) -> float:
    return float(delta_derivative_many(f, T, [t], domain)[0])


# }}}


# {{{ extension to the reals


@dataclass(frozen=True)
class RealExtension:
    """Step-wise extension of a function on ``T ∩ [a, b]`` to the real
    interval ``[a, b]``: it agrees with ``f`` on ``T`` and is constant, equal to
    ``f(t)``, on every gap ``(t, sigma(t))``."""

    f: Callable
    T: TimeScale
    a: float
    b: float

    def __call__(self, s):
        sa = np.atleast_1d(np.asarray(s, dtype=float))
        los = np.array([p[0] for p in self.T.pieces])
        his = np.array([p[1] for p in self.T.pieces])
        i = np.clip(np.searchsorted(los, sa + EPS, side="right") - 1, 0, len(los) - 1)
        inside = sa <= his[i] + EPS
        x = np.where(inside, sa, his[i])
        out = as_array_fn(self.f)(x)
        return float(out[0]) if np.ndim(s) == 0 else out

    def integral(self, q: QuadratureSpec = QuadratureSpec()) -> float:
        """Ordinary integral of the extension over ``[a, b]``."""
        val, _ = adaptive_quad(
            as_array_fn(self), self.T.nodes(self.a, self.b), q.rel_tol, q.abs_tol,
            q.max_subdivisions,
        )
        return val


def _sample_points(T: TimeScale, a: float, b: float, per_segment: int = 16) -> np.ndarray:
    xs = [T.nodes(a, b)]
    for lo, hi in T.segments(a, b):
        xs.append(np.linspace(lo, hi, per_segment))
    return np.unique(np.concatenate(xs))


def extend_to_reals(f: Callable, T: TimeScale, a: float, b: float) -> RealExtension:
    """Step-wise real extension of an increasing function.

    :raises NotIncreasing: if ``f`` decreases between sampled points of
        ``T ∩ [a, b]``.
    """
    _, a = T.locate(a)
    _, b = T.locate(b)
    xs = _sample_points(T, a, b)
    fx = as_array_fn(f)(xs)
    scale = max(1.0, float(np.max(np.abs(fx))))
    if np.any(np.diff(fx) < -1e-12 * scale):
        k = int(np.argmax(np.diff(fx) < -1e-12 * scale))
        raise NotIncreasing(f"f decreases between {xs[k]!r} and {xs[k + 1]!r}")
    return RealExtension(f, T, a, b)


def extend_delta_derivative(
    f: Callable, T: TimeScale, a: float, b: float, kind: str = "auto"
) -> ArrayFn:
    """Extension of ``f^Delta`` from ``T ∩ [a, b]`` to the real interval.

    On continuous segments this is the ordinary derivative.  Across a gap
    ``(t, sigma(t))``:

    * ``"step"`` holds ``f^Delta(t)``;
    * ``"linear"`` interpolates between ``f^Delta(t)`` and ``f^Delta(sigma(t))``
      (holding ``f^Delta(t)`` when ``sigma(t) = max T``);
    * ``"rule"`` uses the difference quotient of the scale's generator jump,
      ``(f(sigma(s)) - f(s)) / (sigma(s) - s)`` with ``sigma(s) = s + h`` or
      ``q s`` (the q-derivative); it needs a generated scale.

    ``"auto"`` picks ``"rule"`` when the scale has a generator rule and
    ``"linear"`` otherwise.
    """
    if kind == "auto":
        kind = "rule" if T.rule is not None else "linear"
    if kind not in ("linear", "step", "rule"):
        raise ConfigError(f"unknown extension kind {kind!r}")
    if kind == "rule" and T.rule is None:
        raise ConfigError("extension kind 'rule' needs a scale built by a generator")
    _, a = T.locate(a)
    _, b = T.locate(b)
    gaps = scattered_points(T, a, b)
    gl = np.array([g[0] for g in gaps])
    gr = gl + np.array([g[1] for g in gaps])
    fv = as_array_fn(f)
    if gaps and kind != "rule":
        dl = delta_derivative_many(f, T, gl)
        dr = dl.copy()
        if kind == "linear":
            # the last gap may end at max T, where f^Delta does not exist
            ok = np.array([in_kappa(T, x) for x in gr])
            dr[ok] = delta_derivative_many(f, T, gr[ok])

    def ext(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape)
        in_gap = np.zeros(s.shape, dtype=bool)
        if gaps:
            j = np.clip(np.searchsorted(gl, s, side="right") - 1, 0, len(gl) - 1)
            in_gap = (s > gl[j]) & (s < gr[j])
            jj = j[in_gap]
            if kind == "rule":
                x = s[in_gap]
                sx = extended_sigma(T, x)
                out[in_gap] = (fv(sx) - fv(x)) / (sx - x)
            else:
                lam = (s[in_gap] - gl[jj]) / (gr[jj] - gl[jj])
                out[in_gap] = (1 - lam) * dl[jj] + lam * dr[jj]
        rest = ~in_gap
        if np.any(rest):
            out[rest] = delta_derivative_many(f, T, s[rest])
        return out

    return ext


# }}}
