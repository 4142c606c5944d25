"""Fractional initial value problems on time scales.

The problem ``D^alpha_{t0; z} y = f(t, y)`` on ``J = [t0, t0 + horizon]`` with
zero initial data is equivalent to the integral equation

    y(t) = z^Delta(t) / Gamma(alpha)
           * int_t0^t (z(t) - z(s))^(alpha-1) z^Delta(s) f(s, y(s)) Delta s,

whose right-hand side defines the operator ``F``.  :func:`solve_picard`
iterates ``y <- F(y)`` on a grid of ``J``; :func:`check_contraction`
evaluates the sufficient condition

    L z^Delta(t) M_alpha(t) (t - t0) / Gamma(alpha) < 1

under which ``F`` is a contraction.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tsfrac.calculus import (
    QuadratureSpec,
    as_array_fn,
    extend_delta_derivative,
    weighted_quad,
)
from tsfrac.errors import ConfigError, NonFiniteValue, NotInKappa
from tsfrac.exprlang import gamma
from tsfrac.fracops import (
    QUOTIENT_CUTOFF,
    FracOpSpec,
    GridFunction,
    gen_frac_derivative,
    gen_frac_integral,
    validate_weight,
    weight_derivative,
)
from tsfrac.timescale import EPS, TimeScale, in_kappa, scattered_points

logger = logging.getLogger(__name__)


def _as_array_fn2(f: Callable) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    def wrapped(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(t.shape, y.shape)
        try:
            out = np.asarray(f(t, y), dtype=float)
        except (TypeError, ValueError):
            tb, yb = np.broadcast_arrays(t, y)
            out = np.array([f(float(a), float(b)) for a, b in zip(tb.ravel(), yb.ravel())])
            out = out.reshape(shape)
        return np.broadcast_to(out, shape).astype(float)

    return wrapped


@dataclass(frozen=True)
class IVProblem:
    """Order, initial time, horizon, weight ``z``, right-hand side ``f(t, y)``
    and time scale.  ``z=None`` is the identity.

    Both ``t0`` and ``t0 + horizon`` must be points of ``T`` and the right end
    must lie in ``T^kappa`` so that ``z^Delta`` exists on all of ``J``.
    """

    alpha: float
    t0: float
    horizon: float
    f: Callable
    T: TimeScale
    z: Callable | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"order alpha must lie in (0, 1), got {self.alpha}")
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        for name, x in (("t0", self.t0), ("t0 + horizon", self.t_end)):
            if x not in self.T:
                raise ConfigError(f"{name} = {x} is not a point of {self.T!r}")
        if not in_kappa(self.T, self.t_end):
            raise NotInKappa(
                f"right end {self.t_end} of J is a left-scattered maximum of the scale; "
                "extend the time-scale window past it"
            )
        validate_weight(self.spec(), self.t_end)

    @property
    def t_end(self) -> float:
        return self.t0 + self.horizon

    def spec(self, quad: QuadratureSpec | None = None) -> FracOpSpec:
        return FracOpSpec(self.alpha, self.t0, self.T, self.z, quad or QuadratureSpec())


@dataclass(frozen=True)
class Probe:
    """Sampling plan for the heuristic hypothesis checks."""

    samples: int = 1000
    y_range: float = 10.0
    seed: int = 0


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100
    sup_norm_tol: float = 1e-9
    #: nodes per continuous segment (graded toward t0 on the first one)
    min_nodes: int = 64
    #: Gauss-Legendre points per panel of the discretized operator
    panel_order: int = 8
    #: Lipschitz constant; estimated with ``probe`` when None
    lipschitz: float | None = None
    probe: Probe = field(default_factory=Probe)

    def __post_init__(self) -> None:
        if self.max_iterations < 1 or self.sup_norm_tol <= 0:
            raise ConfigError("max_iterations and sup_norm_tol must be positive")
        if self.min_nodes < 1 or self.panel_order < 1:
            raise ConfigError("min_nodes and panel_order must be positive")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ConfigError(f"Lipschitz constant must be >= 0, got {self.lipschitz}")


@dataclass
class ContractionReport:
    L: float
    nodes: np.ndarray
    bound_fn: np.ndarray
    max_bound: float
    satisfied: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "L": self.L,
            "nodes": self.nodes.tolist(),
            "bound_fn": self.bound_fn.tolist(),
            "max_bound": self.max_bound,
            "satisfied": self.satisfied,
        }


@dataclass
class SolveReport:
    solution: GridFunction
    iterations: int
    final_sup_delta: float
    residual_sup: float
    contraction: ContractionReport
    converged: bool
    deltas: list[float] = field(default_factory=list)
    #: ``|y - F(y)|`` at each node
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict[str, Any]:
        return {
            "solution": {
                "nodes": self.solution.nodes.tolist(),
                "values": self.solution.values.tolist(),
            },
            "iterations": self.iterations,
            "final_sup_delta": self.final_sup_delta,
            "residual_sup": self.residual_sup,
            "contraction": self.contraction.to_dict(),
            "converged": self.converged,
            "deltas": list(self.deltas),
            "residuals": self.residuals.tolist(),
        }


# {{{ grid and discretized operator


def build_grid(p: IVProblem, min_nodes: int = 64) -> np.ndarray:
    """Nodes of ``J``: every piece endpoint of ``T`` in ``J`` plus ``min_nodes``
    panels on each continuous segment.  The segment starting at ``t0`` is
    graded as ``(j / n)^(1 / alpha)`` to resolve the ``(t - t0)^alpha``
    behaviour of solutions."""
    T, t0, t1 = p.T, p.t0, p.t_end
    xs = [T.nodes(t0, t1)]
    j = np.arange(min_nodes + 1) / min_nodes
    for lo, hi in T.segments(t0, t1):
        frac = j ** (1.0 / p.alpha) if lo == t0 else j
        xs.append(lo + (hi - lo) * frac)
    nodes = np.unique(np.concatenate(xs))
    keep = np.concatenate([[True], np.diff(nodes) > EPS])
    return nodes[keep]


class PicardOperator:
    """The operator ``F`` discretized on a fixed grid.

    Quadrature points and weights do not depend on the iterate, so they are
    assembled once: right-scattered points contribute their exact
    delta-integral term, continuous segments are split at the grid nodes and
    each panel gets a Gauss-Legendre rule in ``u = (t - s)^alpha``, which
    absorbs the kernel singularity.
    """

    def __init__(self, p: IVProblem, nodes: np.ndarray, panel_order: int = 8) -> None:
        self.problem = p
        self.nodes = np.asarray(nodes, dtype=float)
        self._f = _as_array_fn2(p.f)
        alpha, T = p.alpha, p.T
        zv = as_array_fn(p.z) if p.z is not None else None
        spec = p.spec()

        self.zdelta = weight_derivative(spec, self.nodes)
        pref = self.zdelta / gamma(alpha)

        x, w = np.polynomial.legendre.leggauss(panel_order)
        gaps = scattered_points(T, p.t0, p.t_end)
        gap_s = np.array([g[0] for g in gaps])
        gap_mu = np.array([g[1] for g in gaps])

        rows, pts, tt, base = [], [], [], []
        for i, t in enumerate(self.nodes):
            if i == 0:
                continue
            if gap_s.size:
                m = gap_s < t
                rows.append(np.full(m.sum(), i))
                pts.append(gap_s[m])
                tt.append(np.full(m.sum(), t))
                # singular factor folded into the weight
                base.append(pref[i] * gap_mu[m] * (t - gap_s[m]) ** (alpha - 1.0))
            for lo, hi in T.segments(p.t0, t):
                edges = self.nodes[(self.nodes >= lo - EPS) & (self.nodes <= hi + EPS)]
                ua = (t - edges[:-1]) ** alpha
                ub = np.maximum(t - edges[1:], 0.0) ** alpha
                mid, half = 0.5 * (ua + ub), 0.5 * (ua - ub)
                u = mid[:, None] + half[:, None] * x[None, :]
                s = t - u ** (1.0 / alpha)
                rows.append(np.full(s.size, i))
                pts.append(s.ravel())
                tt.append(np.full(s.size, t))
                base.append((pref[i] / alpha * half[:, None] * w[None, :]).ravel())

        if rows:
            self.rows = np.concatenate(rows).astype(int)
            self.points = np.concatenate(pts)
            t_of = np.concatenate(tt)
            weights = np.concatenate(base)
        else:
            self.rows = np.zeros(0, dtype=int)
            self.points = t_of = weights = np.zeros(0)

        if zv is not None and self.points.size:
            zd = weight_derivative(spec, self.points)
            gap = t_of - self.points
            with np.errstate(divide="ignore", invalid="ignore"):
                quotient = (zv(t_of) - zv(self.points)) / gap
            quotient = np.where(gap <= EPS * np.maximum(1.0, np.abs(t_of)), zd, quotient)
            weights = weights * quotient ** (alpha - 1.0) * zd
        self.weights = weights

    def __call__(self, y: GridFunction) -> GridFunction:
        fy = self._f(self.points, y(self.points))
        if not np.all(np.isfinite(fy)):
            k = int(np.argmax(~np.isfinite(fy)))
            raise NonFiniteValue(f"f is not finite at t={self.points[k]!r}")
        out = np.bincount(self.rows, weights=self.weights * fy, minlength=self.nodes.size)
        return GridFunction(self.nodes, out)


def picard_operator(
    p: IVProblem, y: GridFunction, panel_order: int = 8
) -> GridFunction:
    """One application of ``F`` on the nodes of ``y``."""
    return PicardOperator(p, y.nodes, panel_order)(y)


# }}}


# {{{ hypothesis checks


def _kernel_mass(p: IVProblem, ts: np.ndarray, extension: str = "auto") -> np.ndarray:
    """``int_t0^t (z(t) - z(s))^(alpha-1) z^Delta_ext(s) ds`` as an ordinary
    integral over the reals, for each ``t`` in ``ts``."""
    T, t0, alpha = p.T, p.t0, p.alpha
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts > p.t_end + EPS):
        raise ConfigError(f"kernel mass requested beyond the right end {p.t_end} of J")
    if float(ts.max()) <= t0:
        return np.zeros_like(ts)
    if p.z is None:
        return np.maximum(ts - t0, 0.0) ** alpha / alpha

    ext = extend_delta_derivative(p.z, T, t0, p.t_end, extension)
    zv = as_array_fn(p.z)
    q = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13, max_subdivisions=20000)
    out = np.zeros_like(ts)
    for k, t in enumerate(ts):
        if t <= t0:
            continue
        zt = float(zv(np.array([t]))[0])
        cutoff = QUOTIENT_CUTOFF * max(1.0, abs(t))

        def g(s: np.ndarray, t=t, zt=zt, cutoff=cutoff) -> np.ndarray:
            with np.errstate(divide="ignore", invalid="ignore"):
                quotient = (zt - zv(s)) / (t - s)
            # near s = t the quotient cancels; z' at the midpoint matches it to
            # second order.  The midpoint may lie in a gap of T, so z' is a
            # central difference of z over the reals.
            close = t - s <= cutoff
            if np.any(close):
                m = 0.5 * (s[close] + t)
                h = np.minimum(1e-3 * max(1.0, abs(t)), 0.25 * (m - t0))
                quotient[close] = (zv(m - 2 * h) - 8 * zv(m - h) + 8 * zv(m + h)
                                   - zv(m + 2 * h)) / (12 * h)
            return quotient ** (alpha - 1.0) * ext(s)

        out[k], _ = weighted_quad(g, t0, t, t, alpha - 1.0, q, T.nodes(t0, t))
    return out


def m_alpha(p: IVProblem, t: float, extension: str = "auto") -> float:
    """Averaged kernel mass ``M_alpha(t)`` for ``t0 < t``.

    The integral runs over the reals, so ``z^Delta`` is extended across the
    gaps of ``T`` as described in
    :func:`tsfrac.calculus.extend_delta_derivative`.
    """
    if not p.t0 < t <= p.t_end + EPS:
        raise ConfigError(f"M_alpha needs t in (t0, t0 + horizon], got t={t}")
    return float(_kernel_mass(p, np.array([t]), extension)[0]) / (t - p.t0)


def check_contraction(
    p: IVProblem,
    L: float,
    nodes: np.ndarray | None = None,
    extension: str = "auto",
) -> ContractionReport:
    """Evaluate ``b(t) = L z^Delta(t) M_alpha(t) (t - t0) / Gamma(alpha)`` on the
    grid; the condition holds when ``max b < 1``."""
    if L < 0:
        raise ConfigError(f"Lipschitz constant must be >= 0, got {L}")
    nodes = build_grid(p) if nodes is None else np.asarray(nodes, dtype=float)
    zd = weight_derivative(p.spec(), nodes)
    if L == 0:
        b = np.zeros_like(nodes)
    else:
        b = L * zd * _kernel_mass(p, nodes, extension) / gamma(p.alpha)
    max_b = float(np.max(b))
    return ContractionReport(float(L), nodes, b, max_b, bool(max_b < 1.0))


def _probe_ts(p: IVProblem, n: int, rng: np.random.Generator) -> np.ndarray:
    nodes = build_grid(p, min_nodes=16)
    return rng.choice(nodes, size=n)


def estimate_lipschitz(p: IVProblem, probe: Probe = Probe()) -> float:
    """Largest sampled ``|f(t, y1) - f(t, y2)| / |y1 - y2|`` (a lower bound on L).

    Half the pairs are spread over ``[-Y, Y]``, the other half are close
    together so that local slopes are seen.
    """
    if probe.samples < 2:
        raise ConfigError("Lipschitz probe needs at least 2 samples")
    rng = np.random.default_rng(probe.seed)
    n, Y = probe.samples, probe.y_range
    t = _probe_ts(p, n, rng)
    y1 = rng.uniform(-Y, Y, n)
    y2 = rng.uniform(-Y, Y, n)
    near = np.arange(n) % 2 == 1
    y2[near] = y1[near] + 1e-4 * Y * rng.choice([-1.0, 1.0], near.sum())
    f = _as_array_fn2(p.f)
    df = np.abs(f(t, y1) - f(t, y2))
    if not np.all(np.isfinite(df)):
        raise NonFiniteValue("f is not finite on the probe sample")
    dy = np.abs(y1 - y2)
    ok = dy > 0
    return float(np.max(df[ok] / dy[ok])) if np.any(ok) else 0.0


def check_boundedness(p: IVProblem, probe: Probe = Probe()) -> tuple[float, bool]:
    """Empirical bound ``N = max |f(t, y)|`` over ``J x [-Y, Y]``.

    The flag compares against a tenfold larger ``y`` range: it is False when
    the sampled maximum grows by more than 10 %.  This is a screening
    heuristic, not a proof of boundedness.
    """
    if probe.samples < 1:
        raise ConfigError("boundedness probe needs at least 1 sample")
    rng = np.random.default_rng(probe.seed)
    f = _as_array_fn2(p.f)

    def sup(Y: float) -> float:
        t = _probe_ts(p, probe.samples, rng)
        y = rng.uniform(-Y, Y, probe.samples)
        y[:3] = (0.0, -Y, Y)[: min(3, y.size)]
        v = np.abs(f(t, y))
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("f is not finite on the probe sample")
        return float(np.max(v))

    n_hat = sup(probe.y_range)
    n_wide = sup(10 * probe.y_range)
    return n_hat, bool(n_wide <= 1.1 * n_hat + 1e-12)


# }}}


# {{{ solve and verify


def solve_picard(p: IVProblem, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Picard iteration ``y_{k+1} = F(y_k)`` from ``y_0 = 0``.

    Stops when the sup-norm change drops to ``cfg.sup_norm_tol``; a problem
    that fails to converge within ``cfg.max_iterations`` is reported with
    ``converged=False`` rather than raising.
    """
    nodes = build_grid(p, cfg.min_nodes)
    F = PicardOperator(p, nodes, cfg.panel_order)
    y = GridFunction(nodes, np.zeros_like(nodes))

    deltas: list[float] = []
    converged = False
    for k in range(1, cfg.max_iterations + 1):
        y_new = F(y)
        delta = float(np.max(np.abs(y_new.values - y.values)))
        deltas.append(delta)
        y = y_new
        logger.debug("picard iteration %d: sup delta %.3e", k, delta)
        if delta <= cfg.sup_norm_tol:
            converged = True
            break

    residuals = np.abs(F(y).values - y.values)
    residual = float(np.max(residuals))
    L = cfg.lipschitz if cfg.lipschitz is not None else estimate_lipschitz(p, cfg.probe)
    contraction = check_contraction(p, L, nodes)
    if not converged:
        logger.warning("picard iteration stopped after %d sweeps (delta %.3e)", k, delta)
    return SolveReport(y, k, deltas[-1], residual, contraction, converged, deltas, residuals)


def verify_solution(p: IVProblem, y: GridFunction, quad: QuadratureSpec | None = None) -> float:
    """``max |y(t) - F(y)(t)|`` over the nodes of ``y``.

    ``F`` is re-evaluated with the adaptive fractional integral, independently
    of the grid operator used by :func:`solve_picard`.
    """
    q = quad or QuadratureSpec(rel_tol=1e-11, abs_tol=1e-13, max_subdivisions=20000)
    spec = p.spec(q)
    f = _as_array_fn2(p.f)

    def h(s: np.ndarray) -> np.ndarray:
        return f(s, y(s))

    zd = weight_derivative(spec, y.nodes)
    res = 0.0
    for t, yt, d in zip(y.nodes, y.values, zd):
        Fy = 0.0 if t <= p.t0 else d * gen_frac_integral(spec, h, t, breakpoints=y.nodes)
        res = max(res, abs(yt - Fy))
    return res


def roundtrip_check(
    p: IVProblem, y: Callable | GridFunction, t: float, quad: QuadratureSpec | None = None
) -> tuple[float, float]:
    """``(z^Delta(t) I^alpha[D^alpha y](t), y(t))`` for comparing the two sides
    of the inversion identity used to derive the integral equation."""
    spec = p.spec(quad or QuadratureSpec(rel_tol=1e-7, abs_tol=1e-9))
    _, t = p.T.locate(t)
    rhs = float(as_array_fn(y)(np.array([t]))[0])
    if t == p.t0:
        return 0.0, rhs

    def d(s: np.ndarray) -> np.ndarray:
        return np.array([gen_frac_derivative(spec, y, float(x)) for x in np.atleast_1d(s)])

    zd = float(weight_derivative(spec, t)[0])
    return zd * gen_frac_integral(spec, d, t), rhs


# }}}
