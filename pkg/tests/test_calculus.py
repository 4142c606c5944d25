from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsfrac.calculus import (
    QuadratureSpec,
    adaptive_quad,
    delta_derivative,
    delta_derivative_many,
    delta_integral,
    extend_delta_derivative,
    extend_to_reals,
    split_identity_check,
    weighted_quad,
)
from tsfrac.errors import (
    ConfigError,
    NoConvergence,
    NotIncreasing,
    NotInKappa,
    PointNotInScale,
    QuadratureFailure,
)
from tsfrac.timescale import TimeScale, canonicalize

Z10 = TimeScale.integers([0, 10])
UNIT = TimeScale.interval(0, 1)
GAP = TimeScale.union(TimeScale.interval(0, 1), TimeScale.interval(2, 3))
GEO = TimeScale.geometric(2, [0, 64], include_zero=True, kmin=0)


def square(t):
    return t**2


# {{{ delta derivative


def test_delta_derivative_examples() -> None:
    assert delta_derivative(square, TimeScale.integers([0, 9]), 3) == 7
    assert delta_derivative(square, UNIT, 0.5) == pytest.approx(1.0, abs=1e-8)
    assert delta_derivative(square, GEO, 2) == 6
    # dense right end: one-sided from the left
    assert delta_derivative(square, UNIT, 1.0) == pytest.approx(2.0, abs=1e-8)
    # sigma(1) = 2 on the gap scale
    assert delta_derivative(square, GAP, 1.0) == 3.0


def test_delta_derivative_errors() -> None:
    with pytest.raises(NotInKappa):
        delta_derivative(square, Z10, 10)
    with pytest.raises(PointNotInScale):
        delta_derivative(square, Z10, 0.5)
    with pytest.raises(NoConvergence):
        delta_derivative(lambda t: np.sign(t - 0.5) * np.abs(t - 0.5) ** 0.5, UNIT, 0.5)


@pytest.mark.parametrize("fn", [np.sin, np.exp, lambda t: t**3 - t, lambda t: np.sqrt(3 + t)])
def test_delta_derivative_matches_central_difference(fn) -> None:
    T = TimeScale.interval(-2, 2)
    ts = np.linspace(-1.5, 1.5, 13)
    h = 1e-5
    ref = (fn(ts + h) - fn(ts - h)) / (2 * h)
    got = delta_derivative_many(fn, T, ts)
    assert np.allclose(got, ref, rtol=1e-6, atol=1e-8)


# }}}


# {{{ delta integral


def test_delta_integral_examples() -> None:
    assert delta_integral(lambda t: t, TimeScale.integers([0, 5]), 0, 3) == 3
    assert delta_integral(lambda t: t, UNIT, 0, 1) == pytest.approx(0.5, abs=1e-10)
    assert delta_integral(lambda t: 1.0, GAP, 0, 3) == pytest.approx(3.0, abs=1e-10)
    assert delta_integral(lambda t: t, UNIT, 0.5, 0.5) == 0.0


def test_delta_integral_errors() -> None:
    with pytest.raises(ConfigError):
        delta_integral(lambda t: t, UNIT, 1, 0)
    with pytest.raises(PointNotInScale):
        delta_integral(lambda t: t, GAP, 0, 1.5)
    with pytest.raises(QuadratureFailure):
        delta_integral(lambda t: 1 / np.abs(t - 0.3) ** 1.2, UNIT, 0, 1,
                       QuadratureSpec(max_subdivisions=50))


def test_quadrature_spec_validation() -> None:
    for kw in ({"rel_tol": 0}, {"abs_tol": -1}, {"max_subdivisions": 0},
               {"endpoint_exponent": -1.0}, {"endpoint_exponent": 0.5}):
        with pytest.raises(ConfigError):
            QuadratureSpec(**kw)


@pytest.mark.parametrize("gamma", [-0.75, -0.5, -0.25, 0.0])
def test_weighted_quad_beta_integrals(gamma: float) -> None:
    # int_0^1 (1 - s)^gamma s^2 ds = B(3, gamma + 1)
    exact = math.gamma(3) * math.gamma(gamma + 1) / math.gamma(gamma + 4)
    q = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)
    val, _ = weighted_quad(lambda s: s**2, 0.0, 1.0, 1.0, gamma, q)
    assert val == pytest.approx(exact, rel=1e-11)


def test_adaptive_quad_oscillatory() -> None:
    val, err = adaptive_quad(lambda x: np.cos(30 * x), [0.0, 2.0], 1e-12, 1e-14, 2000)
    assert val == pytest.approx(math.sin(60) / 30, abs=1e-12)
    assert err < 1e-10


def test_discrete_integral_is_exact_sum() -> None:
    T = TimeScale.points([0, 0.5, 1.25, 3, 3.1, 7])
    f = np.cos
    xs = [0, 0.5, 1.25, 3, 3.1]
    exact = math.fsum(math.cos(x) * (y - x) for x, y in zip(xs, [*xs[1:], 7]))
    assert abs(delta_integral(f, T, 0, 7) - exact) <= 1e-12


def test_split_identity_examples() -> None:
    lhs, rhs = split_identity_check(square, TimeScale.integers([0, 5]), 0, 3)
    assert lhs == rhs == 5
    T = TimeScale.union(UNIT, TimeScale.points([2]))
    assert split_identity_check(lambda t: 1.0, T, 1, 2) == (1.0, 1.0)
    lhs, rhs = split_identity_check(np.exp, UNIT, 0, 1)
    assert lhs == rhs


# }}}


# {{{ properties over random scales and functions


@st.composite
def bounded_scales(draw) -> TimeScale:
    n = draw(st.integers(1, 6))
    raw = []
    for _ in range(n):
        lo = draw(st.floats(0, 6))
        raw.append((lo, lo + draw(st.floats(0, 2))) if draw(st.booleans()) else lo)
    return canonicalize(raw)


COEFS = st.lists(st.floats(-3, 3), min_size=3, max_size=3)


def _poly_sin(c):
    return lambda t: c[0] + c[1] * np.sin(t) + c[2] * t**2


def _ends(T: TimeScale, la: float, lb: float) -> tuple[float, float]:
    pts = [x for p in T.pieces for x in p]
    i, j = sorted((int(la * (len(pts) - 1)), int(lb * (len(pts) - 1))))
    return pts[i], pts[j]


PROPS = settings(max_examples=60, deadline=None)
Q = QuadratureSpec()


def _tol(*vals: float) -> float:
    return 2 * (Q.abs_tol + Q.rel_tol * sum(abs(v) for v in vals)) + 1e-12


@PROPS
@given(bounded_scales(), COEFS, COEFS, st.floats(-2, 2), st.floats(-2, 2),
       st.floats(0, 1), st.floats(0, 1))
def test_linearity(T, c1, c2, a1, a2, la, lb) -> None:
    a, b = _ends(T, la, lb)
    f, g = _poly_sin(c1), _poly_sin(c2)
    If, Ig = delta_integral(f, T, a, b), delta_integral(g, T, a, b)
    both = delta_integral(lambda t: a1 * f(t) + a2 * g(t), T, a, b)
    assert abs(both - (a1 * If + a2 * Ig)) <= _tol(a1 * If, a2 * Ig, both)


@PROPS
@given(bounded_scales(), COEFS, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_additivity(T, c, la, lb, lc) -> None:
    a, b = _ends(T, la, lb)
    lo, hi = T.locate(a)[1], T.locate(b)[1]
    # a split point of T between a and b
    pts = [x for p in T.pieces for x in p if lo <= x <= hi] + [lo + lc * (hi - lo)]
    mid = sorted(pts, key=lambda x: abs(x - (lo + lc * (hi - lo))))
    m = next(x for x in mid if x in T)
    f = _poly_sin(c)
    whole = delta_integral(f, T, a, b)
    left, right = delta_integral(f, T, a, m), delta_integral(f, T, m, b)
    assert abs(whole - (left + right)) <= _tol(left, right)


@PROPS
@given(bounded_scales(), COEFS, st.floats(0, 1), st.floats(0, 1))
def test_split_identity(T, c, la, lb) -> None:
    a, b = _ends(T, la, lb)
    lhs, rhs = split_identity_check(_poly_sin(c), T, a, b)
    assert abs(lhs - rhs) <= _tol(lhs, rhs)


@PROPS
@given(bounded_scales(), st.floats(0.1, 3), st.floats(-2, 2), st.floats(0, 1), st.floats(0, 1))
def test_extension_bound(T, k, c, la, lb) -> None:
    a, b = _ends(T, la, lb)

    def f(t):
        return c + k * t + np.arctan(t)

    F = extend_to_reals(f, T, a, b)
    lhs = delta_integral(f, T, a, b)
    assert lhs <= F.integral() + _tol(lhs)


# }}}


# {{{ extensions


def test_real_extension_examples() -> None:
    F = extend_to_reals(lambda t: t, GAP, 0, 3)
    assert F(1.5) == 1.0
    assert F(0.5) == 0.5
    Z4 = TimeScale.integers([0, 4])
    G = extend_to_reals(lambda t: t, Z4, 0, 4)
    assert np.array_equal(G(np.array([0.2, 1.7, 3.99])), [0.0, 1.0, 3.0])
    assert delta_integral(lambda t: t, Z4, 0, 4) == 6 <= G.integral()
    assert G.integral() == pytest.approx(6.0, abs=1e-12)


def test_extend_to_reals_rejects_decreasing() -> None:
    with pytest.raises(NotIncreasing):
        extend_to_reals(lambda t: -t, UNIT, 0, 1)


def test_delta_derivative_extensions() -> None:
    s = np.array([2.5, 3.0, 5.0])
    rule = extend_delta_derivative(square, GEO, 0, 8)
    assert np.allclose(rule(s), 3 * s)
    step = extend_delta_derivative(square, GEO, 0, 8, kind="step")
    assert np.allclose(step(s), [6.0, 6.0, 12.0])
    T = TimeScale.points([0, 1, 3, 4])
    lin = extend_delta_derivative(square, T, 0, 4)
    # z^Delta(1) = 4, z^Delta(3) = 7
    assert lin(2.0) == pytest.approx(5.5)
    assert lin(3.5) == pytest.approx(7.0)
    dense = extend_delta_derivative(np.sin, UNIT, 0, 1)
    assert np.allclose(dense(np.array([0.1, 0.7])), np.cos([0.1, 0.7]), atol=1e-8)
    with pytest.raises(ConfigError):
        extend_delta_derivative(square, T, 0, 4, kind="rule")
    with pytest.raises(ConfigError):
        extend_delta_derivative(square, T, 0, 4, kind="cubic")


# }}}


if __name__ == "__main__":
    import sys

    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        pytest.main([__file__])
