from __future__ import annotations

import math

import numpy as np
import pytest

from tsfrac.errors import ConfigError, DomainError, ScaleHasContinuousPart
from tsfrac.fracops import FracOpSpec, gen_frac_integral
from tsfrac.oracle import (
    OracleResult,
    dense_reference,
    discrete_frac_sum,
    rl_power_rule,
    volterra_dense_solve,
    weighted_constant_integral,
)
from tsfrac.solver import IVProblem
from tsfrac.timescale import TimeScale

SQPI = math.sqrt(math.pi)
R = TimeScale.interval(0, 1)


def series(t, alpha: float, lam: float, terms: int = 80):
    t = np.asarray(t, dtype=float)
    return sum(lam**k * t ** ((k + 1) * alpha) / math.gamma((k + 1) * alpha + 1)
               for k in range(terms))


# {{{ closed forms and sums


def test_closed_forms() -> None:
    assert rl_power_rule(0.5, 0.0, 1.0) == pytest.approx(2 / SQPI, rel=1e-14)
    assert rl_power_rule(0.5, 0.5, 1.0) == pytest.approx(SQPI / 2, rel=1e-14)
    assert rl_power_rule(0.3, 1.0, 0.0) == 0.0
    assert weighted_constant_integral(0.5, lambda t: t**2, 0.0, 1.0) == pytest.approx(2 / SQPI)
    with pytest.raises(DomainError):
        rl_power_rule(1.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        rl_power_rule(0.5, -1.0, 1.0)
    with pytest.raises(DomainError):
        weighted_constant_integral(0.5, lambda t: -t, 0.0, 1.0)


def test_discrete_frac_sum() -> None:
    Z = TimeScale.integers([0, 6])
    got = discrete_frac_sum(Z, 0.5, None, lambda s: 1.0, 0, 3)
    assert got == pytest.approx((3**-0.5 + 2**-0.5 + 1) / SQPI, abs=1e-15)
    # q-scale with z = t^2: jumps z(2s) - z(s) = 3 s^2
    G = TimeScale.geometric(2, [0, 16], include_zero=True, kmin=0)
    terms = [(64 - 0) ** -0.5 * 1.0]
    terms += [(64 - s**2) ** -0.5 * 3 * s**2 for s in (1, 2, 4)]
    got = discrete_frac_sum(G, 0.5, lambda t: t**2, lambda s: 1.0, 0, 8)
    assert got == pytest.approx(math.fsum(terms) / SQPI, rel=1e-14)
    assert discrete_frac_sum(Z, 0.5, None, lambda s: 1.0, 2, 2) == 0.0
    with pytest.raises(ScaleHasContinuousPart):
        discrete_frac_sum(R, 0.5, None, lambda s: 1.0, 0, 1)
    with pytest.raises(ConfigError):
        discrete_frac_sum(Z, 0.5, None, lambda s: 1.0, 3, 2)


def test_dense_reference_mixed_scale() -> None:
    T = TimeScale.union(R, TimeScale.points([1.5, 2.0, 3.0]))
    exact = (2 * (math.sqrt(2) - 1) + 0.5 * 1.0 + 0.5 * 0.5**-0.5) / SQPI
    res = dense_reference(T, 0.5, None, lambda s: 1.0, 0.0, 2.0)
    assert res.method == "dense_quadrature"
    assert res.value == pytest.approx(exact, abs=1e-10)
    assert abs(res.value - exact) <= res.est_error


@pytest.mark.parametrize("alpha", [0.05, 0.4, 0.95])
def test_dense_reference_agrees_with_closed_form_and_sums(alpha: float) -> None:
    T = TimeScale.interval(0, 2)
    res = dense_reference(T, alpha, np.exp, lambda s: 1.0, 0.0, 1.5)
    exact = weighted_constant_integral(alpha, np.exp, 0.0, 1.5)
    assert res.value == pytest.approx(exact, rel=1e-12)
    res = dense_reference(T, alpha, None, lambda s: 1.0, 0.0, 1.5)
    assert res.value == pytest.approx(rl_power_rule(alpha, 0.0, 1.5), rel=1e-13)
    Z = TimeScale.integers([0, 6])
    h = math.cos
    res = dense_reference(Z, alpha, lambda t: t + t**2, h, 0, 5)
    assert res.value == pytest.approx(
        discrete_frac_sum(Z, alpha, lambda t: t + t**2, h, 0, 5), rel=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.6])
def test_dense_reference_checks_primary_on_mixed_scale(alpha: float) -> None:
    T = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([1.25, 2.0]),
                        TimeScale.interval(2.5, 3.0))
    spec = FracOpSpec(alpha, 0.0, T, z=np.exp)
    ref = dense_reference(T, alpha, np.exp, np.cos, 0.0, 2.8)
    assert gen_frac_integral(spec, np.cos, 2.8) == pytest.approx(ref.value, rel=1e-8)


def test_oracle_result_validation() -> None:
    assert OracleResult(1.0, "closed_form", 0.0).value == 1.0
    with pytest.raises(ConfigError):
        OracleResult(1.0, "guess", 0.0)
    with pytest.raises(ConfigError):
        OracleResult(1.0, "finite_sum", -1.0)


# }}}


# {{{ volterra grid solver


def test_volterra_trivial_problems() -> None:
    y = volterra_dense_solve(IVProblem(0.5, 0.0, 1.0, lambda t, y: 0 * y, R))
    assert np.all(y.values == 0)
    y = volterra_dense_solve(IVProblem(0.5, 0.0, 1.0, lambda t, y: 1 + 0 * y, R))
    exact = y.nodes**0.5 / math.gamma(1.5)
    assert np.max(np.abs(y.values - exact)) <= 1e-13


def test_volterra_refinement() -> None:
    p = IVProblem(0.5, 0.0, 1.0, lambda t, y: 1 + y / 2, R)
    errs = []
    for n in (256, 512, 1024):
        y = volterra_dense_solve(p, n)
        errs.append(np.max(np.abs(y.values - series(y.nodes, 0.5, 0.5))))
    assert errs[0] / errs[1] >= 1.8
    assert errs[1] / errs[2] >= 1.8


def test_volterra_weighted() -> None:
    # with f = 1 and weight z the solution is z'(t) (z(t) - z(0))^alpha / Gamma(alpha + 1)
    T = TimeScale.interval(0, 2)
    p = IVProblem(0.5, 0.0, 1.0, lambda t, y: 1 + 0 * y, T, z=lambda t: t + t**2)
    y = volterra_dense_solve(p, 256)
    t = y.nodes
    exact = (1 + 2 * t) * (t + t**2) ** 0.5 / math.gamma(1.5)
    assert np.max(np.abs(y.values - exact)) <= 1e-6


def test_volterra_errors() -> None:
    p = IVProblem(0.5, 0.0, 1.0, lambda t, y: y, R)
    with pytest.raises(ConfigError):
        volterra_dense_solve(p, 32)
    T = TimeScale.union(TimeScale.interval(0, 0.5), TimeScale.interval(0.6, 2))
    with pytest.raises(ScaleHasContinuousPart):
        volterra_dense_solve(IVProblem(0.5, 0.0, 1.0, lambda t, y: y, T))


# }}}


if __name__ == "__main__":
    import sys

    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        pytest.main([__file__])
