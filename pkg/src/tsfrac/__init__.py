"""Fractional integrals, derivatives and initial value problems on time scales."""

from __future__ import annotations

from tsfrac.calculus import QuadratureSpec, delta_derivative, delta_integral
from tsfrac.errors import ConfigError, NumericError, TsFracError
from tsfrac.exprlang import ExprFn, parse
from tsfrac.fracops import (
    FracOpSpec,
    GridFunction,
    frac_derivative,
    frac_integral,
    gen_frac_derivative,
    gen_frac_integral,
    semigroup_defect,
)
from tsfrac.solver import (
    IVProblem,
    SolverConfig,
    check_contraction,
    m_alpha,
    solve_picard,
    verify_solution,
)
from tsfrac.timescale import TimeScale, graininess, rho, sigma

__all__ = [
    "ConfigError",
    "ExprFn",
    "FracOpSpec",
    "GridFunction",
    "IVProblem",
    "NumericError",
    "QuadratureSpec",
    "SolverConfig",
    "TimeScale",
    "TsFracError",
    "check_contraction",
    "delta_derivative",
    "delta_integral",
    "frac_derivative",
    "frac_integral",
    "gen_frac_derivative",
    "gen_frac_integral",
    "graininess",
    "m_alpha",
    "parse",
    "rho",
    "semigroup_defect",
    "sigma",
    "solve_picard",
    "verify_solution",
]
