"""Problem files: JSON records describing an operator evaluation or an
initial value problem.

A record may contain

``alpha``, ``t0``, ``horizon``
    order, initial (base) point and length of ``J = [t0, t0 + horizon]``;
``z``
    weight function, an expression in ``t`` (identity when absent);
``f``
    right-hand side, an expression in ``t`` and ``y``;
``h``
    operand of ``fracint`` / ``fracderiv``, an expression in ``t``;
``at``
    evaluation points for the operator commands;
``timescale``
    a descriptor accepted by :meth:`TimeScale.from_descriptor`; defaults to
    the real interval ``J``;
``solver``, ``quadrature``
    keyword overrides for :class:`SolverConfig` and :class:`QuadratureSpec`.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from tsfrac.calculus import QuadratureSpec
from tsfrac.errors import ConfigError
from tsfrac.exprlang import ExprFn, parse
from tsfrac.fracops import FracOpSpec
from tsfrac.solver import IVProblem, Probe, SolverConfig
from tsfrac.timescale import TimeScale

KEYS = ("alpha", "t0", "horizon", "z", "f", "h", "at", "timescale", "solver", "quadrature")
SOLVER_KEYS = ("max_iterations", "sup_norm_tol", "min_nodes", "panel_order", "lipschitz")
QUAD_KEYS = ("rel_tol", "abs_tol", "max_subdivisions")


@dataclass(frozen=True)
class ProblemConfig:
    alpha: float | None = None
    t0: float = 0.0
    horizon: float | None = None
    z: str | None = None
    f: str | None = None
    h: str | None = None
    at: tuple[float, ...] | None = None
    timescale: Mapping[str, Any] | None = None
    solver: Mapping[str, Any] = field(default_factory=dict)
    quadrature: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ProblemConfig:
        unknown = set(data) - set(KEYS)
        if unknown:
            raise ConfigError(f"unknown problem keys {sorted(unknown)}")
        kw = dict(data)
        for key in ("alpha", "t0", "horizon"):
            if kw.get(key) is not None:
                try:
                    kw[key] = float(kw[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key} must be a number, got {kw[key]!r}") from None
        if kw.get("at") is not None:
            at = kw["at"]
            kw["at"] = tuple(float(x) for x in (at if isinstance(at, list) else [at]))
        for key, allowed in (("solver", SOLVER_KEYS), ("quadrature", QUAD_KEYS)):
            extra = set(kw.get(key, {})) - set(allowed)
            if extra:
                raise ConfigError(f"unknown {key} settings {sorted(extra)}")
        return cls(**kw)

    def updated(self, **overrides: Any) -> ProblemConfig:
        """Copy with the non-None ``overrides`` applied; ``solver`` and
        ``quadrature`` entries are merged key by key."""
        kw = {k: v for k, v in overrides.items() if v is not None}
        for key in ("solver", "quadrature"):
            if key in kw:
                kw[key] = {**getattr(self, key), **kw[key]}
        return replace(self, **kw)

    # {{{ builders

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"problem is missing {', '.join(missing)}")

    def weight(self) -> ExprFn | None:
        return parse(self.z, ("t",)) if self.z else None

    def rhs(self) -> ExprFn:
        self.require("f")
        return parse(self.f, ("t", "y"))

    def operand(self) -> ExprFn:
        self.require("h")
        return parse(self.h, ("t",))

    def time_scale(self) -> TimeScale:
        if self.timescale is not None:
            return TimeScale.from_descriptor(self.timescale)
        self.require("horizon")
        return TimeScale.interval(self.t0, self.t0 + self.horizon)

    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(**self.quadrature)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(**self.solver, probe=Probe())

    def op_spec(self) -> FracOpSpec:
        self.require("alpha")
        return FracOpSpec(self.alpha, self.t0, self.time_scale(), self.weight(), self.quad())

    def iv_problem(self) -> IVProblem:
        self.require("alpha", "horizon")
        return IVProblem(self.alpha, self.t0, self.horizon, self.rhs(), self.time_scale(),
                         self.weight())

    # }}}


def load_problem(path: str | Path) -> ProblemConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read problem file {str(path)!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"problem file {str(path)!r} is not valid JSON: {exc}") from None
    if not isinstance(data, Mapping):
        raise ConfigError(f"problem file {str(path)!r} must hold a JSON object")
    return ProblemConfig.from_mapping(data)
