"""Command-line front end.

Usage::

    tsfrac fracint   --problem p.json [--at 0.5,1] [--oracle]
    tsfrac fracderiv --alpha 0.5 --horizon 1 --h "t" --at 1
    tsfrac solve     --problem p.json --out sol.csv
    tsfrac check     --problem p.json --lipschitz 0.1
    tsfrac reproduce-example4 --lipschitz 0.1,0.2
    tsfrac ts-info   --timescale '{"kind": "integers", "window": [0, 5]}'

Exit status is 0 on success, 1 on a numerical failure (a solve that does not
converge included) and 2 on configuration or parse errors.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from tsfrac.errors import ConfigError, NumericError, TsFracError
from tsfrac.fracops import FracOpSpec, frac_derivative, gen_frac_derivative, gen_frac_integral
from tsfrac.oracle import OracleResult, dense_reference, discrete_frac_sum, volterra_dense_solve
from tsfrac.problem import ProblemConfig, load_problem
from tsfrac.solver import (
    IVProblem,
    SolverConfig,
    check_boundedness,
    check_contraction,
    estimate_lipschitz,
    m_alpha,
    solve_picard,
    verify_solution,
)
from tsfrac.timescale import TimeScale, classify, graininess, in_kappa, rho, sigma

logger = logging.getLogger(__name__)

COMMANDS = ("fracint", "fracderiv", "solve", "check", "reproduce-example4", "ts-info")


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # report usage errors through the exit-code convention instead of exiting
    def error(self, message: str):
        raise _ArgumentError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _json_arg(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON {text!r}: {exc}")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsfrac", description="Fractional calculus on time scales.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", metavar="PATH", help="JSON problem file")
    parser.add_argument("--out", metavar="PATH", help="write results here (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: from the --out suffix, else json for "
                             "check and reproduce-example4 and csv otherwise)")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--t0", type=float)
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--z", metavar="EXPR", help="weight function of t")
    parser.add_argument("--f", metavar="EXPR", help="right-hand side in t and y")
    parser.add_argument("--h", metavar="EXPR", help="operand of fracint/fracderiv, in t")
    parser.add_argument("--at", type=_float_list, metavar="T1,T2,...",
                        help="evaluation points of fracint/fracderiv")
    parser.add_argument("--timescale", type=_json_arg, metavar="JSON",
                        help="time-scale descriptor")
    parser.add_argument("--lipschitz", type=_float_list, metavar="L[,L2,...]",
                        help="Lipschitz constant(s); estimated when absent")
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--abs-tol", type=float)
    parser.add_argument("--max-subdiv", type=int)
    parser.add_argument("--max-iter", type=int)
    parser.add_argument("--oracle", action="store_true",
                        help="cross-check against the reference implementations")
    return parser


def _config(args: argparse.Namespace) -> ProblemConfig:
    cfg = load_problem(args.problem) if args.problem else ProblemConfig()
    quad = {k: v for k, v in (("rel_tol", args.rel_tol), ("abs_tol", args.abs_tol),
                              ("max_subdivisions", args.max_subdiv)) if v is not None}
    solver = {"max_iterations": args.max_iter} if args.max_iter is not None else {}
    return cfg.updated(
        alpha=args.alpha, t0=args.t0, horizon=args.horizon, z=args.z, f=args.f, h=args.h,
        at=tuple(args.at) if args.at else None, timescale=args.timescale,
        quadrature=quad or None, solver=solver or None,
    )


# {{{ output


def _fmt(x: float) -> str:
    return repr(float(x))


def _csv(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _write(
    args: argparse.Namespace, csv_text: str, payload: dict[str, Any], default: str = "csv"
) -> None:
    fmt = args.format
    if fmt is None and args.out:
        suffix = Path(args.out).suffix
        fmt = "json" if suffix == ".json" else "csv" if suffix == ".csv" else default
    fmt = fmt or default
    text = csv_text if fmt == "csv" else json.dumps(payload, indent=2) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out!r}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _say(args: argparse.Namespace, message: str) -> None:
    # the summary goes to stdout only when the results go to a file
    print(message, file=sys.stdout if args.out else sys.stderr)


# }}}


# {{{ commands


def default_points(T: TimeScale, a: float, b: float, per_segment: int = 8) -> np.ndarray:
    """Piece endpoints of ``T`` in ``[a, b]`` plus evenly spaced points on
    each continuous segment."""
    xs = [T.nodes(a, b)]
    for lo, hi in T.segments(a, b):
        xs.append(np.linspace(lo, hi, per_segment + 1))
    return np.unique(np.concatenate(xs))


def _points(cfg: ProblemConfig, spec: FracOpSpec) -> np.ndarray:
    if cfg.at is not None:
        return np.array(cfg.at)
    b = spec.T.max if cfg.horizon is None else cfg.t0 + cfg.horizon
    return default_points(spec.T, spec.a, b)


def _oracle_value(spec: FracOpSpec, h, t: float) -> OracleResult:
    T = spec.T
    if not T.segments(spec.a, t):
        v = discrete_frac_sum(T, spec.alpha, spec.z, h, spec.a, t)
        return OracleResult(v, "finite_sum", 1e-15 * max(1.0, abs(v)))
    return dense_reference(T, spec.alpha, spec.z, h, spec.a, t)


def cmd_fracint(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    spec, h = cfg.op_spec(), cfg.operand()
    ts = _points(cfg, spec)
    values = np.array([gen_frac_integral(spec, h, t) for t in ts])
    payload: dict[str, Any] = {"t": ts.tolist(), "value": values.tolist()}
    _say(args, f"fractional integral of order {spec.alpha} at {ts.size} point(s)")
    if args.oracle:
        ref = [_oracle_value(spec, h, t) for t in ts]
        payload["oracle"] = [r.__dict__ for r in ref]
        diff = max(abs(r.value - v) for r, v in zip(ref, values))
        _say(args, f"oracle ({ref[-1].method}): max |difference| = {diff:.3e}")
    _write(args, _csv(("t", "value"), (ts, values)), payload)
    return 0


def cmd_fracderiv(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    spec, h = cfg.op_spec(), cfg.operand()
    ts = np.array([t for t in _points(cfg, spec) if in_kappa(spec.T, t)])
    op = frac_derivative if spec.z is None else gen_frac_derivative
    values = np.array([op(spec, h, t) for t in ts])
    _say(args, f"fractional derivative of order {spec.alpha} at {ts.size} point(s)")
    _write(args, _csv(("t", "value"), (ts, values)), {"t": ts.tolist(), "value": values.tolist()})
    return 0


def _lipschitz(args: argparse.Namespace, cfg: ProblemConfig, p: IVProblem) -> float:
    if args.lipschitz:
        return args.lipschitz[0]
    if cfg.solver.get("lipschitz") is not None:
        return float(cfg.solver["lipschitz"])
    return estimate_lipschitz(p)


def _oracle_solution(p: IVProblem, nodes: np.ndarray) -> tuple[np.ndarray, str] | None:
    if any(lo <= p.t0 and p.t_end <= hi and lo < hi for lo, hi in p.T.pieces):
        ref = volterra_dense_solve(p, 4096)
        return ref(nodes), "volterra_grid"
    return None


def cmd_solve(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    p = cfg.iv_problem()
    scfg = cfg.solver_config()
    L = _lipschitz(args, cfg, p)
    scfg = SolverConfig(scfg.max_iterations, scfg.sup_norm_tol, scfg.min_nodes,
                        scfg.panel_order, L, scfg.probe)
    report = solve_picard(p, scfg)
    y = report.solution
    payload = report.to_dict()
    _say(args, f"picard: {'converged' if report.converged else 'NOT converged'} after "
               f"{report.iterations} iteration(s), last change {report.final_sup_delta:.3e}, "
               f"residual {report.residual_sup:.3e}")
    _say(args, f"contraction bound max b = {report.contraction.max_bound:.6g} with L = {L:.6g} "
               f"({'satisfied' if report.contraction.satisfied else 'not satisfied'})")
    if args.oracle:
        ref = _oracle_solution(p, y.nodes)
        if ref is None:
            _say(args, "oracle: no dense reference for scales with scattered points")
        else:
            diff = float(np.max(np.abs(ref[0] - y.values)))
            payload["oracle"] = OracleResult(diff, ref[1], 0.0).__dict__
            _say(args, f"oracle ({ref[1]}): sup |difference| = {diff:.3e}")
    _write(args, _csv(("t", "y", "residual"), (y.nodes, y.values, report.residuals)), payload)
    return 0 if report.converged else 1


def cmd_check(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    p = cfg.iv_problem()
    L = _lipschitz(args, cfg, p)
    rep = check_contraction(p, L)
    n_hat, bounded = check_boundedness(p)
    payload = rep.to_dict()
    payload["lipschitz_given"] = bool(args.lipschitz) or "lipschitz" in cfg.solver
    payload["boundedness"] = {"N_hat": n_hat, "bounded": bounded}
    _say(args, f"max b = {rep.max_bound:.6g} with L = {L:.6g}: contraction condition "
               f"{'satisfied' if rep.satisfied else 'not satisfied'}")
    _say(args, f"sampled bound of |f|: {n_hat:.6g} ({'bounded' if bounded else 'grows'} "
               "on the probe range)")
    _write(args, _csv(("t", "value"), (rep.nodes, rep.bound_fn)), payload, default="json")
    return 0


def reproduce_example4(
    lipschitz: Sequence[float] = (0.1, 0.2),
    c: float = 1.0,
    samples: Sequence[float] = (0.25, 0.5, 1.0, 2.0),
) -> dict[str, Any]:
    """Worked example with ``z(t) = t^2``, ``alpha = 1/2`` and ``t0 = 0`` on
    ``{0} ∪ {2^k : k >= 0}`` over ``J = [0, 2]``.

    Compares ``M_alpha(t)`` with the constant 3 at ``samples`` and the
    contraction bound with ``9 t^2 L / sqrt(pi)`` at the nodes of ``J``, then
    solves the problem with ``f = c`` and checks it against exact sums.
    """
    T = TimeScale.geometric(2.0, (0.0, 4.0), include_zero=True, kmin=0)
    p = IVProblem(0.5, 0.0, 2.0, lambda t, y: c + 0.0 * y, T, z=lambda t: t * t)
    rows: list[dict[str, Any]] = []
    for t in samples:
        rows.append({"quantity": "M_alpha", "t": t, "L": None, "expected": 3.0,
                     "computed": m_alpha(p, t)})
    contraction = []
    for L in lipschitz:
        rep = check_contraction(p, L)
        for t, b in zip(rep.nodes, rep.bound_fn):
            rows.append({"quantity": "bound", "t": float(t), "L": L,
                         "expected": 9 * t * t * L / math.sqrt(math.pi), "computed": float(b)})
        contraction.append({"L": L, "bound_at_1": 9 * L / math.sqrt(math.pi),
                            "satisfied_at_1": 9 * L / math.sqrt(math.pi) < 1,
                            "report": rep.to_dict()})
    for row in rows:
        row["abs_diff"] = abs(row["expected"] - row["computed"])
    report = solve_picard(p, SolverConfig(lipschitz=0.0))
    y = report.solution
    # z^Delta(t) = t + sigma(t) = 3t away from 0
    zd = np.where(y.nodes > 0, 3 * y.nodes, 1.0)
    exact = [d * discrete_frac_sum(T, 0.5, lambda s: s * s, lambda s: c, 0.0, t)
             for d, t in zip(zd, y.nodes)]
    return {
        "rows": rows,
        "contraction": contraction,
        "solve": {
            "c": c,
            "converged": report.converged,
            "iterations": report.iterations,
            "nodes": y.nodes.tolist(),
            "values": y.values.tolist(),
            "residual_sup": report.residual_sup,
            "verify_residual": verify_solution(p, y),
            "oracle_sup_diff": float(np.max(np.abs(np.array(exact) - y.values))),
        },
    }


def cmd_reproduce(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    out = reproduce_example4(args.lipschitz or (0.1, 0.2))
    lines = [f"{'quantity':<9} {'t':>6} {'L':>6} {'expected':>14} {'computed':>14} {'|diff|':>10}"]
    for r in out["rows"]:
        L = "" if r["L"] is None else f"{r['L']:g}"
        lines.append(f"{r['quantity']:<9} {r['t']:>6g} {L:>6} {r['expected']:>14.10f} "
                     f"{r['computed']:>14.10f} {r['abs_diff']:>10.2e}")
    for c in out["contraction"]:
        lines.append(f"L = {c['L']:g}: bound at t = 1 is {c['bound_at_1']:.4f} "
                     f"({'< 1, satisfied' if c['satisfied_at_1'] else '>= 1, not satisfied'})")
    s = out["solve"]
    lines.append(f"f = {s['c']:g}: {'converged' if s['converged'] else 'not converged'} in "
                 f"{s['iterations']} iteration(s), residual {s['residual_sup']:.2e}, "
                 f"difference to exact sums {s['oracle_sup_diff']:.2e}")
    print("\n".join(lines), file=sys.stdout if args.out else sys.stderr)

    def cell(v):
        return "" if v is None else _fmt(v)

    buf = io.StringIO()
    buf.write("quantity,t,L,expected,computed,abs_diff\n")
    for r in out["rows"]:
        buf.write(",".join([r["quantity"], cell(r["t"]), cell(r["L"]), cell(r["expected"]),
                            cell(r["computed"]), cell(r["abs_diff"])]) + "\n")
    _write(args, buf.getvalue(), out, default="json")
    return 0


def cmd_ts_info(args: argparse.Namespace, cfg: ProblemConfig) -> int:
    T = cfg.time_scale()
    pts = T.nodes(T.min, T.max)
    info = []
    for t in pts:
        info.append({"t": float(t), "sigma": sigma(T, t), "rho": rho(T, t),
                     "mu": graininess(T, t), "class": str(classify(T, t).name),
                     "in_kappa": in_kappa(T, t)})
    payload = {"pieces": [list(p) for p in T.pieces], "min": T.min, "max": T.max,
               "discrete": T.is_discrete, "points": info}
    _say(args, f"{T!r}: {len(T.pieces)} piece(s), "
               f"{'discrete' if T.is_discrete else 'with continuous parts'}")
    _write(args, _csv(("t", "value"), (pts, [d["mu"] for d in info])), payload)
    return 0


HANDLERS = {
    "fracint": cmd_fracint,
    "fracderiv": cmd_fracderiv,
    "solve": cmd_solve,
    "check": cmd_check,
    "reproduce-example4": cmd_reproduce,
    "ts-info": cmd_ts_info,
}

# }}}


def run(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the exit status."""
    try:
        args = make_parser().parse_args(argv)
    except _ArgumentError as exc:
        print(f"[cli] {exc}", file=sys.stderr)
        return 2
    try:
        cfg = _config(args)
        return HANDLERS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TsFracError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
