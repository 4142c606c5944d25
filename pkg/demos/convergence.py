"""Grid refinement of the Picard solver and the Volterra reference.

Both solve ``D^(1/2) y = 1 + y/2`` on ``[0, 1]`` with zero initial data.  The
exact solution is the two-parameter Mittag-Leffler series

    y(t) = sum_k (1/2)^k t^((k+1)/2) / Gamma((k+1)/2 + 1).

The Picard solver uses a graded grid and converges at second order; the
Volterra product-integration reference uses a uniform grid and converges at
first order.

Run with ``python demos/convergence.py``.
"""

from __future__ import annotations

import math

import numpy as np

from tsfrac import IVProblem, SolverConfig, TimeScale, solve_picard
from tsfrac.oracle import volterra_dense_solve


def exact(t: np.ndarray) -> np.ndarray:
    return sum(0.5**k * t ** ((k + 1) / 2) / math.gamma((k + 1) / 2 + 1) for k in range(80))


def rhs(t, y):
    return 1 + y / 2


p = IVProblem(alpha=0.5, t0=0.0, horizon=1.0, f=rhs, T=TimeScale.interval(0.0, 1.0))

print("Picard solver (graded grid)")
prev = None
for n in (8, 16, 32, 64, 128):
    y = solve_picard(p, SolverConfig(min_nodes=n, lipschitz=0.5)).solution
    err = float(np.max(np.abs(y.values - exact(y.nodes))))
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"    n = {n:<5} error {err:.3e}{ratio}")
    prev = err

print("\nVolterra reference (uniform grid)")
prev = None
for n in (256, 512, 1024, 2048, 4096):
    y = volterra_dense_solve(p, n)
    err = float(np.max(np.abs(y.values - exact(y.nodes))))
    ratio = "" if prev is None else f"  ratio {prev / err:.2f}"
    print(f"    n = {n:<5} error {err:.3e}{ratio}")
    prev = err
