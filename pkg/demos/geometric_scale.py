"""Kernel mass and contraction bound on a geometric time scale.

The scale is ``{0} ∪ {1, 2, 4}`` (powers of two up to 4) and the weight is
``z(t) = t^2`` with order ``alpha = 1/2``.  On this scale ``sigma(t) = 2t``,
so ``z^Delta(t) = t + sigma(t) = 3t``; with that extension of ``z^Delta`` to
the reals the averaged kernel mass is the constant 3, and the contraction
bound becomes ``b(t) = 9 t^2 L / sqrt(pi)``.

Run with ``python demos/geometric_scale.py``.
"""

from __future__ import annotations

import math

import numpy as np

from tsfrac import IVProblem, SolverConfig, TimeScale, check_contraction, m_alpha, solve_picard
from tsfrac.oracle import discrete_frac_sum

T = TimeScale.geometric(2.0, (0.0, 4.0), include_zero=True, kmin=0)
print(f"time scale: {T!r}")

# {{{ kernel mass


def zero_rhs(t, y):
    return 0.0 * y


p = IVProblem(alpha=0.5, t0=0.0, horizon=2.0, f=zero_rhs, T=T, z=lambda t: t * t)

print("\naveraged kernel mass M_alpha(t)")
for t in (0.25, 0.5, 1.0, 1.5, 2.0):
    print(f"    t = {t:<5} M = {m_alpha(p, t):.15f}")

# }}}

# {{{ contraction bound

print("\ncontraction bound b(t) at the nodes of J = [0, 2]")
for L in (0.1, 0.2):
    rep = check_contraction(p, L)
    target = 9 * rep.nodes**2 * L / math.sqrt(math.pi)
    print(f"    L = {L}: b = {np.array2string(rep.bound_fn, precision=10)}"
          f"  (|b - 9 t^2 L / sqrt(pi)| <= {np.max(np.abs(rep.bound_fn - target)):.1e})")
    print(f"           max b = {rep.max_bound:.4f}, condition "
          f"{'holds' if rep.satisfied else 'fails'}")

# }}}

# {{{ solve with a constant right-hand side


def constant_rhs(t, y):
    return 1.0 + 0.0 * y


q = IVProblem(alpha=0.5, t0=0.0, horizon=2.0, f=constant_rhs, T=T, z=lambda t: t * t)
report = solve_picard(q, SolverConfig(lipschitz=0.0))
y = report.solution

# on a purely discrete scale the integral is a finite sum
zd = np.where(y.nodes > 0, 3 * y.nodes, 1.0)
exact = [d * discrete_frac_sum(T, 0.5, lambda s: s * s, lambda s: 1.0, 0.0, t)
         for d, t in zip(zd, y.nodes)]

print(f"\nsolution of D^(1/2) y = 1 ({report.iterations} iterations)")
for t, v, e in zip(y.nodes, y.values, exact):
    print(f"    y({t:g}) = {v:.15f}   finite sum {e:.15f}")

# }}}
