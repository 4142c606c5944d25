"""Time scales: nonempty closed subsets of the real line.

A :class:`TimeScale` is stored in canonical form as a sorted tuple of
pieces ``(lo, hi)``; a piece with ``lo == hi`` is an isolated point,
otherwise it is a closed interval.  Consecutive pieces are separated by a
strictly positive gap, so every right endpoint that is not the maximum is
right-scattered and every left endpoint that is not the minimum is
left-scattered.

Unbounded scales (``Z``, ``hZ``, ``q^Z``) are materialized over a finite
window through the generator constructors.
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Union

import numpy as np

from tsfrac.errors import ConfigError, EmptyTimeScale, PointNotInScale, UnboundedScale

#: Absolute tolerance used for membership tests and canonicalization.
EPS = 1e-12

#: Smallest power ``q^k`` materialized next to an accumulation point at zero,
#: relative to the upper end of the window.
GEOMETRIC_FLOOR = 1e-9


@dataclass(frozen=True)
class ClosedInterval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ConfigError(f"interval with lo > hi: [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class IsolatedPoint:
    x: float


Piece = Union[ClosedInterval, IsolatedPoint, tuple, float, int]


class PointClass(enum.Flag):
    """Local structure of a point ``t`` of a time scale.

    The right-side flags are mutually exclusive: a point is either
    right-scattered, right-dense or the maximum.  The same holds on the left
    with the minimum.  ``ISOLATED`` marks points with no other point of the
    scale in some neighbourhood.
    """

    RIGHT_SCATTERED = enum.auto()
    RIGHT_DENSE = enum.auto()
    LEFT_SCATTERED = enum.auto()
    LEFT_DENSE = enum.auto()
    MAX = enum.auto()
    MIN = enum.auto()
    ISOLATED = enum.auto()
    DENSE = RIGHT_DENSE | LEFT_DENSE


def _as_bounds(piece: Piece) -> tuple[float, float]:
    if isinstance(piece, ClosedInterval):
        return float(piece.lo), float(piece.hi)
    if isinstance(piece, IsolatedPoint):
        return float(piece.x), float(piece.x)
    if isinstance(piece, (int, float, np.floating, np.integer)):
        return float(piece), float(piece)
    lo, hi = piece
    if not lo <= hi:
        raise ConfigError(f"interval with lo > hi: [{lo}, {hi}]")
    return float(lo), float(hi)


def canonicalize(raw_pieces: Iterable[Piece]) -> "TimeScale":
    """Build the canonical time scale for a list of intervals and points.

    Pieces that overlap or touch (within :data:`EPS`) are merged, points on
    an interval are absorbed and degenerate intervals become points.

    >>> canonicalize([(0, 1), (1, 2)]).pieces
    ((0.0, 2.0),)
    """
    bounds = sorted(_as_bounds(p) for p in raw_pieces)
    bounds = [b for b in bounds if math.isfinite(b[0]) and math.isfinite(b[1])]
    if not bounds:
        raise EmptyTimeScale("time scale has no pieces")

    merged: list[list[float]] = [list(bounds[0])]
    for lo, hi in bounds[1:]:
        cur = merged[-1]
        if lo - cur[1] <= EPS:
            cur[1] = max(cur[1], hi)
        else:
            merged.append([lo, hi])

    pieces = []
    for lo, hi in merged:
        if hi - lo <= EPS:
            pieces.append((lo, lo))
        else:
            pieces.append((lo, hi))
    return TimeScale(tuple(pieces))


@dataclass(frozen=True)
class TimeScale:
    """Canonical finite union of closed intervals and isolated points.

    Construct through :func:`canonicalize` or one of the class-method
    generators; the constructor itself trusts its input.
    """

    pieces: tuple[tuple[float, float], ...]
    #: generator jump rule, ("uniform", h) or ("geometric", q), kept by the
    #: generator constructors so that sigma can be extended off the scale
    rule: tuple[str, float] | None = field(default=None, compare=False)

    # {{{ generators

    @classmethod
    def interval(cls, lo: float, hi: float) -> TimeScale:
        return canonicalize([(lo, hi)])

    @classmethod
    def points(cls, xs: Iterable[float]) -> TimeScale:
        return canonicalize([float(x) for x in xs])

    @classmethod
    def uniform(cls, h: float, window: Sequence[float], offset: float = 0.0) -> TimeScale:
        """Materialize ``offset + hZ`` over ``window``."""
        if h <= 0:
            raise ConfigError(f"uniform grid needs h > 0, got {h}")
        lo, hi = _window(window)
        kmin = math.ceil((lo - offset) / h - EPS)
        kmax = math.floor((hi - offset) / h + EPS)
        if kmax < kmin:
            raise EmptyTimeScale(f"no point of {h}Z in window [{lo}, {hi}]")
        T = canonicalize([offset + k * h for k in range(kmin, kmax + 1)])
        return replace(T, rule=("uniform", float(h)))

    @classmethod
    def integers(cls, window: Sequence[float]) -> TimeScale:
        return cls.uniform(1.0, window)

    @classmethod
    def geometric(
        cls,
        q: float,
        window: Sequence[float],
        include_zero: bool = True,
        kmin: int | None = None,
    ) -> TimeScale:
        """Materialize ``q^Z`` (optionally with ``{0}``) over ``window``.

        ``q^Z`` accumulates at zero, so only powers ``q^k`` with
        ``k >= kmin`` are kept.  By default ``kmin`` is the smallest exponent
        with ``q^k`` at least ``GEOMETRIC_FLOOR * max(1, window[1])``; zero is
        then right-scattered with ``sigma(0) = q^kmin``.
        """
        if q <= 1:
            raise ConfigError(f"geometric scale needs q > 1, got {q}")
        lo, hi = _window(window)
        if hi <= 0:
            if include_zero and lo <= 0:
                return canonicalize([0.0])
            raise EmptyTimeScale(f"no point of {q}^Z in window [{lo}, {hi}]")
        floor = max(lo, GEOMETRIC_FLOOR * max(1.0, hi))
        k_lo = math.ceil(math.log(floor) / math.log(q) - 1e-9)
        if kmin is not None:
            k_lo = int(kmin)
        k_hi = math.floor(math.log(hi) / math.log(q) + 1e-9)
        xs = [q**k for k in range(k_lo, k_hi + 1) if lo - EPS <= q**k <= hi + EPS]
        if include_zero and lo <= 0:
            xs.append(0.0)
        if not xs:
            raise EmptyTimeScale(f"no point of {q}^Z in window [{lo}, {hi}]")
        return replace(canonicalize(xs), rule=("geometric", float(q)))

    @classmethod
    def union(cls, *scales: TimeScale) -> TimeScale:
        return canonicalize([p for s in scales for p in s.pieces])

    @classmethod
    def from_descriptor(
        cls, desc: Mapping[str, Any], window: Sequence[float] | None = None
    ) -> TimeScale:
        """Build a time scale from a tagged record such as
        ``{"kind": "uniform", "h": 0.5, "window": [0, 10]}``.

        Generators (``uniform``, ``integers``, ``geometric``, ``real``)
        require a window, either their own or one inherited from an
        enclosing ``union``.
        """
        if not isinstance(desc, Mapping) or "kind" not in desc:
            raise ConfigError(f"time-scale descriptor needs a 'kind': {desc!r}")
        kind = desc["kind"]
        win = desc.get("window", window)
        try:
            if kind == "interval":
                return cls.interval(float(desc["lo"]), float(desc["hi"]))
            if kind == "points":
                return cls.points(desc["xs"])
            if kind == "union":
                parts = desc["parts"]
                if not parts:
                    raise EmptyTimeScale("union with no parts")
                return cls.union(*(cls.from_descriptor(p, win) for p in parts))
            if kind in ("uniform", "integers", "geometric", "real"):
                if win is None:
                    raise UnboundedScale(f"generator {kind!r} needs a 'window'")
                if kind == "uniform":
                    return cls.uniform(float(desc["h"]), win, float(desc.get("offset", 0.0)))
                if kind == "integers":
                    return cls.integers(win)
                if kind == "real":
                    return cls.interval(*_window(win))
                return cls.geometric(
                    float(desc["q"]),
                    win,
                    include_zero=bool(desc.get("include_zero", False)),
                    kmin=desc.get("kmin"),
                )
        except KeyError as exc:
            raise ConfigError(f"descriptor {kind!r} is missing key {exc}") from None
        raise ConfigError(f"unknown time-scale kind {kind!r}")

    def to_descriptor(self) -> dict[str, Any]:
        parts: list[dict[str, Any]] = []
        for lo, hi in self.pieces:
            if lo == hi:
                parts.append({"kind": "points", "xs": [lo]})
            else:
                parts.append({"kind": "interval", "lo": lo, "hi": hi})
        return parts[0] if len(parts) == 1 else {"kind": "union", "parts": parts}

    # }}}

    # {{{ basic queries

    @cached_property
    def _los(self) -> list[float]:
        return [p[0] for p in self.pieces]

    @property
    def min(self) -> float:
        return self.pieces[0][0]

    @property
    def max(self) -> float:
        return self.pieces[-1][1]

    @property
    def is_discrete(self) -> bool:
        return all(lo == hi for lo, hi in self.pieces)

    def find(self, t: float) -> int | None:
        """Index of the piece containing ``t`` (within :data:`EPS`), if any."""
        i = bisect_right(self._los, t + EPS) - 1
        if i >= 0:
            lo, hi = self.pieces[i]
            if lo - EPS <= t <= hi + EPS:
                return i
        return None

    def __contains__(self, t: float) -> bool:
        return self.find(float(t)) is not None

    def locate(self, t: float) -> tuple[int, float]:
        """Piece index and ``t`` snapped onto the piece.

        :raises PointNotInScale: if ``t`` is not a point of the scale.
        """
        t = float(t)
        i = self.find(t)
        if i is None:
            raise PointNotInScale(t)
        lo, hi = self.pieces[i]
        if abs(t - lo) <= EPS:
            t = lo
        elif abs(t - hi) <= EPS:
            t = hi
        return i, t

    @cached_property
    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p[0] for p in self.pieces]), np.array([p[1] for p in self.pieces]))

    def locate_many(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized :meth:`locate`."""
        los, his = self.bounds_arrays
        ts = np.asarray(ts, dtype=float)
        i = np.searchsorted(los, ts + EPS, side="right") - 1
        ic = np.clip(i, 0, len(los) - 1)
        ok = (i >= 0) & (ts >= los[ic] - EPS) & (ts <= his[ic] + EPS)
        if not np.all(ok):
            raise PointNotInScale(float(ts[np.argmin(ok)]))
        t = np.where(np.abs(ts - los[ic]) <= EPS, los[ic], ts)
        t = np.where(np.abs(t - his[ic]) <= EPS, his[ic], t)
        return ic, t

    def restrict(self, a: float, b: float) -> TimeScale:
        """The scale ``T ∩ [a, b]``."""
        out = [(max(lo, a), min(hi, b)) for lo, hi in self.pieces if hi >= a and lo <= b]
        return canonicalize(out)

    def segments(self, a: float, b: float) -> list[tuple[float, float]]:
        """Continuous parts of ``T ∩ [a, b]`` with positive length."""
        out = []
        for lo, hi in self.pieces:
            left, right = max(lo, a), min(hi, b)
            if right - left > EPS:
                out.append((left, right))
        return out

    def nodes(self, a: float, b: float) -> np.ndarray:
        """All piece endpoints lying in ``[a, b]``, together with ``a`` and ``b``."""
        xs = {a, b}
        for lo, hi in self.pieces:
            for x in (lo, hi):
                if a <= x <= b:
                    xs.add(x)
        return np.array(sorted(xs))

    # }}}

    def __repr__(self) -> str:
        parts = [f"{{{lo:g}}}" if lo == hi else f"[{lo:g}, {hi:g}]" for lo, hi in self.pieces]
        if len(parts) > 6:
            parts = parts[:3] + ["..."] + parts[-2:]
        return "TimeScale(" + " ∪ ".join(parts) + ")"


def _window(window: Sequence[float]) -> tuple[float, float]:
    try:
        lo, hi = (float(w) for w in window)
    except (TypeError, ValueError):
        raise ConfigError(f"window must be a pair [lo, hi], got {window!r}") from None
    if not lo <= hi:
        raise ConfigError(f"window with lo > hi: {window!r}")
    return lo, hi


# {{{ jump operators


def sigma(T: TimeScale, t: float) -> float:
    """Forward jump ``inf{s in T : s > t}``, with ``sigma(max T) = max T``."""
    i, t = T.locate(t)
    hi = T.pieces[i][1]
    if t < hi:
        return t
    if i + 1 < len(T.pieces):
        return T.pieces[i + 1][0]
    return t


def rho(T: TimeScale, t: float) -> float:
    """Backward jump ``sup{s in T : s < t}``, with ``rho(min T) = min T``."""
    i, t = T.locate(t)
    lo = T.pieces[i][0]
    if t > lo:
        return t
    if i > 0:
        return T.pieces[i - 1][1]
    return t


def graininess(T: TimeScale, t: float) -> float:
    """``mu(t) = sigma(t) - t``."""
    _, t = T.locate(t)
    return sigma(T, t) - t


def classify(T: TimeScale, t: float) -> PointClass:
    i, t = T.locate(t)
    lo, hi = T.pieces[i]
    last, first = i == len(T.pieces) - 1, i == 0

    if t < hi:
        flags = PointClass.RIGHT_DENSE
    elif last:
        flags = PointClass.MAX
    else:
        flags = PointClass.RIGHT_SCATTERED

    if t > lo:
        flags |= PointClass.LEFT_DENSE
    elif first:
        flags |= PointClass.MIN
    else:
        flags |= PointClass.LEFT_SCATTERED

    if lo == hi:
        flags |= PointClass.ISOLATED
    return flags


def kappa(T: TimeScale) -> TimeScale:
    """``T^kappa``: drop the maximum when it is left-scattered."""
    if len(T.pieces) > 1 and T.pieces[-1][0] == T.pieces[-1][1]:
        return TimeScale(T.pieces[:-1], T.rule)
    return T


def extended_sigma(T: TimeScale, s: np.ndarray) -> np.ndarray | None:
    """Forward jump of the generator rule at arbitrary reals ``s``:
    ``s + h`` for ``hZ`` and ``q s`` for ``q^Z``; None without a rule."""
    if T.rule is None:
        return None
    kind, c = T.rule
    s = np.asarray(s, dtype=float)
    return s + c if kind == "uniform" else c * s


def in_kappa(T: TimeScale, t: float) -> bool:
    if t not in T:
        return False
    return not (len(T.pieces) > 1 and T.pieces[-1][0] == T.pieces[-1][1]
                and abs(t - T.max) <= EPS)


def scattered_points(T: TimeScale, a: float, b: float) -> list[tuple[float, float]]:
    """Right-scattered points ``t`` of ``[a, b)`` paired with ``mu(t)``."""
    _, a = T.locate(a)
    _, b = T.locate(b)
    out = []
    for i in range(len(T.pieces) - 1):
        hi = T.pieces[i][1]
        if a <= hi < b:
            out.append((hi, T.pieces[i + 1][0] - hi))
    return out


# }}}
