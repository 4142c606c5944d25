from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from tsfrac.errors import ConfigError, EmptyTimeScale, PointNotInScale, UnboundedScale
from tsfrac.timescale import (
    EPS,
    ClosedInterval,
    IsolatedPoint,
    PointClass,
    TimeScale,
    canonicalize,
    classify,
    graininess,
    in_kappa,
    kappa,
    rho,
    scattered_points,
    sigma,
)

PC = PointClass


# {{{ canonicalization


@pytest.mark.parametrize(
    ("raw", "expected"),
    [
        ([(0, 1), (1, 2)], ((0.0, 2.0),)),
        ([2, (0, 1), 2], ((0.0, 1.0), (2.0, 2.0))),
        ([(0, 1), 1], ((0.0, 1.0),)),
        ([(3, 3), ClosedInterval(0, 1), IsolatedPoint(5)], ((0.0, 1.0), (3.0, 3.0), (5.0, 5.0))),
        ([(0, 2), (0.5, 1)], ((0.0, 2.0),)),
    ],
)
def test_canonicalize_examples(raw, expected) -> None:
    assert canonicalize(raw).pieces == expected


def test_canonicalize_absorbs_near_touching_point() -> None:
    T = canonicalize([(0, 1), 1 + EPS / 2])
    assert len(T.pieces) == 1
    assert T.max == pytest.approx(1.0, abs=EPS)


def test_canonicalize_rejects_bad_input() -> None:
    with pytest.raises(EmptyTimeScale):
        canonicalize([])
    with pytest.raises(ConfigError):
        canonicalize([(2, 1)])


# }}}


# {{{ jumps, graininess, classification


def test_sigma_rho_examples() -> None:
    gap = TimeScale.union(TimeScale.interval(0, 1), TimeScale.interval(2, 3))
    assert sigma(gap, 1) == 2
    assert rho(gap, 2) == 1
    assert sigma(TimeScale.interval(0, 1), 0.5) == 0.5
    assert rho(TimeScale.interval(0, 1), 0) == 0
    assert rho(TimeScale.integers([-5, 5]), 0) == -1

    geo = TimeScale.geometric(2, [0, 64], include_zero=True, kmin=0)
    assert sigma(geo, 2) == 4
    assert graininess(geo, 4) == 4
    assert sigma(geo, 64) == 64


def test_graininess_examples() -> None:
    assert graininess(TimeScale.uniform(0.5, [0, 10]), 1) == 0.5
    assert graininess(TimeScale.interval(0, 1), 0.3) == 0


def test_point_not_in_scale() -> None:
    T = TimeScale.integers([0, 3])
    for fn in (sigma, rho, graininess, classify):
        with pytest.raises(PointNotInScale):
            fn(T, 0.5)


def test_classify_examples() -> None:
    T = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([2]))
    c2 = classify(T, 2)
    assert PC.ISOLATED in c2 and PC.LEFT_SCATTERED in c2 and PC.MAX in c2
    assert classify(T, 1) == PC.RIGHT_SCATTERED | PC.LEFT_DENSE
    assert classify(TimeScale.interval(0, 1), 0.5) == PC.DENSE
    assert classify(TimeScale.interval(0, 1), 0) == PC.RIGHT_DENSE | PC.MIN


def test_kappa_examples() -> None:
    T = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([2]))
    assert kappa(T) == TimeScale.interval(0, 1)
    assert kappa(TimeScale.interval(0, 1)) == TimeScale.interval(0, 1)
    assert kappa(TimeScale.integers([0, 5])) == TimeScale.integers([0, 4])
    assert not in_kappa(T, 2) and in_kappa(T, 1)


def test_scattered_points_examples() -> None:
    assert scattered_points(TimeScale.integers([0, 5]), 0, 3) == [(0, 1), (1, 1), (2, 1)]
    gap = TimeScale.union(TimeScale.interval(0, 1), TimeScale.interval(2, 3))
    assert scattered_points(gap, 0, 3) == [(1, 1)]
    assert scattered_points(TimeScale.interval(0, 2), 0, 2) == []


# }}}


# {{{ generators and descriptors


def test_generators() -> None:
    assert TimeScale.uniform(0.5, [0, 2]).pieces == tuple((x, x) for x in (0, 0.5, 1, 1.5, 2))
    assert TimeScale.uniform(0.1, [0, 1]).max == pytest.approx(1.0)
    assert 0.3 in TimeScale.uniform(0.1, [0, 1])

    geo = TimeScale.geometric(2, [0, 32])
    assert geo.min == 0.0 and geo.max == 32.0
    assert sigma(geo, 0) == geo.pieces[1][0] > 0
    assert all(sigma(geo, x) == 2 * x for x, _ in geo.pieces[1:-1])

    with pytest.raises(ConfigError):
        TimeScale.uniform(0, [0, 1])
    with pytest.raises(ConfigError):
        TimeScale.geometric(1.0, [0, 1])
    with pytest.raises(EmptyTimeScale):
        TimeScale.uniform(1.0, [0.2, 0.8])


def test_descriptor_roundtrip() -> None:
    desc = {
        "kind": "union",
        "window": [0, 4],
        "parts": [
            {"kind": "interval", "lo": 0, "hi": 1},
            {"kind": "uniform", "h": 0.5, "offset": 0.25, "window": [2, 3]},
            {"kind": "geometric", "q": 2, "include_zero": False},
        ],
    }
    T = TimeScale.from_descriptor(desc)
    assert TimeScale.from_descriptor(T.to_descriptor()) == T
    assert 2.25 in T and 4.0 in T and 0.5 in T
    assert 1.5 not in T


@pytest.mark.parametrize(
    ("desc", "exc"),
    [
        ({"kind": "integers"}, UnboundedScale),
        ({"kind": "mystery"}, ConfigError),
        ({"lo": 0}, ConfigError),
        ({"kind": "interval", "lo": 0}, ConfigError),
        ({"kind": "union", "parts": []}, EmptyTimeScale),
    ],
)
def test_descriptor_errors(desc, exc) -> None:
    with pytest.raises(exc):
        TimeScale.from_descriptor(desc)


# }}}


# {{{ properties over random scales


@st.composite
def time_scales(draw) -> TimeScale:
    n = draw(st.integers(1, 8))
    raw = []
    for _ in range(n):
        lo = draw(st.floats(-10, 10, allow_nan=False))
        if draw(st.booleans()):
            raw.append((lo, lo + draw(st.floats(0, 3, allow_nan=False))))
        else:
            raw.append(lo)
    return canonicalize(raw)


@st.composite
def scale_and_point(draw) -> tuple[TimeScale, float]:
    T = draw(time_scales())
    lo, hi = draw(st.sampled_from(T.pieces))
    lam = draw(st.sampled_from([0.0, 1.0]) | st.floats(0, 1))
    # membership is tested with tolerance EPS; work with the snapped point
    _, t = T.locate(lo + lam * (hi - lo))
    return T, t


PROPS = settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@PROPS
@given(time_scales())
def test_canonical_form(T: TimeScale) -> None:
    assert canonicalize(T.pieces) == T
    for lo, hi in T.pieces:
        assert lo <= hi
        assert lo == hi or hi - lo > EPS
    for (_, h0), (l1, _) in zip(T.pieces, T.pieces[1:]):
        assert l1 - h0 > EPS


@PROPS
@given(scale_and_point())
def test_jump_properties(Tt) -> None:
    T, t = Tt
    s, r = sigma(T, t), rho(T, t)
    assert s >= t and r <= t
    assert s in T and r in T
    assert graininess(T, t) >= 0
    assert sigma(T, s) >= s
    # nothing of T strictly between t and sigma(t)
    mid = 0.5 * (t + s)
    if s - t > 4 * EPS:
        assert mid not in T
        if PC.LEFT_SCATTERED in classify(T, s):
            assert rho(T, s) == t


@PROPS
@given(scale_and_point())
def test_classify_agrees_with_jumps(Tt) -> None:
    T, t = Tt
    c = classify(T, t)
    s, r = sigma(T, t), rho(T, t)
    assert (PC.RIGHT_SCATTERED in c) == (s > t)
    assert (PC.LEFT_SCATTERED in c) == (r < t)
    assert not (PC.RIGHT_SCATTERED in c and PC.RIGHT_DENSE in c)
    assert not (PC.LEFT_SCATTERED in c and PC.LEFT_DENSE in c)
    assert (PC.MAX in c) == (t == T.max)
    assert (PC.MIN in c) == (t == T.min)


@PROPS
@given(time_scales(), st.floats(0, 1), st.floats(0, 1))
def test_partition_of_length(T: TimeScale, la: float, lb: float) -> None:
    pts = [x for p in T.pieces for x in p]
    a, b = sorted((pts[int(la * (len(pts) - 1))], pts[int(lb * (len(pts) - 1))]))
    jumps = sum(mu for _, mu in scattered_points(T, a, b))
    lengths = sum(hi - lo for lo, hi in T.segments(a, b))
    assert jumps + lengths == pytest.approx(b - a, abs=1e-9)


def test_locate_many_matches_locate() -> None:
    T = TimeScale.union(TimeScale.interval(0, 1), TimeScale.points([1.5, 2.0]))
    ts = np.array([0.0, 0.3, 1.0 + EPS / 2, 1.5, 2.0])
    idx, snapped = T.locate_many(ts)
    for i, t in enumerate(ts):
        assert (idx[i], snapped[i]) == T.locate(t)
    with pytest.raises(PointNotInScale):
        T.locate_many(np.array([1.2]))


# }}}


if __name__ == "__main__":
    import sys

    if len(sys.argv) > 1:
        exec(sys.argv[1])
    else:
        pytest.main([__file__])
