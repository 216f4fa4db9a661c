import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzchain.states import (
    ModeAmplitudes,
    PhotonStatistics,
    StatisticsKind,
    beam_splitter_apply,
    collapse_vacuum,
    truncate_statistics,
)

angles = st.floats(0.0, math.pi / 2)
pairs = st.sampled_from([(0, 1), (1, 2)])


@st.composite
def amplitudes(draw):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n > 1:
        v = v / n * draw(st.floats(0, 1))
    return ModeAmplitudes(*v)


def test_identity_rotation():
    out = beam_splitter_apply(ModeAmplitudes(1, 0, 0), (0, 1), 0.0)
    assert out.as_array().tolist() == [1.0, 0.0, 0.0]


def test_full_transfer():
    out = beam_splitter_apply(ModeAmplitudes(1, 0, 0), (0, 1), math.pi / 2)
    np.testing.assert_allclose(out.as_array(), [0, 1, 0], atol=1e-15)


@pytest.mark.parametrize("N", [1, 2, 7, 50, 1000])
def test_inner_chain_routes_everything_to_channel(N):
    state = ModeAmplitudes(0, 1, 0)
    for _ in range(N):
        state = beam_splitter_apply(state, (1, 2), math.pi / (2 * N))
    np.testing.assert_allclose(state.as_array(), [0, 0, 1], atol=1e-12)


def test_rotation_sign_convention():
    c, s = math.cos(0.3), math.sin(0.3)
    out = beam_splitter_apply(ModeAmplitudes(0.6, 0.0, 0.0), (0, 1), 0.3)
    assert out.beta0 == pytest.approx(0.6 * c)
    assert out.beta1 == pytest.approx(0.6 * s)
    out = beam_splitter_apply(ModeAmplitudes(0.0, 0.6, 0.0), (0, 1), 0.3)
    assert out.beta0 == pytest.approx(-0.6 * s)


def test_bad_inputs():
    with pytest.raises(ValueError):
        beam_splitter_apply(ModeAmplitudes(1, 0, 0), (0, 2), 0.1)
    with pytest.raises(ValueError):
        beam_splitter_apply(ModeAmplitudes(1, 0, 0), (0, 1), 2.0)
    with pytest.raises(ValueError):
        ModeAmplitudes(1, 1, 0)
    with pytest.raises(ValueError):
        collapse_vacuum(ModeAmplitudes(1, 0, 0), 3)


def test_collapse_examples():
    state, w = collapse_vacuum(ModeAmplitudes(0.6, 0.8, 0.0), 2)
    assert w == 0.0 and state == ModeAmplitudes(0.6, 0.8, 0.0)
    th = math.pi / 76
    state, w = collapse_vacuum(ModeAmplitudes(math.cos(th), 0.0, math.sin(th)), 2)
    assert state == ModeAmplitudes(math.cos(th), 0.0, 0.0)
    assert w == pytest.approx(math.sin(th) ** 2, rel=1e-15)
    # coherent survival at M=38, mean 200
    assert 200 * w == pytest.approx(0.3415, abs=5e-4)
    assert math.exp(-200 * w) == pytest.approx(0.7106, abs=5e-4)


@given(amplitudes(), pairs, angles, angles)
def test_rotation_composition(state, pair, a, b):
    if a + b > math.pi / 2:
        b = math.pi / 2 - a
    two = beam_splitter_apply(beam_splitter_apply(state, pair, a), pair, b)
    one = beam_splitter_apply(state, pair, a + b)
    np.testing.assert_allclose(two.as_array(), one.as_array(), atol=1e-12)


@given(amplitudes(), pairs, angles)
def test_norm_conservation(state, pair, theta):
    out = beam_splitter_apply(state, pair, theta)
    assert abs(out.norm2() - state.norm2()) <= 1e-14


@given(amplitudes(), st.integers(0, 2))
def test_collapse_idempotent(state, mode):
    once, w1 = collapse_vacuum(state, mode)
    twice, w2 = collapse_vacuum(once, mode)
    assert once == twice and w2 == 0.0
    assert w1 == pytest.approx(state[mode] ** 2)


def test_statistics_constructors():
    assert PhotonStatistics.fock(3).kind is StatisticsKind.FOCK
    assert PhotonStatistics.coherent(2j).mean == pytest.approx(4.0)
    assert PhotonStatistics.coherent(complex(3, 4)).mean == pytest.approx(25.0)
    arb = PhotonStatistics.arbitrary([0.5, 0.25, 0.25])
    assert arb.mean == pytest.approx(0.75)
    assert arb.vacuum_weight() == 0.5
    for bad in ([0.5, 0.4], [1.2, -0.2], []):
        with pytest.raises(ValueError):
            PhotonStatistics.arbitrary(bad)
    for bad in (-1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            PhotonStatistics.coherent(bad)
    with pytest.raises(ValueError):
        PhotonStatistics.fock(-1)


def test_truncate_fock_and_vacuum():
    t = truncate_statistics(PhotonStatistics.fock(3), 1e-12)
    assert t.cutoff == 3 and t.weights.tolist() == [0, 0, 0, 1]
    t = truncate_statistics(PhotonStatistics.coherent(0), 1e-3)
    assert t.cutoff == 0 and t.weights.tolist() == [1.0]


def _poisson_cutoff_by_summation(mean, eps):
    # independent: running pmf recursion, tail = mean - sum_{v<=c} v w_v
    w = math.exp(-mean)
    weighted = 0.0
    v = 0
    while True:
        weighted += v * w
        if mean - weighted < eps and v >= mean:
            # confirm with a direct sum of the remaining terms
            tail, u, wu = 0.0, v + 1, w * mean / (v + 1)
            while wu > 1e-300 and u < v + 2000:
                tail += u * wu
                u += 1
                wu *= mean / u
            if tail < eps:
                return v
        v += 1
        w *= mean / v


def test_truncate_coherent_ten():
    t = truncate_statistics(PhotonStatistics.coherent(10), 1e-12)
    assert t.cutoff == _poisson_cutoff_by_summation(10, 1e-12) == 42
    assert t.tail_mass < 1e-12


@settings(max_examples=50)
@given(st.floats(0.0, 300.0), st.sampled_from([1e-3, 1e-8, 1e-12]))
def test_truncate_tail_property(mean, eps):
    t = truncate_statistics(PhotonStatistics.coherent(mean), eps)
    assert t.tail_mass < eps
    assert t.mean >= mean - eps - 1e-9 * max(1.0, mean)
    if t.cutoff > 0:
        # minimality: one fewer level would leave too much tail
        v = np.arange(t.cutoff + 1)
        assert t.tail_mass + t.cutoff * t.weights[-1] >= eps * (1 - 1e-9)
        assert np.all(v == t.photon_numbers)


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12).filter(lambda w: sum(w) > 0.1))
def test_truncate_arbitrary(ws):
    w = np.array(ws) / sum(ws)
    w = w / w.sum()
    try:
        stats = PhotonStatistics.arbitrary(w)
    except ValueError:
        return
    t = truncate_statistics(stats, 1e-12)
    np.testing.assert_array_equal(t.weights, w[: t.cutoff + 1])
    assert t.tail_mass < 1e-12
