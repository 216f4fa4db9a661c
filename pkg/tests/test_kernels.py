import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzchain import _backend, kernels
from mzchain.engine import ProtocolParams, PhotonStatistics, reference_evolution, run

needs_numba = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


def _evolve(p, backend, record=False):
    return kernels.evolve(p.theta_m, p.theta_n, p.n_rotations, p.n_chains, p.N, p.s,
                          record=record, backend=backend)


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60), st.integers(1, 300), st.integers(0, 1), st.booleans(), st.data())
def test_backends_agree(M, N, s, modified, data):
    if modified:
        p = ProtocolParams.modified(M, N, data.draw(st.integers(1, M)), s)
    else:
        p = ProtocolParams.slaz(M, N, s)
    a = _evolve(p, "numpy", record=True)
    b = _evolve(p, "numba", record=True)
    assert a.beta0 == pytest.approx(b.beta0, abs=1e-13)
    assert a.beta1 == pytest.approx(b.beta1, abs=1e-13)
    assert a.leaked == pytest.approx(b.leaked, abs=1e-13)
    np.testing.assert_allclose(a.chain_leak, b.chain_leak, atol=1e-14)
    np.testing.assert_allclose(a.peak_b2, b.peak_b2, atol=1e-14)
    np.testing.assert_allclose(a.trace_b2, b.trace_b2, atol=1e-14)
    np.testing.assert_allclose(a.trace_norm, b.trace_norm, atol=1e-13)


@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=needs_numba)])
@pytest.mark.parametrize("params", [ProtocolParams.slaz(7, 9, 1), ProtocolParams.slaz(5, 3, 0),
                                    ProtocolParams.modified(12, 6, 4, 1),
                                    ProtocolParams.modified(12, 6, 12, 0)])
def test_kernel_matches_element_walk(backend, params):
    state, leaked = reference_evolution(params)
    evo = _evolve(params, backend)
    assert evo.beta0 == pytest.approx(state.beta0, abs=1e-14)
    assert evo.beta1 == pytest.approx(state.beta1, abs=1e-14)
    assert evo.leaked == pytest.approx(leaked, abs=1e-14)


@pytest.mark.parametrize("backend", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_closed_form_pair_matches_engine(backend):
    stats = PhotonStatistics.coherent(200)
    for m_c, M, N in [(2, 38, 14), (5, 84, 72), (29, 369, 1442), (1, 2, 1)]:
        p0, p1 = kernels.modified_coherent_pair(200.0, m_c, M, N, backend=backend)
        e0 = run(ProtocolParams.modified(M, N, m_c, 0), stats).p_success
        e1 = run(ProtocolParams.modified(M, N, m_c, 1), stats).p_success
        assert float(p0) == pytest.approx(e0, rel=1e-11, abs=1e-15)
        assert float(p1) == pytest.approx(e1, rel=1e-11, abs=1e-15)


def test_closed_form_pair_broadcasts():
    Ms = np.arange(10, 20)
    p0, p1 = kernels.modified_coherent_pair(50.0, 3, Ms, 40, backend="numpy")
    assert p0.shape == p1.shape == (10,)
    q0, q1 = kernels.modified_coherent_pair(50.0, 3, 15, 40, backend="numpy")
    assert q0 == pytest.approx(p0[5]) and q1 == pytest.approx(p1[5])


def test_log_cos_keeps_tiny_angle_digits():
    x = 1e-6
    assert kernels._log_cos_np(np.array([x]))[0] == pytest.approx(-x * x / 2, rel=1e-10)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv(_backend.BACKEND_ENV, "numpy")
    assert _backend.default_backend() == "numpy"
    monkeypatch.setenv(_backend.BACKEND_ENV, "NumBa")
    assert _backend.default_backend() == ("numba" if _backend.HAVE_NUMBA else "numpy")
    monkeypatch.setenv(_backend.BACKEND_ENV, "fortran")
    with pytest.raises(ValueError):
        _backend.default_backend()
    with pytest.raises(ValueError):
        _backend.resolve("cuda")


def test_evolve_rejects_bad_arguments():
    with pytest.raises(ValueError):
        kernels.evolve(0.1, 0.1, 3, 4, 5, 0)
    with pytest.raises(ValueError):
        kernels.evolve(0.1, 0.1, 3, 2, 5, 2)


def test_peak_location_s0_is_chain_exit():
    p = ProtocolParams.modified(38, 14, 2, 0)
    evo = _evolve(p, "numpy", record=True)
    assert np.argmax(evo.trace_b2[0]) == 13
    assert evo.trace_b2[0, -1] == pytest.approx(math.sin(math.pi / 76) ** 2, rel=1e-12)
