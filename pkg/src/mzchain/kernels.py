"""Hot loops of the chained-interferometer evolution.

Two interchangeable implementations of :func:`evolve` exist. The numba kernel
walks every beam splitter and every channel projection one at a time. The
numpy kernel vectorizes each inner chain over its beam-splitter index. Both
start from one photon amplitude in Zone 0 and return identical quantities.

The inner chain always starts with an empty channel, so for Bob's signal 1
each BS_N moves a fraction ``sin(theta_N)**2`` of the Zone-1 weight into the
channel where D_2B removes it; for signal 0 the weight rotates fully into the
channel and D_2A removes it once at the chain exit.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _backend
from ._backend import njit


class Evolution(NamedTuple):
    beta0: float
    beta1: float
    leaked: float  # total single-photon weight removed by D_2A / D_2B
    chain_leak: np.ndarray  # leaked weight per inner chain
    peak_b2: np.ndarray  # largest channel weight seen inside each inner chain
    peak_norm: np.ndarray  # amplitude norm**2 at that step
    trace_b2: np.ndarray  # (chains, N) channel weight after every BS_N, if recorded
    trace_norm: np.ndarray


@njit
def _evolve_numba(theta_m, theta_n, n_rot, n_chains, n_inner, signal, record):
    # cos x is applied as 1 - d with d = 2 sin^2(x/2): a rounded cos raised to the
    # N-th power would bias every chain by ~N ulp
    dm = 2.0 * math.sin(0.5 * theta_m) ** 2
    sm = math.sin(theta_m)
    dn = 2.0 * math.sin(0.5 * theta_n) ** 2
    sn = math.sin(theta_n)
    if theta_m == 0.5 * math.pi:
        dm = 1.0
        sm = 1.0
    if theta_n == 0.5 * math.pi:  # N = 1
        dn = 1.0
        sn = 1.0
    b0 = 1.0
    b1 = 0.0
    leaked = 0.0
    chain_leak = np.zeros(n_chains)
    peak_b2 = np.zeros(n_chains)
    peak_norm = np.zeros(n_chains)
    rows = n_chains if record else 0
    trace_b2 = np.zeros((rows, n_inner))
    trace_norm = np.zeros((rows, n_inner))
    for m in range(n_rot):
        t = b0 - b0 * dm - b1 * sm
        b1 = b0 * sm + b1 - b1 * dm
        b0 = t
        if m >= n_chains:
            continue
        b2 = 0.0
        lk = 0.0
        peak = -1.0
        for n in range(n_inner):
            t = b1 - b1 * dn - b2 * sn
            b2 = b1 * sn + b2 - b2 * dn
            b1 = t
            w = b2 * b2
            nrm = b0 * b0 + b1 * b1 + w
            if record:
                trace_b2[m, n] = w
                trace_norm[m, n] = nrm
            if w > peak:
                peak = w
                peak_norm[m] = nrm
            if signal == 1:
                lk += w
                b2 = 0.0
        if signal == 0:
            lk = b2 * b2
        chain_leak[m] = lk
        peak_b2[m] = peak
        leaked += lk
    return b0, b1, leaked, chain_leak, peak_b2, peak_norm, trace_b2, trace_norm


def _evolve_numpy(theta_m, theta_n, n_rot, n_chains, n_inner, signal, record):
    dm, sm = (1.0, 1.0) if theta_m == 0.5 * math.pi else (2.0 * math.sin(0.5 * theta_m) ** 2, math.sin(theta_m))
    n = np.arange(1, n_inner + 1)
    if signal == 1:
        if theta_n == 0.5 * math.pi:
            decay = np.zeros(n_inner)
        else:
            decay = np.exp(n * math.log1p(-2.0 * math.sin(0.5 * theta_n) ** 2))
        before = np.concatenate(([1.0], decay[:-1]))
        step_out = math.sin(theta_n) ** 2 * before**2
    else:
        cos_n = np.sin((n_inner - n) * theta_n)  # exact zero at the chain exit
        sin2_n = np.sin(n * theta_n) ** 2

    b0, b1 = 1.0, 0.0
    chain_leak = np.zeros(n_chains)
    peak_b2 = np.zeros(n_chains)
    peak_norm = np.zeros(n_chains)
    rows = n_chains if record else 0
    trace_b2 = np.zeros((rows, n_inner))
    trace_norm = np.zeros((rows, n_inner))
    for m in range(n_rot):
        b0, b1 = b0 - b0 * dm - b1 * sm, b0 * sm + b1 - b1 * dm
        if m >= n_chains:
            continue
        if signal == 1:
            b2sq = b1 * b1 * step_out
            norm = b0 * b0 + b1 * b1 * before**2
            chain_leak[m] = b2sq.sum()
            b1 *= decay[-1]
        else:
            b2sq = b1 * b1 * sin2_n
            norm = np.full(n_inner, b0 * b0 + b1 * b1)
            chain_leak[m] = b2sq[-1]
            b1 *= cos_n[-1]
        k = int(np.argmax(b2sq))
        peak_b2[m] = b2sq[k]
        peak_norm[m] = norm[k]
        if record:
            trace_b2[m] = b2sq
            trace_norm[m] = norm
    return b0, b1, float(chain_leak.sum()), chain_leak, peak_b2, peak_norm, trace_b2, trace_norm


def evolve(theta_m: float, theta_n: float, n_rotations: int, n_chains: int, n_inner: int,
           signal: int, record: bool = False, backend: str | None = None) -> Evolution:
    """Run ``n_rotations`` BS_M, each of the first ``n_chains`` followed by an inner chain."""
    if signal not in (0, 1):
        raise ValueError(f"signal must be 0 or 1, got {signal!r}")
    if not 0 <= n_chains <= n_rotations:
        raise ValueError("n_chains must lie in [0, n_rotations]")
    fn = _evolve_numba if _backend.resolve(backend) == "numba" else _evolve_numpy
    out = fn(float(theta_m), float(theta_n), int(n_rotations), int(n_chains), int(n_inner),
             int(signal), bool(record))
    return Evolution(float(out[0]), float(out[1]), float(out[2]), *out[3:])


# --- closed-form per-chain evaluation of the modified scheme (optimizer hot path) ---
# log(cos x) through sin(x/2): the rounded cos(x) loses the 1 - cos(x) digits for tiny x.

@njit
def _log_cos(x):
    h = math.sin(0.5 * x)
    return math.log1p(-2.0 * h * h)


def _log_cos_np(x):
    h = np.sin(0.5 * x)
    return np.log1p(-2.0 * h * h)


@njit
def _modified_pair_numba(mean, m_c, M, N):
    p0 = np.empty(M.size)
    p1 = np.empty(M.size)
    for i in range(M.size):
        theta = math.pi / (2.0 * M[i])
        cm = math.cos(theta)
        sm = math.sin(theta)
        # signal 0: D_2A empties Zone 1 after every chain
        lost0 = -math.expm1(2.0 * m_c * _log_cos(theta))
        p0[i] = math.exp(-mean * lost0) * -math.expm1(-mean * (1.0 - lost0))
        # signal 1: each chain scales Zone 1 by cos(theta_N)**N
        if N[i] == 1.0:
            cN = 0.0
            drop = 1.0
        else:
            log_c = _log_cos(math.pi / (2.0 * N[i]))
            cN = math.exp(N[i] * log_c)
            drop = -math.expm1(2.0 * N[i] * log_c)
        b0 = 1.0
        b1 = 0.0
        lost1 = 0.0
        for _ in range(m_c):
            t = b0 * cm - b1 * sm
            b1 = b0 * sm + b1 * cm
            b0 = t
            lost1 += b1 * b1 * drop
            b1 *= cN
        p1[i] = math.exp(-mean * lost1) * -math.expm1(-mean * b1 * b1)
    return p0, p1


def _modified_pair_numpy(mean, m_c, M, N):
    theta = np.pi / (2.0 * M)
    cm, sm = np.cos(theta), np.sin(theta)
    lost0 = -np.expm1(2.0 * m_c * _log_cos_np(theta))
    p0 = np.exp(-mean * lost0) * -np.expm1(-mean * (1.0 - lost0))
    with np.errstate(invalid="ignore"):
        log_c = _log_cos_np(np.pi / (2.0 * N))
    one = N == 1.0
    cN = np.where(one, 0.0, np.exp(N * log_c))
    drop = np.where(one, 1.0, -np.expm1(2.0 * N * log_c))
    b0 = np.ones_like(theta)
    b1 = np.zeros_like(theta)
    lost1 = np.zeros_like(theta)
    for _ in range(m_c):
        b0, b1 = b0 * cm - b1 * sm, b0 * sm + b1 * cm
        lost1 += b1 * b1 * drop
        b1 = b1 * cN
    p1 = np.exp(-mean * lost1) * -np.expm1(-mean * b1 * b1)
    return p0, p1


def modified_coherent_pair(mean: float, m_c: int, M, N, backend: str | None = None):
    """Success probabilities ``(P~0, P~1)`` of the modified scheme for coherent input.

    ``M`` and ``N`` broadcast against each other; the result has their
    broadcast shape.
    """
    M_arr, N_arr = np.broadcast_arrays(np.asarray(M, dtype=float), np.asarray(N, dtype=float))
    shape = M_arr.shape
    M_flat = M_arr.flatten()
    N_flat = N_arr.flatten()
    if _backend.resolve(backend) == "numba":
        p0, p1 = _modified_pair_numba(float(mean), int(m_c), M_flat, N_flat)
    else:
        p0, p1 = _modified_pair_numpy(float(mean), int(m_c), M_flat, N_flat)
    return p0.reshape(shape), p1.reshape(shape)
