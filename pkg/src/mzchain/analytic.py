"""Closed-form and asymptotic expressions for both schemes.

These are cross-checks for :mod:`mzchain.engine` and drivers for the
approximate optimizer. Every approximate result carries ``validity`` flags
derived from the inequality chain it relies on. ``a >> b`` is read as
``a >= ratio * b`` with ``ratio`` defaulting to 10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .states import DEFAULT_EPSILON, PhotonStatistics, StatisticsKind, truncate_statistics

PI2 = math.pi**2
GG_RATIO = 10.0


def much_greater(a: float, b: float, ratio: float = GG_RATIO) -> bool:
    return a >= ratio * b


def _log_cos(x: float) -> float:
    h = math.sin(0.5 * x)
    return math.log1p(-2.0 * h * h)


# ---------------------------------------------------------------- Fock inputs

@dataclass(frozen=True)
class LossCoefficients:
    """First-order loss imbalance after the ``m``-th BS_M for Bob's signal 1."""

    m: int
    A: float
    B: float
    A_asymptotic: float
    B_asymptotic: float


def loss_coefficients(m: int, M: int, N: int) -> LossCoefficients:
    theta = math.pi / (2 * M)
    k = np.arange(1, m)
    A = PI2 / (8 * N) * float(np.sum(np.sin(k * theta) * np.sin((m - k) * theta)))
    B = PI2 / (8 * N) * float(np.sum(np.sin(k * theta) * np.cos((m - k) * theta)))
    return LossCoefficients(m, A, B, math.pi * M / (8 * N), M * PI2 / (16 * N))


@dataclass(frozen=True)
class FockAmplitudes:
    """Per-photon amplitudes (Zone 0, Zone 1) at the output of the original scheme."""

    signal: int
    asymptotic: tuple[float, float]
    closed_form: tuple[float, float]
    loss: LossCoefficients | None
    prob_closed_form: float  # P_s from the closed-form amplitude
    prob_asymptotic: float  # P_s from the asymptotic amplitude
    prob_linear: float
    validity: dict[str, bool] = field(default_factory=dict)


def fock_final_amplitudes(M: int, N: int, v: int, s: int, ratio: float = GG_RATIO) -> FockAmplitudes:
    """Output amplitudes of a v-photon Fock input.

    ``closed_form`` is the finite-M expression: exact for s=0, first order in
    1/N for s=1. ``asymptotic`` further drops higher orders in 1/M.
    """
    theta = math.pi / (2 * M)
    if s == 0:
        cM1 = math.exp((M - 1) * _log_cos(theta))
        closed = (cM1 * math.cos(theta), cM1 * math.sin(theta))
        asym = (1 - PI2 / (8 * M), math.pi / (2 * M))
        loss = None
        lin = 1 - PI2 * v / (4 * M)
        validity = {"M>>1": much_greater(M, 1, ratio), "M>>v": much_greater(M, v, ratio)}
    elif s == 1:
        loss = loss_coefficients(M, M, N)
        closed = (math.cos(M * theta) + loss.A, math.sin(M * theta) - loss.B)
        asym = (math.pi * M / (8 * N), 1 - PI2 * M / (16 * N))
        lin = 1 - PI2 * M * v / (8 * N)
        validity = {"M>>1": much_greater(M, 1, ratio), "N>>Mv": much_greater(N, M * v, ratio)}
    else:
        raise ValueError(f"signal must be 0 or 1, got {s!r}")
    if v == 0:
        p_closed = p_asym = lin = 0.0
    else:
        p_closed = closed[s] ** (2 * v)
        p_asym = asym[s] ** (2 * v)
    return FockAmplitudes(s, asym, closed, loss, p_closed, p_asym, lin, validity)


# ------------------------------------------------- original scheme, any source

@dataclass(frozen=True)
class SlazApprox:
    exact_sum: tuple[float, float]  # photon-number sum with asymptotic amplitudes
    linearized: tuple[float, float]  # mean-photon-number linearization
    mean_photons: float
    cutoff: int
    validity: dict[str, bool]


def approx_probs_slaz(M: int, N: int, stats: PhotonStatistics, *, epsilon: float = DEFAULT_EPSILON,
                      ratio: float = GG_RATIO) -> SlazApprox:
    """Asymptotic ``(P0, P1)`` of the original scheme.

    The vacuum term is excluded from both forms since it never clicks.
    """
    trunc = truncate_statistics(stats, epsilon)
    v = np.arange(trunc.cutoff + 1)
    w = trunc.weights
    x0 = 1 - PI2 / (8 * M)
    x1 = 1 - PI2 * M / (16 * N)
    mask = v >= 1
    exact_sum = (float(np.sum(w[mask] * x0 ** (2 * v[mask]))),
                 float(np.sum(w[mask] * x1 ** (2 * v[mask]))))
    vbar = stats.mean
    c0 = stats.vacuum_weight()
    linear = (1 - PI2 * vbar / (4 * M) - c0, 1 - PI2 * vbar * M / (8 * N) - c0)
    if stats.kind is StatisticsKind.COHERENT:
        scale = vbar
        validity = {"N>>mean*M": much_greater(N, vbar * M, ratio),
                    "mean*M>>mean^2": much_greater(vbar * M, vbar**2, ratio),
                    "mean>>1": much_greater(vbar, 1, ratio)}
    else:
        scale = trunc.cutoff
        validity = {"N>>v_c*M": much_greater(N, scale * M, ratio),
                    "v_c*M>>v_c^2": much_greater(scale * M, scale**2, ratio)}
    return SlazApprox(exact_sum, linear, vbar, trunc.cutoff, validity)


def coherent_p0_closed(M: int, mean: float) -> float:
    """Only-D0 probability of a coherent input before any 1/M expansion."""
    lost = -math.expm1(2 * M * _log_cos(math.pi / (2 * M)))
    return math.exp(-mean * lost) - math.exp(-mean)


def coherent_p0_asymptotic(M: int, mean: float) -> float:
    return 1 - mean * PI2 / (4 * M)


def coherent_p1_closed(M: int, N: int, mean: float) -> float:
    """Photon-number sum of the first-order s=1 amplitude, summed in closed form."""
    return math.exp(-mean * (PI2 * M / (8 * N) - PI2**2 * M**2 / (256 * N**2))) - math.exp(-mean)


def coherent_p1_asymptotic(M: int, N: int, mean: float) -> float:
    return 1 - mean * PI2 * M / (8 * N) - math.exp(-mean)


def coherent_p1_factored(M: int, N: int, mean: float) -> float:
    """Channel survival x D0 silence x D1 click, with the asymptotic amplitudes."""
    return (math.exp(-mean * PI2 * M / (8 * N)) * math.exp(-mean * PI2 * M**2 / (64 * N**2))
            * -math.expm1(-mean * (1 - PI2 * M / (16 * N)) ** 2))


def transfer_amplitudes(M: int, N: int, s: int, n_rotations: int | None = None,
                        n_chains: int | None = None) -> tuple[float, float, float]:
    """Final ``(gamma0, gamma1)`` and leaked weight from 2x2 transfer matrices.

    Each outer cycle is the BS_M rotation followed by the inner chain acting on
    Zone 1 as a scalar: ``cos(theta_N)**N`` for signal 1, zero for signal 0.
    Independent of the element-by-element kernels.
    """
    n_rot = M if n_rotations is None else n_rotations
    n_ch = M - 1 if n_chains is None else n_chains
    theta = math.pi / (2 * M)
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    theta_n = math.pi / (2 * N)
    if s == 1 and N > 1:
        log_c = _log_cos(theta_n)
        keep, drop = math.exp(N * log_c), -math.expm1(2 * N * log_c)
    else:
        keep, drop = 0.0, 1.0
    g = np.array([1.0, 0.0])
    leaked = 0.0
    for m in range(n_rot):
        g = R @ g
        if m < n_ch:
            leaked += g[1] ** 2 * drop
            g = np.array([g[0], g[1] * keep])
    return float(g[0]), float(g[1]), leaked


def coherent_slaz_closed(M: int, N: int, mean: float, s: int) -> float:
    """Success probability P_s for a coherent input from the transfer-matrix amplitudes.

    Uses the factorization survival x (D_{1-s} dark) x (D_s clicks) with
    exact amplitudes, so it agrees with the engine to rounding.
    """
    g0, g1, leaked = transfer_amplitudes(M, N, s)
    gs, go = (g1, g0) if s == 1 else (g0, g1)
    return math.exp(-mean * leaked) * math.exp(-mean * go * go) * -math.expm1(-mean * gs * gs)


# -------------------------------------------------------- resource comparisons

def baseline_probs(M1: float, N1: float) -> tuple[float, float]:
    """Single-photon success probabilities of the original scheme."""
    return 1 - PI2 / (4 * M1), 1 - PI2 * M1 / (8 * N1)


@dataclass(frozen=True)
class ResourceRequirement:
    M: float
    N: float
    T: float
    validity: dict[str, bool]


def slaz_resource_requirement(mean: float, M1: float, N1: float,
                              ratio: float = GG_RATIO) -> ResourceRequirement:
    """Cycle numbers a coherent source needs to match single-photon ``(M1, N1)``."""
    M = mean * M1
    N = mean**2 * N1
    return ResourceRequirement(M, N, M * N, {"mean>>1": much_greater(mean, 1, ratio)})


# ----------------------------------------------------------- modified scheme

@dataclass(frozen=True)
class ModifiedApprox:
    P0: float
    P1: float
    p0: float
    p1: float
    f0: float
    f1: float
    k_bar: float
    validity: dict[str, bool]


def modified_probs(mean: float, M: float, N: float, m_c: int, ratio: float = GG_RATIO) -> ModifiedApprox:
    """Small-angle success probabilities of the modified scheme (coherent input)."""
    theta = math.pi / (2 * M)
    k_bar = mean * math.sin(m_c * theta) ** 2
    p0 = math.exp(-mean * m_c * PI2 / (4 * M**2))
    f0 = -math.expm1(-mean * math.exp(2 * m_c * _log_cos(theta)))
    p1 = math.exp(-PI2**2 * mean * m_c * (m_c + 1) * (2 * m_c + 1) / (96 * N * M**2))
    f1 = -math.expm1(-(math.sqrt(mean) * m_c * math.pi / (2 * M)) ** 2
                     * (1 - PI2 * (1 + m_c) / (16 * N)) ** 2)
    validity = {"k_bar<<mean": much_greater(mean, k_bar, ratio),
                "N>>m_c^2": much_greater(N, m_c**2, ratio)}
    return ModifiedApprox(p0, p1 * f1, p0, p1, f0, f1, k_bar, validity)


def modified_p1_from_p0(P0: float, N: float, m_c: int) -> float:
    """P~1 after eliminating M in favour of P~0."""
    L = math.log(P0)
    return (math.exp(PI2 * (m_c + 1) * (2 * m_c + 1) * L / (24 * N))
            * -math.expm1(m_c * L * (1 - PI2 * (1 + m_c) / (16 * N)) ** 2))


@dataclass(frozen=True)
class ModifiedDesign:
    m_c: int
    M: float
    N: float
    T: float
    k_bar: float
    feasible: bool


def design_M(P0: float, mean: float, m_c: int) -> float:
    return math.sqrt(-mean * m_c * PI2 / (4 * math.log(P0)))


def design_N(P0: float, P1: float, m_c: int) -> float:
    """Inner cycle number from the first-order expansion in 1/N; ``inf`` if infeasible."""
    L = math.log(P0)
    e = math.exp(m_c * L)
    den = P1 + e - 1
    # L < 0, so a positive N needs a negative denominator
    if den >= 0:
        return math.inf
    return PI2 * (m_c + 1) * ((2 * m_c + 1) + (m_c - 1) * e) * L / (24 * den)


def modified_design(P0: float, P1: float, mean: float, m_c: int) -> ModifiedDesign:
    if not (0 < P0 < 1 and 0 < P1 < 1):
        raise ValueError("target probabilities must lie in (0, 1)")
    if m_c < 1:
        raise ValueError("m_c must be >= 1")
    N = design_N(P0, P1, m_c)
    return ModifiedDesign(m_c, design_M(P0, mean, m_c), N, m_c * N, -m_c * math.log(P0),
                          math.isfinite(N))


def modified_resource_asymptotics(k_bar: float, P0: float, P1: float) -> tuple[float, float]:
    """Total cycle number at fixed expected Zone-1 photon number ``k_bar``.

    Returns the full expression and the large-``k_bar`` form that drops
    ``exp(-k_bar)``.
    """
    L = math.log(P0)
    ek = math.exp(-k_bar)
    full = (PI2 * k_bar * (L - k_bar) * (2 * k_bar - L + (k_bar + L) * ek)
            / (24 * L**2 * (ek - (1 - P1))))
    large_k = PI2 * k_bar**3 / (12 * L**2 * (1 - P1))
    return full, large_k


BASELINE_RATIO = 32 / (3 * math.pi**4)


def baseline_comparison(k_bar: float, M1: float, N1: float) -> float:
    return BASELINE_RATIO * k_bar**3 * M1 * N1


@dataclass(frozen=True)
class CounterfactualDesign:
    m_c: float
    M: float | None
    N: float
    T: float
    log10_T: float
    validity: dict[str, bool]


def counterfactual_only_design(k_bar: float, p0: float, p1: float, mean: float | None = None,
                               ratio: float = GG_RATIO) -> CounterfactualDesign:
    """Resources when only channel silence is demanded, ignoring Alice's click.

    ``M`` needs the source mean photon number and is None without it.
    """
    L0, L1 = math.log(p0), math.log(p1)
    m_c = -k_bar / L0
    M = math.sqrt(-mean * m_c * PI2 / (4 * L0)) if mean is not None else None
    N = PI2 * k_bar**2 / (12 * L0 * L1)
    T = -PI2 * k_bar**3 / (12 * L0**2 * L1)
    return CounterfactualDesign(m_c, M, N, T, math.log10(T), {"m_c>>1": much_greater(m_c, 1, ratio)})


def log10_T_counterfactual_only(k_bar: float, P: float) -> float:
    return math.log10(-PI2 * k_bar**3 / (12 * math.log(P) ** 3))


def counterfactual_only_from_baseline(k_bar: float, M1: float, N1: float,
                                      mean: float | None = None) -> CounterfactualDesign:
    """The same design expressed through single-photon cycle numbers ``(M1, N1)``."""
    m_c = 4 * M1 * k_bar / PI2
    M = 2 * M1 * math.sqrt(k_bar * mean) / math.pi if mean is not None else None
    N = 8 * N1 * k_bar**2 / (3 * PI2)
    T = N * m_c
    return CounterfactualDesign(m_c, M, N, T, math.log10(T), {})
