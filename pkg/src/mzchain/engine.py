"""Exact evolution of the double-chained interferometer for any photon statistics.

No asymptotic expansion is made anywhere in this module: beam splitters and
vacuum projections are applied one at a time (or, in the numpy backend, as the
equivalent vectorized recurrence). Multiphoton probabilities follow from the
single-excitation amplitudes because every input photon sees the same linear
optics and the same vacuum projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import kernels
from .states import (
    DEFAULT_EPSILON,
    ModeAmplitudes,
    PhotonStatistics,
    StatisticsKind,
    beam_splitter_apply,
    collapse_vacuum,
    truncate_statistics,
)

__all__ = [
    "Scheme",
    "ProtocolParams",
    "RunOutcome",
    "OccupancyPoint",
    "InvalidParameters",
    "run_inner_chain",
    "run_slaz",
    "run_modified",
    "run",
    "channel_occupancy_profile",
]


class InvalidParameters(ValueError):
    pass


class Scheme(str, Enum):
    SLAZ = "slaz"
    MODIFIED = "modified"


@dataclass(frozen=True)
class ProtocolParams:
    """Geometry of one run.

    ``M`` fixes the BS_M reflectivity ``cos(pi/2M)**2`` and ``N`` both the
    BS_N reflectivity and the number of BS_N per inner chain. The original
    scheme uses M BS_M with M-1 inner chains; the modified scheme stops after
    the ``m_c``-th inner chain.
    """

    scheme: Scheme
    M: int
    N: int
    s: int
    m_c: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        for name in ("M", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InvalidParameters(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.M < 2:
            raise InvalidParameters(f"outer cycle number M must be >= 2, got {self.M}")
        if self.N < 1:
            raise InvalidParameters(f"inner cycle number N must be >= 1, got {self.N}")
        if self.s not in (0, 1):
            raise InvalidParameters(f"Bob's signal must be 0 or 1, got {self.s!r}")
        if self.scheme is Scheme.MODIFIED:
            if self.m_c is None:
                raise InvalidParameters("the modified scheme needs a cutoff m_c")
            if int(self.m_c) != self.m_c or not 1 <= self.m_c <= self.M:
                raise InvalidParameters(f"m_c must be an integer in [1, M={self.M}], got {self.m_c!r}")
            object.__setattr__(self, "m_c", int(self.m_c))
        elif self.m_c is not None:
            raise InvalidParameters("m_c only applies to the modified scheme")

    @classmethod
    def slaz(cls, M: int, N: int, s: int) -> ProtocolParams:
        return cls(Scheme.SLAZ, M, N, s)

    @classmethod
    def modified(cls, M: int, N: int, m_c: int, s: int) -> ProtocolParams:
        return cls(Scheme.MODIFIED, M, N, s, m_c)

    @property
    def theta_m(self) -> float:
        return math.pi / (2 * self.M)

    @property
    def theta_n(self) -> float:
        return math.pi / (2 * self.N)

    @property
    def n_rotations(self) -> int:
        return self.M if self.scheme is Scheme.SLAZ else self.m_c

    @property
    def n_chains(self) -> int:
        return self.M - 1 if self.scheme is Scheme.SLAZ else self.m_c

    @property
    def total_cycles(self) -> int:
        return self.M * self.N if self.scheme is Scheme.SLAZ else self.m_c * self.N

    def with_signal(self, s: int) -> ProtocolParams:
        return ProtocolParams(self.scheme, self.M, self.N, s, self.m_c)


@dataclass(frozen=True)
class RunOutcome:
    """Exact outcome probabilities of one run.

    The five exclusive outcomes are: a channel detector fired
    (``prob_leak``), or none fired and then only D0, only D1, both, or
    neither clicked. ``p_success`` is the figure of merit for Bob's signal:
    the only-D_s probability for the original scheme, and
    ``p_counterfactual * f_click`` for the modified scheme.
    """

    scheme: Scheme
    signal: int
    prob_only_d0: float
    prob_only_d1: float
    prob_both: float
    prob_none: float
    prob_leak: float
    log_p_counterfactual: float
    f_click: float
    p_success: float
    max_channel_occupancy: float
    final_amplitudes: ModeAmplitudes | None = None
    truncation_error: float = 0.0  # source probability mass dropped by a photon-number cutoff

    @property
    def p_counterfactual(self) -> float:
        return math.exp(self.log_p_counterfactual)

    @property
    def prob_only_signal(self) -> float:
        """Only D_s clicked; for the modified scheme this adds D0 silence to P~1."""
        return self.prob_only_d1 if self.signal == 1 else self.prob_only_d0

    @property
    def other_mass(self) -> float:
        return self.prob_both + self.prob_none

    def total_probability(self) -> float:
        return self.prob_only_d0 + self.prob_only_d1 + self.prob_leak + self.other_mass

    def as_dict(self) -> dict:
        out = {
            "scheme": self.scheme.value,
            "signal": self.signal,
            "prob_only_d0": self.prob_only_d0,
            "prob_only_d1": self.prob_only_d1,
            "prob_both": self.prob_both,
            "prob_none": self.prob_none,
            "prob_leak": self.prob_leak,
            "p_counterfactual": self.p_counterfactual,
            "log_p_counterfactual": self.log_p_counterfactual,
            "f_click": self.f_click,
            "p_success": self.p_success,
            "max_channel_occupancy": self.max_channel_occupancy,
            "truncation_error": self.truncation_error,
        }
        if self.final_amplitudes is not None:
            out["final_amplitudes"] = [self.final_amplitudes.beta0, self.final_amplitudes.beta1]
        return out


class OccupancyPoint(NamedTuple):
    outer: int  # 1-based index of the outer interferometer
    inner: int  # 1-based index of the BS_N inside its chain
    mean_photons: float


def run_inner_chain(state: ModeAmplitudes, N: int, s: int,
                    coherent_mean: float | None = None) -> tuple[ModeAmplitudes, float]:
    """Send ``state`` through one inner chain of ``N`` BS_N.

    Reference implementation built directly on :func:`beam_splitter_apply`
    and :func:`collapse_vacuum`. Returns the state at the chain exit and the
    log survival probability of the channel detectors: per photon when
    ``coherent_mean`` is None, for the whole coherent field otherwise.
    """
    if state.beta2 != 0.0:
        raise ValueError("inner chain must start with an empty channel")
    theta = math.pi / (2 * N)
    norm_in = state.norm2()
    leaked = 0.0
    for _ in range(N):
        state = beam_splitter_apply(state, (1, 2), theta)
        if s == 1:
            state, w = collapse_vacuum(state, 2)
            leaked += w
    if s == 0:
        state, w = collapse_vacuum(state, 2)
        leaked += w
    if coherent_mean is not None:
        return state, -coherent_mean * leaked
    if norm_in == 0.0:
        return state, 0.0
    if leaked >= norm_in:
        return state, -math.inf
    return state, math.log1p(-leaked / norm_in)


def _fock_components(g0sq, g1sq, norm2, log_keep, v):
    """Outcome probabilities for a v-photon Fock input given per-photon quantities."""
    if v == 0:
        return 0.0, 0.0, 0.0, 1.0, 0.0, 0.0
    log_p = v * log_keep
    p = math.exp(log_p)
    if norm2 <= 0.0 or p == 0.0:
        return 0.0, 0.0, 0.0, 0.0, -math.inf if p == 0.0 else log_p, 0.0
    r0 = g0sq / norm2
    r1 = g1sq / norm2
    only0 = p * r0**v
    only1 = p * r1**v
    both = p * max(0.0, 1.0 - r0**v - r1**v)
    return only0, only1, both, 0.0, log_p, p


def _outcome_from_evolution(params: ProtocolParams, stats: PhotonStatistics, evo: kernels.Evolution,
                            epsilon: float) -> RunOutcome:
    g0sq, g1sq = evo.beta0**2, evo.beta1**2
    norm2 = g0sq + g1sq
    leaked = min(evo.leaked, 1.0)
    s = params.s

    dropped = 0.0
    if stats.kind is StatisticsKind.COHERENT:
        a = stats.mean_photons
        log_p = -a * leaked
        p = math.exp(log_p)
        dark0, dark1 = math.exp(-a * g0sq), math.exp(-a * g1sq)
        click0, click1 = -math.expm1(-a * g0sq), -math.expm1(-a * g1sq)
        only0 = p * dark1 * click0
        only1 = p * dark0 * click1
        both = p * click0 * click1
        none = p * dark0 * dark1
        leak = -math.expm1(log_p)
        f_click = click1 if s == 1 else click0
        occupancy = a * evo.peak_b2
    else:
        if stats.kind is StatisticsKind.FOCK:
            ws = np.zeros(stats.photons + 1)
            ws[-1] = 1.0
        else:
            ws = truncate_statistics(stats, epsilon).weights
            dropped = max(0.0, 1.0 - float(np.sum(ws)))
        log_keep = math.log1p(-leaked) if leaked < 1.0 else -math.inf
        only0 = only1 = both = none = p = 0.0
        for v, w in enumerate(ws.tolist()):
            if w == 0.0:
                continue
            o0, o1, b, n0, _, pv = _fock_components(g0sq, g1sq, norm2, log_keep, v)
            only0 += w * o0
            only1 += w * o1
            both += w * b
            none += w * n0
            p += w * (pv if v else 1.0)
        log_p = math.log(p) if p > 0 else -math.inf
        leak = max(0.0, 1.0 - p)
        f_click = ((only1 if s == 1 else only0) + both) / p if p > 0 else 0.0
        occupancy = _mixture_occupancy(ws, evo.peak_b2, evo.peak_norm)

    if params.scheme is Scheme.SLAZ:
        p_success = only1 if s == 1 else only0
    else:
        p_success = p * f_click
    return RunOutcome(
        scheme=params.scheme,
        signal=s,
        prob_only_d0=only0,
        prob_only_d1=only1,
        prob_both=both,
        prob_none=none,
        prob_leak=leak,
        log_p_counterfactual=log_p,
        f_click=f_click,
        p_success=p_success,
        max_channel_occupancy=float(np.max(occupancy)) if np.size(occupancy) else 0.0,
        final_amplitudes=ModeAmplitudes(evo.beta0, evo.beta1, 0.0),
        truncation_error=dropped,
    )


def _mixture_occupancy(weights, b2sq, norm2):
    """Mean channel photon number, conditioned on no earlier channel click.

    A v-photon component carries relative weight ``norm2**v`` after the
    earlier projections and holds ``v * b2sq / norm2`` channel photons.
    """
    b2sq = np.asarray(b2sq, dtype=float)
    norm2 = np.asarray(norm2, dtype=float)
    num = np.zeros_like(b2sq)
    den = np.zeros_like(b2sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        for v, w in enumerate(weights):
            if w == 0.0:
                continue
            den += w * norm2**v
            if v:
                num += w * v * norm2 ** (v - 1)
        out = np.where(den > 0, b2sq * num / den, 0.0)
    return out


def _check_stats(stats: PhotonStatistics):
    if not isinstance(stats, PhotonStatistics):
        raise TypeError("stats must be a PhotonStatistics instance")


def run(params: ProtocolParams, stats: PhotonStatistics, *, epsilon: float = DEFAULT_EPSILON,
        backend: str | None = None) -> RunOutcome:
    """Evolve ``stats`` through the interferometer described by ``params``."""
    _check_stats(stats)
    evo = kernels.evolve(params.theta_m, params.theta_n, params.n_rotations, params.n_chains,
                         params.N, params.s, backend=backend)
    return _outcome_from_evolution(params, stats, evo, epsilon)


def run_slaz(params: ProtocolParams, stats: PhotonStatistics, **kwargs) -> RunOutcome:
    if params.scheme is not Scheme.SLAZ:
        raise InvalidParameters("run_slaz needs scheme=slaz")
    return run(params, stats, **kwargs)


def run_modified(params: ProtocolParams, stats: PhotonStatistics, **kwargs) -> RunOutcome:
    if params.scheme is not Scheme.MODIFIED:
        raise InvalidParameters("run_modified needs scheme=modified")
    return run(params, stats, **kwargs)


def channel_occupancy_profile(params: ProtocolParams, stats: PhotonStatistics, *,
                              epsilon: float = DEFAULT_EPSILON,
                              backend: str | None = None) -> list[OccupancyPoint]:
    """Mean photon number in the channel right after every BS_N, before its detector acts."""
    _check_stats(stats)
    evo = kernels.evolve(params.theta_m, params.theta_n, params.n_rotations, params.n_chains,
                         params.N, params.s, record=True, backend=backend)
    if stats.kind is StatisticsKind.COHERENT:
        occ = stats.mean_photons * evo.trace_b2
    else:
        if stats.kind is StatisticsKind.FOCK:
            ws = np.zeros(stats.photons + 1)
            ws[-1] = 1.0
        else:
            ws = truncate_statistics(stats, epsilon).weights
        occ = _mixture_occupancy(ws, evo.trace_b2, evo.trace_norm)
    return [OccupancyPoint(m + 1, n + 1, float(occ[m, n]))
            for m in range(occ.shape[0]) for n in range(occ.shape[1])]


def reference_evolution(params: ProtocolParams) -> tuple[ModeAmplitudes, float]:
    """Slow per-element walk through the interferometer; returns final state and leaked weight."""
    state = ModeAmplitudes.input_port()
    norm_before = 1.0
    for m in range(params.n_rotations):
        state = beam_splitter_apply(state, (0, 1), params.theta_m)
        if m < params.n_chains:
            state, _ = run_inner_chain(state, params.N, params.s)
    return state, norm_before - state.norm2()
