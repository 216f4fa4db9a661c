"""Independent verifiers for the engine.

``fock_simulate`` evolves the full multimode Fock state, one photon-number
sector at a time, with beam-splitter matrices obtained by binomial expansion
of the creation-operator map. It never uses the single-excitation shortcut,
so agreement with the engine is a genuine check of that shortcut.

``monte_carlo_clicks`` samples detector records shot by shot: draw a photon
number, let every photon survive each channel projection independently, then
distribute the survivors over D0 and D1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from . import kernels
from .engine import ProtocolParams, RunOutcome, Scheme
from .states import PhotonStatistics, StatisticsKind

DEFAULT_CUTOFF = 25
MAX_CUTOFF = 200


class CutoffTooSmall(ValueError):
    def __init__(self, cutoff: int, required: int):
        super().__init__(f"cutoff {cutoff} is below the highest occupied photon number; "
                         f"need cutoff >= {required}")
        self.cutoff = cutoff
        self.required = required


@lru_cache(maxsize=4096)
def _bs_matrix(k: int, theta: float) -> np.ndarray:
    """Beam splitter on the k-photon subspace of two modes A, B.

    Column p is the image of |p, k-p>, built from
    ``A+ -> c A+ + s B+`` and ``B+ -> c B+ - s A+``.
    """
    c, s = (0.0, 1.0) if theta == math.pi / 2 else (math.cos(theta), math.sin(theta))
    U = np.zeros((k + 1, k + 1))
    for p in range(k + 1):
        for q in range(k + 1):
            total = 0.0
            for j in range(max(0, q - (k - p)), min(p, q) + 1):
                i = q - j
                total += (math.comb(p, j) * c**j * s ** (p - j)
                          * math.comb(k - p, i) * (-s) ** i * c ** (k - p - i))
            norm = math.sqrt(math.factorial(q) * math.factorial(k - q)
                             / (math.factorial(p) * math.factorial(k - p)))
            U[q, p] = total * norm
    U.setflags(write=False)
    return U


@dataclass
class FockSpaceState:
    """Three-mode state stored as photon-number sectors.

    ``sectors[n][v0, v1]`` is the amplitude of ``|v0, v1, n - v0 - v1>``;
    entries with ``v0 + v1 > n`` stay zero. Beam splitters and vacuum
    projections never couple different sectors.
    """

    cutoff: int
    sectors: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def zone0(cls, amplitudes, cutoff: int) -> FockSpaceState:
        """``sum_n amplitudes[n] |n, 0, 0>``."""
        sectors = []
        for n in range(cutoff + 1):
            a = np.zeros((n + 1, n + 1))
            if n < len(amplitudes):
                a[n, 0] = amplitudes[n]
            sectors.append(a)
        return cls(cutoff, sectors)

    def norm2(self) -> float:
        return float(sum(np.sum(a * a) for a in self.sectors))

    def sector_norms(self) -> np.ndarray:
        return np.array([np.sum(a * a) for a in self.sectors])

    def dense(self) -> np.ndarray:
        """Amplitudes as a ``(cutoff+1)**3`` array indexed by ``(v0, v1, v2)``."""
        out = np.zeros((self.cutoff + 1,) * 3)
        for n, a in enumerate(self.sectors):
            for v0 in range(n + 1):
                for v1 in range(n + 1 - v0):
                    out[v0, v1, n - v0 - v1] = a[v0, v1]
        return out

    def apply_beam_splitter(self, pair: tuple[int, int], theta: float) -> None:
        for n, a in enumerate(self.sectors):
            if not a.any():
                continue
            if pair == (0, 1):
                for v2 in range(n + 1):
                    k = n - v2
                    p = np.arange(k + 1)
                    a[p, k - p] = _bs_matrix(k, theta) @ a[p, k - p]
            elif pair == (1, 2):
                for v0 in range(n + 1):
                    k = n - v0
                    a[v0, : k + 1] = _bs_matrix(k, theta) @ a[v0, : k + 1]
            else:
                raise ValueError(f"unsupported mode pair {pair!r}")

    def channel_photons(self) -> float:
        """Unnormalized expectation of the Zone-2 photon number."""
        total = 0.0
        for n, a in enumerate(self.sectors):
            v0, v1 = np.indices(a.shape)
            v2 = np.clip(n - v0 - v1, 0, None)
            total += float(np.sum(v2 * a * a))
        return total

    def project_channel_vacuum(self) -> float:
        """Project Zone 2 onto vacuum; return the removed probability."""
        removed = 0.0
        for n, a in enumerate(self.sectors):
            v0, v1 = np.indices(a.shape)
            mask = (v0 + v1) < n
            removed += float(np.sum(a[mask] ** 2))
            a[mask] = 0.0
        return removed


def _sector_weights(stats: PhotonStatistics, cutoff: int) -> tuple[np.ndarray, float]:
    """Photon-number weights up to ``cutoff`` and the dropped probability mass."""
    if stats.kind is StatisticsKind.FOCK:
        if cutoff < stats.photons:
            raise CutoffTooSmall(cutoff, stats.photons)
        w = np.zeros(cutoff + 1)
        w[stats.photons] = 1.0
        return w, 0.0
    if stats.kind is StatisticsKind.COHERENT:
        n = np.arange(cutoff + 1)
        w = poisson.pmf(n, stats.mean_photons) if stats.mean_photons > 0 else (n == 0).astype(float)
        return w, float(poisson.sf(cutoff, stats.mean_photons)) if stats.mean_photons > 0 else 0.0
    src = np.asarray(stats.weights)
    top = int(np.flatnonzero(src)[-1])
    if cutoff < top:
        raise CutoffTooSmall(cutoff, top)
    w = np.zeros(cutoff + 1)
    w[: src.size] = src
    return w, 0.0


def fock_simulate(params: ProtocolParams, stats: PhotonStatistics,
                  cutoff: int = DEFAULT_CUTOFF) -> RunOutcome:
    """Exact outcome probabilities from the full Fock-space evolution.

    Coherent input is truncated at ``cutoff``; the dropped Poisson mass is
    reported as ``truncation_error`` and every probability is then exact up
    to it.
    """
    if int(cutoff) != cutoff or cutoff < 0:
        raise ValueError(f"cutoff must be a nonnegative integer, got {cutoff!r}")
    if cutoff > MAX_CUTOFF:
        raise ValueError(f"cutoff {cutoff} exceeds the supported maximum {MAX_CUTOFF}")
    weights, dropped = _sector_weights(stats, int(cutoff))
    state = FockSpaceState.zone0(np.sqrt(weights), int(cutoff))

    leaked = 0.0
    peak = 0.0
    for m in range(params.n_rotations):
        state.apply_beam_splitter((0, 1), params.theta_m)
        if m >= params.n_chains:
            continue
        for _ in range(params.N):
            state.apply_beam_splitter((1, 2), params.theta_n)
            kept = state.norm2()
            if kept > 0:
                peak = max(peak, state.channel_photons() / kept)
            if params.s == 1:
                leaked += state.project_channel_vacuum()
        if params.s == 0:
            leaked += state.project_channel_vacuum()

    only0 = only1 = both = none = 0.0
    for n, a in enumerate(state.sectors):
        sq = a * a
        if n == 0:
            none += float(sq[0, 0])
            continue
        only0 += float(sq[n, 0])
        only1 += float(sq[0, n])
        both += float(np.sum(sq[1:, 1:]))
    p = only0 + only1 + both + none
    s = params.s
    hit = (only1 if s == 1 else only0) + both
    f_click = hit / p if p > 0 else 0.0
    if params.scheme is Scheme.SLAZ:
        p_success = only1 if s == 1 else only0
    else:
        p_success = hit
    return RunOutcome(
        scheme=params.scheme,
        signal=s,
        prob_only_d0=only0,
        prob_only_d1=only1,
        prob_both=both,
        prob_none=none,
        prob_leak=leaked,
        log_p_counterfactual=math.log(p) if p > 0 else -math.inf,
        f_click=f_click,
        p_success=p_success,
        max_channel_occupancy=peak,
        final_amplitudes=None,
        truncation_error=dropped,
    )


OUTCOME_CLASSES = ("only_d0", "only_d1", "channel_leak", "other")


@dataclass(frozen=True)
class ClickTally:
    shots: int
    seed: int
    only_d0: int
    only_d1: int
    channel_leak: int
    other: int

    def __post_init__(self):
        if self.only_d0 + self.only_d1 + self.channel_leak + self.other != self.shots:
            raise ValueError("tally counts must sum to the number of shots")

    def counts(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in OUTCOME_CLASSES}

    def frequencies(self) -> dict[str, float]:
        return {name: c / self.shots for name, c in self.counts().items()}


def engine_class_probabilities(outcome: RunOutcome) -> dict[str, float]:
    """Engine probabilities of the four Monte Carlo outcome classes."""
    return {
        "only_d0": outcome.prob_only_d0,
        "only_d1": outcome.prob_only_d1,
        "channel_leak": outcome.prob_leak,
        "other": outcome.other_mass,
    }


def _sample_photons(stats: PhotonStatistics, shots: int, rng: np.random.Generator) -> np.ndarray:
    if stats.kind is StatisticsKind.FOCK:
        return np.full(shots, stats.photons, dtype=np.int64)
    if stats.kind is StatisticsKind.COHERENT:
        return rng.poisson(stats.mean_photons, shots).astype(np.int64)
    w = np.asarray(stats.weights)
    return rng.choice(w.size, size=shots, p=w / w.sum()).astype(np.int64)


def monte_carlo_clicks(params: ProtocolParams, stats: PhotonStatistics, shots: int,
                       seed: int, backend: str | None = None) -> ClickTally:
    """Sample ``shots`` independent detector records.

    Photons act independently because the multiphoton state stays a
    symmetric product of identical single-photon states. Within one inner
    chain the per-projection leak chances compose to a single chance per
    chain, so each surviving photon is thinned once per chain.
    """
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    rng = np.random.default_rng(seed)
    evo = kernels.evolve(params.theta_m, params.theta_n, params.n_rotations, params.n_chains,
                         params.N, params.s, backend=backend)
    alive = _sample_photons(stats, int(shots), rng)
    leaked = np.zeros(alive.size, dtype=bool)

    norm = 1.0
    for lost in evo.chain_leak:
        q = min(1.0, max(0.0, lost / norm)) if norm > 0 else 0.0
        norm -= lost
        if q == 0.0:
            continue
        hits = rng.binomial(alive, q)
        leaked |= hits > 0
        alive -= hits

    g0, g1 = evo.beta0**2, evo.beta1**2
    share0 = g0 / (g0 + g1) if g0 + g1 > 0 else 0.0
    n0 = rng.binomial(alive, share0)
    n1 = alive - n0

    only0 = ~leaked & (n0 > 0) & (n1 == 0)
    only1 = ~leaked & (n1 > 0) & (n0 == 0)
    n_leak = int(leaked.sum())
    c0, c1 = int(only0.sum()), int(only1.sum())
    return ClickTally(int(shots), int(seed), c0, c1, n_leak, int(shots) - c0 - c1 - n_leak)


def within_binomial_bounds(tally: ClickTally, outcome: RunOutcome, sigmas: float = 3.0) -> dict[str, bool]:
    """Per class: is the sampled frequency within ``sigmas`` binomial standard errors?"""
    freqs = tally.frequencies()
    out = {}
    for name, p in engine_class_probabilities(outcome).items():
        p = min(1.0, max(0.0, p))
        bound = sigmas * math.sqrt(p * (1 - p) / tally.shots)
        out[name] = abs(freqs[name] - p) <= bound + 1e-15
    return out
