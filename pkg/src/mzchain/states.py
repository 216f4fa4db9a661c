"""Three-zone amplitude states, beam splitters, vacuum projection and photon statistics.

Every multiphoton state reachable in the chained interferometer is a symmetric
product ``(b0 a0^+ + b1 a1^+ + b2 a2^+)^v / sqrt(v!)|0,0,0>`` (or the coherent
analogue), so the single-excitation amplitude triple carries the full dynamics.
Amplitudes are kept unnormalized after a vacuum projection; survival
probabilities are read off the norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats as _sps

__all__ = [
    "ModeAmplitudes",
    "StatisticsKind",
    "PhotonStatistics",
    "TruncatedStatistics",
    "beam_splitter_apply",
    "collapse_vacuum",
    "truncate_statistics",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 1e-12
_NORM_SLACK = 1e-12


@dataclass(frozen=True)
class ModeAmplitudes:
    """Real single-excitation amplitudes in Zones 0, 1 and 2 (Zone 2 is the channel)."""

    beta0: float
    beta1: float
    beta2: float = 0.0

    def __post_init__(self):
        if self.norm2() > 1.0 + _NORM_SLACK:
            raise ValueError(f"amplitude norm {self.norm2()!r} exceeds 1")

    @classmethod
    def input_port(cls) -> ModeAmplitudes:
        return cls(1.0, 0.0, 0.0)

    def __getitem__(self, mode: int) -> float:
        return (self.beta0, self.beta1, self.beta2)[mode]

    def as_array(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2])

    def norm2(self) -> float:
        return self.beta0 * self.beta0 + self.beta1 * self.beta1 + self.beta2 * self.beta2


def _replace(state: ModeAmplitudes, values: dict[int, float]) -> ModeAmplitudes:
    b = [state.beta0, state.beta1, state.beta2]
    for k, v in values.items():
        b[k] = v
    return ModeAmplitudes(*b)


def beam_splitter_apply(state: ModeAmplitudes, pair: tuple[int, int], theta: float) -> ModeAmplitudes:
    """Mix two adjacent zones with reflectivity ``cos(theta)**2``.

    ``pair=(a, b)`` follows the creation-operator map
    ``a^+ -> a^+ cos + b^+ sin`` and ``b^+ -> b^+ cos - a^+ sin``.
    """
    if tuple(pair) not in ((0, 1), (1, 2)):
        raise ValueError(f"beam splitter pair must be (0, 1) or (1, 2), got {pair!r}")
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    a, b = pair
    # exact full transfer; cos(pi/2) would round to 6e-17
    c, s = (0.0, 1.0) if theta == math.pi / 2 else (math.cos(theta), math.sin(theta))
    ba, bb = state[a], state[b]
    return _replace(state, {a: ba * c - bb * s, b: ba * s + bb * c})


def collapse_vacuum(state: ModeAmplitudes, mode: int) -> tuple[ModeAmplitudes, float]:
    """Project ``mode`` onto vacuum without renormalizing.

    Returns the projected state and the removed single-photon weight
    ``beta_mode**2``.
    """
    if mode not in (0, 1, 2):
        raise ValueError(f"mode must be 0, 1 or 2, got {mode!r}")
    leaked = state[mode] ** 2
    return _replace(state, {mode: 0.0}), leaked


class StatisticsKind(str, Enum):
    FOCK = "fock"
    COHERENT = "coherent"
    ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class PhotonStatistics:
    """Photon-number distribution of the light entering Zone 0.

    Build instances with :meth:`fock`, :meth:`coherent` or :meth:`arbitrary`.
    """

    kind: StatisticsKind
    photons: int = 0
    mean_photons: float = 0.0
    weights: tuple[float, ...] = ()

    @classmethod
    def fock(cls, v: int) -> PhotonStatistics:
        if int(v) != v or v < 0:
            raise ValueError(f"Fock photon number must be a nonnegative integer, got {v!r}")
        return cls(StatisticsKind.FOCK, photons=int(v), mean_photons=float(v))

    @classmethod
    def coherent(cls, alpha: complex | float) -> PhotonStatistics:
        """Coherent state; a real argument is the mean photon number ``|alpha|**2``.

        Pass a complex ``alpha`` to give the field amplitude instead; only its
        modulus matters since a global phase never reaches a click probability.
        """
        if isinstance(alpha, complex):
            mean = abs(alpha) ** 2
        else:
            mean = float(alpha)
        if not math.isfinite(mean) or mean < 0:
            raise ValueError(f"mean photon number must be finite and nonnegative, got {alpha!r}")
        return cls(StatisticsKind.COHERENT, mean_photons=mean)

    @classmethod
    def arbitrary(cls, weights) -> PhotonStatistics:
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
        mean = float(np.dot(np.arange(w.size), w))
        return cls(StatisticsKind.ARBITRARY, mean_photons=mean, weights=tuple(w.tolist()))

    @property
    def mean(self) -> float:
        return self.mean_photons

    def vacuum_weight(self) -> float:
        if self.kind is StatisticsKind.FOCK:
            return 1.0 if self.photons == 0 else 0.0
        if self.kind is StatisticsKind.COHERENT:
            return math.exp(-self.mean_photons)
        return self.weights[0]

    def describe(self) -> str:
        if self.kind is StatisticsKind.FOCK:
            return f"Fock({self.photons})"
        if self.kind is StatisticsKind.COHERENT:
            return f"Coherent({self.mean_photons:g})"
        return f"Arbitrary(mean={self.mean_photons:g}, support={len(self.weights)})"


@dataclass(frozen=True)
class TruncatedStatistics:
    weights: np.ndarray
    cutoff: int
    tail_mass: float

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.weights.size), self.weights))

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.cutoff + 1)


def _poisson_weighted_tail(mean: float, cutoff: int) -> float:
    # sum_{v > cutoff} v p(v) = mean * P(X >= cutoff)
    return mean * float(_sps.poisson.sf(cutoff - 1, mean))


def truncate_statistics(stats: PhotonStatistics, epsilon: float = DEFAULT_EPSILON) -> TruncatedStatistics:
    """Cut the distribution at the smallest ``v_c`` whose photon-weighted tail is below ``epsilon``."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")

    if stats.kind is StatisticsKind.FOCK:
        w = np.zeros(stats.photons + 1)
        w[-1] = 1.0
        return TruncatedStatistics(w, stats.photons, 0.0)

    if stats.kind is StatisticsKind.COHERENT:
        mean = stats.mean_photons
        if not math.isfinite(mean) or mean < 0:
            raise ValueError("coherent mean photon number must be finite and nonnegative")
        if mean == 0.0:
            return TruncatedStatistics(np.array([1.0]), 0, 0.0)
        cutoff = max(0, int(math.floor(mean)))
        while _poisson_weighted_tail(mean, cutoff) >= epsilon:
            cutoff += 1
        # step back down in case floor(mean) already overshoots
        while cutoff > 0 and _poisson_weighted_tail(mean, cutoff - 1) < epsilon:
            cutoff -= 1
        w = _sps.poisson.pmf(np.arange(cutoff + 1), mean)
        return TruncatedStatistics(w, cutoff, _poisson_weighted_tail(mean, cutoff))

    w = np.asarray(stats.weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0):
        raise ValueError("arbitrary weights are not a normalized distribution")
    v = np.arange(w.size)
    # tails[k] = sum_{v > k} v w_v
    tails = np.concatenate([np.cumsum((v * w)[::-1])[::-1][1:], [0.0]])
    cutoff = int(np.argmax(tails < epsilon))
    return TruncatedStatistics(w[: cutoff + 1].copy(), cutoff, float(tails[cutoff]))
