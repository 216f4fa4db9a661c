"""Minimum total-cycle-number searches."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import analytic, kernels
from .engine import ProtocolParams, run
from .states import PhotonStatistics

DEFAULT_MC_MAX = 50
DEFAULT_M_MAX = 5000
DEFAULT_N_MAX = 100_000


@dataclass(frozen=True)
class OptimizationResult:
    mode: str  # "approx", "exact" or "baseline"
    feasible: bool
    m_c: int | None
    M: int | None
    N: int | None
    T: int | None
    k_bar: float | None
    achieved_p0: float | None
    achieved_p1: float | None

    @property
    def log10_T(self) -> float:
        return math.log10(self.T) if self.T else math.nan

    def as_dict(self) -> dict:
        return asdict(self)


def _engine_pair(mean: float, m_c: int, M: int, N: int) -> tuple[float, float]:
    stats = PhotonStatistics.coherent(mean)
    p0 = run(ProtocolParams.modified(M, N, m_c, 0), stats).p_success
    p1 = run(ProtocolParams.modified(M, N, m_c, 1), stats).p_success
    return p0, p1


def _k_bar(mean: float, m_c: int, M: int) -> float:
    return mean * math.sin(m_c * math.pi / (2 * M)) ** 2


def minimize_T_approx(target_p0: float, target_p1: float, mean: float,
                      m_c_max: int = 200, verify: bool = True) -> OptimizationResult:
    """Scan ``m_c`` with the first-order ``N(m_c)`` and ``M(m_c)`` design formulas.

    Real-valued ``M`` and ``N`` are rounded up. With ``verify`` the exact
    engine reports the probabilities reached at the rounded parameters.
    """
    if not (0 < target_p0 < 1 and 0 < target_p1 < 1):
        raise ValueError("targets must lie in (0, 1)")
    best = None
    for m_c in range(1, m_c_max + 1):
        N = analytic.design_N(target_p0, target_p1, m_c)
        if not math.isfinite(N):
            continue
        M = max(m_c, 2, math.ceil(analytic.design_M(target_p0, mean, m_c)))
        N = math.ceil(N)
        T = m_c * N
        if best is None or T < best[0]:
            best = (T, m_c, M, N)
    if best is None:
        return OptimizationResult("approx", False, None, None, None, None, None, None, None)
    T, m_c, M, N = best
    p0 = p1 = None
    if verify:
        p0, p1 = _engine_pair(mean, m_c, M, N)
    return OptimizationResult("approx", True, m_c, M, N, T, _k_bar(mean, m_c, M), p0, p1)


def _first_true(pred, lo: int, hi: int) -> int:
    """Smallest x in [lo, hi] with pred(x), assuming pred is monotone and pred(hi) holds."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def minimize_T_exact(target: float, mean: float, *, target_p1: float | None = None,
                     m_c_range: tuple[int, int] = (1, DEFAULT_MC_MAX),
                     M_min: int = 2, M_max: int = DEFAULT_M_MAX, N_max: int = DEFAULT_N_MAX,
                     backend: str | None = None) -> OptimizationResult:
    """Integer search for the smallest ``T = m_c N`` meeting both success targets.

    P~0 does not depend on N and grows with M, so each ``m_c`` starts at the
    smallest admissible M. For every M the smallest N meeting P~1 is found by
    bisection, capped by the best T found so far. Ties go to the smaller
    ``m_c`` and then the smaller M. Both probabilities must also be nonzero.
    """
    t0 = target
    t1 = target if target_p1 is None else target_p1
    lo_mc, hi_mc = m_c_range
    best = None  # (T, m_c, M, N)
    seen_p0 = seen_p1 = 0.0  # best probabilities seen, for infeasible reports

    def ok(p, t):
        return p >= t and p > 0.0

    for m_c in range(max(1, lo_mc), hi_mc + 1):
        if best is not None and m_c >= best[0]:
            break
        Ms = np.arange(max(2, m_c, M_min), M_max + 1)
        if Ms.size == 0:
            continue
        p0_all, _ = kernels.modified_coherent_pair(mean, m_c, Ms, 1, backend=backend)
        seen_p0 = max(seen_p0, float(p0_all.max()))
        good = (p0_all >= t0) & (p0_all > 0.0)
        if not good.any():
            continue
        # P~0 increases with M; keep the tail from the first admissible M
        first = int(np.argmax(good))
        Ms = Ms[first:]
        p0_all = p0_all[first:]
        N_hi = N_max if best is None else min(N_max, (best[0] - 1) // m_c)
        if N_hi < 1:
            continue
        _, p1_hi = kernels.modified_coherent_pair(mean, m_c, Ms, N_hi, backend=backend)
        seen_p1 = max(seen_p1, float(p1_hi.max()))
        for M in Ms[(p1_hi >= t1) & (p1_hi > 0.0)]:
            N_hi = N_max if best is None else min(N_max, (best[0] - 1) // m_c)
            if N_hi < 1:
                break

            def p1_at(N, M=M):
                return float(kernels.modified_coherent_pair(mean, m_c, M, N, backend=backend)[1])

            if not ok(p1_at(N_hi), t1):
                continue
            N = _first_true(lambda n: ok(p1_at(n), t1), 1, N_hi)
            T = m_c * N
            if best is None or T < best[0]:
                best = (T, m_c, int(M), N)

    if best is None:
        return OptimizationResult("exact", False, None, None, None, None, None, seen_p0, seen_p1)
    T, m_c, M, N = best
    p0, p1 = _engine_pair(mean, m_c, M, N)
    return OptimizationResult("exact", True, m_c, M, N, T, _k_bar(mean, m_c, M), p0, p1)


def minimize_T_at_k_bar(k_bar: float, target: float, mean: float,
                        N_max: int = 10**7) -> OptimizationResult:
    """Exact smallest N with the expected Zone-1 photon number held at ``k_bar``.

    ``m_c = round(-k_bar / ln P)`` and M follows from the small-angle P~0
    design formula, so only N is searched.
    """
    m_c = max(1, round(-k_bar / math.log(target)))
    M = max(m_c, 2, math.ceil(analytic.design_M(target, mean, m_c)))
    return minimize_T_exact(target, mean, m_c_range=(m_c, m_c), M_min=M, M_max=M, N_max=N_max)


def baseline_min_T(target: float, M_max: int = 100_000) -> OptimizationResult:
    """Smallest integer ``M' N'`` for a single photon in the original scheme.

    Uses the single-photon success probabilities ``1 - pi^2/4M'`` and
    ``1 - pi^2 M'/8N'``. For fixed M' the smallest N' is
    ``ceil(pi^2 M' / 8(1 - P))`` and that product grows with M', so the
    smallest admissible M' wins.
    """
    if not 0 < target < 1:
        return OptimizationResult("baseline", False, None, None, None, None, None, None, None)
    M1 = max(1, math.ceil(analytic.PI2 / (4 * (1 - target))))
    while analytic.baseline_probs(M1, 1)[0] < target:
        M1 += 1
    while M1 > 1 and analytic.baseline_probs(M1 - 1, 1)[0] >= target:
        M1 -= 1
    if M1 > M_max:
        return OptimizationResult("baseline", False, None, None, None, None, None, None, None)
    N1 = max(1, math.ceil(analytic.PI2 * M1 / (8 * (1 - target))))
    while analytic.baseline_probs(M1, N1)[1] < target:
        N1 += 1
    while N1 > 1 and analytic.baseline_probs(M1, N1 - 1)[1] >= target:
        N1 -= 1
    p0, p1 = analytic.baseline_probs(M1, N1)
    return OptimizationResult("baseline", True, None, M1, N1, M1 * N1, None, p0, p1)


def baseline_min_T_exact(target: float, M_max: int = 2000, N_max: int = 10**7,
                         backend: str | None = None) -> OptimizationResult:
    """Smallest ``M' N'`` for a single photon in the original scheme, no approximation.

    ``P'_0 = cos(pi/2M')**(2M')`` exactly; ``P'_1`` comes from the engine and
    the smallest N' for each M' is found by bisection.
    """
    if not 0 < target < 1:
        return OptimizationResult("baseline_exact", False, None, None, None, None, None, None, None)
    one = PhotonStatistics.fock(1)

    def p1(M, N):
        return run(ProtocolParams.slaz(M, N, 1), one, backend=backend).prob_only_d1

    best = None
    for M in range(2, M_max + 1):
        if best is not None and M >= best[0]:
            break
        if math.exp(2 * M * analytic._log_cos(math.pi / (2 * M))) < target:
            continue
        N_hi = N_max if best is None else min(N_max, (best[0] - 1) // M)
        if N_hi < 1 or p1(M, N_hi) < target:
            continue
        N = _first_true(lambda n: p1(M, n) >= target, 1, N_hi)
        if best is None or M * N < best[0]:
            best = (M * N, M, N)
    if best is None:
        return OptimizationResult("baseline_exact", False, None, None, None, None, None, None, None)
    T, M, N = best
    p0 = math.exp(2 * M * analytic._log_cos(math.pi / (2 * M)))
    return OptimizationResult("baseline_exact", True, None, M, N, T, None, p0, p1(M, N))
