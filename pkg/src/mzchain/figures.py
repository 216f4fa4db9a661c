"""Figure and table generation as CSV.

Every generator returns a header tuple and a list of rows in grid order.
Numbers are written with 12 significant digits, so repeated runs with the
same arguments give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, optimizer
from .engine import ProtocolParams, run
from .states import PhotonStatistics

FIGURES = ("fig1b", "fig1c", "fig1d", "figD1", "fig1d-table")

HEADERS = {
    "fig1b": ("M", "N", "P"),
    "fig1c": ("M", "N", "P"),
    "fig1d": ("Ptilde", "log10T_approx", "log10T_exact"),
    "figD1": ("Pprime", "log10T_baseline", "log10T_D34", "log10T_eq8"),
    "fig1d-table": ("Ptilde", "M", "N", "mc", "T"),
}

FIG1D_MC_RANGE = (1, 300)  # the 0.95 target needs m_c = 75


def grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded so 0.05 steps print cleanly."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def int_grid(start: int, stop: int, step: int) -> list[int]:
    values = list(range(int(start), int(stop) + 1, int(step)))
    if not values:
        raise ValueError("empty integer grid")
    return values


@dataclass
class SweepSpec:
    name: str
    M_values: list[int] = field(default_factory=lambda: int_grid(50, 500, 50))
    N_values: list[int] = field(default_factory=lambda: int_grid(5000, 50000, 5000))
    P_values: list[float] = field(default_factory=lambda: grid(0.5, 0.95, 0.05))
    mean: float | None = None
    k_bar: float = 2.0
    source: str = "engine"  # "engine" or "analytic" for fig1b/fig1c
    m_c_range: tuple[int, int] = FIG1D_MC_RANGE
    workers: int = 1

    def __post_init__(self):
        if self.name not in FIGURES:
            raise ValueError(f"unknown figure {self.name!r}; choose from {', '.join(FIGURES)}")
        if self.source not in ("engine", "analytic"):
            raise ValueError(f"source must be 'engine' or 'analytic', got {self.source!r}")
        if not (self.M_values and self.N_values and self.P_values):
            raise ValueError("sweep ranges must be nonempty")
        if self.mean is None:
            self.mean = 10.0 if self.name in ("fig1b", "fig1c") else 200.0


def fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def _slaz_point(args):
    M, N, mean, s, source = args
    stats = PhotonStatistics.coherent(mean)
    if source == "analytic":
        return analytic.approx_probs_slaz(M, N, stats).linearized[s]
    return run(ProtocolParams.slaz(M, N, s), stats).p_success


def _pmap(fn, items, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def slaz_grid_rows(spec: SweepSpec, s: int) -> list[tuple]:
    points = [(M, N) for M in spec.M_values for N in spec.N_values]
    values = _pmap(_slaz_point, [(M, N, spec.mean, s, spec.source) for M, N in points], spec.workers)
    return [(M, N, p) for (M, N), p in zip(points, values)]


def _fig1d_point(args):
    P, mean, m_c_range = args
    approx = optimizer.minimize_T_approx(P, P, mean, verify=False)
    exact = optimizer.minimize_T_exact(P, mean, m_c_range=m_c_range)
    return approx, exact


def fig1d_results(spec: SweepSpec):
    return _pmap(_fig1d_point, [(P, spec.mean, spec.m_c_range) for P in spec.P_values], spec.workers)


def _figD1_point(args):
    P, mean, k_bar = args
    base = optimizer.baseline_min_T_exact(P)
    eq8 = optimizer.minimize_T_approx(P, P, mean, verify=False)
    return base.log10_T, analytic.log10_T_counterfactual_only(k_bar, P), eq8.log10_T


def rows_for(spec: SweepSpec) -> list[tuple]:
    if spec.name == "fig1b":
        return slaz_grid_rows(spec, 0)
    if spec.name == "fig1c":
        return slaz_grid_rows(spec, 1)
    if spec.name in ("fig1d", "fig1d-table"):
        results = fig1d_results(spec)
        if spec.name == "fig1d":
            return [(P, a.log10_T, e.log10_T) for P, (a, e) in zip(spec.P_values, results)]
        return [(P, e.M, e.N, e.m_c, e.T) for P, (_, e) in zip(spec.P_values, results)]
    values = _pmap(_figD1_point, [(P, spec.mean, spec.k_bar) for P in spec.P_values], spec.workers)
    return [(P, *v) for P, v in zip(spec.P_values, values)]


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_figure(spec: SweepSpec, path: str | Path) -> Path:
    path = Path(path)
    text = to_csv(HEADERS[spec.name], rows_for(spec))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
