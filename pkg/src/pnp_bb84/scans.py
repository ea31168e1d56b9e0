"""Distance scans and threshold solvers reproducing the headline results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .optimize import OptimizationProblem, OptimizationResult, maximize
from .params import BoundConventions, PhysicalParams, Scenario
from .rates import ProtocolPoint, RateBreakdown

DEFAULT_THRESHOLD = 1e-9     # positivity convention for the maximal distance
_L_CAP_KM = 200.0            # coarse-march ceiling for the distance solver
_L_COARSE_STEP_KM = 10.0
_L_RESOLUTION_KM = 0.1
_NA_LOG_RANGE = (6.0, 18.0)  # pulse-count threshold search, log10
_NA_LOG_RESOLUTION = 0.05
_MONOTONE_SLACK = 1.02       # optimizer noise allowed before flagging non-monotone


class NonMonotoneRateError(RuntimeError):
    """The optimized rate increased with distance beyond optimizer noise."""


class ThresholdOutsideRangeError(RuntimeError):
    """No pulse-count threshold inside the search range."""


@dataclass(frozen=True)
class ScanRecord:
    """One row of a distance or pulse-count scan."""

    scenario: Scenario
    distance_km: float
    n_pulses: float
    rate: float
    no_key: bool
    point: ProtocolPoint
    breakdown: RateBreakdown

    @property
    def mu(self) -> float:
        return self.breakdown.mu

    @property
    def mu_decoy(self) -> Optional[float]:
        return self.breakdown.mu_decoy

    @property
    def sample_fraction(self) -> Optional[float]:
        """Sacrificed fraction of the sifted key used for error estimation."""
        if self.point.m_e is None:
            return None
        return self.point.m_e / self.breakdown.sifted

    @property
    def key_length(self) -> float:
        return self.rate * self.n_pulses


@dataclass
class _WarmChain:
    """Keeps the best points found so far, keyed for nearest-neighbour reuse."""

    cache: dict[float, ProtocolPoint] = field(default_factory=dict)

    def warm_starts(self, key: float, limit: int = 2) -> tuple[ProtocolPoint, ...]:
        nearest = sorted(self.cache, key=lambda k: abs(k - key))[:limit]
        return tuple(self.cache[k] for k in nearest)

    def record(self, key: float, result: OptimizationResult) -> None:
        if result.best_point is not None:
            self.cache[key] = result.best_point


def _optimize_at(scenario: Scenario, distance_km: float, n_pulses: float,
                 phys: PhysicalParams, conventions: BoundConventions,
                 seed: int, n_starts: int,
                 warm: tuple[ProtocolPoint, ...]) -> OptimizationResult:
    problem = OptimizationProblem(
        scenario=scenario, distance_km=distance_km, n_pulses=n_pulses,
        phys=phys, conventions=conventions, seed=seed, n_starts=n_starts,
        warm_starts=warm)
    return maximize(problem)


def scan_distance(scenario: Scenario, n_pulses: float,
                  l_grid: Sequence[float],
                  phys: PhysicalParams = PhysicalParams(),
                  conventions: BoundConventions = BoundConventions(),
                  seed: int = 0, n_starts: int = 16) -> list[ScanRecord]:
    """Optimize the rate at every grid distance, warm-starting along the scan.

    Records with non-positive rate are flagged ``no_key`` but still emitted so
    cutoff behaviour stays visible.
    """
    grid = list(l_grid)
    if not grid:
        raise ValueError("l_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("l_grid must be strictly increasing")
    chain = _WarmChain()
    records = []
    for dist in grid:
        result = _optimize_at(scenario, dist, n_pulses, phys, conventions,
                              seed, n_starts, chain.warm_starts(dist))
        chain.record(dist, result)
        records.append(ScanRecord(
            scenario=scenario, distance_km=dist, n_pulses=n_pulses,
            rate=result.best_rate, no_key=result.best_rate <= 0.0,
            point=result.best_point, breakdown=result.breakdown))
    return records


def solve_lmax_profile(rate_at: Callable[[float], float],
                       rate_threshold: float,
                       l_cap: float = _L_CAP_KM,
                       coarse_step: float = _L_COARSE_STEP_KM,
                       resolution: float = _L_RESOLUTION_KM,
                       monotone_guard: bool = True) -> float:
    """Largest distance with ``rate_at(L) > rate_threshold``.

    Assumes a non-increasing profile (verified on the coarse bracketing grid
    up to optimizer noise) and refines by bisection to ``resolution`` km.
    """
    r0 = rate_at(0.0)
    if r0 <= rate_threshold:
        return 0.0
    lo, lo_rate = 0.0, r0
    hi = None
    dist = coarse_step
    while dist <= l_cap + 1e-9:
        r = rate_at(dist)
        if monotone_guard and r > lo_rate * _MONOTONE_SLACK and r > rate_threshold:
            raise NonMonotoneRateError(
                f"optimized rate rose from {lo_rate:.3e} at {lo} km to "
                f"{r:.3e} at {dist} km")
        if r <= rate_threshold:
            hi = dist
            break
        lo, lo_rate = dist, r
        dist += coarse_step
    if hi is None:
        return l_cap
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if rate_at(mid) > rate_threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_lmax(scenario: Scenario, n_pulses: float,
              rate_threshold: float = DEFAULT_THRESHOLD,
              phys: PhysicalParams = PhysicalParams(),
              conventions: BoundConventions = BoundConventions(),
              seed: int = 0, n_starts: int = 16,
              l_cap: float = _L_CAP_KM) -> float:
    """Maximal secure distance at the given positivity threshold, in km."""
    chain = _WarmChain()

    def rate_at(dist: float) -> float:
        result = _optimize_at(scenario, dist, n_pulses, phys, conventions,
                              seed, n_starts, chain.warm_starts(dist))
        chain.record(dist, result)
        return result.best_rate

    return solve_lmax_profile(rate_at, rate_threshold, l_cap=l_cap)


def find_na_threshold(scenario: Scenario,
                      rate_threshold: float = DEFAULT_THRESHOLD,
                      phys: PhysicalParams = PhysicalParams(),
                      conventions: BoundConventions = BoundConventions(),
                      seed: int = 0, n_starts: int = 16) -> float:
    """Smallest pulse count with a positive maximal secure distance.

    Since the optimized rate is non-increasing in distance, a positive
    maximal distance is equivalent to the optimized rate at L = 0 exceeding
    the threshold; the search bisects that condition in log pulse count.
    """
    if not scenario.finite:
        raise ValueError("pulse-count threshold applies to finite scenarios only")
    lo_log, hi_log = _NA_LOG_RANGE
    chain = _WarmChain()

    def positive(log_na: float) -> bool:
        result = _optimize_at(scenario, 0.0, 10.0 ** log_na, phys, conventions,
                              seed, n_starts, chain.warm_starts(log_na))
        chain.record(log_na, result)
        return result.best_rate > rate_threshold

    if not positive(hi_log):
        raise ThresholdOutsideRangeError(
            f"no positive rate up to n_pulses = 1e{hi_log:.0f}")
    if positive(lo_log):
        raise ThresholdOutsideRangeError(
            f"threshold below the search floor n_pulses = 1e{lo_log:.0f}")
    while hi_log - lo_log > _NA_LOG_RESOLUTION:
        mid = 0.5 * (lo_log + hi_log)
        if positive(mid):
            hi_log = mid
        else:
            lo_log = mid
    return 10.0 ** (0.5 * (lo_log + hi_log))


# --- figure datasets ------------------------------------------------------------

FIG2_NA = (5e10, 1e11, 1e12, 1e14)
FIG5_NA = (5e10, 1e11, 1e12, 1e14, 1e16)
FIG3_LOG_NA_STEP = 0.25

_FIGURE_IDS = ("fig2", "fig3", "fig5")


def _default_l_grid(scenario: Scenario) -> list[float]:
    top = 44.0 if not scenario.uses_decoy else 130.0
    steps = int(round(top / 2.0))
    return [2.0 * i for i in range(steps + 1)]


def figure_datasets(figure_id: str, out_dir,
                    phys: PhysicalParams = PhysicalParams(),
                    conventions: BoundConventions = BoundConventions(),
                    seed: int = 0, n_starts: int = 16,
                    l_grid: Optional[Sequence[float]] = None,
                    na_list: Optional[Sequence[float]] = None,
                    threshold: float = DEFAULT_THRESHOLD) -> dict[str, str]:
    """Write the CSV series behind one of the summary figures.

    Returns a mapping from dataset name to the file path written.  The
    default grids cover the full benchmark curves and take a while; pass
    ``l_grid``/``na_list`` to restrict them.
    """
    from . import io_csv
    from pathlib import Path

    if figure_id not in _FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}; expected one of "
                         f"{_FIGURE_IDS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, str] = {}

    if figure_id in ("fig2", "fig5"):
        decoy = figure_id == "fig5"
        fin_sc = Scenario.DECOY_FINITE if decoy else Scenario.NO_DECOY_FINITE
        inf_sc = Scenario.DECOY_INFINITE if decoy else Scenario.NO_DECOY_INFINITE
        nas = list(na_list if na_list is not None
                   else (FIG5_NA if decoy else FIG2_NA))
        grid = list(l_grid if l_grid is not None else _default_l_grid(fin_sc))
        all_records: list[ScanRecord] = []
        for na in nas:
            all_records.extend(scan_distance(fin_sc, na, grid, phys,
                                             conventions, seed, n_starts))
        all_records.extend(scan_distance(inf_sc, math.inf, grid, phys,
                                         conventions, seed, n_starts))
        rate_path = out / f"{figure_id}_rate.csv"
        io_csv.write_records(rate_path, all_records)
        written["rate"] = str(rate_path)

        finite_records = [r for r in all_records if r.scenario is fin_sc]
        frac_path = out / f"{figure_id}_sampling_fraction.csv"
        io_csv.write_sampling_fractions(frac_path, finite_records)
        written["sampling_fraction"] = str(frac_path)

        mu_path = out / f"{figure_id}_mean_photon.csv"
        mu_records = [r for r in all_records
                      if r.scenario is inf_sc or r.n_pulses == nas[0]]
        io_csv.write_mean_photon(mu_path, mu_records)
        written["mean_photon"] = str(mu_path)

        if decoy:
            prob_path = out / f"{figure_id}_class_probabilities.csv"
            io_csv.write_class_probabilities(prob_path, finite_records)
            written["class_probabilities"] = str(prob_path)
        return written

    # fig3: maximal distance vs log pulse count, plus the asymptotes
    nas = list(na_list) if na_list is not None else [
        10.0 ** (8.0 + FIG3_LOG_NA_STEP * i)
        for i in range(int((16.0 - 8.0) / FIG3_LOG_NA_STEP) + 1)]
    rows = []
    for scenario in (Scenario.NO_DECOY_FINITE, Scenario.DECOY_FINITE):
        for na in nas:
            lmax = find_lmax(scenario, na, threshold, phys, conventions,
                             seed, n_starts)
            rows.append((scenario, na, lmax))
    lmax_path = out / "fig3_lmax.csv"
    io_csv.write_lmax_rows(lmax_path, rows, threshold)
    written["lmax"] = str(lmax_path)

    asym = [(sc, math.inf,
             find_lmax(sc, math.inf, threshold, phys, conventions, seed,
                       n_starts))
            for sc in (Scenario.NO_DECOY_INFINITE, Scenario.DECOY_INFINITE)]
    asym_path = out / "fig3_asymptotes.csv"
    io_csv.write_lmax_rows(asym_path, asym, threshold)
    written["asymptotes"] = str(asym_path)
    return written
