"""Exhaustive search over the unit-energy 4-state unidimensional family."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .constellations import FourStateUDParams, build_four_state_ud
from .errors import ConfigurationError
from .rates import DEFAULT_RESOLUTION, RateReport, format_value, parse_resolution, secret_key_rate


@dataclass(frozen=True)
class SearchSpec:
    tau: float
    alpha1_min: float = 0.05
    alpha1_max: float = 0.9
    alpha1_steps: int = 64
    p1_min: float = 0.26
    p1_max: float = 0.49
    p1_steps: int = 64
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    refine: bool = False

    def __post_init__(self):
        ChannelParams(self.tau)
        parse_resolution(self.resolution)
        if self.alpha1_steps < 1 or self.p1_steps < 1:
            raise ConfigurationError("search grids need at least one step per axis")
        if not 0 < self.alpha1_min <= self.alpha1_max:
            raise ConfigurationError(
                f"alpha1 bounds must satisfy 0 < min <= max, got [{self.alpha1_min}, {self.alpha1_max}]"
            )
        if not 0.25 < self.p1_min <= self.p1_max < 0.5:
            raise ConfigurationError(
                f"p1 bounds must lie inside (0.25, 0.5) with min <= max, got [{self.p1_min}, {self.p1_max}]"
            )

    def with_tau(self, tau: float) -> "SearchSpec":
        return SearchSpec(
            tau, self.alpha1_min, self.alpha1_max, self.alpha1_steps,
            self.p1_min, self.p1_max, self.p1_steps, self.resolution, self.refine,
        )

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.alpha1_min, self.alpha1_max, self.alpha1_steps),
            np.linspace(self.p1_min, self.p1_max, self.p1_steps),
        )


@dataclass(frozen=True)
class GridPoint:
    alpha1: float
    p1: float
    stage: int
    report: RateReport | None = None
    reason: str | None = None

    @property
    def feasible(self) -> bool:
        return self.report is not None

    @property
    def skr_bits(self) -> float:
        return self.report.skr_bits if self.report is not None else -math.inf


def rank_key(point: GridPoint) -> tuple[float, float, float]:
    """Total order used for the argmax: higher K, then smaller alpha1, then smaller p1."""
    return (point.skr_bits, -point.alpha1, -point.p1)


def best_point(points) -> GridPoint:
    feasible = [pt for pt in points if pt.feasible]
    if not feasible:
        raise ConfigurationError("no feasible grid point")
    return max(feasible, key=rank_key)


@dataclass
class OptimizationResult:
    spec: SearchSpec
    params: FourStateUDParams
    report: RateReport
    table: list[GridPoint] = field(repr=False)

    @property
    def infeasible(self) -> list[GridPoint]:
        return [pt for pt in self.table if not pt.feasible]

    def summary(self) -> dict:
        return {
            "tau": self.spec.tau,
            "alpha1": self.params.alpha1,
            "alpha2": self.params.alpha2,
            "p1": self.params.p1,
            "p2": self.params.p2,
            "skr_bits": self.report.skr_bits,
            "mutual_information_bits": self.report.mutual_information_bits,
            "holevo_bits": self.report.holevo_bits,
        }


SUMMARY_FIELDS = ("tau", "alpha1", "alpha2", "p1", "p2", "skr_bits", "mutual_information_bits", "holevo_bits")
TABLE_FIELDS = (
    "stage", "alpha1", "p1", "alpha2", "feasible",
    "mutual_information_bits", "holevo_bits", "skr_bits", "reason",
)


def table_rows(result: OptimizationResult) -> list[list[str]]:
    rows = []
    for pt in result.table:
        if pt.feasible:
            r = pt.report
            vals = [pt.stage, pt.alpha1, pt.p1, FourStateUDParams(pt.alpha1, pt.p1).alpha2, True,
                    r.mutual_information_bits, r.holevo_bits, r.skr_bits, ""]
        else:
            vals = [pt.stage, pt.alpha1, pt.p1, "", False, "", "", "", pt.reason]
        rows.append([format_value(v) for v in vals])
    return rows


def _evaluate(args) -> GridPoint:
    alpha1, p1, stage, tau, resolution = args
    reason = FourStateUDParams.feasible(alpha1, p1)
    if reason is not None:
        return GridPoint(alpha1, p1, stage, reason=reason)
    c = build_four_state_ud(FourStateUDParams(alpha1, p1))
    return GridPoint(alpha1, p1, stage, report=secret_key_rate(c, ChannelParams(tau), resolution))


def _run(tasks, workers: int) -> list[GridPoint]:
    if workers <= 1:
        return [_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, tasks, chunksize=16))


def _refined_axis(center: float, step: float, lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(max(center - step, lo), min(center + step, hi), steps)


def optimize_four_state(spec: SearchSpec, workers: int = 1) -> OptimizationResult:
    """Maximize the key rate over the (alpha1, p1) grid of ``spec``.

    Every grid point lands in the returned table, infeasible ones with the
    violated constraint.  With ``spec.refine`` a second grid of the same size
    spans one coarse step either side of the coarse optimum.
    """
    a_axis, p_axis = spec.axes()
    tasks = [(float(a), float(p), 0, spec.tau, spec.resolution) for a in a_axis for p in p_axis]
    table = _run(tasks, workers)
    if not any(pt.feasible for pt in table):
        raise ConfigurationError(f"empty feasible set; first infeasibility: {table[0].reason}")

    if spec.refine:
        coarse = best_point(table)
        da = (spec.alpha1_max - spec.alpha1_min) / max(spec.alpha1_steps - 1, 1)
        dp = (spec.p1_max - spec.p1_min) / max(spec.p1_steps - 1, 1)
        a_fine = _refined_axis(coarse.alpha1, da, spec.alpha1_min, spec.alpha1_max, spec.alpha1_steps)
        p_fine = _refined_axis(coarse.p1, dp, spec.p1_min, spec.p1_max, spec.p1_steps)
        tasks = [(float(a), float(p), 1, spec.tau, spec.resolution) for a in a_fine for p in p_fine]
        table += _run(tasks, workers)

    best = best_point(table)
    return OptimizationResult(spec, FourStateUDParams(best.alpha1, best.p1), best.report, table)


def sweep_optimal(template: SearchSpec, taus, workers: int = 1) -> list[OptimizationResult]:
    """One search per transmittance, in the order given."""
    return [optimize_four_state(template.with_tau(float(t)), workers) for t in taus]
