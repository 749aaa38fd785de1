"""Parameter scans over scalar PL metrics, with golden-section refinement.

Sweep points are independent; they may be evaluated by a thread pool
(PLANAREMIT_THREADS), and the result table is gathered by index so the
output is bit-identical regardless of parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, set_parameter
from .enhance import band_average, excitation_gain, pl_enhancement
from .dipole import emission, purcell_factor

__all__ = [
    "METRICS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "BoundaryOptimumError",
    "run_sweep",
    "refine_optimum",
]


class BoundaryOptimumError(RuntimeError):
    """The grid argmax sits on an endpoint; refinement has no bracket."""


@dataclass(frozen=True)
class SweepSpec:
    parameter_path: str
    values: tuple
    metric: str

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")
        object.__setattr__(self, "values", vals)
        if self.metric not in METRICS:
            raise ValueError(
                f"unknown metric {self.metric!r}; available: {sorted(METRICS)}"
            )

    @classmethod
    def from_range(cls, parameter_path, start, stop, step, metric):
        if step <= 0:
            raise ValueError("step must be > 0")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return cls(parameter_path, tuple(start + i * step for i in range(n)), metric)


@dataclass(frozen=True)
class SweepRow:
    parameter_value: float
    metric_value: float | None
    breakdown: dict = field(default_factory=dict)
    failed: bool = False
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    argmax_value: float | None
    refined_optimum: float | None = None

    @property
    def failures(self):
        return [r for r in self.rows if r.failed]


def _metric_band_avg_purcell(config: RunConfig):
    f = band_average(
        lambda wl: purcell_factor(config.stack, config.emitter, wl,
                                  quad=config.quad),
        config.weight, config.n_samples)
    return f, {"band_avg_purcell": f}


def _metric_total_gain(config: RunConfig):
    rep = pl_enhancement(
        config.stack, config.ref_stack, config.emitter, config.weight,
        NA=config.na, ref_emitter=config.ref_emitter,
        pump_wavelength_nm=config.pump_wavelength_nm,
        n_samples=config.n_samples, quad=config.quad)
    return rep.total_gain, {
        "total_gain": rep.total_gain,
        "excitation_gain": rep.excitation_gain,
        "band_avg_purcell": rep.band_avg_purcell,
        "band_avg_collection": rep.band_avg_collection,
        "effective_qe_ratio": rep.effective_qe_ratio,
    }


def _metric_collection(config: RunConfig):
    c = band_average(
        lambda wl: emission(config.stack, config.emitter, wl, NA=config.na,
                            quad=config.quad).collection_eta,
        config.weight, config.n_samples)
    return c, {"band_avg_collection": c}


def _metric_excitation_gain(config: RunConfig):
    g = excitation_gain(config.stack, config.ref_stack, config.emitter,
                        config.pump_wavelength_nm, config.ref_emitter)
    return g, {"excitation_gain": g}


METRICS = {
    "band_avg_purcell": _metric_band_avg_purcell,
    "total_gain": _metric_total_gain,
    "collection": _metric_collection,
    "excitation_gain": _metric_excitation_gain,
}


def evaluate_metric(config: RunConfig, spec: SweepSpec, value: float) -> float:
    cfg = set_parameter(config, spec.parameter_path, value)
    metric_value, _ = METRICS[spec.metric](cfg)
    return metric_value


def _thread_count() -> int:
    raw = os.environ.get("PLANAREMIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(spec: SweepSpec, base_config: RunConfig) -> SweepResult:
    """One row per value; failed points are recorded, not fatal."""

    def point(value: float) -> SweepRow:
        try:
            cfg = set_parameter(base_config, spec.parameter_path, value)
            metric_value, breakdown = METRICS[spec.metric](cfg)
            return SweepRow(value, metric_value, breakdown)
        except Exception as exc:  # degrade gracefully on long scans
            return SweepRow(value, None, {}, failed=True, error=str(exc))

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, spec.values))
    else:
        rows = [point(v) for v in spec.values]

    best = None
    for row in rows:
        if row.failed:
            continue
        # ties break toward the smaller parameter value (rows are ordered)
        if best is None or row.metric_value > best.metric_value:
            best = row
    return SweepResult(spec=spec, rows=rows,
                       argmax_value=None if best is None else best.parameter_value)


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def refine_optimum(result: SweepResult, evaluator, tolerance: float = 0.5) -> float:
    """Golden-section maximization bracketing the grid argmax.

    ``evaluator`` maps parameter value -> metric value.  Raises
    BoundaryOptimumError when the argmax is a sweep endpoint.
    """
    ok = [r for r in result.rows if not r.failed]
    if result.argmax_value is None or len(ok) < 3:
        raise BoundaryOptimumError("sweep has no interior optimum to refine")
    values = [r.parameter_value for r in ok]
    i = values.index(result.argmax_value)
    if i == 0 or i == len(values) - 1:
        raise BoundaryOptimumError(
            f"grid argmax {result.argmax_value} is a sweep endpoint; "
            "extend the scan range"
        )
    a, b = values[i - 1], values[i + 1]
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = evaluator(x1), evaluator(x2)
    while b - a > tolerance:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = evaluator(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = evaluator(x1)
    refined = 0.5 * (a + b)
    result.refined_optimum = refined
    return refined
