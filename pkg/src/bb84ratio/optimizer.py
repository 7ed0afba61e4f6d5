"""Maximization of the key rates over the protocol choice ratios.

A coarse grid (step 1/64) seeds alternating coordinate-wise golden-section
refinement. The rate surface is smooth and empirically unimodal over
[0, 1/2]^2 for the parameter ranges of interest, so grid seeding plus local
refinement recovers the maximum; the grid also guards against boundary
maxima. Everything is deterministic, with ties broken toward smaller p1,
then smaller p2.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, KeyRateError
from .exponents import ErrorRates, ProtocolParams
from .numerics import DEFAULT_TOLERANCES, ToleranceConfig, _golden_section
from .rates import PhaseModel, RatePoint, rate_asymmetric, rate_symmetric

__all__ = [
    "COARSE_STEP",
    "OptimizationResult",
    "SweepFailure",
    "optimize_asymmetric",
    "optimize_symmetric",
    "sweep",
]

COARSE_STEP = 1.0 / 64.0
REFINEMENT_ROUNDS = 3
IMPROVEMENT_TOL = 1e-9


@dataclass(frozen=True)
class OptimizationResult:
    """Argmax ratios and best rate for one (q, C) point."""

    q: float
    C: float
    mode: str  # "asymmetric" | "symmetric"
    best: RatePoint
    argmax_p1: float
    argmax_p2: float
    coarse_grid_step: float
    refinement_iters: int


@dataclass(frozen=True)
class SweepFailure:
    """A sweep point whose evaluation raised; the sweep itself continues."""

    q: float
    C: float
    mode: str
    error: str


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 0.5:
        raise DomainError(f"q={q} must lie strictly inside (0, 1/2)")
    return q


def _coarse_axis() -> list[float]:
    return [i * COARSE_STEP for i in range(33)]  # 0, 1/64, ..., 1/2


def _clip_bracket(center: float) -> tuple[float, float]:
    lo = max(0.0, center - COARSE_STEP)
    hi = min(0.5, center + COARSE_STEP)
    return lo, hi


def optimize_asymmetric(
    q: float,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> OptimizationResult:
    """Maximize the asymmetric rate over (p1, p2) in [0, 1/2]^2 at q+ = qx = q."""
    q = _check_q(q)
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    rates = ErrorRates(q_plus=q, q_times=q)

    def evaluate(p1: float, p2: float) -> RatePoint:
        return rate_asymmetric(ProtocolParams(p1=p1, p2=p2), rates, C, cfg)

    # Ascending lexicographic scan with strict improvement keeps the
    # smallest-(p1, p2) argmax on ties.
    best: RatePoint | None = None
    for p1 in _coarse_axis():
        for p2 in _coarse_axis():
            point = evaluate(p1, p2)
            if best is None or point.R_raw > best.R_raw:
                best = point

    rounds = 0
    for _ in range(REFINEMENT_ROUNDS):
        before = best.R_raw
        for coord in ("p1", "p2"):
            if coord == "p1":
                lo, hi = _clip_bracket(best.p1)
                objective = lambda x: -evaluate(x, best.p2).R_raw
            else:
                lo, hi = _clip_bracket(best.p2)
                objective = lambda x: -evaluate(best.p1, x).R_raw
            x, neg = _golden_section(objective, lo, hi, cfg.root_tol, cfg.max_iter)
            if -neg > best.R_raw:
                best = evaluate(x, best.p2) if coord == "p1" else evaluate(best.p1, x)
        rounds += 1
        if best.R_raw - before < IMPROVEMENT_TOL:
            break

    return OptimizationResult(
        q=q,
        C=C,
        mode="asymmetric",
        best=best,
        argmax_p1=best.p1,
        argmax_p2=best.p2,
        coarse_grid_step=COARSE_STEP,
        refinement_iters=rounds,
    )


def optimize_symmetric(
    q: float,
    C: float,
    phase_model: PhaseModel = "bit-formula",
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> OptimizationResult:
    """Maximize the symmetric rate over p1 in [0, 1/2] at q+ = qx = q."""
    q = _check_q(q)
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    rates = ErrorRates(q_plus=q, q_times=q)

    def evaluate(p1: float) -> RatePoint:
        return rate_symmetric(p1, rates, C, phase_model, cfg)

    best: RatePoint | None = None
    for p1 in _coarse_axis():
        point = evaluate(p1)
        if best is None or point.R_raw > best.R_raw:
            best = point

    rounds = 0
    for _ in range(REFINEMENT_ROUNDS):
        before = best.R_raw
        lo, hi = _clip_bracket(best.p1)
        x, neg = _golden_section(
            lambda x: -evaluate(x).R_raw, lo, hi, cfg.root_tol, cfg.max_iter
        )
        if -neg > best.R_raw:
            best = evaluate(x)
        rounds += 1
        if best.R_raw - before < IMPROVEMENT_TOL:
            break

    return OptimizationResult(
        q=q,
        C=C,
        mode="symmetric",
        best=best,
        argmax_p1=best.p1,
        argmax_p2=0.5,
        coarse_grid_step=COARSE_STEP,
        refinement_iters=rounds,
    )


def _sweep_point(task) -> OptimizationResult | SweepFailure:
    q, C, mode, phase_model, cfg = task
    try:
        if mode == "asymmetric":
            return optimize_asymmetric(q, C, cfg)
        return optimize_symmetric(q, C, phase_model, cfg)
    except KeyRateError as exc:
        return SweepFailure(q=q, C=C, mode=mode, error=f"{type(exc).__name__}: {exc}")


def sweep(
    q_grid: Iterable[float],
    C: float,
    modes: Sequence[str] = ("asymmetric", "symmetric"),
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    phase_model: PhaseModel = "bit-formula",
    jobs: int = 1,
) -> list[OptimizationResult | SweepFailure]:
    """Optimize every (q, mode) pair of the grid, in input order.

    Points are independent pure computations; with jobs != 1 they are
    evaluated in a process pool (jobs=0 uses every core), but results come
    back assembled in input order and are identical regardless of the worker
    count. A failed point is recorded as a :class:`SweepFailure` row instead
    of aborting the sweep.
    """
    q_values = [_check_q(q) for q in q_grid]
    if not q_values:
        raise DomainError("sweep: empty q grid")
    for mode in modes:
        if mode not in ("asymmetric", "symmetric"):
            raise DomainError(f"unknown mode {mode!r}")
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    tasks = [(q, C, mode, phase_model, cfg) for q in q_values for mode in modes]
    if jobs == 1 or len(tasks) == 1:
        return [_sweep_point(task) for task in tasks]
    workers = jobs if jobs > 0 else (os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, tasks))
