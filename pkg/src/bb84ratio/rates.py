"""Final key-generation rates of the asymmetric and symmetric protocols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError
from .exponents import ErrorRates, ProtocolParams
from .numerics import DEFAULT_TOLERANCES, ToleranceConfig
from .sacrifice import s_by_inversion

__all__ = [
    "PhaseModel",
    "RatePoint",
    "rate_asymmetric",
    "rate_symmetric",
    "basis_ratio_optimality_check",
]

# Which sacrifice functional covers the privacy-amplification term of the
# symmetric protocol: "bit-formula" substitutes p2 = 1/2 into the bit-basis
# functional for both terms, "phase-formula" uses the phase-basis functional
# for the second term. The former is the default.
PhaseModel = Literal["bit-formula", "phase-formula"]


@dataclass(frozen=True)
class RatePoint:
    """One evaluated key-generation-rate sample.

    R_raw is the bookkeeping value raw_key - S1 - S2 and may be negative;
    R clamps it at zero. Keeping both preserves gradient information for
    the optimizer near the zero-rate boundary.
    """

    q_plus: float
    q_times: float
    C: float
    p1: float
    p2: float
    S1: float
    S2: float
    R_raw: float
    R: float


def rate_asymmetric(
    params: ProtocolParams,
    rates: ErrorRates,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> RatePoint:
    """Key rate of the asymmetric protocol: raw_key - S1 - S2.

    Both sacrifice terms come from the bisection inversion, S1 for the
    error-correction (bit) constraint at q_plus and S2 for the
    privacy-amplification (phase) constraint at q_times.
    """
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    s1 = s_by_inversion("bit", params, rates.q_plus, C, cfg).S
    s2 = s_by_inversion("phase", params, rates.q_times, C, cfg).S
    r_raw = params.raw_key - s1 - s2
    return RatePoint(
        q_plus=rates.q_plus,
        q_times=rates.q_times,
        C=C,
        p1=params.p1,
        p2=params.p2,
        S1=s1,
        S2=s2,
        R_raw=r_raw,
        R=max(r_raw, 0.0),
    )


def rate_symmetric(
    p1: float,
    rates: ErrorRates,
    C: float,
    phase_model: PhaseModel = "bit-formula",
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> RatePoint:
    """Key rate of the symmetric protocol (p2 fixed at 1/2): (1-p1)/4 - S1 - S2.

    The first term is always the bit-basis sacrifice at q_plus. The second,
    covering privacy amplification at q_times, follows ``phase_model``; both
    readings are exposed because they genuinely differ at p2 = 1/2.
    """
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    params = ProtocolParams(p1=p1, p2=0.5)
    s1 = s_by_inversion("bit", params, rates.q_plus, C, cfg).S
    if phase_model == "bit-formula":
        s2 = s_by_inversion("bit", params, rates.q_times, C, cfg).S
    elif phase_model == "phase-formula":
        s2 = s_by_inversion("phase", params, rates.q_times, C, cfg).S
    else:
        raise DomainError(f"unknown phase_model {phase_model!r}")
    r_raw = params.raw_key - s1 - s2
    return RatePoint(
        q_plus=rates.q_plus,
        q_times=rates.q_times,
        C=C,
        p1=p1,
        p2=0.5,
        S1=s1,
        S2=s2,
        R_raw=r_raw,
        R=max(r_raw, 0.0),
    )


def basis_ratio_optimality_check(
    P: float, grid_n: int = 4001
) -> tuple[tuple[float, float], float]:
    """Brute-force the best split of a diagonal coincidence probability P.

    Over pairs (a, b) with a * b = P and both ratios in (0, 1/2], maximizes
    the rectilinear coincidence probability (1-a)(1-b). Returns the argmax
    pair and the maximum; the grid maximizer sits at a = b = sqrt(P) up to
    grid resolution, which is why equal ratios on both sides suffice.
    """
    if not 0.0 < P <= 0.25:
        raise DomainError(
            f"P={P} not in (0, 1/4]: with both ratios capped at 1/2 the"
            " diagonal coincidence probability cannot exceed 1/4"
        )
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    # b = P/a <= 1/2 forces a >= 2P.
    a = np.linspace(2.0 * P, 0.5, grid_n)
    b = P / a
    values = (1.0 - a) * (1.0 - b)
    i = int(np.argmax(values))
    return (float(a[i]), float(b[i])), float(values[i])
