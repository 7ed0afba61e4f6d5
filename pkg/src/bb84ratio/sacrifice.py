"""Minimum sacrificed-bit rates, computed two independent ways.

For a target decay rate C of the failure bound, the sacrificed-bit rate S
is the solution of exponent(S) = C. Two routes are implemented:

* :func:`s_by_inversion` bisects the monotone exponent functional directly.
  This is the authoritative value used by the rate formulas.
* :func:`s_closed` evaluates the closed-form case split built from the two
  characteristic roots ``q_prime_one`` (divergence crossing) and
  ``q_prime_two`` (stationarity of the unclipped objective).

On the interior branch the two agree to solver precision. On the
stationary branch the closed form is known to disagree with the direct
inversion; :func:`cross_check` reports the discrepancy instead of hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

from .errors import DomainError, InfeasibleError, KeyRateError
from .exponents import (
    ProtocolParams,
    _check_rate,
    _minimize_exponent,
    d_bit,
    d_phase,
)
from .numerics import DEFAULT_TOLERANCES, ToleranceConfig, _h, bisect_root

__all__ = [
    "Basis",
    "SacrificeResult",
    "CrossCheckReport",
    "q_prime_one",
    "q_prime_two",
    "s_closed",
    "s_by_inversion",
    "cross_check",
]

Basis = Literal["bit", "phase"]

INTERIOR = "interior"
STATIONARY = "stationary"
SATURATED = "saturated"


@dataclass(frozen=True)
class SacrificeResult:
    """A sacrificed-bit rate with its derivation diagnostics.

    S:        bits sacrificed per transmitted qubit
    branch:   "interior" (crossing root binds), "stationary" (stationarity
              root binds) or "saturated" (the divergence never reaches C)
    q1:       root of D = C on [q, 1/2], when it exists and was computed
    q2:       stationarity root on (q, 1/2), when it was computed
    residual: |exponent(S) - C| actually achieved, when it was evaluated
    """

    S: float
    branch: str
    q1: float | None = None
    q2: float | None = None
    residual: float | None = None


def _divergence(basis: Basis):
    if basis == "bit":
        return d_bit
    if basis == "phase":
        return d_phase
    raise DomainError(f"unknown basis {basis!r}")


def q_prime_one(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> float | None:
    """Root of D(q, .) = C on [q, 1/2], or None when D(q, 1/2) < C.

    The divergence vanishes at q' = q and increases toward 1/2 on that side,
    so the crossing, when it exists, is unique there. The root below q is
    deliberately not taken: the clipped term of the exponent objective decays
    with q', so only the upper crossing can bind.
    """
    q = _check_rate("q", q)
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    dfun = _divergence(basis)
    if dfun(params, q, 0.5) < C:
        return None
    return bisect_root(lambda x: dfun(params, q, x) - C, q, 0.5, cfg)


def q_prime_two(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> float:
    """Stationarity root on (q, 1/2): where the mixed odds match (q'/(1-q'))^2.

    The residual (q'/(1-q'))^2 - odds is negative at q' = q and nonnegative
    at 1/2, so bisection brackets the root.
    """
    q = _check_rate("q", q)
    if not 0.0 < q < 0.5:
        raise DomainError(f"q={q} must lie strictly inside (0, 1/2)")
    if basis == "phase":
        s = params.phase_sample
        w = params.raw_key
        if s + w <= 0.0:
            raise DomainError("no phase statistics to balance")

        def residual(x: float) -> float:
            odds = (s * q + w * x) / (s * (1.0 - q) + w * (1.0 - x))
            return (x / (1.0 - x)) ** 2 - odds

    elif basis == "bit":
        p1 = params.p1

        def residual(x: float) -> float:
            odds = (p1 * q + (1.0 - p1) * x) / (
                p1 * (1.0 - q) + (1.0 - p1) * (1.0 - x)
            )
            return (x / (1.0 - x)) ** 2 - odds

    else:
        raise DomainError(f"unknown basis {basis!r}")
    return bisect_root(residual, q, 0.5, cfg)


def _zero_constraint_boundary(basis: Basis, params: ProtocolParams, q: float) -> float:
    # C = 0: the exponent is zero exactly for S <= raw_key * h(q) (or for
    # S <= raw_key when the divergence is null); return that boundary.
    if basis == "bit" and params.p1 == 0.0:
        return params.raw_key
    if basis == "phase" and params.phase_sample == 0.0:
        return params.raw_key
    return params.raw_key * _h(q)


@lru_cache(maxsize=4096)
def _invert_cached(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    C: float,
    cfg: ToleranceConfig,
) -> SacrificeResult:
    raw = params.raw_key
    if C == 0.0:
        S = _zero_constraint_boundary(basis, params, q)
        value = _minimize_exponent(basis, params, q, S, cfg)[1]
        return SacrificeResult(S=S, branch=INTERIOR, residual=abs(value))

    lo = 0.0
    hi = raw + C + 1.0
    # exponent(hi) >= hi - raw > C always; anything else means the objective
    # itself is broken for these parameters.
    if _minimize_exponent(basis, params, q, hi, cfg)[1] < C:
        raise InfeasibleError(
            f"exponent never reaches C={C} on [0, {hi}] for {basis} basis"
        )
    for _ in range(cfg.max_iter):
        if hi - lo <= cfg.root_tol:
            break
        mid = 0.5 * (lo + hi)
        if _minimize_exponent(basis, params, q, mid, cfg)[1] >= C:
            hi = mid
        else:
            lo = mid
    argmin, value = _minimize_exponent(basis, params, q, hi, cfg)
    residual = abs(value - C)

    dfun = _divergence(basis)
    if dfun(params, q, 0.5) < C:
        branch = SATURATED
    elif hi - params.raw_key * _h(argmin) <= max(cfg.exponent_tol, 1e-9):
        branch = INTERIOR  # the clipping kink binds
    else:
        branch = STATIONARY
    return SacrificeResult(S=hi, branch=branch, residual=residual)


def s_by_inversion(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> SacrificeResult:
    """Sacrificed-bit rate solving exponent(S) = C, by bisection on S.

    The exponent is nondecreasing in S, zero up to raw_key * h(q) and
    eventually linear, so bisection on [0, raw_key + C + 1] always lands on
    the smallest S whose exponent reaches C. For C = 0 the boundary of the
    zero set is returned. This is the authoritative sacrifice value.
    """
    q = _check_rate("q", q)
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    return _invert_cached(basis, params, q, float(C), cfg)


def s_closed(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> SacrificeResult:
    """Closed-form sacrifice rate from the characteristic roots.

    The crossing root q1 binds when q1 <= q2 (then S = raw_key * h(q1));
    otherwise the stationarity root gives S = D(q, q2) + C. When the
    divergence never reaches C the case split does not apply and the value
    is delegated to :func:`s_by_inversion`, labelled "saturated".
    """
    q = _check_rate("q", q)
    if C < 0.0:
        raise DomainError(f"C={C} must be nonnegative")
    q2 = q_prime_two(basis, params, q, cfg)
    q1 = q_prime_one(basis, params, q, C, cfg)
    if q1 is None:
        inv = s_by_inversion(basis, params, q, C, cfg)
        return SacrificeResult(
            S=inv.S, branch=SATURATED, q1=None, q2=q2, residual=inv.residual
        )
    if q1 <= q2:
        S = params.raw_key * _h(q1)
        branch = INTERIOR
    else:
        S = _divergence(basis)(params, q, q2) + C
        branch = STATIONARY
    value = _minimize_exponent(basis, params, q, S, cfg)[1]
    return SacrificeResult(S=S, branch=branch, q1=q1, q2=q2, residual=abs(value - C))


@dataclass(frozen=True)
class CrossCheckReport:
    """Comparison of the closed-form and inversion sacrifice values."""

    basis: str
    p1: float
    p2: float
    q: float
    C: float
    s_closed: float | None
    s_inversion: float | None
    discrepancy: float | None
    branch_closed: str | None
    branch_inversion: str | None
    residual_closed: float | None
    residual_inversion: float | None
    error: str | None = None


def cross_check(
    basis: Basis,
    params: ProtocolParams,
    q: float,
    C: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> CrossCheckReport:
    """Report |s_closed - s_by_inversion| and both branch labels.

    Reports, never raises: failures of either route are recorded in the
    ``error`` field.
    """
    closed = inv = None
    error = None
    try:
        inv = s_by_inversion(basis, params, q, C, cfg)
        closed = s_closed(basis, params, q, C, cfg)
    except KeyRateError as exc:  # pragma: no cover - defensive reporting path
        error = f"{type(exc).__name__}: {exc}"
    return CrossCheckReport(
        basis=basis,
        p1=params.p1,
        p2=params.p2,
        q=q,
        C=C,
        s_closed=None if closed is None else closed.S,
        s_inversion=None if inv is None else inv.S,
        discrepancy=None if closed is None or inv is None else abs(closed.S - inv.S),
        branch_closed=None if closed is None else closed.branch,
        branch_inversion=None if inv is None else inv.branch,
        residual_closed=None if closed is None else closed.residual,
        residual_inversion=None if inv is None else inv.residual,
        error=error,
    )
