"""Estimation divergences and failure exponents of the two-basis protocol.

Both sides measure in the diagonal basis with ratio p2 and announce a
ratio p1 of their rectilinear-basis coincidences as check bits, leaving a
raw-key fraction (1-p2)^2 (1-p1) of the transmitted qubits. Error rates
observed on the sampled positions constrain the unobserved rate q' on the
raw keys only statistically; ``d_phase`` and ``d_bit`` are the exponential
decay rates (bits per transmitted qubit) of the probability that q'
deviates from the observed rate.

``exponent_phase`` and ``exponent_bit`` combine those divergences with a
sacrificed-bit rate S: they return the exponential decay rate of the
corresponding failure bound, the inner minimization over q' in [0, 1/2] of

    [S - raw_key * h(q')]_+ + D(q_observed, q').
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateParameterError, DomainError
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    _h,
    _h_array,
    minimize_scalar,
)

__all__ = [
    "ProtocolParams",
    "ErrorRates",
    "d_phase",
    "d_bit",
    "exponent_phase",
    "exponent_bit",
]


def _check_rate(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 0.5 or math.isnan(value):
        raise DomainError(f"{name}={value} outside [0, 1/2]")
    return value


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol choice ratios and their derived coincidence fractions.

    p1: fraction of rectilinear coincidences announced as check bits
    p2: fraction of transmissions measured in the diagonal basis (per side)

    Both are restricted to [0, 1/2]; p2 = 1/2 is the symmetric protocol.
    """

    p1: float
    p2: float

    def __post_init__(self):
        _check_rate("p1", self.p1)
        _check_rate("p2", self.p2)

    @property
    def phase_sample(self) -> float:
        """Fraction of transmissions where both sides chose the diagonal basis."""
        return self.p2 * self.p2

    @property
    def bit_sample(self) -> float:
        """Fraction announced as check bits."""
        return (1.0 - self.p2) ** 2 * self.p1

    @property
    def raw_key(self) -> float:
        """Fraction kept as raw key."""
        return (1.0 - self.p2) ** 2 * (1.0 - self.p1)

    @property
    def phase_population(self) -> float:
        """Diagonal samples plus raw keys: everything with phase statistics."""
        return self.phase_sample + self.raw_key


@dataclass(frozen=True)
class ErrorRates:
    """Observed error rates in the two bases, each in [0, 1/2]."""

    q_plus: float
    q_times: float

    def __post_init__(self):
        _check_rate("q_plus", self.q_plus)
        _check_rate("q_times", self.q_times)


def _phase_weights(params: ProtocolParams) -> tuple[float, float, float]:
    s = params.phase_sample
    w = params.raw_key
    pop = s + w
    if pop <= 0.0:
        raise DegenerateParameterError(
            "no qubits carry phase statistics (p2=0 and p1=1)"
        )
    return s, w, pop


def d_phase(params: ProtocolParams, q_times, q_prime):
    """Decay rate of a phase-rate deviation q_times -> q_prime, in bits/qubit.

    Concavity of the entropy makes this nonnegative, and zero exactly when
    q_prime equals q_times (given positive sample and population weights).
    q_prime may be a float or an ndarray.
    """
    s, w, pop = _phase_weights(params)
    q_times = _check_rate("q_times", q_times)
    if isinstance(q_prime, np.ndarray):
        if np.any((q_prime < 0.0) | (q_prime > 0.5)) or np.any(np.isnan(q_prime)):
            raise DomainError("q_prime outside [0, 1/2]")
        mix = (s * q_times + w * q_prime) / pop
        val = pop * _h_array(mix) - s * _h(q_times) - w * _h_array(q_prime)
        return np.maximum(val, 0.0)
    q_prime = _check_rate("q_prime", q_prime)
    mix = (s * q_times + w * q_prime) / pop
    val = pop * _h(mix) - s * _h(q_times) - w * _h(q_prime)
    return val if val > 0.0 else 0.0


def d_bit(params: ProtocolParams, q_plus, q_prime):
    """Decay rate of a bit-rate deviation q_plus -> q_prime, in bits/qubit.

    Scales with the rectilinear coincidence fraction (1-p2)^2 and vanishes
    identically when p1 = 0 (no check bits, no estimation power).
    """
    q_plus = _check_rate("q_plus", q_plus)
    p1 = params.p1
    block = (1.0 - params.p2) ** 2
    if isinstance(q_prime, np.ndarray):
        if np.any((q_prime < 0.0) | (q_prime > 0.5)) or np.any(np.isnan(q_prime)):
            raise DomainError("q_prime outside [0, 1/2]")
        mix = p1 * q_plus + (1.0 - p1) * q_prime
        val = block * (_h_array(mix) - p1 * _h(q_plus) - (1.0 - p1) * _h_array(q_prime))
        return np.maximum(val, 0.0)
    q_prime = _check_rate("q_prime", q_prime)
    mix = p1 * q_plus + (1.0 - p1) * q_prime
    val = block * (_h(mix) - p1 * _h(q_plus) - (1.0 - p1) * _h(q_prime))
    return val if val > 0.0 else 0.0


# The inner minimizations re-evaluate the divergence on the same q' grid for
# every sacrifice-rate trial, so the grid tables are cached per parameter
# point. Arrays are frozen to keep cache entries immutable.


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=64)
def _phase_tables(p1: float, p2: float, q_times: float, n: int):
    params = ProtocolParams(p1, p2)
    s, w, pop = _phase_weights(params)
    grid = np.linspace(0.0, 0.5, n)
    mix = (s * q_times + w * grid) / pop
    dvals = np.maximum(pop * _h_array(mix) - s * _h(q_times) - w * _h_array(grid), 0.0)
    return _frozen(grid), _frozen(w * _h_array(grid)), _frozen(dvals)


@lru_cache(maxsize=64)
def _bit_tables(p1: float, p2: float, q_plus: float, n: int):
    block = (1.0 - p2) ** 2
    grid = np.linspace(0.0, 0.5, n)
    mix = p1 * q_plus + (1.0 - p1) * grid
    dvals = np.maximum(
        block * (_h_array(mix) - p1 * _h(q_plus) - (1.0 - p1) * _h_array(grid)), 0.0
    )
    w = block * (1.0 - p1)
    return _frozen(grid), _frozen(w * _h_array(grid)), _frozen(dvals)


def _phase_objective(params: ProtocolParams, q_times: float, S: float):
    s, w, pop = _phase_weights(params)
    s_hq = s * _h(q_times)
    sq = s * q_times

    def objective(x):
        if isinstance(x, np.ndarray):
            hx = _h_array(x)
            dval = np.maximum(pop * _h_array((sq + w * x) / pop) - s_hq - w * hx, 0.0)
            return np.maximum(S - w * hx, 0.0) + dval
        hx = _h(x)
        dval = pop * _h((sq + w * x) / pop) - s_hq - w * hx
        if dval < 0.0:
            dval = 0.0
        gap = S - w * hx
        return (gap if gap > 0.0 else 0.0) + dval

    return objective


def _bit_objective(params: ProtocolParams, q_plus: float, S: float):
    p1 = params.p1
    block = (1.0 - params.p2) ** 2
    w = block * (1.0 - p1)
    p1_hq = p1 * _h(q_plus)
    p1q = p1 * q_plus

    def objective(x):
        if isinstance(x, np.ndarray):
            hx = _h_array(x)
            dval = np.maximum(
                block * (_h_array(p1q + (1.0 - p1) * x) - p1_hq - (1.0 - p1) * hx), 0.0
            )
            return np.maximum(S - w * hx, 0.0) + dval
        hx = _h(x)
        dval = block * (_h(p1q + (1.0 - p1) * x) - p1_hq - (1.0 - p1) * hx)
        if dval < 0.0:
            dval = 0.0
        gap = S - w * hx
        return (gap if gap > 0.0 else 0.0) + dval

    return objective


def _minimize_exponent(
    basis: str,
    params: ProtocolParams,
    q: float,
    S: float,
    cfg: ToleranceConfig,
) -> tuple[float, float]:
    """(argmin q', min value) of the failure-exponent objective."""
    if basis == "phase":
        grid, wh, dvals = _phase_tables(params.p1, params.p2, q, cfg.grid_points)
        objective = _phase_objective(params, q, S)
    elif basis == "bit":
        grid, wh, dvals = _bit_tables(params.p1, params.p2, q, cfg.grid_points)
        objective = _bit_objective(params, q, S)
    else:
        raise DomainError(f"unknown basis {basis!r}")
    vals = np.maximum(S - wh, 0.0) + dvals
    x, fx = minimize_scalar(objective, 0.0, 0.5, cfg, grid_values=vals)
    return x, (fx if fx > 0.0 else 0.0)


def exponent_phase(
    S2: float,
    params: ProtocolParams,
    q_times,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> float:
    """Decay rate of the phase-failure bound at sacrifice rate S2.

    Nondecreasing and continuous in S2, and exactly zero whenever
    S2 <= raw_key * h(q_times), where the q' = q_times point kills both terms.
    """
    if S2 < 0.0:
        raise DomainError(f"S2={S2} must be nonnegative")
    q_times = _check_rate("q_times", q_times)
    _phase_weights(params)  # reject the degenerate population early
    return _minimize_exponent("phase", params, q_times, float(S2), cfg)[1]


def exponent_bit(
    S1: float,
    params: ProtocolParams,
    q_plus,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> float:
    """Decay rate of the bit-failure bound at sacrifice rate S1.

    Same contract as :func:`exponent_phase` with the bit divergence.
    """
    if S1 < 0.0:
        raise DomainError(f"S1={S1} must be nonnegative")
    q_plus = _check_rate("q_plus", q_plus)
    return _minimize_exponent("bit", params, q_plus, float(S1), cfg)[1]
