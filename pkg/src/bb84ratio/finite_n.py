"""Exact finite-N evaluation of the failure bounds and the sampling model.

The asymptotic exponents are limits of finite sums over the empirical raw-key
error rate. This module evaluates those sums exactly in log2 domain, checks
the entropy-sandwich bound against the exact hypergeometric pmf, and Monte
Carlos the estimation stage with reproducible, schedule-independent seeding.

The summands carry a polynomial prefactor whose placement is configurable:

* ``"none"`` (default): the bare exponential type sum. Its -log2/N converges
  to the asymptotic exponent from below, monotonically, which is what the
  convergence checks exercise.
* ``"bound"``: multiplies each term by (population_count + 1), turning the
  sum into a valid upper bound on the failure probability (the direction the
  entropy sandwich actually proves).
* ``"paper"``: divides by the same factor instead, as the source formulas
  print it. Kept for comparison; this variant does not dominate the exact
  pmf and its empirical exponent approaches the limit from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError
from .exponents import ProtocolParams, _check_rate, exponent_bit, exponent_phase
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    _h,
    _h_array,
    log2_binomial,
    log_sum_exp2,
    positive_part,
)

__all__ = [
    "CountLayout",
    "FiniteNResult",
    "SimulationTable",
    "layout_for_basis",
    "hypergeom_log_pmf",
    "verify_hypergeom_bound",
    "b_phase_exact",
    "b_bit_exact",
    "simulate_estimation",
]

RangeMode = Literal["types", "population"]
PolyFactor = Literal["none", "bound", "paper"]


@dataclass(frozen=True)
class CountLayout:
    """Integer sample/population sizes for one estimation stage.

    rounding records how the counts were derived from real-valued ratios;
    only nearest (ties-to-even, Python round) is used.
    """

    N: int
    n_sample: int
    n_pop: int
    rounding: str = "nearest"

    def __post_init__(self):
        if self.N < 0 or self.n_sample < 0 or self.n_pop < 0:
            raise DomainError("counts must be nonnegative")
        if self.n_sample + self.n_pop > self.N:
            raise DomainError(
                f"n_sample + n_pop = {self.n_sample + self.n_pop} exceeds N = {self.N}"
            )


def layout_for_basis(N: int, params: ProtocolParams, basis: str) -> CountLayout:
    """Nearest-rounded integer counts of one basis' estimation stage."""
    N = int(N)
    if N < 1:
        raise DomainError(f"N={N} must be positive")
    if basis == "phase":
        n_sample = round(N * params.phase_sample)
    elif basis == "bit":
        n_sample = round(N * params.bit_sample)
    else:
        raise DomainError(f"unknown basis {basis!r}")
    n_pop = round(N * params.raw_key)
    n_pop = min(n_pop, N - n_sample)  # joint rounding may overshoot by one
    return CountLayout(N=N, n_sample=n_sample, n_pop=n_pop)


def hypergeom_log_pmf(n_s: int, n_p: int, k_s: int, k_p: int) -> float:
    """log2 of C(n_s, k_s) C(n_p, k_p) / C(n_s + n_p, k_s + k_p).

    The probability that, out of k_s + k_p errors thrown uniformly into
    n_s + n_p positions, exactly k_s land in the sampled ones.
    """
    if not 0 <= k_s <= n_s:
        raise DomainError(f"k_s={k_s} outside [0, {n_s}]")
    if not 0 <= k_p <= n_p:
        raise DomainError(f"k_p={k_p} outside [0, {n_p}]")
    return (
        log2_binomial(n_s, k_s)
        + log2_binomial(n_p, k_p)
        - log2_binomial(n_s + n_p, k_s + k_p)
    )


def verify_hypergeom_bound(layout: CountLayout, q: float) -> float:
    """Max signed violation (bits) of the entropy-sandwich pmf bound.

    With k_s = round(n_sample * q) fixed, checks for every k_p that

        log2 pmf <= log2(n + 1) - [n h(K/n) - n_s h(k_s/n_s) - n_p h(k_p/n_p)]

    where n = n_sample + n_pop and K = k_s + k_p. The divergence is built
    from the exact integer counts, so the inequality is exact (no rounding
    slack) and the returned maximum is nonpositive whenever the pmf code and
    the bound agree.
    """
    q = _check_rate("q", q)
    n_s = layout.n_sample
    n_p = layout.n_pop
    n = n_s + n_p
    if n == 0:
        raise DomainError("empty layout")
    k_s = round(n_s * q)
    sample_term = n_s * _h(k_s / n_s) if n_s > 0 else 0.0
    worst = -math.inf
    for k_p in range(n_p + 1):
        K = k_s + k_p
        divergence = (
            n * _h(K / n)
            - sample_term
            - (n_p * _h(k_p / n_p) if n_p > 0 else 0.0)
        )
        bound = math.log2(n + 1) - divergence
        violation = hypergeom_log_pmf(n_s, n_p, k_s, k_p) - bound
        if violation > worst:
            worst = violation
    return worst


@dataclass(frozen=True)
class FiniteNResult:
    """Exact log2 of one failure-bound sum and its empirical exponent."""

    N: int
    log2_B: float
    empirical_exponent: float  # -log2_B / N
    asymptotic_exponent: float


def _poly_shift(poly_factor: PolyFactor, population: float, N: int) -> float:
    if poly_factor == "none":
        return 0.0
    shift = math.log2(N * population + 1.0)
    if poly_factor == "bound":
        return shift
    if poly_factor == "paper":
        return -shift
    raise DomainError(f"unknown poly_factor {poly_factor!r}")


def _rate_grid(N: int, params: ProtocolParams, range_mode: RangeMode) -> np.ndarray:
    if range_mode == "types":
        # Literal sum: k = 0..N with rate k/N, even above the natural
        # population size (rates beyond 1/2 included).
        return np.arange(N + 1) / N
    if range_mode == "population":
        n_pop = max(round(N * params.raw_key), 1)
        return np.arange(n_pop + 1) / n_pop
    raise DomainError(f"unknown range_mode {range_mode!r}")


def b_phase_exact(
    N: int,
    params: ProtocolParams,
    q_times: float,
    S2: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    *,
    range_mode: RangeMode = "types",
    poly_factor: PolyFactor = "none",
) -> FiniteNResult:
    """Exact log2 of the phase failure-bound sum at block length N.

    Sums 2^{-N (D_phase(qx, k/N) + [S2 - raw_key h(k/N)]_+)} over the rate
    grid in log2 domain, optionally shifted by the polynomial prefactor.
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"N={N} must be positive")
    q_times = _check_rate("q_times", q_times)
    if S2 < 0.0:
        raise DomainError(f"S2={S2} must be nonnegative")
    s = params.phase_sample
    w = params.raw_key
    pop = s + w
    if pop <= 0.0:
        raise DomainError("no qubits carry phase statistics")
    x = _rate_grid(N, params, range_mode)
    mix = (s * q_times + w * x) / pop
    dvals = np.maximum(pop * _h_array(mix) - s * _h(q_times) - w * _h_array(x), 0.0)
    objective = dvals + positive_part(S2 - w * _h_array(x))
    log_terms = -float(N) * objective + _poly_shift(poly_factor, pop, N)
    log2_b = log_sum_exp2(log_terms)
    return FiniteNResult(
        N=N,
        log2_B=log2_b,
        empirical_exponent=-log2_b / N,
        asymptotic_exponent=exponent_phase(S2, params, q_times, cfg),
    )


def b_bit_exact(
    N: int,
    params: ProtocolParams,
    q_plus: float,
    S1: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    *,
    range_mode: RangeMode = "types",
    poly_factor: PolyFactor = "none",
) -> FiniteNResult:
    """Exact log2 of the bit failure-bound sum; mirror of :func:`b_phase_exact`."""
    N = int(N)
    if N < 1:
        raise DomainError(f"N={N} must be positive")
    q_plus = _check_rate("q_plus", q_plus)
    if S1 < 0.0:
        raise DomainError(f"S1={S1} must be nonnegative")
    p1 = params.p1
    block = (1.0 - params.p2) ** 2
    w = block * (1.0 - p1)
    x = _rate_grid(N, params, range_mode)
    mix = p1 * q_plus + (1.0 - p1) * x
    dvals = np.maximum(
        block * (_h_array(mix) - p1 * _h(q_plus) - (1.0 - p1) * _h_array(x)), 0.0
    )
    objective = dvals + positive_part(S1 - w * _h_array(x))
    log_terms = -float(N) * objective + _poly_shift(poly_factor, block, N)
    log2_b = log_sum_exp2(log_terms)
    return FiniteNResult(
        N=N,
        log2_B=log2_b,
        empirical_exponent=-log2_b / N,
        asymptotic_exponent=exponent_bit(S1, params, q_plus, cfg),
    )


@dataclass(frozen=True)
class SimulationTable:
    """Empirical error-split frequencies against the exact pmf.

    counts[j] is the number of trials whose sampled-position error count was
    k_s = support_lo + j (with k_p = K - k_s). Identical seeds reproduce
    identical tables regardless of chunking or worker count.
    """

    layout: CountLayout
    K: int
    trials: int
    seed: int
    support_lo: int
    counts: tuple[int, ...]

    def rows(self) -> list[dict]:
        """One row per (k_s, k_p) split with empirical and exact columns."""
        out = []
        for j, count in enumerate(self.counts):
            k_s = self.support_lo + j
            k_p = self.K - k_s
            exact = 2.0 ** hypergeom_log_pmf(
                self.layout.n_sample, self.layout.n_pop, k_s, k_p
            )
            freq = count / self.trials
            sigma = math.sqrt(self.trials * exact * (1.0 - exact))
            z = (count - self.trials * exact) / sigma if sigma > 0.0 else 0.0
            out.append(
                {
                    "k_sample": k_s,
                    "k_pop": k_p,
                    "count": count,
                    "frequency": freq,
                    "exact_prob": exact,
                    "z_score": z,
                }
            )
        return out


_CHUNK_TRIALS = 65536


def simulate_estimation(
    layout: CountLayout, K: int, trials: int, seed: int
) -> SimulationTable:
    """Monte Carlo of the error split between sampled and raw-key positions.

    Each trial throws K errors into n_sample + n_pop positions without
    replacement and records how many landed in the sample. Trial t consumes
    exactly the K uniforms at offsets [t*K, (t+1)*K) of a counter-based
    Philox stream keyed by ``seed``, so the result is reproducible and
    independent of chunking or execution order.
    """
    n_s = layout.n_sample
    n_p = layout.n_pop
    total = n_s + n_p
    if not 0 <= K <= total:
        raise DomainError(f"K={K} outside [0, {total}]")
    if trials < 1:
        raise DomainError(f"trials={trials} must be positive")

    support_lo = max(0, K - n_p)
    support_hi = min(K, n_s)
    counts = np.zeros(support_hi - support_lo + 1, dtype=np.int64)

    rng = np.random.Generator(np.random.Philox(key=seed))
    done = 0
    while done < trials:
        block = min(_CHUNK_TRIALS, trials - done)
        if K == 0:
            counts[0 - support_lo] += block
            done += block
            continue
        u = rng.random((block, K))
        in_sample = np.zeros(block, dtype=np.int64)
        sample_left = np.full(block, n_s, dtype=np.int64)
        for j in range(K):
            # Sequential urn: the j-th error lands in the sample with
            # probability sample_left / positions_left.
            hit = u[:, j] * (total - j) < sample_left
            in_sample += hit
            sample_left -= hit
        counts += np.bincount(in_sample - support_lo, minlength=counts.size)
        done += block

    return SimulationTable(
        layout=layout,
        K=K,
        trials=trials,
        seed=seed,
        support_lo=support_lo,
        counts=tuple(int(c) for c in counts),
    )
