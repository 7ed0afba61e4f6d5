"""Shared scalar numerics: entropy, log-domain combinatorics, solvers.

Everything here is a pure function of its inputs, safe to call from any
number of workers. Tolerances travel in an explicit :class:`ToleranceConfig`
so that callers can tighten or relax the solvers without touching globals.

All logarithms are base 2; entropies and exponents are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    NumericError,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOLERANCES",
    "binary_entropy",
    "positive_part",
    "log2_binomial",
    "log_sum_exp2",
    "bisect_root",
    "minimize_scalar",
]

_LN2 = math.log(2.0)
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Factorial logs up to this n are exact sums; larger n fall back to lgamma.
_EXACT_N_LIMIT = 1000

# Accumulate in extended precision so that differences of large entries stay
# accurate to the float64 ulp.
_LOG2_FACTORIAL = np.concatenate(
    (
        np.zeros(1),
        np.cumsum(
            np.log2(np.arange(1, _EXACT_N_LIMIT + 1, dtype=np.longdouble))
        ).astype(np.longdouble),
    )
)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric tolerances for the root finders and minimizers.

    root_tol:       absolute tolerance on abscissae (roots, minimizer locations)
    exponent_tol:   absolute tolerance on exponent values (bits/qubit)
    max_iter:       iteration cap for the iterative solvers
    grid_points:    density of the seeding grid in :func:`minimize_scalar`

    The defaults sit several orders of magnitude below the 1e-4 scale of the
    exponent constraints this package is typically run with.
    """

    root_tol: float = 1e-12
    exponent_tol: float = 1e-9
    max_iter: int = 200
    grid_points: int = 2048

    def __post_init__(self):
        if not (self.root_tol > 0.0 and self.exponent_tol > 0.0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if self.grid_points < 16:
            raise DomainError("grid_points must be at least 16")


DEFAULT_TOLERANCES = ToleranceConfig()


def _h(x: float) -> float:
    # Unchecked scalar entropy for hot loops; callers guarantee 0 <= x <= 1.
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def _h_array(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    mask = (x > 0.0) & (x < 1.0)
    xm = x[mask]
    out[mask] = -(xm * np.log2(xm) + (1.0 - xm) * np.log2(1.0 - xm))
    return out


def binary_entropy(x):
    """Binary entropy h(x) = -x log2 x - (1-x) log2(1-x) in bits.

    Uses the convention 0 log 0 = 0 at both endpoints. Accepts a float or an
    ndarray; every value must lie in [0, 1].
    """
    if isinstance(x, np.ndarray):
        if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
            raise DomainError("binary_entropy: argument outside [0, 1]")
        return _h_array(x)
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy: argument {x} outside [0, 1]")
    return _h(x)


def positive_part(x):
    """max(x, 0), elementwise on arrays."""
    if isinstance(x, np.ndarray):
        return np.maximum(x, 0.0)
    return x if x > 0.0 else 0.0


def log2_binomial(n: int, k: int) -> float:
    """log2 of the binomial coefficient C(n, k).

    Exact log-factorial sums for n <= 1000, log-gamma continuation above.
    Satisfies the sandwich n h(k/n) - log2(n+1) <= log2 C(n,k) <= n h(k/n).
    """
    n = int(n)
    k = int(k)
    if n < 0:
        raise DomainError(f"log2_binomial: n={n} must be nonnegative")
    if k < 0 or k > n:
        raise DomainError(f"log2_binomial: k={k} outside [0, {n}]")
    if n <= _EXACT_N_LIMIT:
        return float(_LOG2_FACTORIAL[n] - _LOG2_FACTORIAL[k] - _LOG2_FACTORIAL[n - k])
    return (
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    ) / _LN2


def log_sum_exp2(terms) -> float:
    """log2 of a sum given the log2 of its summands.

    Factors out the largest term so that sums of 2^t survive for t far below
    the float underflow threshold. -inf entries represent zero summands.
    """
    arr = np.asarray(terms, dtype=float)
    if arr.size == 0:
        raise DomainError("log_sum_exp2: empty term list")
    if np.any(np.isnan(arr)):
        raise NumericError("log_sum_exp2: NaN term")
    top = float(np.max(arr))
    if math.isinf(top) and top < 0:
        return float("-inf")
    return top + math.log2(float(np.sum(np.exp2(arr - top))))


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
) -> float:
    """Bisection root of a scalar function on [lo, hi].

    Requires f(lo) and f(hi) of opposite signs; if they are not, an endpoint
    with |f| <= root_tol is accepted as the root, otherwise a BracketError is
    raised. Deterministic: identical inputs give identical outputs.
    """
    if not lo < hi:
        raise DomainError(f"bisect_root: empty bracket [{lo}, {hi}]")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo < 0.0) == (fhi < 0.0):
        if abs(flo) <= cfg.root_tol:
            return lo
        if abs(fhi) <= cfg.root_tol:
            return hi
        raise BracketError(
            f"bisect_root: no sign change on [{lo}, {hi}] (f={flo:.3g}, {fhi:.3g})"
        )
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= cfg.root_tol:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisect_root: no convergence in {cfg.max_iter} iterations",
        best=0.5 * (lo + hi),
    )


def _golden_section(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float,
    max_iter: int,
    seed: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Golden-section minimum of f on [a, b]; returns the best point seen.

    ``seed`` is an optional known (x, f(x)) candidate that competes with the
    refined one, so shrinking the bracket can never lose an already-evaluated
    better point.
    """
    c = b - (b - a) * _INV_GOLDEN
    d = a + (b - a) * _INV_GOLDEN
    fc = float(f(c))
    fd = float(f(d))
    if math.isnan(fc) or math.isinf(fc):
        raise NumericError(f"non-finite objective value at x={c}")
    if math.isnan(fd) or math.isinf(fd):
        raise NumericError(f"non-finite objective value at x={d}")
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INV_GOLDEN
            fc = float(f(c))
            if math.isnan(fc) or math.isinf(fc):
                raise NumericError(f"non-finite objective value at x={c}")
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INV_GOLDEN
            fd = float(f(d))
            if math.isnan(fd) or math.isinf(fd):
                raise NumericError(f"non-finite objective value at x={d}")
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    if seed is not None and seed[1] <= best_f:
        best_x, best_f = seed
    return best_x, best_f


def minimize_scalar(
    f: Callable,
    lo: float,
    hi: float,
    cfg: ToleranceConfig = DEFAULT_TOLERANCES,
    *,
    grid_values: Sequence[float] | np.ndarray | None = None,
) -> tuple[float, float]:
    """Minimum of a continuous scalar function on [lo, hi].

    Evaluates f on a uniform grid of cfg.grid_points points, then refines
    around the best grid cell by golden section down to cfg.root_tol. For a
    piecewise-smooth objective whose pieces the grid resolves, the result is
    within cfg.exponent_tol of the true minimum.

    f must accept a float; the grid pass calls it with an ndarray, so it
    should be vectorized (callers that already hold the grid values can pass
    them through ``grid_values`` and skip that pass). Returns (argmin, min).
    """
    if not lo < hi:
        raise DomainError(f"minimize_scalar: empty interval [{lo}, {hi}]")
    grid = np.linspace(lo, hi, cfg.grid_points)
    if grid_values is None:
        vals = np.asarray(f(grid), dtype=float)
    else:
        vals = np.asarray(grid_values, dtype=float)
        if vals.shape != grid.shape:
            raise DomainError("minimize_scalar: grid_values has the wrong length")
    bad = ~np.isfinite(vals)
    if bad.any():
        raise NumericError(
            f"non-finite objective value at x={grid[int(np.argmax(bad))]}"
        )
    i = int(np.argmin(vals))
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, cfg.grid_points - 1)])
    return _golden_section(
        f, a, b, cfg.root_tol, cfg.max_iter, seed=(float(grid[i]), float(vals[i]))
    )
