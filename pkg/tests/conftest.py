"""Shared fixtures and independent oracle helpers.

The oracle helpers deliberately re-derive everything from numpy primitives
instead of calling back into the package, so that a bug in the library
cannot hide inside its own reference values.
"""

from __future__ import annotations

import numpy as np
import pytest

from bb84ratio import ProtocolParams, ToleranceConfig


def entropy_oracle(x):
    """Independent binary entropy, vectorized, 0 log 0 = 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mask = (x > 0.0) & (x < 1.0)
    xm = x[mask]
    out[mask] = -(xm * np.log2(xm) + (1.0 - xm) * np.log2(1.0 - xm))
    return out if out.ndim else float(out)


def divergence_oracle(basis: str, params: ProtocolParams, q: float, x):
    """Independent evaluation of the deviation decay rate."""
    x = np.asarray(x, dtype=float)
    if basis == "phase":
        s = params.p2**2
        w = (1.0 - params.p2) ** 2 * (1.0 - params.p1)
        pop = s + w
        mix = (s * q + w * x) / pop
        val = pop * entropy_oracle(mix) - s * entropy_oracle(q) - w * entropy_oracle(x)
    else:
        p1 = params.p1
        mix = p1 * q + (1.0 - p1) * x
        val = (1.0 - params.p2) ** 2 * (
            entropy_oracle(mix) - p1 * entropy_oracle(q) - (1.0 - p1) * entropy_oracle(x)
        )
    return np.maximum(val, 0.0)


def brute_force_exponent(
    basis: str, params: ProtocolParams, q: float, S: float, points: int = 1_000_001
) -> float:
    """Dense-grid minimum of [S - raw_key h(q')]_+ + D(q, q') over [0, 1/2]."""
    x = np.linspace(0.0, 0.5, points)
    raw = (1.0 - params.p2) ** 2 * (1.0 - params.p1)
    vals = np.maximum(S - raw * entropy_oracle(x), 0.0) + divergence_oracle(
        basis, params, q, x
    )
    return float(vals.min())


@pytest.fixture(scope="session")
def default_cfg() -> ToleranceConfig:
    return ToleranceConfig()
