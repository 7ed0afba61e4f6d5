"""Rendering of the sweep dataset into publication-style figures.

The report directory receives the delimited sweep data plus three figures:
maximum key rate, optimal check-bit ratio and optimal diagonal-basis ratio,
each against the common error rate q.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .optimizer import OptimizationResult, SweepFailure

__all__ = ["write_report"]

_ASYM_STYLE = dict(color="tab:blue", marker="o", markersize=3, label="asymmetric")
_SYM_STYLE = dict(
    color="tab:red", marker="s", markersize=3, label="symmetric (p2 = 1/2)"
)


def _series(results, mode: str, field) -> tuple[list[float], list[float]]:
    xs, ys = [], []
    for r in results:
        if isinstance(r, SweepFailure) or r.mode != mode:
            continue
        xs.append(r.q)
        ys.append(field(r))
    return xs, ys


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(
    results: Iterable[OptimizationResult | SweepFailure],
    out_dir: Path,
    csv_text: str,
) -> list[Path]:
    """Write sweep.csv and the three figures into out_dir; returns the paths."""
    results = list(results)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / "sweep.csv"
    csv_path.write_text(csv_text)
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode, style in (("asymmetric", _ASYM_STYLE), ("symmetric", _SYM_STYLE)):
        xs, ys = _series(results, mode, lambda r: r.best.R)
        ax.plot(xs, ys, **style)
    ax.set_xlabel("error rate q")
    ax.set_ylabel("maximum key rate (bits/qubit)")
    ax.set_title("Asymptotic key generation rate")
    ax.legend()
    ax.grid(True, alpha=0.3)
    path = out_dir / "key_rate_vs_qber.png"
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mode, style in (("asymmetric", _ASYM_STYLE), ("symmetric", _SYM_STYLE)):
        xs, ys = _series(results, mode, lambda r: r.argmax_p1)
        ax.plot(xs, ys, **style)
    ax.set_xlabel("error rate q")
    ax.set_ylabel("optimal check-bit ratio p1")
    ax.set_title("Optimal choice rate for the check bits")
    ax.legend()
    ax.grid(True, alpha=0.3)
    path = out_dir / "check_bit_ratio_vs_qber.png"
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs, ys = _series(results, "asymmetric", lambda r: r.argmax_p2)
    ax.plot(xs, ys, **_ASYM_STYLE)
    ax.set_xlabel("error rate q")
    ax.set_ylabel("optimal diagonal-basis ratio p2")
    ax.set_title("Optimal choice rate of the diagonal basis")
    ax.grid(True, alpha=0.3)
    path = out_dir / "phase_basis_ratio_vs_qber.png"
    _save(fig, path)
    written.append(path)

    return written
