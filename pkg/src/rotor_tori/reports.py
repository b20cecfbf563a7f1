"""Deterministic CSV/JSON report writers and their companion figures.

Reports are byte-stable for a fixed configuration and seed: floats are
serialized with shortest round-trip repr, JSON keys are sorted, and no
timestamps are embedded.  Each report carries the run configuration in its
header.  Figures are rendered to PNG next to the delimited output.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[tuple],
              header: dict | None = None) -> None:
    lines = []
    if header:
        for key in sorted(header):
            lines.append(f"# {key}={fmt(header[key])}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def betaseq_figure(path: Path, ms: list[int], betas: list[float]) -> None:
    fig, ax = _new_axes("worst divisor per dyadic budget", "m", "beta(m)")
    ax.semilogy(ms, betas, marker="o")
    _save(fig, path)


def bryuno_figure(path: Path, ms: list[int], partials: list[float]) -> None:
    fig, ax = _new_axes("Bryuno partial sums", "m", "sum to m")
    ax.plot(ms, partials, marker="o")
    _save(fig, path)


def measure_figure(path: Path, gammas: list[float], fractions: list[float]) -> None:
    fig, ax = _new_axes("Diophantine measure estimate", "gamma", "1 - pass fraction")
    ax.loglog(gammas, [max(1e-12, 1.0 - f) for f in fractions], marker="o")
    _save(fig, path)


def norms_figure(path: Path, orders: list[int], norms: list[float],
                 kernels: list[float] | None = None) -> None:
    fig, ax = _new_axes("per-order weighted norms", "order k", "norm")
    ax.semilogy(orders, norms, marker="o", label="||u^(k)||")
    if kernels:
        positive = [max(v, 1e-18) for v in kernels]
        ax.semilogy(orders, positive, marker="x", label="kernel residual")
    ax.legend()
    _save(fig, path)


def cancel_figure(path: Path, labels: list[str], ratio0: list[float],
                  ratio1: list[float]) -> None:
    fig, ax = _new_axes("self-energy cancellation ratios", "(k, n)", "ratio")
    xs = range(len(labels))
    ax.semilogy(xs, [max(r, 1e-18) for r in ratio0], "o", label="|M(0)| / raw")
    ax.semilogy(xs, [max(r, 1e-18) for r in ratio1], "x", label="|dM(0)| / raw")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=45, fontsize=7)
    ax.legend()
    _save(fig, path)


def validate_figure(path: Path, times: list[float], errors: list[float]) -> None:
    fig, ax = _new_axes("torus-metric trajectory error", "t", "distance")
    ax.semilogy(times, [max(e, 1e-18) for e in errors])
    _save(fig, path)


def thresholds_figure(path: Path, gammas: list[float], plain: list[float],
                      scaled: list[float]) -> None:
    fig, ax = _new_axes("threshold scaling in gamma", "gamma", "eps threshold")
    ax.loglog(gammas, plain, marker="o", label="plain")
    ax.loglog(gammas, scaled, marker="s", label="rescaled")
    ax.legend()
    _save(fig, path)


def trees_figure(path: Path, orders: list[int], counts: list[int]) -> None:
    fig, ax = _new_axes("labelled trees per order", "order k", "count")
    ax.semilogy(orders, counts, marker="o")
    _save(fig, path)
