"""Columnar report files and the matplotlib figures rendered beside them."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def write_columns(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def format_columns(header, rows) -> str:
    lines = [",".join(str(x) for x in header)]
    lines.extend(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def energy_figure(trace, path) -> Path:
    """Dirichlet energy per iteration, log scale when the values allow it."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    iterations = range(len(trace))
    if all(v > 0 for v in trace):
        ax.semilogy(iterations, trace, marker="o", markersize=3, linewidth=1.2)
    else:
        ax.plot(iterations, trace, marker="o", markersize=3, linewidth=1.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel("Dirichlet energy")
    ax.set_title("Diffusion energy decay")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def spectrum_figure(eigenvalues, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.stem(range(len(eigenvalues)), eigenvalues, basefmt=" ")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title("Laplacian spectrum")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
