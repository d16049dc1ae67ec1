"""Static figures for the CLI data outputs.

matplotlib is an optional dependency (``pip install artifact[plot]``) and is
imported only when a figure is requested, always with the non-interactive
Agg backend.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("plotting needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    path = Path(path)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None} if path.suffix == ".png" else None)
    return path


def plot_spectrum(n: Sequence[int], n_mean: Sequence[float], path, title: str = "") -> Path:
    """Mean particle number against mode index on log-log axes."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    pos = [(k, x) for k, x in zip(n, n_mean) if x > 0]
    if pos:
        ax.loglog(*zip(*pos), "o-", ms=3)
    else:
        ax.plot(n, n_mean, "o-", ms=3)
    ax.set_xlabel("mode n")
    ax.set_ylabel(r"$\bar N_n$")
    ax.set_title(title)
    fig.tight_layout()
    try:
        return _save(fig, path)
    finally:
        plt.close(fig)


def plot_scan(rows, path, title: str = "") -> Path:
    """``N_n(theta)`` curves, one per mode, from scan rows."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for n in sorted({r.n for r in rows}):
        sel = [r for r in rows if r.n == n]
        ax.plot([r.theta for r in sel], [r.n_mean for r in sel], label=f"n={n}")
    ax.set_xlabel(r"$\vartheta$")
    ax.set_ylabel(r"$\bar N_n$")
    ax.set_xlim(0.0, 1.0)
    ax.legend(frameon=False)
    ax.set_title(title)
    fig.tight_layout()
    try:
        return _save(fig, path)
    finally:
        plt.close(fig)


def plot_maxima(gammas, predicted, exact, path, title: str = "") -> Path:
    """Predicted and searched positions of the maximum against gamma."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.semilogx(gammas, predicted, "s--", label="predicted")
    ax.semilogx(gammas, exact, "o-", label="exact search")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"$\vartheta_{max}$")
    ax.legend(frameon=False)
    ax.set_title(title)
    fig.tight_layout()
    try:
        return _save(fig, path)
    finally:
        plt.close(fig)
