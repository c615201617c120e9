"""Report figures (matplotlib, Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import SampledFunction  # noqa: E402
from .wigner import WignerField  # noqa: E402

RC = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_wigner(w: WignerField, path, title: str = "Wigner distribution", xi_max: float | None = None) -> Path:
    """Heat map of Re W over (x, xi) for d = 1."""
    if w.d != 1:
        raise ValueError("heat maps are drawn for d = 1 fields")
    x, xi = w.space_grid.axis(0), w.freq_grid.axis(0)
    vals = w.values.real
    if xi_max is not None:
        sel = np.abs(xi) <= xi_max
        xi, vals = xi[sel], vals[:, sel]
    lim = float(np.max(np.abs(vals))) or 1.0
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.pcolormesh(x, xi, vals.T, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="auto")
        fig.colorbar(im, ax=ax, label="Re W")
        ax.set_xlabel("x")
        ax.set_ylabel("xi")
        ax.set_title(title)
        return _save(fig, path)


def plot_function(f: SampledFunction, path, title: str = "") -> Path:
    """|f| (and Re f in d = 1) on its grid."""
    with plt.rc_context(RC):
        if f.dim == 1:
            fig, ax = plt.subplots(figsize=(5, 3))
            x = f.grid.axis(0)
            ax.plot(x, np.abs(f.values), label="|f|")
            ax.plot(x, f.values.real, lw=0.8, label="Re f")
            ax.set_xlabel("x")
            ax.legend()
        else:
            fig, ax = plt.subplots(figsize=(4.5, 4))
            x, y = f.grid.axis(0), f.grid.axis(1)
            im = ax.pcolormesh(x, y, np.abs(f.values).T, cmap="viridis", shading="auto")
            fig.colorbar(im, ax=ax, label="|f|")
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_aspect("equal")
        ax.set_title(title)
        return _save(fig, path)


def plot_sheets(points: np.ndarray, labels: np.ndarray, names: list[str], path, title: str = "") -> Path:
    """Scatter of a lattice coloured by sheet index (-1 is drawn grey)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        off = labels < 0
        ax.scatter(points[off, 0], points[off, 1], s=2, c="0.8", label="S / none")
        for j, name in enumerate(names):
            sel = labels == j
            if np.any(sel):
                ax.scatter(points[sel, 0], points[sel, 1], s=2, label=name)
        ax.set_aspect("equal")
        ax.legend(markerscale=4, fontsize=7)
        ax.set_title(title)
        return _save(fig, path)


def plot_growth(levels, masses, path, title: str = "int |W| over |xi| <= L") -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        ax.semilogx(levels, masses, "o-", base=2)
        ax.set_xlabel("L")
        ax.set_ylabel("mass")
        ax.set_title(title)
        return _save(fig, path)


def plot_acceptance(rows: list[dict], path) -> Path:
    """Worst residual / tolerance per criterion on a log scale (bars below 1 pass)."""
    labels = [f"{r['id']}" for r in rows]
    ratios = [max(float(r.get("worst_ratio", 0.0)), 1e-17) for r in rows]
    colors = ["tab:green" if r["passed"] else "tab:red" for r in rows]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.bar(labels, ratios, color=colors)
        ax.axhline(1.0, color="k", lw=0.8)
        ax.set_yscale("log")
        ax.set_xlabel("criterion")
        ax.set_ylabel("residual / tolerance")
        ax.set_title("Acceptance battery")
        return _save(fig, path)
