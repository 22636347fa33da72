"""Static figures for density sections and the caustic/front overlay.

Uses the object-oriented matplotlib API with the Agg canvas so that nothing
depends on a display or on pyplot's global state.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
}

# no timestamps or version strings in the files, so reruns are byte-identical
_PNG_META = {"Software": None}


def _figure(width: float, height: float) -> Figure:
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(width, height), dpi=150)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata=_PNG_META if path.suffix.lower() == ".png" else None)
    return path


def density_sections_figure(sections, path, rho_max=None) -> Path:
    """One panel per time; ``sections`` is a list of ``(t, array[n, 3])`` with columns x, rho, u."""
    n = len(sections)
    fig = _figure(3.2 * n, 2.8)
    axes = fig.subplots(1, n, squeeze=False)[0]
    for ax, (t, prof) in zip(axes, sections):
        prof = np.asarray(prof)
        ax.plot(prof[:, 0], prof[:, 1], color="k")
        ax.set_title(f"t = {t:.4g}")
        ax.set_xlabel("x")
        if rho_max is not None:
            ax.set_ylim(0.0, rho_max)
        ax.grid(alpha=0.3, lw=0.5)
    axes[0].set_ylabel(r"$\rho$")
    fig.tight_layout()
    return _save(fig, path)


def front_figure(caustics, front, cusp, path) -> Path:
    """Caustic branches as lines and front samples as points in the (x, t) plane."""
    fig = _figure(4.5, 3.6)
    ax = fig.add_subplot(1, 1, 1)
    for i, cc in enumerate(caustics):
        ax.plot(cc.x, cc.t, color="tab:blue", label="caustic" if i == 0 else None)
    if front is not None and len(front):
        ax.plot(front.x, front.t, "o", ms=2.5, color="tab:red", label="shock front")
    ax.plot([cusp.x], [cusp.t], "k^", ms=5, label="cusp")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.legend(frameon=False, loc="upper left")
    ax.grid(alpha=0.3, lw=0.5)
    fig.tight_layout()
    return _save(fig, path)
