"""Figure output: XY projection of the 30-point three-circle configuration."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .constructions import THREE_CIRCLES, CircleSpec, three_circle_planar  # noqa: E402

_RC = {
    "font.size": 10,
    "axes.linewidth": 0.8,
    "svg.hashsalt": "bellgroth",  # stable element ids -> reproducible SVG bytes
    "svg.fonttype": "none",
}


def three_circle_figure(circles: tuple[CircleSpec, ...] = THREE_CIRCLES, size: float = 4.5):
    pts = three_circle_planar(circles)
    t = np.linspace(0, 2 * np.pi, 721)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(size, size))
        ax.plot(np.cos(t), np.sin(t), color="black", lw=1.2)
        for c in circles:
            ax.plot(c.radius * np.cos(t), c.radius * np.sin(t), color="0.6", lw=0.6, ls="--")
        ax.scatter(pts[:, 0], pts[:, 1], s=18, color="black", zorder=3)
        ax.set_aspect("equal")
        ax.set_xlim(-1.08, 1.08)
        ax.set_ylim(-1.08, 1.08)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.tight_layout()
    return fig


def save_three_circle_figure(path: str | Path, fmt: str | None = None) -> Path:
    path = Path(path)
    fig = three_circle_figure()
    with plt.rc_context(_RC):
        fig.savefig(path, format=fmt, metadata={"Date": None} if (fmt or path.suffix[1:]) == "svg" else None)
    plt.close(fig)
    return path
