"""Matplotlib figures for bricks, renders and exponent distributions.

Figures are built on :class:`matplotlib.figure.Figure` with the Agg canvas,
so nothing touches pyplot's global state.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _new_figure(size=(6, 6)):
    fig = Figure(figsize=size)
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(111)


def _save(fig, path, dpi=150):
    fig.savefig(path, dpi=dpi, bbox_inches="tight", metadata={"Software": None})


def brick_figure(path, polylines, oracle=None, title=None, highlight=None):
    """Assembled copies in black, optional oracle cloud in grey, the brick itself in red."""
    fig, ax = _new_figure()
    if oracle is not None:
        pts = np.asarray(oracle)
        ax.plot(pts.real, pts.imag, ",", color="0.7", zorder=1)
    for line in polylines:
        ax.plot(line.points.real, line.points.imag, "-", color="k", lw=0.4, zorder=2)
    if highlight is not None:
        ax.plot(highlight.points.real, highlight.points.imag, "-", color="tab:red", lw=1.2, zorder=3)
        c = highlight.points[len(highlight) // 2]
        ax.plot([c.real], [c.imag], "o", color="tab:red", ms=3, zorder=4)
    ax.set_aspect("equal")
    ax.set_xlabel("Re x")
    ax.set_ylabel("Im x")
    if title:
        ax.set_title(title)
    _save(fig, path)


def raster_figure(path, image, title=None):
    fig, ax = _new_figure()
    re0, re1, im0, im1 = image.window
    cmap = None if image.pixels.ndim == 3 else "gray"
    ax.imshow(image.pixels, cmap=cmap, vmin=0, vmax=255, extent=(re0, re1, im0, im1),
              interpolation="nearest")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    _save(fig, path)


def distribution_figure(path, dist, D=None):
    """``mu_n`` and ``Phi_n`` of the exponent distribution, with ``-D s`` tangent if given."""
    fig = Figure(figsize=(9, 4))
    FigureCanvasAgg(fig)
    ax1, ax2 = fig.add_subplot(121), fig.add_subplot(122)
    s = dist.grid()
    ax1.step(s, dist.mu(s), where="post", color="k")
    ax1.set_xlabel("beta")
    ax1.set_ylabel(f"mu_{dist.n}")
    phi = dist.Phi(s)
    finite = np.isfinite(phi)
    ax2.plot(s[finite], phi[finite], color="k", lw=1)
    if D is not None:
        val = -D * s - phi
        k = int(np.argmax(np.where(finite, val, -np.inf)))
        ax2.plot(s[finite], -D * s[finite] - val[k], "--", color="tab:blue", lw=0.8,
                 label=f"slope -{D:.4f}")
        ax2.legend(loc="upper right")
    ax2.set_xlabel("beta")
    ax2.set_ylabel(f"Phi_{dist.n}")
    fig.tight_layout()
    _save(fig, path)
