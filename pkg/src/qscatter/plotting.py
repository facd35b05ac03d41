"""Matplotlib renderings of sweep tables (PNG, PDF or SVG by file suffix)."""
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .serialize import atomic_write  # noqa: E402

AXIS_LABELS = {
    "k": r"$k/u_0$",
    "dk": r"$\Delta k/u_0$",
    "g": r"$g = u_1/u_0$",
}
CURVE_LABELS = {
    "r2": r"$|r|^2$",
    "t2": r"$|t|^2$",
    "sum": r"$|r|^2+|t|^2$",
}
LINESTYLES = ("-", "--", ":", "-.")


def _label(name):
    if name in CURVE_LABELS:
        return CURVE_LABELS[name]
    if name.startswith("eta_e"):
        return rf"$E_{{exc}} = {name[5:]}$"
    return name


def render(path, x_name, x, curves, title=None, markers=()):
    """Save a line figure of ``curves`` against ``x``.

    ``markers`` is an iterable of ``(x, label)`` drawn as vertical guides
    (thresholds, zeros).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=150)
    x = np.asarray(x, dtype=float)
    for i, (name, ys) in enumerate(curves.items()):
        ax.plot(x, np.asarray(ys, dtype=float), LINESTYLES[i % len(LINESTYLES)],
                lw=1.4, label=_label(name))
    for xm, text in markers:
        ax.axvline(xm, color="0.6", lw=0.8, ls="--")
        ax.annotate(text, (xm, 1.0), xycoords=("data", "axes fraction"),
                    xytext=(2, -10), textcoords="offset points", fontsize=7, color="0.4")
    ax.set_xlabel(AXIS_LABELS.get(x_name, x_name))
    ax.set_ylabel(r"$\eta$" if any(n.startswith("eta") for n in curves) else "")
    if title:
        ax.set_title(title, fontsize=10)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.tick_params(labelsize=8)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format=Path(path).suffix.lstrip(".").lower() or "png")
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def render_sweep(path, result, title=None, markers=()):
    curves = {name: result.column(name) for name in result.names}
    render(path, result.x_name, result.column(result.x_name), curves, title, markers)
