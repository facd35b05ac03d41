"""Minimal SVG line charts: 800x600 viewBox, one polyline per curve."""
import math
import xml.etree.ElementTree as ET

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=80, right=170, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
N_TICKS = 5


def _range(values):
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        pad = abs(lo) * 0.05 or 0.5
        return lo - pad, hi + pad
    return lo, hi


def _tick_label(v):
    return f"{v:.3g}"


def line_chart(x, curves, x_label="x", y_label="y", title=None):
    """Render ``curves`` (name -> y values over ``x``) and return the SVG text.

    Non-finite points are dropped from their polyline.
    """
    x = [float(v) for v in x]
    x_lo, x_hi = _range(x)
    y_lo, y_hi = _range([float(v) for ys in curves.values() for v in ys])

    left, top = MARGIN["left"], MARGIN["top"]
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return top + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     viewBox=f"0 0 {WIDTH} {HEIGHT}", width=str(WIDTH), height=str(HEIGHT))
    ET.SubElement(svg, "rect", x="0", y="0", width=str(WIDTH), height=str(HEIGHT), fill="white")
    if title:
        ET.SubElement(svg, "text", x=str(WIDTH / 2), y="24",
                      **{"text-anchor": "middle", "font-size": "16"}).text = title

    axes = ET.SubElement(svg, "g", stroke="black", fill="none")
    ET.SubElement(axes, "line", x1=str(left), y1=str(top + plot_h),
                  x2=str(left + plot_w), y2=str(top + plot_h))
    ET.SubElement(axes, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(top + plot_h))

    labels = ET.SubElement(svg, "g", **{"font-size": "12", "font-family": "sans-serif"})
    for v in np.linspace(x_lo, x_hi, N_TICKS):
        px = sx(v)
        ET.SubElement(axes, "line", x1=f"{px:.2f}", y1=str(top + plot_h),
                      x2=f"{px:.2f}", y2=str(top + plot_h + 6))
        ET.SubElement(labels, "text", x=f"{px:.2f}", y=str(top + plot_h + 22),
                      **{"text-anchor": "middle", "class": "xtick"}).text = _tick_label(v)
    for v in np.linspace(y_lo, y_hi, N_TICKS):
        py = sy(v)
        ET.SubElement(axes, "line", x1=str(left - 6), y1=f"{py:.2f}", x2=str(left), y2=f"{py:.2f}")
        ET.SubElement(labels, "text", x=str(left - 10), y=f"{py + 4:.2f}",
                      **{"text-anchor": "end", "class": "ytick"}).text = _tick_label(v)
    ET.SubElement(labels, "text", x=str(left + plot_w / 2), y=str(HEIGHT - 15),
                  **{"text-anchor": "middle"}).text = x_label
    ET.SubElement(labels, "text", x="20", y=str(top + plot_h / 2),
                  transform=f"rotate(-90 20 {top + plot_h / 2})",
                  **{"text-anchor": "middle"}).text = y_label

    legend = ET.SubElement(svg, "g", **{"font-size": "12", "font-family": "sans-serif"})
    for i, (name, ys) in enumerate(curves.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(a):.3f},{sy(b):.3f}" for a, b in zip(x, ys)
                       if math.isfinite(a) and math.isfinite(float(b)))
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color,
                      **{"stroke-width": "1.5", "data-name": name})
        ly = top + 10 + 20 * i
        lx = left + plot_w + 15
        ET.SubElement(legend, "line", x1=str(lx), y1=str(ly), x2=str(lx + 25), y2=str(ly),
                      stroke=color, **{"stroke-width": "2"})
        ET.SubElement(legend, "text", x=str(lx + 32), y=str(ly + 4)).text = name

    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(svg, encoding="unicode") + "\n"
