"""Static SVG rendering: phase portraits and (d, A) region maps.

Hand-rolled SVG 1.1 so the output is deterministic and diffable; no
timestamps, ids, or library version strings.
"""
from __future__ import annotations

import numpy as np

from .model import ModelParams, Region, equilibria, h_roots, region

__all__ = ["portrait_svg", "region_map_svg"]

_REGION_COLORS = {
    Region.V0_1: "#d9d9d9",
    Region.V0_2: "#bdbdbd",
    Region.V0_3: "#969696",
    Region.V0_4: "#e8e8e8",
    Region.V_ALPHA: "#9ecae1",
    Region.V_BETA: "#fdae6b",
    Region.V_ALPHA_BETA: "#a1d99b",
    Region.BOUNDARY: "#756bb1",
}

_GLYPH_FILL = {
    "StableNode": "#1a558c",
    "StableFocus": "#1a558c",
    "UnstableNode": "#ffffff",
    "UnstableFocus": "#ffffff",
    "Saddle": "#c23b22",
    "NonHyperbolic": "#555555",
}


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".")


class _Canvas:
    def __init__(self, width, height, x_range, y_range, margin=46):
        self.w, self.h, self.m = width, height, margin
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts: list[str] = []

    def px(self, x):
        return self.m + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)

    def py(self, y):
        return self.h - self.m - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)

    def polyline(self, xs, ys, color, width=1.0, dash=None, opacity=1.0):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}"
                       for x, y in zip(xs, ys)
                       if self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1)
        if not pts:
            return
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        op = f' stroke-opacity="{opacity}"' if opacity != 1.0 else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash_attr}{op} points="{pts}"/>')

    def line(self, x0, y0, x1, y1, color, width=1.0, dash=None):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(self.px(x0))}" y1="{_fmt(self.py(y0))}" '
            f'x2="{_fmt(self.px(x1))}" y2="{_fmt(self.py(y1))}" '
            f'stroke="{color}" stroke-width="{width}"{dash_attr}/>')

    def circle(self, x, y, r, fill, stroke="#000000"):
        self.parts.append(
            f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="{r}" '
            f'fill="{fill}" stroke="{stroke}" stroke-width="1"/>')

    def rect_data(self, x, y, w, h, fill):
        self.parts.append(
            f'<rect x="{_fmt(self.px(x))}" y="{_fmt(self.py(y + h))}" '
            f'width="{_fmt(self.px(x + w) - self.px(x))}" '
            f'height="{_fmt(self.py(y) - self.py(y + h))}" fill="{fill}"/>')

    def text(self, x_px, y_px, s, size=12, anchor="middle", color="#000000"):
        self.parts.append(
            f'<text x="{_fmt(x_px)}" y="{_fmt(y_px)}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}" fill="{color}">{s}</text>')

    def axes(self, xlabel, ylabel):
        self.parts.append(
            f'<rect x="{self.m}" y="{self.m}" width="{self.w - 2 * self.m}" '
            f'height="{self.h - 2 * self.m}" fill="none" stroke="#000000"/>')
        for i in range(5):
            xv = self.x0 + i * (self.x1 - self.x0) / 4
            yv = self.y0 + i * (self.y1 - self.y0) / 4
            self.text(self.px(xv), self.h - self.m + 16, f"{xv:.4g}", size=10)
            self.text(self.m - 6, self.py(yv) + 4, f"{yv:.4g}", size=10, anchor="end")
        self.text(self.w / 2, self.h - 8, xlabel)
        self.text(12, self.m - 10, ylabel, anchor="start")

    def document(self):
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">\n'
                f'<rect width="{self.w}" height="{self.h}" fill="#ffffff"/>\n'
                f"{body}\n</svg>\n")


def _decimate(arr: np.ndarray, max_pts: int = 2500) -> np.ndarray:
    if len(arr) <= max_pts:
        return arr
    idx = np.linspace(0, len(arr) - 1, max_pts).astype(int)
    return arr[idx]


def portrait_svg(params: ModelParams, trajectories=(), cycles=None,
                 width: int = 720, height: int = 540,
                 x_range=None, y_range=None) -> str:
    """Phase portrait: prey nullcline y = G(x), the lines x = alpha/beta,
    equilibria glyphs keyed by stability, orbits as polylines, detected
    cycles highlighted."""
    roots = h_roots(params)
    eqs = equilibria(params)
    if x_range is None:
        x_hi = 1.12 * params.K
        x_range = (0.0, x_hi)
    if y_range is None:
        g_max = max(params.G(x) for x in np.linspace(max(0, params.A), params.K, 400))
        y_hi = 1.6 * max(g_max, 1e-9)
        for tr in trajectories:
            if len(tr.samples):
                y_hi = max(y_hi, 1.05 * float(tr.samples[:, 2].max()))
        y_range = (0.0, y_hi)
    cv = _Canvas(width, height, x_range, y_range)

    xs = np.linspace(x_range[0] + 1e-9, x_range[1], 600)
    gs = np.array([params.G(x) for x in xs])
    keep = gs >= 0
    cv.polyline(xs[keep], gs[keep], "#2a7f2a", 1.4)
    if roots is not None:
        alpha, beta = roots
        for xv, dash in ((alpha, "4,3"), (beta, "7,3")):
            if x_range[0] < xv < x_range[1]:
                cv.line(xv, y_range[0], xv, y_range[1], "#888888", 1.0, dash)

    colors = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
    for i, tr in enumerate(trajectories):
        s = _decimate(tr.samples)
        cv.polyline(s[:, 1], s[:, 2], colors[i % len(colors)], 1.1, opacity=0.9)

    if cycles is not None:
        for c in cycles.cycles:
            col = {"Stable": "#0b5394", "Unstable": "#cc0000", "SemiStable": "#38761d"}[c.stability]
            sec = cycles.section
            from .sim import _core  # local import to avoid an import cycle
            st, t, z, samples, ns, hits, nh, wch = _core(
                params, sec.alpha + c.s, sec.y_level, c.period * 1.002, 1e-9,
                store=True, max_samples=400_000)
            s = _decimate(samples)
            cv.polyline(s[:, 1], s[:, 2], col, 2.2)

    for e in eqs:
        x, y = e.location
        if not (x_range[0] <= x <= x_range[1] and y_range[0] <= y <= y_range[1]):
            continue
        kind = e.stability.kind.value
        cv.circle(x, y, 4.5, _GLYPH_FILL.get(kind, "#999999"))
    cv.axes("x (prey)", "y (predator)")
    return cv.document()


def region_map_svg(params_base: ModelParams, d_range, A_range, n_d=80, n_A=80,
                   width: int = 720, height: int = 540,
                   grid=None) -> str:
    """Colored (d, A) region map at fixed (K, a, b); mirrors the existence
    diagram of the interior equilibria."""
    d0, d1 = d_range
    A0, A1 = A_range
    cv = _Canvas(width, height, (d0, d1), (A0, A1))
    dw = (d1 - d0) / n_d
    Aw = (A1 - A0) / n_A
    for i in range(n_d):
        for j in range(n_A):
            dv = d0 + (i + 0.5) * dw
            Av = A0 + (j + 0.5) * Aw
            if grid is not None:
                lab = grid[i][j]
            else:
                try:
                    p = ModelParams(K=params_base.K, A=Av, a=params_base.a,
                                    b=params_base.b, d=dv)
                except Exception:
                    continue
                lab = region(p).region
            cv.rect_data(d0 + i * dw, A0 + j * Aw, dw, Aw,
                         _REGION_COLORS[Region(lab)])
    cv.axes("d (death rate)", "A (threshold)")
    legend_y = 16
    for k, (reg, col) in enumerate(_REGION_COLORS.items()):
        x = 50 + 85 * k
        cv.parts.append(f'<rect x="{x}" y="{legend_y}" width="10" height="10" fill="{col}"/>')
        cv.text(x + 14, legend_y + 9, reg.value, size=9, anchor="start")
    return cv.document()
