#!/usr/bin/env python3
"""Reproduce the two-nested-limit-cycle phase portrait.

Counts the cycles on the return-map section, prints their data, and writes
a portrait SVG with the three reference orbits overlaid.
"""
import pathlib
import sys

from allee4.model import ModelParams, h_roots
from allee4.render import portrait_svg
from allee4.sim import find_cycles, integrate, section_crossings

OUT = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("two_cycles.svg")

params = ModelParams(K=20.0, A=2.0, a=0.004905, b=-0.10891, d=24.28)
alpha, beta = h_roots(params)
print(f"interior roots: alpha = {alpha:.6f}, beta = {beta:.6f} (beta > K: "
      f"{beta > params.K})")

report = find_cycles(params)
print(f"limit cycles: {report.count}")
for c in report.cycles:
    print(f"  s* = {c.s:.8f}  period = {c.period:.6f}  {c.stability:9s} "
          f"|P'| = {c.floquet:.4f}  x in [{c.x_range[0]:.3f}, {c.x_range[1]:.3f}]")

for name, x0, y0 in (("blue  (11, 40)", 11.0, 40.0),
                     ("green (11, 36)", 11.0, 36.0),
                     ("red   (11, 35)", 11.0, 35.0)):
    s, _ = section_crossings(params, x0, y0, n=12)
    trend = "inward" if s[-1] < s[0] else "outward"
    print(f"orbit {name}: spirals {trend} (section coords {s[0]:.4f} -> {s[-1]:.4f})")

orbits = [integrate(params, 11.0, y0, 2.0, tol=1e-9) for y0 in (40.0, 36.0, 35.0)]
OUT.write_text(portrait_svg(params, trajectories=orbits, cycles=report))
print(f"portrait written to {OUT}")
