#!/usr/bin/env python3
"""Render the (d, A) existence/region map at fixed (K, a, b)."""
import pathlib
import sys

from allee4.model import ModelParams
from allee4.render import region_map_svg

OUT = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("region_map.svg")

base = ModelParams(K=20.0, A=2.0, a=0.004905, b=-0.10891, d=24.28)
d_hi = 1.15 * base.d_m
svg = region_map_svg(base, (1.0, d_hi), (-0.9 * base.K, 0.9 * base.K),
                     n_d=140, n_A=140)
OUT.write_text(svg)
print(f"region map written to {OUT} (d up to {d_hi:.3f}, fold at d_m = {base.d_m:.3f})")
