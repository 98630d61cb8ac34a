#!/usr/bin/env python3
"""Three nested limit cycles around a repelling interior focus.

The parameter set is constructed by perturbing the first/third/fifth
return-map coefficients away from the codimension-3 degenerate-Hopf root
at (K, A) = (10.5, -0.5); the target cycle amplitudes follow from the
roots of B1 + B3 u + B5 u^2 + B7 u^3 (u = s^2).  The reference set
(a = 0.01809954751, b = -0.1809954751, d = 8.99) at the same (K, A) is
counted alongside for comparison: it carries a single stable cycle.
"""
import pathlib
import sys

from allee4.model import ModelParams, h_roots
from allee4.render import portrait_svg
from allee4.sim import find_cycles, _gprime

OUT = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path("three_cycles.svg")

three = ModelParams(K=10.5, A=-0.5, a=0.013131587070323228,
                    b=-0.16314440078718166, d=5.3741989657594635)
reference = ModelParams(K=10.5, A=-0.5, a=0.01809954751, b=-0.1809954751, d=8.99)

for name, p in (("constructed", three), ("reference", reference)):
    rep = find_cycles(p, tol=1e-11, n_seed=300)
    alpha = h_roots(p)[0]
    print(f"{name}: alpha = {alpha:.6f}, G'(alpha) = {_gprime(p, alpha):+.3e}, "
          f"cycles = {rep.count} {rep.stabilities}")
    for c in rep.cycles:
        print(f"    s* = {c.s:.8f}  period = {c.period:.5f}  {c.stability:9s} "
              f"|P'| = {c.floquet:.8f}")

rep = find_cycles(three, tol=1e-11, n_seed=300)
OUT.write_text(portrait_svg(three, cycles=rep))
print(f"portrait written to {OUT}")
