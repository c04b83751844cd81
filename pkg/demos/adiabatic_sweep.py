"""Slow rectangular sweep: the mode is followed, and its phase is the integrated energy.

The overlap c with the final mode satisfies 1 - |c| = O(eps^2) while the
leak sqrt(1 - |c|^2) and the phase error against exp(-i Lambda/eps) are O(eps).

Run: python3 demos/adiabatic_sweep.py
"""

import math

from boxctl.evolution import adiabatic_sweep

prev = None
print("eps      1-|c|       leak        phase error")
for eps in (0.1, 0.05, 0.025):
    r = adiabatic_sweep(math.pi / 2, 1.2, 1.0, (2, 1), eps)
    print(f"{eps:<6}   {r.population_error:.3e}   {r.leak:.3e}   {r.phase_error:.3e}")
    if prev is not None:
        print(f"   ratios  {r.population_error / prev.population_error:.3f}       "
              f"{r.leak / prev.leak:.3f}       {r.phase_error / prev.phase_error:.3f}")
    prev = r
