"""Boundary functionals at a double eigenvalue and their rank.

At a = sqrt(8/3), b = 1 the modes (3,1) and (1,2) share an eigenvalue. Five
boundary deformations are tested; three independent functionals mean the
double eigenvalue can be split in every direction needed.

Run: python3 demos/boundary_functionals.py
"""

import numpy as np

from boxctl.sah2 import verify_table

rep = verify_table((3, 1), (1, 2), 1.0)
print(f"resonance at a = {rep.a:.12f}")
print("        " + "".join(f"{g:>12}" for g in rep.deformations))
for row, vals in zip(rep.ROWS, rep.I_matrix):
    print(f"I_{row}    " + "".join(f"{v:12.6f}" for v in vals))
print(f"max deviation from closed forms: {rep.closed_form_errors.max():.1e}")
print(f"rank over g1..g4: {rep.rank}, singular values {np.array2string(rep.singular_values, precision=3)}")

# at other heights the closed forms for the tilt and bend cross terms pick up factors of b
print(verify_table((3, 1), (1, 2), 1.7).mismatches)
