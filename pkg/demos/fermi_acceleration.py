"""Eigenstate permutation of a stretch-and-return cycle and its entropy growth.

Run: python3 demos/fermi_acceleration.py
"""

import math

from boxctl.permutation import (
    build_sigma,
    entropy_closed_form,
    entropy_integral,
    find_periodic_orbits,
    iterate_orbit,
    mean_entropy_increase,
    table_size_for,
)

a = math.pi / 2
a_tilde = a / 3

# Neumann lattice with 0-based ranks; labels certified past rank 370800
table = build_sigma(a, a_tilde, table_size_for(370_800, 0), boundary="neumann", rank_base=0)
print(f"table certified on labels {table.rank_base}..{table.valid_to}")

dE = mean_entropy_increase(table, 100_000)
print(f"mean entropy increase over 1e5 labels: {dE:.5f}")
print(f"integral prediction: {entropy_integral(a, a_tilde):.5f} (closed form {entropy_closed_form(a, a_tilde):.5f})")

cycles = find_periodic_orbits(table, 100_000, 30)
print(f"{len(cycles)} cycles below label 1e5:")
for c in cycles:
    print("  ", c)

# a typical orbit escapes: ranks grow roughly geometrically
rec = iterate_orbit(table, 1000, 60)
print(f"orbit of 1000: {rec.status} after {len(rec.trajectory)} steps, growth rate {rec.growth_rate():.3f}")
