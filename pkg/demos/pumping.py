"""Steer the (2,1) mode of a 1.2 x 1 box into (1,2) by a shrink-and-return cycle.

Outward the quantum numbers are kept through the crossing; on the way back a
small symmetry-breaking potential turns the crossing into an avoided one, so
the rank is kept instead. Without the breaker the state comes back unchanged.

Run: python3 demos/pumping.py            (about 1 minute)
"""

from boxctl.evolution import find_split_speed, run_pumping
from boxctl.spectrum import Mode

START, PARTNER = Mode(2, 1), Mode(1, 2)

print("speed   P(1,2) breaker on   P(2,1) breaker off")
for speed in (0.16, 0.08, 0.04):
    on = run_pumping(1.2, 0.8, 1.0, START, speed)
    off = run_pumping(1.2, 0.8, 1.0, START, speed, breaker_return=False)
    print(f"{speed:5.2f}   {on.population(PARTNER):17.4f}   {off.population(START):18.10f}")

print(f"breaker strength {on.breaker_strength:.3f}, crossing at t = {on.crossings[0].t:.3f}")

# scale the breaker between the two motions to share the population evenly
split = find_split_speed(1.2, 0.8, 1.0, START, 2**-0.5, speed=0.04)
print(f"even split at breaker scale s = {split.s:.4f}: P(1,2) = {split.population_partner:.3f}, "
      f"P(2,1) = {split.population_start:.3f}")
