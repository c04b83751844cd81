import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxctl.paths import DeformationPath
from boxctl.spectrum import (
    Mode,
    Rect,
    build_index,
    crossing_times,
    mode_energy,
    resonance_length,
    weyl_count,
)


def brute_force(a, b, count, first=1, nmax=80):
    """Oracle: sort an oversized lattice by (energy, m, n)."""
    modes = [(m, n) for m in range(first, nmax) for n in range(first, nmax)]
    modes.sort(key=lambda mn: (math.pi**2 * (mn[0] ** 2 / a**2 + mn[1] ** 2 / b**2), mn[0], mn[1]))
    return modes[:count]


@pytest.mark.parametrize("boundary,first", [("dirichlet", 1), ("neumann", 0)])
@pytest.mark.parametrize("a,b", [(1.0, 1.0), (math.pi / 2, 1.0), (0.7, 1.3)])
def test_order_matches_brute_force(a, b, boundary, first):
    idx = build_index(Rect(a, b), 300, boundary=boundary)
    got = list(zip(idx.m[:300].tolist(), idx.n[:300].tolist()))
    assert got == brute_force(a, b, 300, first)


@given(
    a=st.floats(0.3, 3.0),
    b=st.floats(0.3, 3.0),
    count=st.integers(1, 200),
)
@settings(max_examples=40, deadline=None)
def test_index_is_sorted_and_exhaustive(a, b, count):
    idx = build_index(Rect(a, b), count)
    assert len(idx) >= count
    assert np.all(np.diff(idx.energy) >= 0)
    # every lattice point below the cutoff is present exactly once
    nmax = int(math.sqrt(idx.cutoff_energy) * max(a, b) / math.pi) + 2
    m, n = np.meshgrid(np.arange(1, nmax), np.arange(1, nmax), indexing="ij")
    e = math.pi**2 * (m**2 / a**2 + n**2 / b**2)
    assert np.count_nonzero(e <= idx.cutoff_energy) == len(idx)
    for r in (1, count, len(idx)):
        assert idx.rank_of(idx.mode_of(r)) == r


def test_square_ties_are_reported():
    idx = build_index(Rect(1.0, 1.0), 3)
    assert (2, 3) in idx.tie_report
    assert {idx.mode_of(2), idx.mode_of(3)} == {Mode(1, 2), Mode(2, 1)}


def test_mode_energy_and_errors():
    assert mode_energy(Rect(1, 1), Mode(1, 1)) == pytest.approx(2 * math.pi**2)
    with pytest.raises(ValueError):
        Rect(-1, 1)
    with pytest.raises(KeyError):
        build_index(Rect(1, 1), 5).rank_of(Mode(100, 100))
    with pytest.raises(ValueError):
        build_index(Rect(1, 1), 5).rank_of(Mode(0, 1))


@pytest.mark.parametrize("boundary", ["dirichlet", "neumann"])
def test_weyl_count_tracks_counting_function(boundary):
    rect = Rect(1.3, 0.9)
    idx = build_index(rect, 20000, boundary=boundary)
    E = idx.energy[19999]
    # two-term Weyl law is accurate to O(sqrt(E)) at most
    assert abs(weyl_count(rect, E, boundary) - 20000) < 3 * math.sqrt(E)


def test_resonance_length():
    assert resonance_length(Mode(3, 1), Mode(1, 2), 1.0) == pytest.approx(math.sqrt(8 / 3))
    assert resonance_length(Mode(2, 1), Mode(1, 2), 1.0) == pytest.approx(1.0)
    assert resonance_length(Mode(2, 2), Mode(1, 1), 1.0) is None
    a = resonance_length(Mode(4, 2), Mode(1, 4), 1.7)
    assert mode_energy(Rect(a, 1.7), Mode(4, 2)) == pytest.approx(mode_energy(Rect(a, 1.7), Mode(1, 4)), rel=1e-14)


def test_crossing_times_linear_path():
    # (2,1) and (1,2) cross at a = b = 1, reached at t = 0.5
    path = DeformationPath.linear(1.2, 0.8, 1.0, 1.0, 1.0)
    found = crossing_times(path, [Mode(2, 1), Mode(1, 2), Mode(1, 1)])
    assert len(found) == 1
    c = found[0]
    assert c.t == pytest.approx(0.5, abs=1e-9)
    assert {c.first, c.second} == {Mode(2, 1), Mode(1, 2)}
    assert c.energy == pytest.approx(5 * math.pi**2)


def test_crossing_times_two_in_one_cell_warns():
    # a narrow dip through a = 1 centred on the midpoint of one coarse cell
    from boxctl.paths import SideLaw

    t = np.linspace(0, 1, 2001)
    f = 1.0 + 0.05 - 0.1 * np.exp(-(((t - 0.5625) / 0.01) ** 2))
    path = DeformationPath(SideLaw.from_samples(t, f), SideLaw.constant(1.0), 0.0, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        found = crossing_times(path, [Mode(2, 1), Mode(1, 2)], samples=8)
    assert len(found) == 2
    assert any("two crossings" in str(w.message) for w in caught)
    assert all(path.f1(c.t) == pytest.approx(1.0, abs=1e-8) for c in found)
