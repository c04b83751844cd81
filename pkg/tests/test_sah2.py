import math

import numpy as np
import pytest
from scipy.integrate import quad

from boxctl.sah2 import (
    BoundaryDeformation,
    functional_rank,
    normal_derivative,
    signed_functional,
    table_closed_form,
    verify_table,
)
from boxctl.spectrum import Mode, Rect, resonance_length

PAIRS = [((3, 1), (1, 2)), ((2, 1), (1, 2)), ((3, 1), (1, 3)), ((4, 2), (1, 4))]


def quad_functional(k, l, rect, g):
    """Edge-by-edge adaptive quadrature with hand-written normals."""
    a, b = rect.a, rect.b

    def grad(mode, x1, x2):
        m, n = mode
        amp = 2 / math.sqrt(a * b)
        return (
            amp * m * math.pi / a * math.cos(m * math.pi * x1 / a) * math.sin(n * math.pi * x2 / b),
            amp * n * math.pi / b * math.sin(m * math.pi * x1 / a) * math.cos(n * math.pi * x2 / b),
        )

    edges = [
        (lambda s: (0.0, s), (-1, 0), b),
        (lambda s: (a, s), (1, 0), b),
        (lambda s: (s, 0.0), (0, -1), a),
        (lambda s: (s, b), (0, 1), a),
    ]
    total = 0.0
    for pt, nu, L in edges:
        def integrand(s):
            x1, x2 = pt(s)
            gk, gl = grad(k, x1, x2), grad(l, x1, x2)
            dk = gk[0] * nu[0] + gk[1] * nu[1]
            dl = gl[0] * nu[0] + gl[1] * nu[1]
            v = g.field(np.array(x1), np.array(x2))
            return dk * dl * (float(v[0]) * nu[0] + float(v[1]) * nu[1])

        total += quad(integrand, 0, L, limit=200, epsabs=1e-12)[0]
    return total


@pytest.mark.parametrize("gid", ["g1", "g2", "g3", "g4", "g5"])
@pytest.mark.parametrize("b", [1.0, 1.7])
def test_gauss_legendre_matches_adaptive_quadrature(gid, b):
    k, l = Mode(3, 1), Mode(1, 2)
    rect = Rect(resonance_length(k, l, b), b)
    g = BoundaryDeformation.table(gid, rect)
    for p, q in [(k, k), (l, l), (k, l)]:
        assert signed_functional(p, q, rect, g) == pytest.approx(quad_functional(p, q, rect, g), rel=1e-10, abs=1e-10)


def test_quadrature_is_converged():
    k, l = Mode(4, 2), Mode(1, 4)
    rect = Rect(resonance_length(k, l, 1.0), 1.0)
    g = BoundaryDeformation.table("g5", rect)
    assert signed_functional(k, l, rect, g, 64) == pytest.approx(signed_functional(k, l, rect, g, 256), rel=1e-13)


def test_normal_derivative_on_unit_square():
    rect = Rect(1.0, 1.0)
    assert normal_derivative(Mode(1, 1), rect, "right", 0.5) == pytest.approx(-2 * math.pi)
    assert normal_derivative(Mode(1, 1), rect, "left", 0.5) == pytest.approx(-2 * math.pi)
    assert normal_derivative(Mode(1, 1), rect, "top", 0.5) == pytest.approx(-2 * math.pi)
    with pytest.raises(ValueError):
        normal_derivative(Mode(1, 1), rect, "diagonal", 0.5)


@pytest.mark.parametrize("k,l", PAIRS)
def test_table_reproduced_and_rank_three_at_b_one(k, l):
    rep = verify_table(k, l, 1.0)
    assert rep.mismatches == []
    assert rep.rank == 3
    assert rep.rel1_holds
    assert rep.ok
    assert np.all(rep.closed_form_errors <= 1e-8 * np.maximum(rep.closed_form, 1e-2))


@pytest.mark.parametrize("k,l", PAIRS)
def test_cross_term_parity_rule(k, l):
    rect = Rect(resonance_length(Mode(*k), Mode(*l), 1.0), 1.0)
    same = (k[1] - l[1]) % 2 == 0
    g3 = signed_functional(Mode(*k), Mode(*l), rect, BoundaryDeformation.table("g3", rect))
    g4 = signed_functional(Mode(*k), Mode(*l), rect, BoundaryDeformation.table("g4", rect))
    assert (abs(g3) < 1e-10) == same
    assert (abs(g4) < 1e-10) == (not same)


def test_table_b_factors_disagree_off_unit_height():
    # the tilt cross term carries an extra factor b in the closed form
    rep = verify_table((3, 1), (1, 2), 1.7)
    assert any(m.startswith("g3/I_kl") for m in rep.mismatches)
    j = rep.deformations.index("g3")
    assert rep.closed_form[2, j] / rep.I_matrix[2, j] == pytest.approx(1.7, rel=1e-10)


def test_report_dict_and_errors():
    d = verify_table((3, 1), (1, 2)).to_dict()
    assert d["rank"] == 3 and len(d["I_matrix"]) == 3 and d["rank_over"] == ["g1", "g2", "g3", "g4"]
    with pytest.raises(ValueError):
        verify_table((2, 2), (1, 1))
    with pytest.raises(ValueError):
        BoundaryDeformation.table("g9", Rect(1, 1))
    assert table_closed_form("g1", "kl", Mode(3, 1), Mode(1, 2), Rect(1, 1)) == 0.0


def test_functional_rank():
    assert functional_rank(np.zeros((3, 4)))[0] == 0
    assert functional_rank(np.eye(3)[:, [0, 1, 1]])[0] == 2


def resonances(max_index=5, b=1.0):
    modes = [Mode(m, n) for m in range(1, max_index + 1) for n in range(1, max_index + 1)]
    for i, k in enumerate(modes):
        for l in modes[i + 1:]:
            if resonance_length(k, l, b) is not None:
                yield k, l


def test_every_small_resonance_has_rank_three_and_parity_zeros():
    pairs = list(resonances())
    assert len(pairs) > 20
    for k, l in pairs:
        rep = verify_table(k, l, 1.0)
        assert rep.rank == 3, (k, l)
        assert rep.rel1_holds, (k, l)
        same = (k.n - l.n) % 2 == 0
        zero_col = "g3" if same else "g4"
        assert abs(rep.signed_matrix[2, rep.deformations.index(zero_col)]) < 1e-10, (k, l)


@pytest.mark.parametrize("edge", ["left", "right", "bottom", "top"])
@pytest.mark.parametrize("mode", [(1, 1), (3, 2), (2, 5)])
def test_normal_derivative_against_finite_difference(edge, mode):
    rect = Rect(1.3, 0.8)
    m, n = mode
    amp = 2 / math.sqrt(rect.a * rect.b)
    phi = lambda x1, x2: amp * math.sin(m * math.pi * x1 / rect.a) * math.sin(n * math.pi * x2 / rect.b)  # noqa: E731
    L = rect.b if edge in ("left", "right") else rect.a
    s = 0.37 * L
    h = 1e-5
    # one-sided difference from inside, extrapolated to second order
    if edge == "right":
        fd = (3 * phi(rect.a, s) - 4 * phi(rect.a - h, s) + phi(rect.a - 2 * h, s)) / (2 * h)
    elif edge == "left":
        fd = (3 * phi(0, s) - 4 * phi(h, s) + phi(2 * h, s)) / (2 * h)
    elif edge == "top":
        fd = (3 * phi(s, rect.b) - 4 * phi(s, rect.b - h) + phi(s, rect.b - 2 * h)) / (2 * h)
    else:
        fd = (3 * phi(s, 0) - 4 * phi(s, h) + phi(s, 2 * h)) / (2 * h)
    assert normal_derivative(Mode(*mode), rect, edge, s) == pytest.approx(fd, abs=1e-6)
    assert abs(normal_derivative(Mode(*mode), rect, edge, 0.0)) < 1e-12
    assert abs(normal_derivative(Mode(*mode), rect, edge, L)) < 1e-9
