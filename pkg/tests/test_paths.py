import numpy as np
import pytest

from boxctl.paths import DeformationPath, SideLaw


@pytest.mark.parametrize(
    "path",
    [
        DeformationPath.static(1.2, 1.0, 3.0),
        DeformationPath.linear(1.2, 0.8, 1.0, 1.1, 2.0),
        DeformationPath.smoothstep(1.2, 0.8, 1.0, 1.3, 2.0, t_start=0.5),
    ],
    ids=["static", "linear", "smoothstep"],
)
def test_builtin_paths_are_consistent(path):
    path.check()


def test_smoothstep_endpoints():
    s = SideLaw.smoothstep(1.2, 0.8, 0.0, 2.0)
    assert s.f(0.0) == 1.2 and s.f(2.0) == pytest.approx(0.8)
    for t in (0.0, 2.0, -1.0, 3.0):
        assert s.fp(t) == 0.0 and s.fpp(t) == 0.0
    assert s.f(1.0) == pytest.approx(1.0)


def test_check_rejects_bad_derivative_and_negative_side():
    bad = DeformationPath(SideLaw(lambda t: 1 + t, lambda t: 2.0, lambda t: 0.0), SideLaw.constant(1.0), 0, 1)
    with pytest.raises(ValueError, match="f1'"):
        bad.check()
    with pytest.raises(ValueError, match="positive"):
        DeformationPath.linear(1.0, -0.5, 1.0, 1.0, 1.0).check()


def test_from_samples_reproduces_cubic_interior():
    t = np.linspace(0, 1, 201)
    law = SideLaw.from_samples(t, 1 + 0.1 * np.sin(t))
    for x in (0.3, 0.5, 0.7):
        assert law.f(x) == pytest.approx(1 + 0.1 * np.sin(x), abs=1e-9)
        assert law.fp(x) == pytest.approx(0.1 * np.cos(x), abs=1e-6)


def test_from_derivative_samples_holds_after_end():
    t = np.linspace(0, 1, 101)
    law = SideLaw.from_derivative_samples(t, 1 + t**2, 2 * t, 2 + 0 * t)
    assert law.f(0.55) == pytest.approx(1 + 0.55**2, abs=1e-12)
    assert law.fp(0.55) == pytest.approx(1.1, abs=1e-12)
    assert law.fpp(0.55) == pytest.approx(2.0)
    assert law.f(5.0) == pytest.approx(2.0) and law.fp(5.0) == 0.0 and law.fpp(5.0) == 0.0


@pytest.mark.parametrize(
    "spec,expect",
    [
        ({"type": "static", "a": 1.5, "b": 0.7, "duration": 2}, (1.5, 0.7, 2.0)),
        ({"type": "linear", "a0": 1.2, "a1": 0.8, "b0": 1, "duration": 4}, (0.8, 1.0, 4.0)),
        ({"type": "smoothstep", "a0": 1.2, "a1": 0.8, "b0": 1, "b1": 2, "duration": 1}, (0.8, 2.0, 1.0)),
        ({"type": "samples", "t": [0, 1, 2], "f1": [1, 1.1, 1.3], "f2": [1, 1, 1]}, (1.3, 1.0, 2.0)),
    ],
)
def test_from_spec(spec, expect):
    p = DeformationPath.from_spec(spec)
    a, b, d = expect
    assert p.sides(p.t_end) == pytest.approx((a, b))
    assert p.duration == pytest.approx(d)


def test_from_spec_unknown_type():
    with pytest.raises(ValueError, match="unknown path type"):
        DeformationPath.from_spec({"type": "spiral"})
