import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

import oracles as O
from torus_entropy import hyperbolic as H


def test_right_angle_all_sides_equal():
    Ls = H.boundary_lengths(H.PentagonParams(1.3, 2.1, math.pi / 2))
    assert np.allclose(Ls[:4], Ls[0], rtol=1e-14)
    assert math.isclose(math.cosh(Ls[0]), math.sinh(1.3) * math.sinh(2.1), rel_tol=1e-12)


@pytest.mark.parametrize("a", [1.0, 1.5])
def test_symmetric_examples(a):
    Ls = H.boundary_lengths(H.PentagonParams(a, a, math.pi / 2))
    want = O.symmetric_pentagon_side(a)
    assert math.isclose(Ls[0], want, rel_tol=1e-12)
    assert math.isclose(Ls[4], 2 * want, rel_tol=1e-12)


def test_pentagon_numeric_values():
    assert math.isclose(H.boundary_lengths(H.PentagonParams(1.5, 1.5, math.pi / 2))[0], 2.19232,
                        abs_tol=1e-5)
    assert math.isclose(H.boundary_lengths(H.PentagonParams(1, 1, math.pi / 2))[0], 0.84745,
                        abs_tol=1e-5)


def test_no_pentagon_error():
    with pytest.raises(ValueError, match="no right-angled pentagon"):
        H.boundary_lengths(H.PentagonParams(0.5, 0.5, math.pi / 2))


_params = st.tuples(st.floats(0.8, 5), st.floats(0.8, 5), st.floats(0.05, math.pi - 0.05))


def _valid(a, b, g):
    try:
        H.boundary_lengths(H.PentagonParams(a, b, g))
        return True
    except ValueError:
        return False


@given(_params)
def test_pentagon_invariants(p):
    a, b, g = p
    assume(_valid(a, b, g) and _valid(a, b, math.pi - g))
    L1, L2, L3, L4, L = H.boundary_lengths(H.PentagonParams(a, b, g))
    assert L1 == L3 and L2 == L4
    assert math.isclose(L, (L1 + L2 + L3 + L4) / 2, rel_tol=1e-14)
    swapped = H.boundary_lengths(H.PentagonParams(b, a, g))
    assert np.allclose(swapped, (L1, L2, L3, L4, L), rtol=1e-12)
    M1, M2, M3, M4, _ = H.boundary_lengths(H.PentagonParams(a, b, math.pi - g))
    assert np.allclose((M1, M3, M2, M4), (L2, L4, L1, L3), rtol=1e-12)


def test_entropy_bound_symmetric():
    assert abs(H.entropy_lower_bound(2, 2) - 0.54931) < 1e-5
    for a in np.linspace(0.2, 10, 30):
        assert abs(H.entropy_lower_bound(a, a) - math.log(3) / a) < 1e-10


def test_entropy_bound_monotone_and_bracketed():
    vals = [H.entropy_lower_bound(a, 2.0) for a in np.linspace(0.5, 8, 40)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    h = H.entropy_lower_bound(1, 4)
    assert math.log(3) / 4 < h < math.log(3)


@given(st.floats(0.05, 20), st.floats(0.05, 20))
def test_entropy_bound_solves_equation(a, b):
    h = H.entropy_lower_bound(a, b)
    lhs = 1 / (1 + math.exp(h * a)) + 1 / (1 + math.exp(h * b))
    assert abs(lhs - 0.5) < 1e-9


def test_hdim_formula_examples():
    assert math.isclose(H.contraction_ratio(3), 0.0521367, abs_tol=1e-6)
    assert round(H.schottky_hdim_formula(3), 4) == 0.3719
    r = (1 + O.mp.e**3) / (1 + O.mp.e**6)
    assert math.isclose(H.schottky_hdim_formula(3), float(-O.mp.log(3) / O.mp.log(r)), rel_tol=1e-13)
    assert abs(20 * H.schottky_hdim_formula(20) / math.log(3) - 1) < 0.02
    vals = [H.schottky_hdim_formula(a) for a in np.linspace(2, 10, 33)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        H.schottky_hdim_formula(0.5)


def test_ping_pong_regime():
    assert H.SchottkyParams(2).ping_pong()
    assert not H.SchottkyParams(0.3).ping_pong()
    with pytest.raises(ValueError, match="not in Schottky regime"):
        H.limit_set_dimension_oracle(H.SchottkyParams(0.3), depth=6)


def test_orbit_points_on_circle_and_distinct():
    th = H.orbit_angles(H.SchottkyParams(2), 6)
    assert th.size == 4 * 3**5
    assert np.unique(np.round(th, 12)).size == th.size


def test_oracle_decreasing():
    vals = [H.limit_set_dimension_oracle(H.SchottkyParams(a), depth=10) for a in (2, 3, 4)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_oracle_and_critical_exponent_agree():
    for a in (2, 3, 4):
        p = H.SchottkyParams(a)
        box = H.limit_set_dimension_oracle(p, depth=10)
        crit = H.critical_exponent(p, depth=10)
        assert abs(box - crit) < 0.2 * crit


def test_oracle_depth_guards():
    p = H.SchottkyParams(3)
    with pytest.raises(ValueError, match="insufficient sample"):
        H.limit_set_dimension_oracle(p, depth=1)
    with pytest.raises(ValueError):
        H.limit_set_dimension_oracle(p, depth=13)


def test_scan_symmetric_slice():
    a = np.linspace(1, 6, 11)
    rows = [H.teichmuller_scan([x], [x], [math.pi / 2])[0][0] for x in a]
    L = [r[3] for r in rows]
    h = [r[4] for r in rows]
    assert all(y > x for x, y in zip(L, L[1:]))
    assert all(y < x for x, y in zip(h, h[1:]))
    assert np.allclose(h, np.log(3) / a, atol=1e-10)


def test_scan_excludes_invalid_points():
    rows, excluded = H.teichmuller_scan([0.5, 2.0], [0.5, 2.0], [math.pi / 2])
    assert excluded == 1 and len(rows) == 3


def test_scan_default_grid_threshold_monotone():
    rows, _ = H.teichmuller_scan(np.linspace(0.8, 8, 13), np.linspace(0.8, 8, 13),
                                 np.linspace(0.2, math.pi - 0.2, 7))
    assert len(rows) > 100


def test_scan_empty_grid():
    with pytest.raises(ValueError):
        H.teichmuller_scan([0.1], [0.1], [math.pi / 2])
