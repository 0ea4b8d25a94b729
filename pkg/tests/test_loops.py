import numpy as np
import pytest
from hypothesis import given, strategies as st

from torus_entropy import loops as L
from torus_entropy.cli import HEAD_CLASSES, head_encircling_loop
from torus_entropy.metric import (
    ConformalSpec, MetricField, NeckSpec, build_neck_metric, bump_u, c0_distance,
    conformal_perturbation,
)

FLAT = MetricField.flat(8)
BUMP_U = ConformalSpec.from_function(bump_u(0.1), 32)
BUMP = BUMP_U.metric()
WAIST = ConformalSpec.from_function(lambda x, y: 0.3 * np.cos(2 * np.pi * y), 32).metric()


# -- length and energy ------------------------------------------------------

def test_flat_straight_examples():
    lp = L.DiscreteLoop.straight((1, 0))
    assert np.isclose(L.loop_length(FLAT, lp), 1, atol=1e-14)
    assert np.isclose(L.loop_energy(FLAT, lp), 0.5, atol=1e-14)
    assert np.isclose(L.loop_length(FLAT, L.DiscreteLoop.straight((2, 3))), np.sqrt(13), atol=1e-14)


@given(st.floats(0.1, 20), st.floats(0, 0.1))
def test_length_scaling(C, amp):
    lp = L.DiscreteLoop.wavy((1, 2), 32, amplitudes=(amp,))
    assert abs(L.loop_length(BUMP.scaled(C), lp) - np.sqrt(C) * L.loop_length(BUMP, lp)) \
        <= 1e-12 * np.sqrt(C) * L.loop_length(BUMP, lp)


def test_loop_validation():
    with pytest.raises(ValueError):
        L.DiscreteLoop(np.zeros((4, 2)), (1, 0))
    with pytest.raises(ValueError):
        L.DiscreteLoop.straight((8, 0), M=8)
    with pytest.raises(ValueError):
        L.DiscreteLoop(np.zeros((8, 2)), (0.5, 0))


@given(st.lists(st.floats(-0.1, 0.1), min_size=3, max_size=3), st.integers(0, 3))
def test_energy_at_least_half_length_squared(amps, k):
    w = [(1, 0), (0, 1), (1, 1), (2, -1)][k]
    lp = L.DiscreteLoop.wavy(w, 48, amplitudes=amps)
    E, Ln = L.loop_energy(BUMP, lp), L.loop_length(BUMP, lp)
    assert E >= Ln * Ln / 2 - 1e-12


def test_energy_equals_half_length_squared_after_respacing():
    # a straight loop with uneven vertex spacing: strict inequality before, equality after
    t = np.arange(64) / 64
    t = t + 0.05 * np.sin(2 * np.pi * t)
    lp = L.DiscreteLoop(t[:, None] * np.array([1.0, 1.0]), (1, 1))
    E, Ln = L.loop_energy(FLAT, lp), L.loop_length(FLAT, lp)
    assert E - Ln * Ln / 2 > 1e-4
    lp = L.DiscreteLoop(L._respace(FLAT, lp.vertices, lp.winding), lp.winding)
    E, Ln = L.loop_energy(FLAT, lp), L.loop_length(FLAT, lp)
    assert abs(E - Ln * Ln / 2) < 1e-10
    assert np.ptp(L.speeds(FLAT, lp)) < 1e-8


# -- shortening --------------------------------------------------------------

def test_wavy_loop_straightens():
    lp = L.DiscreteLoop.wavy((1, 0), 32, amplitudes=(0.08, 0.03))
    res = L.shorten(FLAT, lp, record=True)
    assert res.converged and not res.collapsed
    assert abs(res.length - 1) < 1e-4
    assert res.loop.winding == (1, 0)
    assert all(b <= a for a, b in zip(res.energies, res.energies[1:]))


def test_small_circle_collapses():
    res = L.shorten(FLAT, L.DiscreteLoop.circle((0.5, 0.5), 0.1))
    assert res.collapsed


@given(st.integers(0, 2 ** 16))
def test_shorten_monotone_and_keeps_winding(seed):
    rng = np.random.default_rng(seed)
    w = [(1, 0), (0, 1), (1, 1), (1, -2)][seed % 4]
    lp = L.DiscreteLoop.wavy(w, 32, rng.uniform(0, 1, 2), rng.uniform(-0.05, 0.05, 3))
    res = L.shorten(BUMP, lp, max_iters=300, record=True)
    assert res.loop.winding == w
    assert all(b <= a for a, b in zip(res.energies, res.energies[1:]))
    assert res.energy <= L.loop_energy(BUMP, lp)


def test_min_length_flat_class():
    _, length = L.min_length_in_class(FLAT, (2, 3), n_starts=4, seed=1)
    assert abs(length - np.sqrt(13)) < 1e-4


def test_min_length_bump_sandwich():
    # d_C0(flat, bump) = 2 |u|_inf, so lengths differ by at most a factor e^{|u|_inf}
    _, length = L.min_length_in_class(BUMP, (1, 0), n_starts=4, seed=0)
    s = BUMP_U.sup_norm
    assert np.exp(-s) - 1e-9 <= length <= np.exp(s) + 1e-9


def test_doubling_monotone():
    _, l1 = L.min_length_in_class(BUMP, (1, 0), n_starts=4, seed=0)
    _, l2 = L.min_length_in_class(BUMP, (2, 0), n_starts=4, seed=0, M=64)
    assert l2 <= 2 * l1 + 1e-4


def test_min_length_deterministic():
    a = L.min_length_in_class(BUMP, (1, 1), n_starts=2, seed=5)
    b = L.min_length_in_class(BUMP, (1, 1), n_starts=2, seed=5)
    assert np.array_equal(a[0].vertices, b[0].vertices) and a[1] == b[1]


def test_contractible_class_needs_constraint():
    with pytest.raises(ValueError):
        L.min_length_in_class(FLAT, (0, 0))
    with pytest.raises(RuntimeError):
        L.min_length_in_class(FLAT, (0, 0), n_starts=2, project=lambda V: V)


@given(st.integers(0, 2 ** 16), st.floats(0.005, 0.1))
def test_c0_energy_sandwich(seed, delta):
    rng = np.random.default_rng(seed)
    mp = conformal_perturbation(BUMP, delta, rng)
    d = c0_distance(BUMP, mp)
    lp = L.DiscreteLoop.wavy((1, 1), 32, rng.uniform(0, 1, 2), rng.uniform(-0.1, 0.1, 2))
    E, Ep = L.loop_energy(BUMP, lp), L.loop_energy(mp, lp)
    # the energy quadrature samples midpoints off the C0 grid, allow that slack
    slack = 1e-3
    assert np.exp(-d - slack) * E - 1e-9 <= Ep <= np.exp(d + slack) * E + 1e-9


# -- necks ------------------------------------------------------------------

@pytest.fixture(scope="module")
def neck():
    spec = NeckSpec()
    return spec, build_neck_metric(MetricField.flat(8), spec)


@pytest.mark.parametrize("w", HEAD_CLASSES[:4])
def test_neck_minimizer_stays_outside_V1(neck, w):
    spec, m = neck
    c = np.array(spec.centers[0])
    lp = head_encircling_loop(c, w, 0.5 * (spec.r_U + spec.r_V1))
    res = L.shorten(m, lp, max_iters=20000, project=L.disc_avoider(spec.centers, spec.r_U))
    d = res.loop.vertices - c
    d -= np.floor(d + 0.5)
    assert np.hypot(d[:, 0], d[:, 1]).min() > spec.r_V1
    assert res.loop.winding == w


# -- annuli ------------------------------------------------------------------

def _waist_annulus(half_width, K=4):
    x = np.arange(K) / K
    return L.AnnulusRegion.build(WAIST, np.column_stack([x, 0.5 - half_width + 0 * x]),
                                 np.column_stack([x, 0.5 + half_width + 0 * x]))


def test_straight_flat_boundary_not_admissible():
    A = L.AnnulusRegion.build(FLAT, [[0, 0.3], [0.5, 0.3]], [[0, 0.7], [0.5, 0.7]])
    assert not any(A.admissible)
    with pytest.raises(ValueError):
        L.annulus_min_gap(FLAT, A)


def test_flat_zigzag_has_concave_corner():
    A = L.AnnulusRegion.build(FLAT, [[0, 0.3], [0.5, 0.35]], [[0, 0.7], [0.5, 0.65]])
    assert any(np.any(a > np.pi) for a in A.angles)
    with pytest.raises(ValueError):
        L.annulus_min_gap(FLAT, A)


def test_crossing_boundaries_rejected():
    with pytest.raises(ValueError):
        L.AnnulusRegion.build(FLAT, [[0, 0.6], [0.5, 0.6]], [[0, 0.4], [0.5, 0.4]])


@pytest.fixture(scope="module")
def gaps():
    return {w: L.annulus_min_gap(WAIST, _waist_annulus(w)) for w in (0.1, 0.15, 0.2)}


def test_waisted_annulus_positive_gap(gaps):
    for d, d_t, eps in gaps.values():
        assert d <= d_t
        assert eps > 0


def test_widening_does_not_decrease_gap(gaps):
    eps = [gaps[w][2] for w in (0.1, 0.15, 0.2)]
    assert eps == sorted(eps)


# -- ribbons ---------------------------------------------------------------

_X = np.arange(64) / 64
_S = np.sin(2 * np.pi * _X)


def _graph(y):
    return L.DiscreteLoop(np.column_stack([_X, y]), (1, 0))


def test_sinusoidal_quadruple_is_ribbon():
    Q = [_graph(0.3 + 0 * _X), _graph(0.2 + 0.15 * _S), _graph(0.1 - 0.15 * _S),
         _graph(-0.05 + 0.05 * _S)]
    r = L.check_ribbon(FLAT, Q)
    assert r.is_ribbon is True
    assert r.intersections[0, 1] > 0 and r.intersections[1, 2] > 0 and r.intersections[2, 3] > 0


def test_parallel_lines_not_ribbon():
    r = L.check_ribbon(FLAT, [_graph(0.1 * i + 0 * _X) for i in range(4)])
    assert r.is_ribbon is False
    assert not r.intersections.any()


def test_duplicate_loop_indeterminate():
    a, b = _graph(0.2 + 0.15 * _S), _graph(0.1 - 0.15 * _S)
    r = L.check_ribbon(FLAT, [_graph(0.3 + 0 * _X), a, a, b])
    assert r.is_ribbon is None and r.indeterminate


def test_self_intersecting_lift_detected():
    t = np.arange(64) / 64
    # prolate cycloid: one curl per period, crossing itself across the period seam
    V = np.column_stack([t - 3 / (2 * np.pi) * np.sin(2 * np.pi * t), 0.1 * np.cos(2 * np.pi * t)])
    lp = L.DiscreteLoop(V, (1, 0))
    c, _, _ = L._self_crossings(lp, np.zeros(2), 1e-9)
    assert c > 0
    Q = [_graph(0.3 + 0 * _X), lp, _graph(0.1 - 0.15 * _S), _graph(-0.05 + 0.05 * _S)]
    assert L.check_ribbon(FLAT, Q).embedded[1] is False


def test_ribbon_needs_shared_class():
    with pytest.raises(ValueError):
        L.check_ribbon(FLAT, [_graph(0 * _X)] * 3 + [L.DiscreteLoop.straight((0, 1))])


# -- separation -------------------------------------------------------------

def test_separation_constant_sweep_zero():
    a = L.DiscreteLoop.straight((1, 0), 32, (0, 0.2))
    assert L.separation_upper_bound(FLAT, a, a, [a, a]) == 0


def test_separation_detour_value():
    a = L.DiscreteLoop.straight((1, 0), 32, (0, 0.2))
    b = L.DiscreteLoop.straight((1, 0), 32, (0, 0.25))

    def bump(s, V):
        return np.column_stack([0 * V[:, 0], 0.04 * np.sin(np.pi * s) * np.sin(2 * np.pi * V[:, 0])])

    sweep = L.linear_sweep(a, b, 10, bump)
    peak = max(L.loop_energy(FLAT, lp) for lp in sweep)
    want = np.log(peak / 0.5)
    assert np.isclose(L.separation_upper_bound(FLAT, a, b, sweep), want, rtol=1e-14)
    assert want > 0


def test_separation_stable_under_perturbation():
    a = L.DiscreteLoop.straight((1, 0), 32, (0, 0.2))
    b = L.DiscreteLoop.straight((1, 0), 32, (0, 0.3))
    sweep = L.linear_sweep(a, b, 10, lambda s, V: np.column_stack(
        [0 * V[:, 0], 0.05 * np.sin(np.pi * s) * np.sin(2 * np.pi * V[:, 0])]))
    base = L.separation_upper_bound(BUMP, a, b, sweep)
    for seed in range(3):
        delta = 0.03
        mp = conformal_perturbation(BUMP, delta, np.random.default_rng(seed))
        assert L.separation_upper_bound(mp, a, b, sweep) <= base + 2 * delta + 1e-9 + 2e-3


def test_separation_errors():
    a = L.DiscreteLoop.straight((1, 0))
    with pytest.raises(ValueError):
        L.separation_upper_bound(FLAT, a, a, [])
    with pytest.raises(ValueError):
        L.separation_upper_bound(FLAT, a, a, [a.translated((0, 0.3))])


# -- persistence ------------------------------------------------------------

def test_persistence_zero_delta_exact():
    rep = L.spectrum_persistence_experiment(FLAT, (1, 0), 0.0, n_trials=2)
    assert all(t["energy"] == rep.energy for t in rep.trials)
    assert rep.all_within


def test_persistence_two_well_reports():
    # two valleys of equal depth at y = 0 and y = 1/2
    m = ConformalSpec.from_function(lambda x, y: 0.2 * np.cos(4 * np.pi * y), 32).metric()
    rep = L.spectrum_persistence_experiment(m, (1, 0), 0.5, n_trials=2, seed=3)
    assert {"energy", "fresh_energy", "within", "jump"} <= set(rep.trials[0])


def test_persistence_rejects_degenerate():
    # starts stopped after 3 iterations disagree, so the isolation check fails
    m = ConformalSpec.from_function(lambda x, y: 0.05 * np.cos(2 * np.pi * y), 16).metric()
    with pytest.raises(RuntimeError):
        L.spectrum_persistence_experiment(m, (1, 0), 0.01, n_trials=1, max_iters=3,
                                          isolation_tol=1e-12)


# -- files ------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    lp = L.DiscreteLoop.wavy((2, -1), 16, (0.3, 0.1), (0.02, 0.01))
    L.save_loop(tmp_path / "a.csv", lp)
    back = L.load_loop(tmp_path / "a.csv")
    assert back.winding == lp.winding
    assert np.array_equal(back.vertices, lp.vertices)


def test_csv_errors_name_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# winding 1 0\nx,y\n0,0\nfoo,1\n")
    with pytest.raises(ValueError, match="line 4"):
        L.load_loop(p)
    p.write_text("x,y\n")
    with pytest.raises(ValueError, match="line 1"):
        L.load_loop(p)
