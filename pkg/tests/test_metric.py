import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import conformal_area, conformal_christoffel
from torus_entropy.bounds import neck_C_max
from torus_entropy.metric import (
    ConformalSpec, MetricField, NeckSpec, D_of_g, area, build_neck_metric, bump_u,
    c0_distance, check_retractable, christoffel, conformal_perturbation, eval_metric,
    metric_from_config, metric_to_config, sample_grid,
)


@pytest.fixture(scope="module")
def neck():
    spec = NeckSpec()
    return spec, build_neck_metric(MetricField.flat(16), spec)


def _bump_metric(N, amp=0.1):
    return ConformalSpec.from_function(bump_u(amp), N).metric()


def _g(mat):
    return np.array([mat[0, 0], mat[0, 1], mat[1, 1]])


# -- eval_metric ------------------------------------------------------------

@pytest.mark.parametrize("p", [(0, 0), (0.3, 0.7), (1.9, -2.2)])
def test_flat_is_identity(p):
    assert np.array_equal(eval_metric(MetricField.flat(8), p), np.eye(2))


def test_scaling_multiplies_values():
    m = _bump_metric(16)
    for p in [(0.1, 0.2), (0.77, 0.31)]:
        assert np.allclose(eval_metric(m.scaled(4), p), 4 * eval_metric(m, p), rtol=1e-14)


def test_conformal_value_at_node():
    m = _bump_metric(16)
    assert np.allclose(eval_metric(m, (0.25, 0.25)), np.exp(0.2) * np.eye(2), atol=1e-13)


def test_points_reduced_mod_one():
    m = _bump_metric(16)
    assert np.allclose(eval_metric(m, (0.3, 0.4)), eval_metric(m, (2.3, -0.6)), atol=1e-14)


def test_non_spd_rejected_at_construction():
    c = np.zeros((8, 8, 3))
    c[..., 0] = 1.0
    c[..., 2] = 1.0
    c[3, 3] = (1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        MetricField(c)


@given(st.floats(0, 1), st.floats(0, 1))
def test_eval_symmetric_positive(x, y):
    g = eval_metric(_bump_metric(8, 0.3), (x, y))
    assert g[0, 1] == g[1, 0]
    assert np.all(np.linalg.eigvalsh(g) > 0)


# -- christoffel --------------------------------------------------------------

@pytest.mark.parametrize("method", ["fd", "spline"])
def test_flat_christoffel_zero(method):
    assert np.all(christoffel(MetricField.flat(8), (0.3, 0.6), method=method) == 0)


def _bump_gradient(p, amp=0.1):
    x, y = p
    k = 2 * np.pi
    return (amp * k * np.cos(k * x) * np.sin(k * y), amp * k * np.sin(k * x) * np.cos(k * y))


def test_conformal_christoffel_matches_analytic():
    p = (0.13, 0.41)
    got = christoffel(_bump_metric(64), p)
    want = conformal_christoffel(*_bump_gradient(p))
    assert np.allclose(got, want, atol=5e-3)


def test_christoffel_second_order_convergence():
    p = (0.13, 0.41)
    want = np.array(conformal_christoffel(*_bump_gradient(p)))
    errs = [np.abs(christoffel(_bump_metric(N), p) - want).max() for N in (32, 64, 128)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    for r in ratios:
        assert 3.5 < r < 4.5


def test_spline_christoffel_symmetric_structure():
    # conformal metrics: G1_11 = -G1_22 = G2_12 and G2_22 = -G2_11 = G1_12
    G = christoffel(_bump_metric(32), (0.61, 0.22), method="spline")
    assert np.isclose(G[0], -G[2]) and np.isclose(G[0], G[4])
    assert np.isclose(G[5], -G[3]) and np.isclose(G[5], G[1])


# -- c0 distance, D, area ------------------------------------------------------------

def test_c0_examples():
    g = _bump_metric(16)
    assert c0_distance(g, g) == 0
    assert np.isclose(c0_distance(g, g.scaled(4)), np.log(4), atol=1e-12)
    u = ConformalSpec.from_function(bump_u(0.05), 16)
    # the default 64 x 64 sample grid contains the peak at (1/4, 1/4)
    assert np.isclose(c0_distance(MetricField.flat(16), u.metric()), 2 * u.sup_norm, atol=1e-13)


def test_D_examples():
    assert D_of_g(MetricField.flat(8)) == 1
    assert np.isclose(D_of_g(MetricField.flat(8).scaled(4)), 4)
    assert np.isclose(D_of_g(_bump_metric(16, 0.05)), 1.10517, atol=1e-5)


def test_area_examples():
    assert np.isclose(area(MetricField.flat(8)), 1, atol=1e-14)
    g = _bump_metric(16, 0.2)
    assert np.isclose(area(g.scaled(3)), 3 * area(g), rtol=1e-10)


def test_area_matches_quadrature_oracle():
    u = bump_u(0.1)
    got = area(_bump_metric(64), cells=256)
    # the field interpolates exp(2u); resolution 64 keeps the interpolation error below 1e-8
    assert abs(got - conformal_area(u)) < 1e-8


def test_area_converges_with_cells():
    u = bump_u(0.6)
    m = _bump_metric(64, 0.6)
    ref = conformal_area(u)
    errs = [abs(area(m, cells=n) - ref) for n in (1, 2, 3, 4)]
    assert all(errs[i + 1] <= errs[i] + 1e-14 for i in range(3))
    assert errs[-1] < 1e-3 * errs[0]


_metrics = st.builds(
    lambda amp, phase, N: ConformalSpec.from_function(
        lambda x, y: amp * np.cos(2 * np.pi * (x + 2 * y) + phase), N).metric(),
    st.floats(-0.4, 0.4), st.floats(0, 6.3), st.sampled_from([8, 16]))


@given(_metrics, _metrics, _metrics)
def test_c0_symmetric_and_triangle(a, b, c):
    n = 64
    ab, ba = c0_distance(a, b, n), c0_distance(b, a, n)
    assert abs(ab - ba) < 1e-12
    assert c0_distance(a, c, n) <= ab + c0_distance(b, c, n) + 1e-12


@given(_metrics, st.floats(0.1, 10))
def test_c0_scaling_and_area_scaling(a, C):
    assert abs(c0_distance(a, a.scaled(C)) - abs(np.log(C))) < 1e-10
    assert abs(area(a.scaled(C)) - C * area(a)) <= 1e-10 * C * area(a)


def test_perturbation_hits_requested_distance():
    base = _bump_metric(16)
    for seed in range(3):
        mp = conformal_perturbation(base, 0.05, np.random.default_rng(seed))
        assert abs(c0_distance(base, mp) - 0.05) < 1e-12


def test_config_round_trip():
    m = _bump_metric(8).scaled(2)
    back = metric_from_config(metric_to_config(m))
    pts = sample_grid(16)
    assert np.allclose(back.eval_many(pts), m.eval_many(pts), atol=1e-14)
    with pytest.raises(ValueError):
        metric_from_config({"type": "hexagonal"})


# -- necks ------------------------------------------------------------------

def test_neck_equals_base_outside_tubes(neck):
    spec, m = neck
    base = MetricField.flat(16)
    pts = sample_grid(32)
    d = pts - np.array(spec.centers[0])
    d -= np.floor(d + 0.5)
    far = pts[np.hypot(d[:, 0], d[:, 1]) > 3 * spec.eps3]
    assert len(far) > 100
    assert np.array_equal(m.eval_many(far), base.eval_many(far))


def test_neck_middle_inequality_by_sampling(neck):
    spec, m = neck
    cx, cy = spec.centers[0]
    theta = 0.3

    def f(r):
        # angular coefficient g(e_theta, e_theta) divided by r^2 would be the
        # polar form; here f is g evaluated on the unit tangent times r^2
        p = (cx + r * np.cos(theta), cy + r * np.sin(theta))
        t = np.array([-np.sin(theta), np.cos(theta)])
        return float(t @ eval_metric(m, p) @ t) * r * r

    f_out = f(spec.r_W)
    for r in np.linspace(spec.r_U, spec.r_V2, 40)[1:-1]:
        assert spec.c * np.sqrt(f(r)) >= np.sqrt(f_out) * (1 - 1e-9)


def test_neck_report(neck):
    spec, m = neck
    rep = check_retractable(m, spec)
    assert rep.retractable
    assert rep.ratio * 2 <= (1 - spec.c) / spec.k
    assert rep.c_eff < spec.c
    assert set(rep.to_dict()) >= {"d1", "d2", "c_eff", "retractable"}


def test_flat_metric_not_retractable():
    spec = NeckSpec()
    rep = check_retractable(MetricField.flat(16), spec)
    assert not rep.retractable
    assert rep.c_eff > 0.99


def test_neck_with_c_near_one_collapses_range():
    spec = NeckSpec(c=1 - 1e-12, k=3)
    build_neck_metric(MetricField.flat(16), spec)
    assert np.isclose(neck_C_max(1.0, 3), 1.0)
    assert np.isclose(spec.K, 1.0)


def test_overlapping_necks_rejected():
    with pytest.raises(ValueError):
        build_neck_metric(MetricField.flat(16), NeckSpec(centers=((0.5, 0.5), (0.6, 0.5))))
