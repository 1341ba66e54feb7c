import math

import numpy as np
import pytest

from lobc import (
    Cmlobc,
    ConvergenceError,
    JointDistribution,
    LatticeParams,
    ParameterError,
    RatePoint,
    ba_boundary_point,
    boundary_sweep,
    broadcast_rates,
    cmloc_capacity,
    curve_rates,
    erasure_channel_matrix,
    erasure_identity_residuals,
    erasure_region_contains,
    filter_time_sharing,
    incidence_matrix,
    mutual_information,
    sample_achievable_points,
    symmetric_joint,
    weighted_sum_bound_check,
)

PG22 = LatticeParams(2, 3, 2)
EX1 = ((0.05, 0.24, 0.71), (0.30, 0.15, 0.55))


def example1_channel():
    return Cmlobc.of(PG22, *EX1)


def test_mutual_information_product_is_zero():
    px = np.array([0.2, 0.3, 0.5])
    py = np.array([0.6, 0.4])
    assert mutual_information(np.outer(px, py)) == 0.0


def test_mutual_information_identity_channel():
    joint = np.eye(7) / 7.0
    assert abs(mutual_information(joint) - math.log(7.0)) < 1e-12


def test_mutual_information_uniform_through_fano_incidence():
    s21 = incidence_matrix(PG22, 2, 1, stochastic=True).entries
    joint = s21 / 7.0
    expected = math.log(7.0) - math.log(3.0)
    assert abs(mutual_information(joint) - expected) < 1e-12


def test_mutual_information_rejects_bad_tables():
    with pytest.raises(ParameterError):
        mutual_information(np.array([[0.5, -0.1], [0.3, 0.3]]))
    with pytest.raises(ParameterError):
        mutual_information(np.array([[0.5, 0.1], [0.3, 0.3]]))


def test_broadcast_rates_constant_auxiliary():
    s1, s2 = example1_channel().channel_matrices()
    px = np.full(7, 1.0 / 7.0)
    joint = JointDistribution(px[None, :])
    point = broadcast_rates(joint, s1, s2)
    assert point.r2 == 0.0
    expected_r1 = mutual_information(px[:, None] * s1.matrix)
    assert abs(point.r1 - expected_r1) < 1e-12


def test_broadcast_rates_fully_informative_auxiliary():
    s1, s2 = example1_channel().channel_matrices()
    joint = JointDistribution(np.eye(7) / 7.0)
    point = broadcast_rates(joint, s1, s2)
    assert point.r1 < 1e-12
    expected_r2 = mutual_information((np.eye(7) / 7.0) @ s2.matrix)
    assert abs(point.r2 - expected_r2) < 1e-12


def test_broadcast_rates_matches_closed_form_family():
    s1, s2 = example1_channel().channel_matrices()
    for sigma in np.linspace(0.0, 6.0 / 7.0, 25):
        expected = curve_rates(float(sigma), *EX1)
        point = broadcast_rates(symmetric_joint(float(sigma)), s1, s2)
        assert abs(point.r1 - expected[0]) < 1e-9
        assert abs(point.r2 - expected[1]) < 1e-9


def test_broadcast_rates_dimension_mismatch():
    s1, s2 = example1_channel().channel_matrices()
    with pytest.raises(ParameterError):
        broadcast_rates(JointDistribution(np.full((3, 3), 1.0 / 9.0)), s1, s2)


def test_rate_point_clamps_round_off():
    point = RatePoint(r1=-1e-13, r2=0.5)
    assert point.r1 == 0.0
    with pytest.raises(ParameterError):
        RatePoint(r1=-1e-3, r2=0.5)


def test_sampling_is_deterministic():
    ch = example1_channel()
    a = sample_achievable_points(ch, n=50, seed=11)
    b = sample_achievable_points(ch, n=50, seed=11)
    assert a.points == b.points
    c = sample_achievable_points(ch, n=50, seed=12)
    assert a.points != c.points


def test_sampling_points_reconstructible_from_seeds():
    ch = example1_channel()
    s1, s2 = ch.channel_matrices()
    est = sample_achievable_points(ch, n=20, seed=5)
    for point in est.points:
        rng = np.random.default_rng([5, point.seed])
        table = rng.dirichlet(np.ones(49)).reshape(7, 7)
        again = broadcast_rates(JointDistribution(table), s1, s2)
        assert again.r1 == point.r1 and again.r2 == point.r2


def test_sampling_respects_data_processing():
    ch = example1_channel()
    s1, s2 = ch.channel_matrices()
    est = sample_achievable_points(ch, n=400, seed=2)
    for point in est.points:
        rng = np.random.default_rng([2, point.seed])
        table = rng.dirichlet(np.ones(49)).reshape(7, 7)
        i_uy1 = mutual_information(table @ s1.matrix)
        i_uy2 = mutual_information(table @ s2.matrix)
        assert i_uy2 <= i_uy1 + 1e-9


def test_filter_keeps_corners_and_drops_interior():
    est = sample_achievable_points(example1_channel(), n=10, seed=1)
    corner1 = RatePoint(est.c1, 0.0, tag="analytic")
    corner2 = RatePoint(0.0, est.c2, tag="analytic")
    inside = RatePoint(est.c1 / 2.0, est.c2 / 4.0, tag="analytic")
    doctored = type(est)(
        points=est.points + (corner1, corner2, inside),
        c1=est.c1,
        c2=est.c2,
        filtered=False,
        metadata=est.metadata,
    )
    filtered = filter_time_sharing(doctored)
    assert filtered.filtered
    assert corner1 in filtered.points
    assert corner2 in filtered.points
    assert inside not in filtered.points
    for point in filtered.points:
        assert point.r1 / est.c1 + point.r2 / est.c2 >= 1.0 - 1e-9


def test_filter_requires_positive_capacities():
    est = sample_achievable_points(example1_channel(), n=2, seed=1)
    zeroed = type(est)(
        points=est.points, c1=0.0, c2=est.c2, filtered=False, metadata=est.metadata
    )
    with pytest.raises(ParameterError):
        filter_time_sharing(zeroed)


def test_boundary_solver_trace_is_monotone():
    result = ba_boundary_point(example1_channel(), mu=1.7, seed=123)
    assert result.converged
    assert np.diff(result.trace).min() >= -1e-10


def test_boundary_solver_weight_limits():
    ch = example1_channel()
    s1, s2 = ch.channel_matrices()
    c1 = cmloc_capacity(s1, tol=1e-12).capacity
    c2 = cmloc_capacity(s2, tol=1e-12).capacity
    low = boundary_sweep(ch, mus=[0.0], restarts=8, seed=0)[0][1]
    assert abs(low.point.r1 - c1) < 1e-6
    high = boundary_sweep(ch, mus=[1e3], restarts=8, seed=0)[0][1]
    assert abs(high.point.r2 - c2) < 1e-6


def test_boundary_solver_requires_degraded_order():
    swapped = Cmlobc.of(PG22, EX1[1], EX1[0])
    with pytest.raises(ParameterError):
        ba_boundary_point(swapped, mu=1.0)


def test_boundary_solver_iteration_cap():
    with pytest.raises(ConvergenceError) as info:
        ba_boundary_point(example1_channel(), mu=1.0, max_iter=2, seed=9)
    assert info.value.best is not None
    assert info.value.best.point.r1 >= 0.0


def test_boundary_points_on_erasure_capacity_line():
    ch = Cmlobc.of(PG22, (0.1, 0.0, 0.9), (0.3, 0.0, 0.7))
    c1 = 0.9 * math.log(7.0)
    c2 = 0.7 * math.log(7.0)
    sweep = boundary_sweep(ch, mus=[0.1, 1.0, 10.0], restarts=4, seed=0)
    for _, result in sweep:
        line = result.point.r1 / c1 + result.point.r2 / c2
        assert abs(line - 1.0) < 1e-3


def test_erasure_region_membership():
    assert erasure_region_contains(0.0, 0.0, 7, RatePoint(math.log(7.0), 0.0))
    assert erasure_region_contains(0.1, 0.3, 7, RatePoint(0.0, 0.0))
    outside = RatePoint(0.9 * math.log(7.0), 0.0001)
    assert not erasure_region_contains(0.1, 0.3, 7, outside)
    with pytest.raises(ParameterError):
        erasure_region_contains(0.5, 0.2, 7, RatePoint(0.0, 0.0))


def test_erasure_channel_matrix_shape():
    w = erasure_channel_matrix(7, 0.25)
    assert w.shape == (7, 8)
    assert np.all(w[:, 0] == 0.25)
    assert np.array_equal(w[:, 1:], 0.75 * np.eye(7))


def test_erasure_identities_degenerate_erasure_levels():
    rng = np.random.default_rng(8)
    joint = JointDistribution(rng.dirichlet(np.ones(49)).reshape(7, 7))
    assert max(erasure_identity_residuals(joint, 0.0)) < 1e-12
    assert max(erasure_identity_residuals(joint, 1.0)) < 1e-12


def test_erasure_identities_random_pairs():
    rng = np.random.default_rng(21)
    worst = 0.0
    for _ in range(100):
        joint = JointDistribution(rng.dirichlet(np.ones(49)).reshape(7, 7))
        rho = float(rng.uniform())
        worst = max(worst, *erasure_identity_residuals(joint, rho))
    assert worst < 1e-12


def test_weighted_sum_bound_point_mass_and_uniform():
    point_mass = np.zeros((7, 7))
    point_mass[0, 0] = 1.0
    c1 = 0.9 * math.log(7.0)
    c2 = 0.7 * math.log(7.0)
    slack = weighted_sum_bound_check(JointDistribution(point_mass), 0.1, 0.3)
    assert abs(slack - c1 * c2) < 1e-12
    uniform_diag = JointDistribution(np.eye(7) / 7.0)
    assert abs(weighted_sum_bound_check(uniform_diag, 0.1, 0.3)) < 1e-9


def test_weighted_sum_bound_nonnegative_on_random_joints():
    rng = np.random.default_rng(30)
    for _ in range(1000):
        joint = JointDistribution(rng.dirichlet(np.ones(49)).reshape(7, 7))
        assert weighted_sum_bound_check(joint, 0.1, 0.3) >= -1e-9


def test_region_estimate_json_round_trip():
    import json

    from lobc import region_estimate_json

    est = sample_achievable_points(example1_channel(), n=8, seed=4)
    doc = region_estimate_json(filter_time_sharing(est))
    encoded = json.dumps(doc)
    decoded = json.loads(encoded)
    assert decoded["filtered"] is True
    assert decoded["c1"] == est.c1
    assert decoded["metadata"]["n"] == 8
    assert len(decoded["points"]) == len(filter_time_sharing(est).points)
    for entry in decoded["points"]:
        assert set(entry) == {"r1", "r2", "tag", "seed"}
