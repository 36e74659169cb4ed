import io
import math

import numpy as np
import pytest

from smallgain.errors import (
    BisectionFailure,
    BlockSgcFails,
    CompatibilityError,
    CycleConditionFails,
    EmptyGap,
    LambdaNotContractive,
    NotBounded,
    NotHomogeneous,
    NotInOmega,
    NotIrreducible,
    OutOfRange,
    Stalled,
    WrongAggregation,
)
from smallgain.gains import (
    GainNetwork,
    Linear,
    MaxAgg,
    DiagOp,
    Power,
    Saturating,
    SumAgg,
    Zero,
    eval_operator,
    eval_operator_ext,
)
from smallgain.paths import (
    OmegaPath,
    PLFunction,
    ReduciblePath,
    construct_path,
    export_path_csv,
    path_bounded,
    path_downward,
    path_homogeneous,
    path_irreducible,
    path_max,
    path_mixed,
    path_reducible,
    path_three_sum,
    validate_path,
)

Z = Zero()


def net_of(rows, mu, gu=None):
    n = len(rows)
    return GainNetwork(n, tuple(tuple(r) for r in rows),
                       tuple(gu) if gu else (Z,) * n, tuple(mu))


def max2(slope):
    g = Linear(slope)
    return net_of([[Z, g], [g, Z]], [MaxAgg(), MaxAgg()])


def sum2(slope):
    g = Linear(slope)
    return net_of([[Z, g], [g, Z]], [SumAgg(), SumAgg()])


def sum3_complete(slope):
    g = Linear(slope)
    return net_of([[Z, g, g], [g, Z, g], [g, g, Z]], [SumAgg()] * 3)


def margin_floor_ok(net, sigma):
    rr = np.geomspace(1e-6, 1e6, 1000)
    states = sigma(rr)
    margins = np.min(states - eval_operator(net, states), axis=1)
    floor = 1e-9 * np.maximum(1.0, np.max(states, axis=1))
    return bool(np.all(margins >= floor))


# ---------------------------------------------------------------------------
# path types


def test_omega_path_call_and_tail():
    p = OmegaPath(np.array([0.0, 1.0, 2.0]),
                  np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 5.0]]))
    assert np.allclose(p(0.5), [0.5, 1.0])
    assert np.allclose(p(2.0), [3.0, 5.0])
    # tail continues with the last segment slope
    assert np.allclose(p(4.0), [3.0 + 2 * 2.0, 5.0 + 2 * 3.0])
    batch = p(np.array([0.5, 4.0]))
    assert batch.shape == (2, 2)


def test_omega_path_inverse_roundtrip():
    rng = np.random.default_rng(3)
    radii = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1.0, 6))])
    vals = np.cumsum(rng.uniform(0.05, 2.0, (7, 3)), axis=0)
    vals[0] = 0.0
    p = OmegaPath(radii, vals)
    for i in range(3):
        for y in [0.01, 0.5, vals[-1, i] * 0.99, vals[-1, i] * 7.3]:
            r = p.inverse(i, y)
            assert abs(p(r)[i] - y) <= 1e-9 * max(1.0, y)


def test_omega_path_rejects_non_strict():
    with pytest.raises(ValueError):
        OmegaPath(np.array([0.0, 1.0, 1.0]),
                  np.array([[0.0], [1.0], [2.0]]))
    with pytest.raises(ValueError):
        OmegaPath(np.array([0.0, 1.0, 2.0]),
                  np.array([[0.0], [1.0], [1.0]]))
    with pytest.raises(ValueError):
        OmegaPath(np.array([0.5, 1.0]), np.array([[0.0], [1.0]]))


def test_pl_function_flat_and_tail():
    f = PLFunction(np.array([0.0, 1.0, 2.0, 3.0]),
                   np.array([0.0, 1.0, 1.0, 2.0]))
    assert f(0.5) == 0.5
    assert f(1.5) == 1.0
    assert f(5.0) == 4.0
    # leftmost preimage on the flat stretch
    assert f.inverse(1.0) == 1.0
    assert f.inverse(0.25) == 0.25


def test_pl_function_bounded_inverse_raises():
    f = PLFunction(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 1.0]))
    with pytest.raises(OutOfRange):
        f.inverse(1.5)


# ---------------------------------------------------------------------------
# validate_path


def test_validate_identity_against_half_slopes():
    net = max2(0.5)
    sigma = OmegaPath(np.array([0.0, 1e6]), np.array([[0.0, 0.0], [1e6, 1e6]]))
    rep = validate_path(net, sigma)
    assert rep.valid
    # margin at radius r is r - 0.5 r; the grid starts at 1e-6
    assert np.isclose(rep.min_margin, 0.5e-6)


def test_validate_flags_expanding_slopes():
    net = max2(2.0)
    sigma = OmegaPath(np.array([0.0, 1e6]), np.array([[0.0, 0.0], [1e6, 1e6]]))
    rep = validate_path(net, sigma)
    assert not rep.valid
    assert rep.min_margin < 0


# ---------------------------------------------------------------------------
# downward iteration


def test_downward_geometric_anchors_max():
    net = max2(0.5)
    anchors = path_downward(net, np.array([1.0, 1.0]))
    assert np.all(anchors[-1] == 0.0)
    ks = np.arange(len(anchors) - 1)
    assert np.allclose(anchors[:-1, 0], 0.5**ks)
    assert anchors[-2].max() < 1e-12


def test_downward_geometric_anchors_sum():
    net = sum2(0.4)
    anchors = path_downward(net, np.array([1.0, 1.0]))
    ks = np.arange(len(anchors) - 1)
    assert np.allclose(anchors[:-1, 1], 0.4**ks)


def test_downward_fixed_point_stalls():
    net = max2(1.0)
    with pytest.raises(Stalled):
        path_downward(net, np.array([1.0, 1.0]))


def test_downward_outside_omega():
    net = max2(1.5)
    with pytest.raises(NotInOmega):
        path_downward(net, np.array([1.0, 1.0]))


def test_downward_zero_row_rejected():
    net = net_of([[Z, Linear(0.5)], [Z, Z]], [SumAgg(), SumAgg()])
    with pytest.raises(CompatibilityError):
        path_downward(net, np.array([1.0, 1.0]))


def test_downward_convergence_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        slopes = rng.uniform(0.1, 0.9 / max(1, n - 1), (n, n))
        rows = [[Linear(float(slopes[i, j])) if i != j else Z
                 for j in range(n)] for i in range(n)]
        net = net_of(rows, [SumAgg()] * n)
        s0 = float(rng.uniform(0.5, 2.0)) * np.ones(n)
        anchors = path_downward(net, s0)
        sups = np.max(anchors[:-1], axis=1)
        assert np.all(np.diff(sups) < 0)
        assert sups[-1] < 1e-12 * sups[0]


def test_segment_membership_fuzz():
    # convex combinations of s and Gamma(s) stay in the decay set
    rng = np.random.default_rng(23)
    net = sum2(0.3)
    done = 0
    while done < 10:
        s = rng.uniform(0.2, 3.0, 2)
        image = eval_operator(net, s)
        if not np.all(image < s):
            continue
        done += 1
        for t in rng.random(10):
            p = (1 - t) * s + t * image
            assert np.all(eval_operator(net, p) <= p)


# ---------------------------------------------------------------------------
# irreducible and max constructors


def test_irreducible_max_half():
    net = max2(0.5)
    sigma = path_irreducible(net)
    assert validate_path(net, sigma).valid
    assert margin_floor_ok(net, sigma)


def test_irreducible_sum_quarter():
    net = sum3_complete(0.25)
    sigma = path_irreducible(net)
    assert validate_path(net, sigma).valid
    assert margin_floor_ok(net, sigma)


def test_irreducible_with_diagonal_shift():
    net = sum3_complete(0.25)
    d = DiagOp(Linear(0.1))
    sigma = path_irreducible(net, d)
    rr = np.geomspace(1e-6, 1e6, 400)
    states = sigma(rr)
    shifted = d(eval_operator(net, states))
    assert np.all(shifted < states)


def test_irreducible_rejects_reducible():
    net = net_of([[Z, Linear(0.5)], [Z, Z]], [SumAgg(), SumAgg()])
    with pytest.raises(NotIrreducible):
        path_irreducible(net)


def test_irreducible_rejects_bounded_gains():
    net = net_of([[Z, Saturating(1.0)], [Linear(0.5), Z]],
                 [SumAgg(), SumAgg()])
    with pytest.raises(CompatibilityError):
        path_irreducible(net)


def test_max_margin_floor():
    net = max2(0.5)
    sigma = path_max(net)
    assert margin_floor_ok(net, sigma)


def test_max_identity_for_isolated_node():
    net = net_of([[Z]], [MaxAgg()])
    sigma = path_max(net)
    for r in [1e-6, 0.37, 12.0, 1e6]:
        assert np.isclose(sigma(r)[0], r)


def test_max_cycle_failure():
    net = net_of([[Z, Power(1, 0.5)], [Power(1, 2), Z]],
                 [MaxAgg(), MaxAgg()])
    with pytest.raises(CycleConditionFails):
        path_max(net)


def test_max_wrong_aggregation():
    with pytest.raises(WrongAggregation):
        path_max(sum2(0.4))


def test_max_reducible_delegation():
    g = Linear(0.5)
    net = net_of([[Z, g, Linear(0.6), Z],
                  [g, Z, Z, Z],
                  [Z, Z, Z, g],
                  [Z, Z, g, Z]], [MaxAgg()] * 4)
    sigma = path_max(net)
    assert isinstance(sigma, OmegaPath)
    assert validate_path(net, sigma).valid


# ---------------------------------------------------------------------------
# homogeneous


def test_homogeneous_symmetric_ray():
    net = max2(0.5)
    sigma = path_homogeneous(net)
    for r in [1e-3, 1.0, 1e5]:
        assert np.allclose(sigma(r), [r, r])
    assert margin_floor_ok(net, sigma)


def test_homogeneous_ray_matches_eigenvector():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a, b = rng.uniform(0.2, 0.8, 2)
        net = net_of([[Z, Linear(float(a))], [Linear(float(b)), Z]],
                     [MaxAgg(), MaxAgg()])
        lam = math.sqrt(a * b)
        if lam >= 0.95:
            continue
        sigma = path_homogeneous(net)
        direction = sigma(1.0)
        direction = direction / direction.max()
        expected = np.array([math.sqrt(a / b), 1.0])
        expected = expected / expected.max()
        assert np.allclose(direction, expected, rtol=1e-6)


def test_homogeneous_critical_rejected():
    with pytest.raises(LambdaNotContractive):
        path_homogeneous(max2(1.0))


def test_homogeneous_rejects_inhomogeneous():
    net = net_of([[Z, Power(1, 2)], [Power(1, 0.5), Z]],
                 [MaxAgg(), MaxAgg()])
    with pytest.raises(NotHomogeneous):
        path_homogeneous(net)


# ---------------------------------------------------------------------------
# bounded


def test_bounded_saturating_cycle():
    net = net_of([[Z, Saturating(1.0)], [Saturating(1.0), Z]],
                 [SumAgg(), SumAgg()])
    sigma = path_bounded(net)
    assert validate_path(net, sigma).valid
    assert margin_floor_ok(net, sigma)


def test_bounded_trivial_zero_operator():
    net = net_of([[Z, Z], [Z, Z]], [SumAgg(), SumAgg()])
    sigma = path_bounded(net)
    for r in [1e-5, 0.37, 2000.0]:
        assert np.allclose(sigma(r), [r, r])


def test_bounded_rejects_unbounded():
    with pytest.raises(NotBounded):
        path_bounded(sum2(0.4))


def test_bounded_partial_zero_row_rejected():
    net = net_of([[Z, Saturating(1.0)], [Z, Z]], [SumAgg(), SumAgg()])
    with pytest.raises(CompatibilityError):
        path_bounded(net)


def test_bounded_interior_fixed_point_stalls():
    # slope product above one at zero: the iteration parks on the interior
    # fixed point instead of decaying
    net = net_of([[Z, Saturating(3.0)], [Saturating(3.0), Z]],
                 [MaxAgg(), MaxAgg()])
    with pytest.raises(Stalled):
        path_bounded(net)


# ---------------------------------------------------------------------------
# three-node additive


def test_three_sum_all_quarter_closed_form():
    net = sum3_complete(0.25)
    sigma = path_three_sum(net)
    rr = np.geomspace(1e-6, 1e6, 200)
    vals = sigma(rr)
    assert np.allclose(vals[:, 0], rr, rtol=1e-12)
    assert np.max(np.abs(vals[:, 1] / rr - 1.0)) < 1e-9
    assert np.max(np.abs(vals[:, 2] / rr - 1.75)) < 1e-9
    assert margin_floor_ok(net, sigma)


def test_three_sum_stern_residual():
    net = sum3_complete(0.25)
    sigma = path_three_sum(net)
    g = Linear(0.25)
    rr = sigma.radii[1:]
    s2 = sigma(rr)[:, 1]
    left = g.inverse(np.maximum(rr - g(s2), 0.0))
    right = g.inverse(np.maximum(s2 - g(rr), 0.0))
    assert np.all(np.abs(left - right) < 1e-10 * rr)


def test_three_sum_symmetric_second_component():
    ga = Linear(0.3)
    gb = Power(0.2, 1.3)
    gc = Power(0.1, 0.7)
    net = net_of([[Z, ga, gb], [ga, Z, gb], [gc, gc, Z]], [SumAgg()] * 3)
    sigma = path_three_sum(net)
    rr = np.geomspace(1e-5, 1e5, 50)
    s2 = sigma(rr)[:, 1]
    assert np.max(np.abs(s2 / rr - 1.0)) < 1e-9


def test_three_sum_critical_gap_empty():
    with pytest.raises((EmptyGap, BisectionFailure)):
        path_three_sum(sum3_complete(1.0))


def test_three_sum_needs_three_nodes():
    with pytest.raises(CompatibilityError):
        path_three_sum(sum2(0.25))


def test_three_sum_needs_additive_rows():
    g = Linear(0.25)
    net = net_of([[Z, g, g], [g, Z, g], [g, g, Z]], [MaxAgg()] * 3)
    with pytest.raises(WrongAggregation):
        path_three_sum(net)


def test_three_sum_missing_edge_falls_back():
    g = Linear(0.25)
    net = net_of([[Z, g, g], [g, Z, g], [g, Z, Z]], [SumAgg()] * 3)
    sigma = path_three_sum(net)
    assert validate_path(net, sigma).valid


def test_three_sum_cross_check_with_irreducible():
    rng = np.random.default_rng(17)
    for _ in range(5):
        slopes = rng.uniform(0.1, 0.3, 6)
        k = iter(slopes)
        net = net_of([[Z, Linear(next(k)), Linear(next(k))],
                      [Linear(next(k)), Z, Linear(next(k))],
                      [Linear(next(k)), Linear(next(k)), Z]], [SumAgg()] * 3)
        sa = path_three_sum(net)
        sb = path_irreducible(net)
        assert validate_path(net, sa).valid
        assert validate_path(net, sb).valid


# ---------------------------------------------------------------------------
# mixed


def test_mixed_canonical():
    net = net_of([[Z, Linear(0.3)], [Saturating(0.5), Z]],
                 [SumAgg(), SumAgg()])
    sigma = path_mixed(net)
    assert validate_path(net, sigma).valid
    assert margin_floor_ok(net, sigma)


def test_mixed_delegates_all_unbounded():
    net = sum2(0.4)
    sigma = path_mixed(net)
    assert validate_path(net, sigma).valid


def test_mixed_delegates_all_bounded():
    net = net_of([[Z, Saturating(1.0)], [Saturating(1.0), Z]],
                 [SumAgg(), SumAgg()])
    sigma = path_mixed(net)
    assert validate_path(net, sigma).valid


def test_mixed_needs_additive_rows():
    net = net_of([[Z, Linear(0.3)], [Saturating(0.5), Z]],
                 [MaxAgg(), MaxAgg()])
    with pytest.raises(WrongAggregation):
        path_mixed(net)


# ---------------------------------------------------------------------------
# reducible


def test_reducible_cascade_recipe():
    net = net_of([[Z, Linear(0.7)], [Z, Z]], [SumAgg(), SumAgg()])
    rp = path_reducible(net)
    assert isinstance(rp, ReduciblePath)
    assert rp.blocks == ((0,), (1,))
    rr = np.geomspace(1e-6, 1e6, 300)
    vals = rp.sigma(rr)
    # driven node rides the identity; driver dominates twice its inflow
    assert np.allclose(vals[:, 1], rr, rtol=1e-12)
    assert np.all(vals[:, 0] >= 2 * 0.7 * rr)
    assert np.all(vals[:, 0] <= 3.0 * rr)
    # no external channel: the budget map is the identity
    assert np.isclose(rp.phi(5.5), 5.5)


def test_reducible_source_external_budget():
    net = net_of([[Z, Linear(0.7)], [Z, Z]],
                 [SumAgg(), SumAgg()], gu=[Z, Linear(1.0)])
    rp = path_reducible(net)
    # half the source margin absorbs the input: phi(r) = r/2
    for r in [0.01, 2.0, 1e4]:
        assert abs(rp.phi(r) - 0.5 * r) <= 1e-6 * r
    vals = rp.sigma(np.array([2.0]))[0]
    ext = eval_operator_ext(net, vals, rp.phi(2.0))
    assert np.all(ext < vals)


def test_reducible_decoupled_identity():
    net = net_of([[Z, Z], [Z, Z]], [SumAgg(), SumAgg()])
    rp = path_reducible(net)
    for r in [1e-4, 1.0, 1e5]:
        assert np.allclose(rp.sigma(r), [r, r])


def test_reducible_two_cycles_in_series():
    g = Linear(0.4)
    net = net_of([[Z, g, Linear(0.5), Z],
                  [g, Z, Z, Z],
                  [Z, Z, Z, g],
                  [Z, Z, g, Z]], [SumAgg()] * 4)
    rp = path_reducible(net)
    assert len(rp.blocks) == 2
    assert rp.report.valid
    assert len(rp.block_paths) == 2


def test_reducible_block_failure_named():
    net = net_of([[Z, Linear(1.2), Linear(0.1)],
                  [Linear(1.2), Z, Z],
                  [Z, Z, Z]], [SumAgg()] * 3)
    with pytest.raises(BlockSgcFails) as exc:
        path_reducible(net)
    assert exc.value.block == (0, 1)


def test_reducible_rejects_irreducible():
    with pytest.raises(CompatibilityError):
        path_reducible(sum2(0.4))


def test_reducible_budget_respects_general_condition():
    rng = np.random.default_rng(31)
    net = net_of([[Z, Linear(0.7)], [Z, Z]],
                 [SumAgg(), SumAgg()], gu=[Linear(0.2), Linear(1.0)])
    rp = path_reducible(net)
    rr = np.exp(rng.uniform(np.log(1e-5), np.log(1e5), 200))
    vals = rp.sigma(rr)
    ext = eval_operator_ext(net, vals, rp.phi(rr))
    assert np.all(ext < vals)


# ---------------------------------------------------------------------------
# monotonicity properties and dispatch


def test_constructed_paths_strictly_monotone():
    nets = [
        (max2(0.5), path_max),
        (sum3_complete(0.25), path_irreducible),
        (net_of([[Z, Saturating(1.0)], [Saturating(1.0), Z]],
                [SumAgg(), SumAgg()]), path_bounded),
        (net_of([[Z, Linear(0.3)], [Saturating(0.5), Z]],
                [SumAgg(), SumAgg()]), path_mixed),
    ]
    rr = np.geomspace(1e-6, 1e6, 2000)
    for net, ctor in nets:
        sigma = ctor(net)
        vals = sigma(rr)
        assert np.all(np.diff(vals, axis=0) > 0), ctor.__name__


def test_dispatch_shapes():
    assert isinstance(construct_path(max2(0.5)), OmegaPath)
    assert isinstance(construct_path(sum3_complete(0.25)), OmegaPath)
    mixed = net_of([[Z, Linear(0.3)], [Saturating(0.5), Z]],
                   [SumAgg(), SumAgg()])
    assert isinstance(construct_path(mixed), OmegaPath)
    cascade = net_of([[Z, Linear(0.7)], [Z, Z]], [SumAgg(), SumAgg()])
    assert isinstance(construct_path(cascade), ReduciblePath)
    homog = construct_path(max2(0.5), homogeneous=True)
    assert np.allclose(homog(1.0), [1.0, 1.0])


def test_export_csv_format():
    net = max2(0.5)
    sigma = path_max(net)
    buf = io.StringIO()
    export_path_csv(net, sigma, buf, radii=np.geomspace(1e-2, 1e2, 5))
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "r,sigma_1,sigma_2,margin_min"
    assert len(lines) == 6
    row = lines[1].split(",")
    assert len(row) == 4
    assert float(row[0]) == pytest.approx(1e-2)
    assert float(row[3]) > 0
