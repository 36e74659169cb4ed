"""Small gain condition checks against frozen and brute-force oracles."""

import numpy as np
import pytest

from smallgain.errors import NotHomogeneous, NotIrreducible, NotLinearizable, WrongAggregation
from smallgain.gains import (
    DiagOp,
    GainNetwork,
    Linear,
    MaxAgg,
    OuterSum,
    Power,
    Saturating,
    SumAgg,
    Zero,
    eval_operator,
)
from smallgain.sgc import (
    GridSpec,
    check_cycle_condition,
    check_linear_spectral,
    check_strong_sgc,
    falsify_sgc,
    nonlinear_perron,
)

from gen import random_linear_max_net


def linear_net(slopes, mu_cls=SumAgg):
    slopes = np.asarray(slopes, dtype=float)
    n = slopes.shape[0]
    gamma = tuple(
        tuple(Linear(slopes[i, j]) if slopes[i, j] else Zero() for j in range(n))
        for i in range(n)
    )
    return GainNetwork(n=n, gamma=gamma, gamma_u=(Zero(),) * n, mu=(mu_cls(),) * n)


def test_cycle_condition_two_cycle_holds():
    v = check_cycle_condition(linear_net([[0, 0.5], [0.5, 0]], MaxAgg))
    assert v.holds
    assert v.margins["min_margin"] == pytest.approx(0.75)


def test_cycle_condition_identity_composition_fails():
    net = GainNetwork(
        n=2,
        gamma=((Zero(), Power(1, 2)), (Power(1, 0.5), Zero())),
        gamma_u=(Zero(), Zero()),
        mu=(MaxAgg(), MaxAgg()),
    )
    v = check_cycle_condition(net)
    assert v.fails
    assert v.cycle == (1, 0)
    assert v.witness is not None
    assert np.all(eval_operator(net, v.witness) >= v.witness)


def test_cycle_condition_three_cycle_product():
    s = np.zeros((3, 3))
    s[0, 1] = s[1, 2] = s[2, 0] = 0.9
    v = check_cycle_condition(linear_net(s, MaxAgg))
    assert v.holds
    assert v.margins["min_margin"] == pytest.approx(1 - 0.729)


def test_cycle_condition_needs_max_rows():
    with pytest.raises(WrongAggregation):
        check_cycle_condition(linear_net([[0, 0.5], [0.5, 0]], SumAgg))


def test_falsify_finds_expanding_witness():
    net = linear_net([[0, 2], [2, 0]], MaxAgg)
    v = falsify_sgc(net)
    assert v.fails
    assert np.all(eval_operator(net, v.witness) >= v.witness)
    assert np.any(v.witness > 0)


def test_falsify_contractive_inconclusive():
    v = falsify_sgc(linear_net([[0, 0.5], [0.5, 0]], MaxAgg))
    assert v.inconclusive
    assert v.margins["best_deficit"] > 0


def test_falsify_trivial_single_node():
    net = GainNetwork(
        n=1, gamma=((Zero(),),), gamma_u=(Zero(),), mu=(SumAgg(),)
    )
    assert falsify_sgc(net).inconclusive


def test_spectral_frozen_cases():
    v = check_linear_spectral(linear_net([[0, 0.5], [0.5, 0]]))
    assert v.holds
    assert v.rho == pytest.approx(0.5, abs=1e-11)
    v = check_linear_spectral(linear_net([[0, 1], [1, 0]]))
    assert v.fails
    assert v.rho == pytest.approx(1.0, abs=1e-11)
    assert np.all(eval_operator(linear_net([[0, 1], [1, 0]]), v.witness) >= v.witness)
    v = check_linear_spectral(linear_net([[0, 0], [0, 0]]))
    assert v.holds
    assert v.rho == 0.0


def test_spectral_rejects_nonlinear():
    net = GainNetwork(
        n=2,
        gamma=((Zero(), Saturating(1)), (Linear(1), Zero())),
        gamma_u=(Zero(), Zero()),
        mu=(SumAgg(), SumAgg()),
    )
    with pytest.raises(NotLinearizable):
        check_linear_spectral(net)


def test_spectral_power_substitution():
    # rows (sum of c*sqrt(s_j))^2 become linear in t = sqrt(s)
    net = GainNetwork(
        n=2,
        gamma=((Zero(), Power(0.4, 0.5)), (Power(0.4, 0.5), Zero())),
        gamma_u=(Zero(), Zero()),
        mu=(OuterSum(Power(1, 2)), OuterSum(Power(1, 2))),
    )
    v = check_linear_spectral(net)
    assert v.holds
    assert v.rho == pytest.approx(0.4, abs=1e-9)


def test_spectral_matches_dense_eigensolver():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(2, 6))
        G = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
        np.fill_diagonal(G, 0.0)
        v = check_linear_spectral(linear_net(G))
        want = float(np.max(np.abs(np.linalg.eigvals(G))))
        assert v.rho == pytest.approx(want, abs=1e-8)
        if want >= 1.02:
            assert v.fails
        if want <= 0.98:
            assert v.holds


def test_perron_symmetric_two_cycle():
    lam, v, res = nonlinear_perron(linear_net([[0, 0.5], [0.5, 0]]))
    assert lam == pytest.approx(0.5, abs=1e-9)
    np.testing.assert_allclose(v, [1.0, 1.0], atol=1e-9)
    assert res <= 1e-9


def test_perron_asymmetric_geometric_mean():
    for a, b in [(2.0, 0.5), (4.0, 0.25), (1.3, 0.4)]:
        lam, v, res = nonlinear_perron(linear_net([[0, a], [b, 0]]))
        assert lam == pytest.approx(np.sqrt(a * b), rel=1e-8)
        assert res <= 1e-8 * max(1.0, lam)
        assert np.all(v > 0)


def test_perron_power_conjugate_matches_spectral():
    net = GainNetwork(
        n=2,
        gamma=((Zero(), Power(0.4, 0.5)), (Power(0.4, 0.5), Zero())),
        gamma_u=(Zero(), Zero()),
        mu=(OuterSum(Power(1, 2)), OuterSum(Power(1, 2))),
    )
    lam, v, res = nonlinear_perron(net)
    assert lam == pytest.approx(0.16, abs=1e-9)  # square of the slope radius
    assert res <= 1e-9


def test_perron_rejects_bad_inputs():
    net = GainNetwork(
        n=2,
        gamma=((Zero(), Saturating(1)), (Linear(1), Zero())),
        gamma_u=(Zero(), Zero()),
        mu=(SumAgg(), SumAgg()),
    )
    with pytest.raises(NotHomogeneous):
        nonlinear_perron(net)
    with pytest.raises(NotIrreducible):
        nonlinear_perron(linear_net([[0, 1], [0, 0]]))


def test_strong_sgc_frozen_cases():
    net = linear_net([[0, 0.5], [0.5, 0]])
    assert check_strong_sgc(net, DiagOp(Linear(0.5))).inconclusive
    net = linear_net([[0, 0.9], [0.9, 0]])
    d = DiagOp(Linear(0.2))
    v = check_strong_sgc(net, d)
    assert v.fails
    composed = d(eval_operator(net, v.witness))
    assert np.all(composed >= v.witness)
    z = linear_net([[0, 0], [0, 0]])
    assert check_strong_sgc(z, DiagOp(Linear(1))).inconclusive


def test_strong_sgc_right_side():
    net = linear_net([[0, 0.9], [0.9, 0]])
    d = DiagOp(Linear(0.2))
    v = check_strong_sgc(net, d, side="right")
    assert v.fails
    assert np.all(eval_operator(net, d(v.witness)) >= v.witness)


def test_cycle_verdict_agrees_with_falsification():
    rng = np.random.default_rng(41)
    for _ in range(50):
        net = random_linear_max_net(rng)
        cyc = check_cycle_condition(net)
        fal = falsify_sgc(net)
        if cyc.holds:
            assert fal.inconclusive
        else:
            assert fal.fails
            assert np.all(eval_operator(net, fal.witness) >= fal.witness)
