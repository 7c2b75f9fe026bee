import math

import pytest

import mdqueue as mdq


def one_third_game():
    params = mdq.ClassParams([1.0], [1.0], [1.0])
    return mdq.Game(params, x=[0.0], c=[1.0], d=[0.0])


def test_reflect_examples():
    assert mdq.reflect([0.0, 0.5, 1.0]) == [0.0, 0.5, 1.0]
    assert mdq.reflect([0.0, -0.5, -1.0]) == [0.0, 0.0, 0.0]
    out = mdq.reflect([1.0, 0.0, -1.0])
    assert out == pytest.approx([1.0, 0.0, 0.0])


def test_drift_reflect_closed_form():
    K = 256
    xi = mdq.drift_reflect(-1.0, 0.0, 1.0, [0.0] * (K + 1), [0.0] * (K + 1))
    assert xi[-1] == pytest.approx(-math.exp(-1.0), abs=1e-6)


def test_actions_and_split():
    params = mdq.ClassParams([0.5, 0.5], [1.0, 1.0], [1.0, 1.0])
    psi = [[0.0, 0.0], [0.1, -0.2], [0.3, 0.1]]
    a = mdq.action_arrivals(psi, params)
    scaled = [[2 * v for v in row] for row in psi]
    assert mdq.action_arrivals(scaled, params) == pytest.approx(4 * a)
    assert mdq.action_services(psi, params) > 0
    u, v, cost = mdq.min_split_rate(1.0, 1.0, 1.0)
    assert (u, v, cost) == pytest.approx((0.5, -0.5, 0.25))


def test_single_class_rate():
    ramp = [1.0 + k / 16 for k in range(17)]
    assert mdq.single_class_rate(ramp, 1.0, 1.0, 1.0, 0.0, 1.0) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        mdq.single_class_rate(ramp, 1.0, 1.0, 1.0, 0.0, 1.0, regime="bogus")


def test_solve_value_one_third():
    res = mdq.solve_value(one_third_game())
    assert res["value"] == pytest.approx(1.0 / 3.0, rel=0.02)
    assert len(res["argmax"]) == 201


def test_minimizing_strategy_shapes():
    params = mdq.ClassParams([0.5, 0.5], [1.0, 1.0], [1.0, 1.0])
    game = mdq.Game(params, x=[0.2, 0.1], c=[2.0, 1.0], d=[0.0, 0.0])
    psi = [[0.0, 0.0], [-0.3, 0.1], [-0.5, 0.2]]
    zero = [[0.0, 0.0]] * 3
    zeta, phi = mdq.minimizing_strategy(game, psi, zero)
    assert len(zeta) == 3 and len(phi[0]) == 2
    assert min(min(r) for r in phi) >= -1e-12


def test_cmu_and_log_mean_exp():
    assert mdq.cmu_priority([3, 4], 5) == [3, 2]
    assert mdq.cmu_priority([3, 4], 5, [1, 0]) == [1, 4]
    assert mdq.log_mean_exp([0.0, math.log(4.0)], 1.0) == pytest.approx(math.log(2.5))


def test_estimate_cost_small():
    game = one_third_game()
    a = mdq.estimate_cost(game, 100.0, "cmu", replications=50, seed=3)
    b = mdq.estimate_cost(game, 100.0, "cmu", replications=50, seed=3)
    assert a["J"] == b["J"]
    assert a["se"] >= 0 and 1 <= a["ess"] <= 50
    z = mdq.estimate_cost(game, 100.0, "zero", replications=50, seed=3)
    assert z["J"] >= a["J"]
    with pytest.raises(ValueError):
        mdq.estimate_cost(game, 100.0, "bogus", replications=10)


def test_invalid_params_raise():
    with pytest.raises(ValueError):
        mdq.ClassParams([1.0], [2.0], [1.0])
