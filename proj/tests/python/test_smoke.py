"""Smoke tests for the python bindings."""

import numpy as np
import pytest

try:
    import ddpc
except ImportError:  # running against the build tree
    import _ddpc as ddpc


def test_hankel_and_rank():
    data = ddpc.example_cloud_data(200, 0.0, 7)
    rep = ddpc.rank_report(data, 1)
    assert rep.rank_D == 2
    assert rep.rank_Z == 2
    assert rep.rank_deficiency_holds

    noisy = ddpc.example_cloud_data(200, 0.1, 7)
    assert ddpc.rank_report(noisy, 1).full_row_rank_D


def test_fit_recovers_scalar_system():
    data = ddpc.example_cloud_data(200, 0.0, 3)
    P = ddpc.fit_ls(data)
    np.testing.assert_allclose(P.G_LS, [[2.0, -0.5]], atol=1e-9)


def test_trajectory_cost_matches_brute_force():
    data = ddpc.example_hankel_short()
    P = ddpc.fit_ls(data)
    w = ddpc.TrajectoryTuple(np.array([0.4]), np.array([-0.2]), np.array([0.1]))
    reg = ddpc.Regularizer.parse("mixed:l2=0.3,l3=20")
    closed = ddpc.trajectory_cost(reg, P, data, w).total
    oracle, a, _sigma = ddpc.brute_force_cost(reg, data, w)
    assert closed == pytest.approx(oracle, rel=1e-7, abs=1e-9)
    assert a.shape == (4,)


def test_solve_unconstrained_reaches_references():
    data = ddpc.example_hankel_short()
    obj = ddpc.ControlObjective(
        np.eye(1), np.array([0.25]), np.eye(1), np.array([-0.5])
    )
    prob = ddpc.DPCProblem(
        data=data,
        objective=obj,
        regularizer=ddpc.Regularizer.quadratic(0.0),
        xi=np.array([0.3]),
    )
    sol = ddpc.solve_full(prob)
    assert sol.status == "optimal"
    np.testing.assert_allclose(sol.u, [-0.5], atol=1e-8)
    np.testing.assert_allclose(sol.y, [0.25], atol=1e-8)

    prob.regularizer = ddpc.Regularizer.quadratic(2.0)
    full = ddpc.solve_full(prob)
    red = ddpc.solve_reduced(prob)
    assert full.value == pytest.approx(red.value, rel=1e-8)


def test_implicit_predictor_limits():
    data = ddpc.example_hankel_short()
    P = ddpc.fit_ls(data)
    y_ref = np.array([0.4])
    zero_map = ddpc.implicit_unconstrained(P, np.eye(1), y_ref, 0.0)
    np.testing.assert_allclose(
        zero_map.eval(np.array([0.7]), np.array([-0.3])), y_ref, atol=1e-12
    )
    big_map = ddpc.implicit_unconstrained(P, np.eye(1), y_ref, 1e12)
    xi, u = np.array([0.7]), np.array([-0.3])
    np.testing.assert_allclose(
        big_map.eval(xi, u), P.predict_y(xi, u), rtol=1e-5, atol=1e-8
    )


def test_terminal_map_pins_last_step():
    data = ddpc.example_hankel_long()
    P = ddpc.fit_ls(data)
    y_ref = np.array([0.5, 0.5])
    obj = ddpc.ControlObjective.tracking(np.eye(1), 2, y_ref, np.zeros((2, 2)), np.zeros(2))
    mapping, l_ref, l_reg = ddpc.implicit_terminal(P, obj, 1.0, 1)
    y = mapping.eval(np.array([-0.8]), np.array([0.3, 0.1]))
    assert y[1] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(l_ref + l_reg, np.eye(2), atol=1e-10)


def test_infeasible_raises_typed_error():
    dims = ddpc.Dims(m=1, p=3, n=3, N_p=1, N_f=1, mode="statespace")
    rng = np.random.default_rng(0)
    W = rng.standard_normal((3, 2))
    U = rng.standard_normal((1, 2))
    Y = rng.standard_normal((3, 2))
    data = ddpc.DataMatrix(W, U, Y, dims)
    # xi orthogonal to the image of W
    q, _ = np.linalg.qr(W, mode="complete")
    xi = q[:, -1]
    w = ddpc.TrajectoryTuple(xi, np.zeros(1), np.zeros(3))
    with pytest.raises(ddpc.Infeasible):
        ddpc.brute_force_cost(ddpc.Regularizer.quadratic(1.0), data, w)
