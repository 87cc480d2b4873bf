import functools

import numpy as np
import pytest

from ncwass import balance, channel, cost, sampling, solver, systems
from ncwass.cost import CostSpec
from ncwass.qstate import diag_state

P, Q = 0.25, 0.4
THETA = np.pi / 3
SPEC = CostSpec((np.diag([0.0, 1.0]), np.array([[0, 1], [1, 0]])))
W_AB = 2 + Q - P - 2 * np.sqrt(P / Q)
W_BA = 2 + Q - P - 2 * np.sqrt((1 - Q) / (1 - P))


def angle_pair(p=P, q=Q, theta=THETA):
    return (systems.unitary_angle_system(theta, diag_state(p, 1 - p)),
            systems.unitary_angle_system(theta, diag_state(q, 1 - q)))


def test_closed_forms_frozen():
    assert abs(W_AB - 0.5688612) < 1e-7
    assert abs(W_BA - 0.3611456) < 1e-7


@pytest.mark.parametrize("reverse,expected", [(False, W_AB), (True, W_BA)])
def test_oracle_and_admm_asymmetric_values(reverse, expected):
    a, b = angle_pair()
    if reverse:
        a, b = b, a
    prob = solver.build_problem(a, b, SPEC)
    assert abs(solver.oracle_2x2(prob) - expected) < 1e-6
    rep = solver.solve(prob)
    assert rep.converged
    assert abs(rep.optimal_cost - expected) < 1e-5
    assert abs(rep.distance - np.sqrt(expected)) < 1e-5
    assert rep.constraint_residual < 1e-7 and rep.min_eigenvalue > -1e-7
    assert abs(cost.transport_cost(rep.plan, SPEC) - rep.optimal_cost) < 1e-6


def test_modular_value_and_jump():
    a, b = angle_pair()
    prob = solver.build_problem(a, b, SPEC, "modular")
    assert abs(solver.oracle_2x2(prob) - (2 + Q - P)) < 1e-6
    assert abs(solver.solve(prob).optimal_cost - (2 + Q - P)) < 1e-6
    a, b = angle_pair(q=P)
    assert abs(solver.wasserstein(a, b, SPEC, "modular").optimal_cost) < 1e-6


def test_same_system_distance_zero(rng):
    for variant in ("plain", "modular"):
        a = sampling.random_system(rng, 2)
        rep = solver.wasserstein(a, a, sampling.random_cost(rng, 2, star_closed=True), variant)
        assert rep.converged and abs(rep.optimal_cost) < 1e-6


def test_plain_below_modular(rng):
    for _ in range(10):
        a, b, _ = sampling.system_triple(rng, 2, "generic")
        spec = sampling.random_cost(rng, 2)
        plain = solver.wasserstein(a, b, spec, "plain").optimal_cost
        mod = solver.wasserstein(a, b, spec, "modular").optimal_cost
        assert plain <= mod + 1e-6


def test_report_fields(rng):
    a, b = angle_pair()
    rep = solver.wasserstein(a, b, SPEC)
    assert rep.iterations > 0 and rep.seconds >= 0
    assert rep.distance == np.sqrt(max(rep.optimal_cost, 0.0))
    assert rep.provenance["balance[alpha@1]"] > 0


def test_iteration_cap_reported_not_raised():
    a, b = angle_pair()
    rep = solver.wasserstein(a, b, SPEC, max_iter=10)
    assert not rep.converged and rep.iterations == 10


def test_oracle_rejects_outside_family(rng):
    a, b = sampling.random_system(rng, 2), sampling.random_system(rng, 2)
    with pytest.raises(solver.OracleError):
        solver.oracle_2x2(solver.build_problem(a, b, SPEC))
    st = diag_state(0.3, 0.7)
    bare = systems.GenSystem(st, include_modular=False)
    with pytest.raises(solver.OracleError):
        solver.oracle_2x2(solver.build_problem(bare, bare, SPEC))


@pytest.mark.parametrize("p,q", [(0.25, 0.4), (0.4, 0.25), (0.3, 0.3), (0.1, 0.8)])
def test_oracle_agreement_grid(p, q):
    for variant in ("plain", "modular"):
        prob = solver.build_problem(*angle_pair(p, q), SPEC, variant)
        assert abs(solver.solve(prob).optimal_cost - solver.oracle_2x2(prob)) < 1e-5


def _angle_task(q, variant="modular"):
    return solver.wasserstein(*angle_pair(q=q), SPEC, variant)


def _failing_task(x):
    if x > 0.5:
        raise ValueError("boom")
    return _angle_task(0.3)


def test_sweep_order_and_errors():
    rows = solver.sweep(_failing_task, {"x": [0.0, 1.0, 0.2]})
    assert [r.params["x"] for r in rows] == [0.0, 1.0, 0.2]
    assert [r.status for r in rows] == ["ok", "error", "ok"]
    assert "boom" in rows[1].error
    assert solver.sweep(_failing_task, {"x": []}) == []
    pts = solver.grid_points({"a": [1, 2], "b": [3, 4]})
    assert pts == [{"a": 1, "b": 3}, {"a": 1, "b": 4}, {"a": 2, "b": 3}, {"a": 2, "b": 4}]


def test_sweep_parallel_matches_serial():
    qs = {"q": [0.25, 0.3, 0.35]}
    serial = solver.sweep(_angle_task, qs)
    par = solver.sweep(functools.partial(_angle_task, variant="modular"), qs, jobs=2)
    for s, p in zip(serial, par):
        assert s.params == p.params
        assert s.report.optimal_cost == p.report.optimal_cost


def test_jump_sweep():
    rows = solver.sweep(_angle_task, {"q": [0.25, 0.3, 0.4]})
    vals = [r.report.optimal_cost for r in rows]
    assert abs(vals[0]) < 1e-5
    assert abs(vals[1] - (2 + 0.3 - P)) < 1e-5 and abs(vals[2] - (2 + 0.4 - P)) < 1e-5


def test_plan_is_a_valid_balanced_plan():
    a, b = angle_pair()
    rep = solver.wasserstein(a, b, SPEC)
    assert isinstance(rep.plan.channel, channel.UcpMap)
    assert max(balance.check(rep.plan, a, b).values()) < 1e-6
