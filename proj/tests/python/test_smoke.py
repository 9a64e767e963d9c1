"""Smoke tests for the python bindings."""

import os

import numpy as np
import pytest

import gridmarket as gm

DATA = os.environ.get("GRIDMARKET_DATA", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


@pytest.fixture(scope="module")
def twobus():
    return gm.load_case(os.path.join(DATA, "twobus.case"))


@pytest.fixture(scope="module")
def ieee14():
    return gm.load_case(os.path.join(DATA, "ieee14.case"))


def test_load_case_and_roundtrip(ieee14):
    assert ieee14.network.n == 14
    assert ieee14.network.m == 20
    text = gm.serialize_case(ieee14)
    again = gm.parse_case(text)
    assert gm.serialize_case(again) == text


def test_dispatch(ieee14):
    sol = gm.solve_economic_dispatch(ieee14.cost, ieee14.network.Pd)
    assert sol.lambda_star == pytest.approx(1803.167, rel=1e-4)
    assert sol.Pg_star.sum() == pytest.approx(ieee14.network.Pd.sum(), rel=1e-12)
    np.testing.assert_allclose(sol.b_star, sol.lambda_star)
    assert gm.total_cost(ieee14.cost, sol.Pg_star) > 0


def test_equilibrium_and_field(twobus):
    tree = gm.select_spanning_tree(twobus.network)
    xbar = gm.find_equilibrium(twobus.network, tree, twobus.cost, twobus.gains)
    F = gm.vector_field(twobus.network, tree, twobus.cost, twobus.gains, xbar)
    assert np.max(np.abs(F)) < 1e-9
    assert gm.energy_function_V(twobus.network, tree, twobus.gains, xbar, xbar) == pytest.approx(0.0)
    # pack/unpack round trip
    x = gm.SystemState.unpack(xbar.pack(), twobus.network.n)
    np.testing.assert_allclose(x.pack(), xbar.pack())


def test_certificate_pipeline(twobus):
    tree = gm.select_spanning_tree(twobus.network)
    xbar = gm.find_equilibrium(twobus.network, tree, twobus.cost, twobus.gains)
    gamma = gm.default_region(twobus.network, tree, xbar)
    cert = gm.find_epsilon(twobus.network, tree, twobus.cost, twobus.gains, gamma)
    assert cert.eps.eps0 == pytest.approx(0.0625)
    assert 0 < cert.c1 <= cert.c2
    assert cert.alpha > 0
    lc = gm.lipschitz_constants(twobus.network, tree, twobus.cost, twobus.gains, cert)
    sb = gm.step_bounds(lc, cert.alpha, cert.alpha / 2)
    assert sb.xi_bar > 0
    assert sb.zeta_bar > 0
    report = gm.certificate_report(cert, lc, sb)
    assert "xi_bar" in report


def test_simulate_and_csv(twobus):
    tree = gm.select_spanning_tree(twobus.network)
    xbar = gm.find_equilibrium(twobus.network, tree, twobus.cost, twobus.gains)
    policy = gm.SchedulePolicy()
    policy.kind = gm.SchedulePolicy.Kind.Periodic
    policy.xi = 0.001
    policy.N = 10
    sched = gm.generate_schedule(policy, 0.1, 0)
    xbar.omega = xbar.omega + 0.05
    traj = gm.simulate(twobus.network, tree, twobus.cost, twobus.gains, sched, [], xbar)
    assert not traj.diverged
    assert len(traj.samples) == 101
    csv = gm.trajectory_csv(traj)
    assert csv.startswith("t,omega_1,omega_2,")
    assert len(csv.splitlines()) == 102
    kinds = {e.kind for e in traj.events}
    assert {"market-clear", "bid-update", "iso-update"} <= kinds


def test_scenario_parsing():
    events = gm.load_scenario(os.path.join(DATA, "staged_changes.scenario"))
    assert [e.t for e in events] == [1.0, 15.0]
    assert events[0].actions[0].kind == gm.ScenarioAction.Kind.ScaleAllLoads


def test_build_network_validation():
    b1, b2 = gm.BusRecord(), gm.BusRecord()
    b1.id, b1.M, b1.A, b1.V, b1.Pd = 1, 1.0, 1.0, 1.0, 0.0
    b2.id, b2.M, b2.A, b2.V, b2.Pd = 2, 1.0, 1.0, 1.0, 1.0
    e = gm.EdgeRecord()
    e.from_bus, e.to_bus, e.B = 1, 2, 1.0
    net = gm.build_network([b1, b2], [e])
    assert net.n == 2
    with pytest.raises(ValueError):
        gm.build_network([b1, b2], [])  # disconnected
