import dataclasses

import networkx as nx
import numpy as np
import pytest

from fluxcirc.circulator import select_pair
from fluxcirc.lattice import (
    CouplerState,
    GateSchedule,
    GateStep,
    IllegalTransition,
    Unreachable,
    adjacency_json,
    build_kagome,
    plan_route,
    qubit_adjacency,
    set_coupler_state,
    validate_schedule,
)


def nx_graph(lat):
    g = nx.Graph()
    g.add_nodes_from(range(lat.n_sites))
    for s, ns in qubit_adjacency(lat).items():
        g.add_edges_from((s, n) for n in ns)
    return g


def test_site_counts():
    assert build_kagome(1, 1).n_sites == 3
    assert build_kagome(2, 2).n_sites == 12
    assert build_kagome(4, 5).n_sites == 60


def test_single_cell_is_triangle():
    lat = build_kagome(1, 1)
    adj = qubit_adjacency(lat)
    assert adj == {0: (1, 2), 1: (0, 2), 2: (0, 1)}


def test_couplers_have_three_distinct_ports():
    lat = build_kagome(4, 4)
    for ports in lat.coupler_ports.values():
        assert len(ports) == 3
        assert len(set(ports)) == 3


def test_sites_touch_at_most_two_couplers():
    lat = build_kagome(5, 4)
    counts = [len(lat.site_couplers[s]) for s in range(lat.n_sites)]
    assert set(counts) <= {1, 2}
    assert 1 in counts  # open rows leave boundary sites
    assert 2 in counts


def test_interior_degree_is_four():
    lat = build_kagome(6, 6)
    adj = qubit_adjacency(lat)
    for s in range(lat.n_sites):
        expected = 4 if len(lat.site_couplers[s]) == 2 else 2
        assert len(adj[s]) == expected


def test_adjacency_is_symmetric():
    lat = build_kagome(3, 4)
    adj = qubit_adjacency(lat)
    for s, ns in adj.items():
        for n in ns:
            assert s in adj[n]


def test_patch_connected():
    for rows, cols in ((2, 2), (3, 3), (4, 2), (2, 5), (1, 1), (5, 1)):
        lat = build_kagome(rows, cols)
        assert nx.is_connected(nx_graph(lat)), (rows, cols)


def test_single_row_multicolumn_is_degenerate():
    lat = build_kagome(1, 3)
    with pytest.raises(Unreachable):
        plan_route(lat, 0, 4)


def test_adjacent_route_is_one_gate():
    lat = build_kagome(3, 3)
    schedule = plan_route(lat, 0, 1)
    assert schedule.gate_count() == 1
    assert len(schedule.steps) == 3
    assert [s.action for s in schedule.steps] == ["engage", "gate", "disengage"]
    assert validate_schedule(lat, schedule) == []


def test_same_triangle_squid_index_matches_ports():
    lat = build_kagome(2, 2)
    for a, b, k in ((0, 1, 1), (1, 2, 2), (0, 2, 3)):
        schedule = plan_route(lat, a, b)
        assert schedule.gate_count() == 1
        engage = schedule.steps[0]
        assert engage.coupler == 0
        assert engage.squid_index == k
        ports = lat.coupler_ports[0]
        expected = {ports[p - 1] for p in select_pair(k)}
        assert set(engage.qubits) == expected


def test_distant_route_length_equals_oracle():
    lat = build_kagome(4, 4)
    g = nx_graph(lat)
    schedule = plan_route(lat, 0, lat.n_sites - 1)
    assert schedule.gate_count() == nx.shortest_path_length(g, 0, lat.n_sites - 1)
    assert validate_schedule(lat, schedule) == []


def test_route_determinism():
    lat = build_kagome(5, 5)
    a = plan_route(lat, 2, 61)
    b = plan_route(lat, 2, 61)
    assert a == b


def test_route_validates_endpoints():
    lat = build_kagome(2, 2)
    with pytest.raises(ValueError):
        plan_route(lat, 3, 3)
    with pytest.raises(ValueError):
        plan_route(lat, 0, 99)


def test_planner_soundness_and_optimality_random():
    rng = np.random.default_rng(99)
    for _ in range(500):
        rows = int(rng.integers(2, 7))
        cols = int(rng.integers(2, 7))
        lat = build_kagome(rows, cols)
        a, b = rng.choice(lat.n_sites, size=2, replace=False)
        schedule = plan_route(lat, int(a), int(b))
        assert validate_schedule(lat, schedule) == []
        assert schedule.gate_count() == nx.shortest_path_length(nx_graph(lat), int(a), int(b))
        # consecutive gates chain through shared qubit sites
        gates = [s for s in schedule.steps if s.action == "gate"]
        for g1, g2 in zip(gates, gates[1:]):
            assert len(set(g1.qubits) & set(g2.qubits)) == 1


def test_schedule_round_trips_coupler_states():
    lat = build_kagome(3, 3)
    schedule = plan_route(lat, 0, 20)
    state = dict.fromkeys(lat.coupler_ports, False)
    for step in schedule.steps:
        if step.action == "engage":
            state[step.coupler] = True
        elif step.action == "disengage":
            state[step.coupler] = False
    assert not any(state.values())


def test_validate_flags_double_booking():
    lat = build_kagome(2, 2)
    good = plan_route(lat, 0, 1)
    engage = good.steps[0]
    doubled = GateSchedule(steps=(engage, dataclasses.replace(engage, index=1)))
    violations = validate_schedule(lat, doubled)
    assert any("double-booked" in v for v in violations)
    assert any("missing disengage" in v for v in violations)


def test_validate_flags_pair_mismatch():
    lat = build_kagome(2, 2)
    ports = lat.coupler_ports[0]
    bad = GateSchedule(
        steps=(
            GateStep(0, 0, 1, (ports[1], ports[2]), "engage"),  # k=1 selects ports (1,2)
            GateStep(1, 0, 1, (ports[1], ports[2]), "gate"),
            GateStep(2, 0, 1, (ports[1], ports[2]), "disengage"),
        )
    )
    violations = validate_schedule(lat, bad)
    assert any("pair/k mismatch" in v for v in violations)


def test_validate_flags_gate_without_engage():
    lat = build_kagome(2, 2)
    ports = lat.coupler_ports[0]
    bad = GateSchedule(steps=(GateStep(0, 0, 1, (ports[0], ports[1]), "gate"),))
    violations = validate_schedule(lat, bad)
    assert any("non-engaged" in v for v in violations)


def test_validate_flags_foreign_qubits():
    lat = build_kagome(2, 2)
    bad = GateSchedule(steps=(GateStep(0, 0, 1, (9, 10), "engage"),))
    violations = validate_schedule(lat, bad)
    assert any("not attached" in v for v in violations)


def test_state_machine_transitions():
    lat = build_kagome(2, 2)
    on = CouplerState.on(2)
    assert on.pair == (2, 3)
    lat2 = set_coupler_state(lat, 0, on)
    assert lat2.coupler_states[0].engaged
    assert not lat.coupler_states[0].engaged  # original snapshot untouched
    with pytest.raises(IllegalTransition):
        set_coupler_state(lat2, 0, CouplerState.on(1))
    lat3 = set_coupler_state(lat2, 0, CouplerState.off())
    assert not lat3.coupler_states[0].engaged
    with pytest.raises(IllegalTransition):
        set_coupler_state(lat3, 0, CouplerState.off())


def test_state_machine_pair_changes_require_disengage():
    # a coupler's engaged pair can only change by passing through OFF
    rng = np.random.default_rng(17)
    lat = build_kagome(2, 3)
    for _ in range(300):
        c = int(rng.choice(sorted(lat.coupler_ports)))
        before = lat.coupler_states[c]
        want_on = bool(rng.integers(0, 2))
        new = CouplerState.on(int(rng.integers(1, 4))) if want_on else CouplerState.off()
        try:
            lat = set_coupler_state(lat, c, new)
        except IllegalTransition:
            assert before.engaged == new.engaged  # only like-to-like is refused
            continue
        if before.engaged:
            assert not lat.coupler_states[c].engaged


def test_coupler_state_pair_consistency():
    with pytest.raises(ValueError):
        CouplerState(engaged=True, squid_index=1, pair=(2, 3))
    with pytest.raises(ValueError):
        CouplerState(engaged=False, squid_index=1, pair=None)


def test_port_relabeling_equivariance():
    lat = build_kagome(3, 3)
    source, target = 0, 20
    base = plan_route(lat, source, target)

    perm = (2, 0, 1)  # new port p+1 reads old port perm[p]+1
    new_ports = {
        cid: tuple(ports[perm[p]] for p in range(3)) for cid, ports in lat.coupler_ports.items()
    }
    permuted = dataclasses.replace(lat, coupler_ports=new_ports)
    other = plan_route(permuted, source, target)

    assert [s.coupler for s in other.steps] == [s.coupler for s in base.steps]
    assert [s.qubits for s in other.steps] == [s.qubits for s in base.steps]
    assert validate_schedule(permuted, other) == []
    # squid indices follow the permuted port positions
    for s_base, s_other in zip(base.steps, other.steps):
        ports = new_ports[s_other.coupler]
        expected = {ports[p - 1] for p in select_pair(s_other.squid_index)}
        assert set(s_other.qubits) == expected


def test_hop_transfer_demo():
    from fluxcirc.lattice import hop_transfer_demo

    lat = build_kagome(2, 2)
    schedule = plan_route(lat, 1, 2)  # right <-> top of cell (0, 0): squid 2, pair (2, 3)
    engage = schedule.steps[0]
    report = hop_transfer_demo(engage, fock_cutoff=2, coupling=0.02)
    assert report.target_mode == 3
    assert report.peak_target_occupation > 0.98
    assert report.dark_port_max_occupation < 1e-10


def test_adjacency_json_export():
    lat = build_kagome(2, 2)
    data = adjacency_json(lat)
    assert data["rows"] == 2 and data["cols"] == 2
    assert data["sites"] == 12
    assert len(data["adjacency"]) == 12
    assert len(data["coupler_ports"]) == lat.n_couplers
