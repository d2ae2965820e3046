import numpy as np
import pytest

from sldkit import components as comp
from sldkit.bus_system import Branch, build_ybus, extract_bus_system
from sldkit.cases import ieee14, two_bus
from sldkit.components import BusBarSpec, BusSourceSpec, LineSpec, LoadSpec
from sldkit.errors import IndexOutOfRange, IslandWithoutSlack, NoSlackDesignated
from sldkit.geometry import Placement
from sldkit.network import Network, PortRef
from sldkit.units import Quantity


def _bar(net, x=100.0, y=100.0, source=None):
    return net.add_component(comp.BUSBAR, BusBarSpec(100.0), Placement(x, y),
                             source=source)


def test_connecting_line_merges_buses():
    net = Network(comp.POWER_FLOW)
    bar1 = _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    bar2 = _bar(net, y=400.0)
    net.add_line(PortRef(bar1, point=(150.0, 100.0)),
                 PortRef(bar2, point=(150.0, 400.0)), LineSpec())
    system = extract_bus_system(net)
    assert system.n == 1
    assert not system.branches


def test_impedance_line_keeps_two_buses():
    net = Network(comp.POWER_FLOW)
    bar1 = _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    bar2 = _bar(net, y=400.0)
    net.add_line(PortRef(bar1, point=(150.0, 100.0)),
                 PortRef(bar2, point=(150.0, 400.0)), LineSpec(x=0.1))
    system = extract_bus_system(net)
    assert system.n == 2
    assert len(system.branches) == 1
    assert system.branches[0].y_series == pytest.approx(1 / 0.1j)


def test_load_sign_convention():
    net = two_bus(p_load_pu=0.5, q_load_pu=0.2)
    system = extract_bus_system(net)
    load_bus = system.buses[1]
    assert load_bus.p_sched == pytest.approx(-0.5)
    assert load_bus.q_sched == pytest.approx(-0.2)


def test_mw_loads_scale_by_system_base():
    net = Network(comp.POWER_FLOW)
    bar = _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    load = net.add_component(
        comp.LOAD, LoadSpec.power(Quantity(50, "MW"), Quantity(30, "MVAr")),
        Placement(400, 400))
    net.add_line(PortRef(load, port=0), PortRef(bar, point=(150.0, 100.0)))
    system = extract_bus_system(net)
    assert system.buses[0].p_sched == pytest.approx(-0.5)
    assert system.buses[0].q_sched == pytest.approx(-0.3)


def test_no_slack_designated():
    net = Network(comp.POWER_FLOW)
    _bar(net)
    with pytest.raises(NoSlackDesignated):
        extract_bus_system(net)


def test_island_without_slack():
    net = Network(comp.POWER_FLOW)
    _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    _bar(net, x=5000.0, y=5000.0)
    with pytest.raises(IslandWithoutSlack):
        extract_bus_system(net)


def test_vset_fallback_marks_slack_with_warning():
    net = Network(comp.POWER_FLOW)
    _bar(net, source=BusSourceSpec(v_set=1.02))
    system = extract_bus_system(net)
    assert system.buses[0].kind == "slack"
    assert any("assumed as slack" in w for w in system.warnings)


def test_transformer_becomes_branch_and_rebases():
    net = Network(comp.POWER_FLOW)
    bar1 = _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    bar2 = _bar(net, y=500.0)
    trafo = net.add_component(
        comp.TRANSFORMER,
        comp.TransformerSpec(Quantity(50, "MVA"), Quantity(138, "kV"),
                             Quantity(69, "kV"), impedance=0.08j),
        Placement(300.0, 300.0))
    net.add_line(PortRef(trafo, port=0), PortRef(bar1, point=(150.0, 100.0)))
    net.add_line(PortRef(trafo, port=1), PortRef(bar2, point=(150.0, 500.0)))
    system = extract_bus_system(net)
    assert system.n == 2
    branch = system.branches[0]
    # 0.08 pu on 50 MVA own base -> 0.16 pu on the 100 MVA system base
    assert branch.y_series == pytest.approx(1 / 0.16j)


def test_ideal_transformer_merges():
    net = Network(comp.POWER_FLOW)
    bar1 = _bar(net, source=BusSourceSpec(slack=True, v_set=1.0))
    bar2 = _bar(net, y=500.0)
    trafo = net.add_component(
        comp.TRANSFORMER,
        comp.TransformerSpec(Quantity(50, "MVA"), Quantity(138, "kV"),
                             Quantity(69, "kV")),
        Placement(300.0, 300.0))
    net.add_line(PortRef(trafo, port=0), PortRef(bar1, point=(150.0, 100.0)))
    net.add_line(PortRef(trafo, port=1), PortRef(bar2, point=(150.0, 500.0)))
    system = extract_bus_system(net)
    assert system.n == 1


def test_ieee14_counts(ieee14_system):
    assert ieee14_system.n == 14
    assert len(ieee14_system.branches) == 20
    kinds = [b.kind for b in ieee14_system.buses]
    assert kinds.count("slack") == 1
    assert kinds.count("pv") == 4


def test_split_bus_same_system(ieee14_system):
    split = extract_bus_system(ieee14(split_bus4=True))
    assert split.n == ieee14_system.n

    def canonical(system):
        return sorted(
            (min(b.from_bus, b.to_bus), max(b.from_bus, b.to_bus),
             complex(np.round(b.y_series, 12)), round(b.b_shunt_half, 12))
            for b in system.branches)

    assert canonical(split) == canonical(ieee14_system)
    for a, b in zip(ieee14_system.buses, split.buses):
        assert (a.kind, a.v_set) == (b.kind, b.v_set)
        assert a.p_sched == pytest.approx(b.p_sched)
        assert a.q_sched == pytest.approx(b.q_sched)


def test_ybus_textbook_stamp():
    y = 1 / 0.1j
    ybus = build_ybus([Branch(0, 1, y)], 2)
    expected = np.array([[y, -y], [-y, y]])
    assert np.allclose(ybus, expected)


def test_ybus_shunt_on_diagonal():
    y = 1 / (0.01 + 0.1j)
    ybus = build_ybus([Branch(0, 1, y, b_shunt_half=0.01)], 2)
    assert ybus[0, 0] == pytest.approx(y + 0.01j)
    assert ybus[1, 1] == pytest.approx(y + 0.01j)
    assert ybus[0, 1] == pytest.approx(-y)


def test_ybus_parallel_branches_superpose():
    y1, y2 = 1 / 0.1j, 1 / 0.2j
    ybus = build_ybus([Branch(0, 1, y1), Branch(0, 1, y2)], 2)
    assert ybus[0, 1] == pytest.approx(-(y1 + y2))


def test_ybus_row_sums_equal_shunts(ieee14_system, ieee14_ybus):
    row_sums = ieee14_ybus.sum(axis=1)
    shunts = np.zeros(ieee14_system.n, dtype=complex)
    for br in ieee14_system.branches:
        shunts[br.from_bus] += 1j * br.b_shunt_half
        shunts[br.to_bus] += 1j * br.b_shunt_half
    shunts += ieee14_system.bus_shunt
    assert np.allclose(row_sums, shunts, atol=1e-12)


def test_ybus_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        build_ybus([Branch(0, 5, 1 / 0.1j)], 2)
