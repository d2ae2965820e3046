"""Bundled example networks built through the public editing API, so every
fixture honors the same structural rules as interactive edits. ieee14() is the
classic 14-bus system (100 MVA base, taps at nominal, bus-9 shunt folded into
its load)."""

from __future__ import annotations

from . import components as comp
from .components import (
    BusBarSpec,
    BusSourceSpec,
    GeneratorSpec,
    LineSpec,
    LoadSpec,
    MeterSpec,
    PUBaseSpec,
    TransformerSpec,
)
from .geometry import Placement
from .network import Network, PortRef
from .units import Quantity

# fbus, tbus, r, x, total b (pu on 100 MVA)
_IEEE14_LINES = [
    (1, 2, 0.01938, 0.05917, 0.0528),
    (1, 5, 0.05403, 0.22304, 0.0492),
    (2, 3, 0.04699, 0.19797, 0.0438),
    (2, 4, 0.05811, 0.17632, 0.0340),
    (2, 5, 0.05695, 0.17388, 0.0346),
    (3, 4, 0.06701, 0.17103, 0.0128),
    (4, 5, 0.01335, 0.04211, 0.0),
    (6, 11, 0.09498, 0.19890, 0.0),
    (6, 12, 0.12291, 0.25581, 0.0),
    (6, 13, 0.06615, 0.13027, 0.0),
    (7, 8, 0.0, 0.17615, 0.0),
    (7, 9, 0.0, 0.11001, 0.0),
    (9, 10, 0.03181, 0.08450, 0.0),
    (9, 14, 0.12711, 0.27038, 0.0),
    (10, 11, 0.08205, 0.19207, 0.0),
    (12, 13, 0.22092, 0.19988, 0.0),
    (13, 14, 0.17093, 0.34802, 0.0),
]
# two-winding transformer branches (taps treated as nominal)
_IEEE14_TRANSFORMERS = [(4, 7, 0.20912), (4, 9, 0.55618), (5, 6, 0.25202)]
# bus -> (Pd MW, Qd MVAr); bus 9 includes its 19 MVAr shunt as negative load Q
_IEEE14_LOADS = {
    2: (21.7, 12.7), 3: (94.2, 19.0), 4: (47.8, -3.9), 5: (7.6, 1.6),
    6: (11.2, 7.5), 9: (29.5, -2.4), 10: (9.0, 5.8), 11: (3.5, 1.8),
    12: (6.1, 1.6), 13: (13.5, 5.8), 14: (14.9, 5.0),
}
# bus -> (v_set pu, Pg MW, slack?)
_IEEE14_SOURCES = {
    1: (1.06, 0.0, True),
    2: (1.045, 40.0, False),
    3: (1.01, 0.0, False),
    6: (1.07, 0.0, False),
    8: (1.09, 0.0, False),
}

_BAR_LENGTH = 200.0


class _Attacher:
    """Hands out spread-apart attachment points along each bus-bar."""

    def __init__(self, net: Network):
        self.net = net
        self.counts: dict[int, int] = {}

    def point(self, bar_id: int) -> PortRef:
        c = self.net.components[bar_id]
        k = self.counts.get(bar_id, 0)
        self.counts[bar_id] = k + 1
        return PortRef(bar_id, point=(c.placement.x + 15.0 + 16.0 * k, c.placement.y))


def ieee14(split_bus4: bool = False) -> Network:
    """The 14-bus test system as a power-flow diagram.

    With ``split_bus4`` the 4-5 branch leaves from an extra bar joined to bus 4
    by a connecting line; the electrical system must be identical.
    """
    net = Network(comp.POWER_FLOW)
    bars: dict[int, int] = {}
    for i in range(1, 15):
        col, row = (i - 1) % 5, (i - 1) // 5
        placement = Placement(400.0 + 520.0 * col, 400.0 + 700.0 * row)
        source = None
        if i in _IEEE14_SOURCES:
            v_set, p_gen, slack = _IEEE14_SOURCES[i]
            source = BusSourceSpec(slack=slack, v_set=v_set,
                                   p_gen=Quantity(p_gen, "MW") if p_gen else None)
        bars[i] = net.add_component(comp.BUSBAR, BusBarSpec(_BAR_LENGTH), placement,
                                    source=source)
    attach = _Attacher(net)

    extra_bar = None
    if split_bus4:
        base = net.components[bars[4]].placement
        extra_bar = net.add_component(comp.BUSBAR, BusBarSpec(_BAR_LENGTH),
                                      Placement(base.x + 40.0, base.y + 90.0))
        net.add_line(attach.point(bars[4]), attach.point(extra_bar), LineSpec())

    for i, (p_mw, q_mvar) in _IEEE14_LOADS.items():
        bar = net.components[bars[i]].placement
        load = net.add_component(
            comp.LOAD, LoadSpec.power(Quantity(p_mw, "MW"), Quantity(q_mvar, "MVAr")),
            Placement(bar.x + 60.0, bar.y + 150.0))
        net.add_line(PortRef(load, port=0), attach.point(bars[i]), LineSpec())

    for f, t, r, x, b in _IEEE14_LINES:
        from_bar = bars[f]
        if split_bus4 and (f, t) == (4, 5):
            from_bar = extra_bar
        net.add_line(attach.point(from_bar), attach.point(bars[t]),
                     LineSpec(r=r, x=x, shunt_b=b))

    for f, t, x in _IEEE14_TRANSFORMERS:
        pf, pt = net.components[bars[f]].placement, net.components[bars[t]].placement
        trafo = net.add_component(
            comp.TRANSFORMER,
            TransformerSpec(Quantity(100, "MVA", "3-ph"), Quantity(138, "kV"),
                            Quantity(69, "kV"), impedance=complex(0.0, x)),
            Placement((pf.x + pt.x) / 2.0, (pf.y + pt.y) / 2.0 + 40.0))
        net.add_line(PortRef(trafo, port=0), attach.point(bars[f]), LineSpec())
        net.add_line(PortRef(trafo, port=1), attach.point(bars[t]), LineSpec())
    return net


def two_bus(p_load_pu: float = 1.0, q_load_pu: float = 0.0,
            r: float = 0.0, x: float = 0.1, shunt_b: float = 0.0) -> Network:
    """Slack feeding one load bus over a single branch."""
    net = Network(comp.POWER_FLOW)
    bar1 = net.add_component(comp.BUSBAR, BusBarSpec(_BAR_LENGTH),
                             Placement(200.0, 200.0),
                             source=BusSourceSpec(slack=True, v_set=1.0))
    bar2 = net.add_component(comp.BUSBAR, BusBarSpec(_BAR_LENGTH),
                             Placement(700.0, 200.0))
    attach = _Attacher(net)
    net.add_line(attach.point(bar1), attach.point(bar2),
                 LineSpec(r=r, x=x, shunt_b=shunt_b))
    load = net.add_component(
        comp.LOAD, LoadSpec.power(Quantity(p_load_pu, "pu"), Quantity(q_load_pu, "pu")),
        Placement(760.0, 340.0))
    net.add_line(PortRef(load, port=0), attach.point(bar2), LineSpec())
    return net


def _three_bus_topology(net: Network) -> dict[str, int]:
    """Shared three-bus ring: bars, branches, loads (no sources, no meters).
    Bars sit on three different rows so line routes stay geometrically apart."""
    ids: dict[str, int] = {}
    attach = _Attacher(net)
    for name, (x, y) in (("bar1", (200.0, 200.0)), ("bar2", (900.0, 600.0)),
                         ("bar3", (200.0, 1000.0))):
        ids[name] = net.add_component(comp.BUSBAR, BusBarSpec(_BAR_LENGTH),
                                      Placement(x, y))
    ids["line12"] = net.add_line(attach.point(ids["bar1"]), attach.point(ids["bar2"]),
                                 LineSpec(r=0.02, x=0.06))
    ids["line13"] = net.add_line(attach.point(ids["bar1"]), attach.point(ids["bar3"]),
                                 LineSpec(r=0.04, x=0.12, shunt_b=0.03))
    ids["line23"] = net.add_line(attach.point(ids["bar2"]), attach.point(ids["bar3"]),
                                 LineSpec(r=0.03, x=0.08))
    load = net.add_component(
        comp.LOAD, LoadSpec.power(Quantity(0.6, "pu"), Quantity(0.25, "pu")),
        Placement(410.0, 1150.0))
    net.add_line(PortRef(load, port=0), attach.point(ids["bar3"]), LineSpec())
    ids["load"] = load
    return ids


def three_bus() -> Network:
    """Slack + PV + PQ ring, small enough for hand checking."""
    net = Network(comp.POWER_FLOW)
    ids = _three_bus_topology(net)
    net.components[ids["bar1"]].source = BusSourceSpec(slack=True, v_set=1.02)
    net.components[ids["bar2"]].source = BusSourceSpec(v_set=1.01,
                                                       p_gen=Quantity(0.3, "pu"))
    return net


def se_three_bus() -> tuple[Network, Network]:
    """(state-estimation network with calibrated meters, power-flow twin).

    Meter readings are the twin's Newton-Raphson operating point, so a
    noiseless estimate must reproduce that state.
    """
    from .bus_system import build_ybus, extract_bus_system
    from .estimation import measurement_function, meters_to_measurements, pack_state
    from .network import Component
    from .powerflow import newton_raphson

    pf_net = three_bus()
    pf_system = extract_bus_system(pf_net)
    ybus = build_ybus(pf_system.branches, pf_system.n, pf_system.bus_shunt)
    solution, _ = newton_raphson(ybus, pf_system.buses)

    se_net = Network(comp.STATE_ESTIMATION)
    ids = _three_bus_topology(se_net)
    # each sits within ~30 units of exactly one target's geometry
    placements = {
        "m_line12": (925.0, 400.0),   # vertical leg of line 1-2
        "m_line13": (205.0, 560.0),   # vertical leg of line 1-3
        "m_bar1": (190.0, 150.0),
        "m_bar2": (1050.0, 630.0),
        "m_bar3": (350.0, 1030.0),
    }
    quantities = {
        "m_line12": ("P", "Q"), "m_line13": ("P", "Q"),
        "m_bar1": ("P", "Q", "Vmag"), "m_bar2": ("P", "Q", "Vmag"),
        "m_bar3": ("P", "Q", "Vmag"),
    }
    meter_ids = {}
    for name, pos in placements.items():
        meter_ids[name] = se_net.add_component(
            comp.METER,
            MeterSpec(quantities[name],
                      values={q: 0.0 for q in quantities[name]}),
            Placement(*pos))

    se_system = extract_bus_system(se_net)
    mset = meters_to_measurements(se_net, se_system)
    x_true = pack_state(solution.v, solution.theta, pf_system.slack_index())
    h = measurement_function(x_true, ybus, se_system.branches, mset,
                             slack=pf_system.slack_index())
    readings: dict[int, dict[str, float]] = {}
    for m, value in zip(mset, h):
        key = {"pflow": "P", "qflow": "Q", "pinj": "P", "qinj": "Q", "vmag": "Vmag"}[m.kind]
        readings.setdefault(m.meter, {})[key] = float(value)
    for name, cid in meter_ids.items():
        c: Component = se_net.components[cid]
        c.spec = MeterSpec(c.spec.quantities, values=readings[cid], sigmas=c.spec.sigmas)
    return se_net, pf_net


def per_unit_chain() -> Network:
    """Generator - 13.8/138 kV transformer - bus - ohmic line - 138/69 kV
    transformer - RLC load, with the base marker anchored at the generator."""
    net = Network(comp.PER_UNIT)
    gen = net.add_component(
        comp.GENERATOR,
        GeneratorSpec(Quantity(50, "MVA", "3-ph"), Quantity(13.8, "kV"), impedance=0.1j),
        Placement(500.0, 300.0))
    t1 = net.add_component(
        comp.TRANSFORMER,
        TransformerSpec(Quantity(100, "MVA", "3-ph"), Quantity(13.8, "kV"),
                        Quantity(138, "kV"), impedance=0.1j),
        Placement(500.0, 450.0))
    bar = net.add_component(comp.BUSBAR, BusBarSpec(120.0), Placement(440.0, 640.0))
    t2 = net.add_component(
        comp.TRANSFORMER,
        TransformerSpec(Quantity(50, "MVA", "3-ph"), Quantity(138, "kV"),
                        Quantity(69, "kV"), impedance=0.08j),
        Placement(900.0, 640.0))
    load = net.add_component(comp.LOAD, LoadSpec.rlc(r=47.61), Placement(900.0, 800.0))
    net.add_component(comp.PU_BASE, PUBaseSpec(Quantity(100, "MVA"), Quantity(13.8, "kV")),
                      Placement(520.0, 280.0))

    net.add_line(PortRef(gen, port=0), PortRef(t1, port=0), LineSpec())
    net.add_line(PortRef(t1, port=1), PortRef(bar, point=(470.0, 640.0)), LineSpec())
    net.add_line(PortRef(bar, point=(530.0, 640.0)), PortRef(t2, port=0),
                 LineSpec(r=0.0, x=19.044, unit="ohm"))
    net.add_line(PortRef(t2, port=1), PortRef(load, port=0), LineSpec())
    return net
