"""Reduction of a diagram to its electrical bus/branch system.

Bus-bars and everything joined to them by zero-impedance (connecting) lines or
ideal transformers merge into single buses via union-find; impedance lines and
transformer impedances become branches; loads and bus source designations set
the scheduled injections and bus types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import components as comp
from .errors import (
    IndexOutOfRange,
    InvalidSpec,
    IslandWithoutSlack,
    NoSlackDesignated,
)
from .network import Network

DEFAULT_S_BASE_VA = 100e6  # 100 MVA, the usual system base when none is modeled

SLACK, PV, PQ = "slack", "pv", "pq"
_KIND_CODE = {SLACK: 0, PV: 1, PQ: 2}


@dataclass
class BusRecord:
    index: int
    kind: str = PQ
    p_sched: float = 0.0   # pu, generation minus load
    q_sched: float = 0.0
    v_set: float | None = None
    theta_set: float = 0.0  # radians, slack only
    q_min: float = -math.inf
    q_max: float = math.inf

    @property
    def kind_code(self) -> int:
        return _KIND_CODE[self.kind]


@dataclass
class Branch:
    from_bus: int
    to_bus: int
    y_series: complex
    b_shunt_half: float = 0.0
    source_id: int | None = None  # line or transformer component behind it


@dataclass
class BusSystem:
    buses: list[BusRecord]
    branches: list[Branch]
    bus_shunt: np.ndarray           # per-bus extra shunt admittance (pu)
    s_base_va: float
    warnings: list[str] = field(default_factory=list)
    bus_of_terminal: dict = field(default_factory=dict)
    branch_of_component: dict[int, int] = field(default_factory=dict)
    members: dict[int, set[int]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.buses)

    def bus_of_endpoint(self, ref) -> int:
        return self.bus_of_terminal[_terminal_key_from_ref(ref)]

    def slack_index(self) -> int:
        for bus in self.buses:
            if bus.kind == SLACK:
                return bus.index
        raise NoSlackDesignated("no slack bus in the extracted system")


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, key) -> None:
        self.parent.setdefault(key, key)

    def find(self, key):
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _terminal_key_from_ref(ref) -> tuple:
    if ref.point is not None:
        return ("bus", ref.component)
    return ("port", ref.component, ref.port)


def _terminals_of(c) -> list[tuple]:
    if c.kind == comp.BUSBAR:
        return [("bus", c.id)]
    if c.kind in (comp.GENERATOR, comp.LOAD):
        return [("port", c.id, 0)]
    if c.kind == comp.TRANSFORMER:
        return [("port", c.id, 0), ("port", c.id, 1)]
    return []


def _transformer_merges(spec: comp.TransformerSpec) -> bool:
    return spec.impedance is None or spec.impedance == 0

def _pu(q, s_base_va: float) -> float:
    """Power quantity to pu on the system base."""
    if q is None:
        return 0.0
    if q.is_per_unit:
        return q.magnitude
    return q.si / s_base_va


def extract_bus_system(net: Network, s_base_va: float = DEFAULT_S_BASE_VA) -> BusSystem:
    """Merge the diagram into buses and branches.

    Bus numbering is deterministic: nodes ordered by the smallest component id
    they contain. Raises NoSlackDesignated / IslandWithoutSlack in power-flow
    mode; in state-estimation mode a missing designation falls back to the
    lowest-numbered bus as angle reference (with a warning).
    """
    uf = _UnionFind()
    for c in net.components.values():
        for key in _terminals_of(c):
            uf.add(key)
    for c in net.components.values():
        if c.kind == comp.TRANSFORMER and _transformer_merges(c.spec):
            uf.union(("port", c.id, 0), ("port", c.id, 1))
    for line in net.lines.values():
        if line.spec.is_connecting:
            uf.union(_terminal_key_from_ref(line.end_a),
                     _terminal_key_from_ref(line.end_b))

    groups: dict = {}
    for key in list(uf.parent):
        groups.setdefault(uf.find(key), []).append(key)
    ordered = sorted(groups.values(), key=lambda keys: min(k[1] for k in keys))

    warnings: list[str] = []
    buses = [BusRecord(index=i) for i in range(len(ordered))]
    bus_of_terminal = {}
    members: dict[int, set[int]] = {i: set() for i in range(len(ordered))}
    for i, keys in enumerate(ordered):
        for key in keys:
            bus_of_terminal[key] = i
            members[i].add(key[1])

    # injections and bus types
    for c in net.components.values():
        if c.kind == comp.LOAD:
            if c.spec.form != "power":
                raise InvalidSpec(
                    f"load {c.id} is RLC-form; power-flow extraction needs P/Q")
            bus = buses[bus_of_terminal[("port", c.id, 0)]]
            bus.p_sched -= _pu(c.spec.p, s_base_va)
            bus.q_sched -= _pu(c.spec.q, s_base_va)
        elif c.kind == comp.BUSBAR and c.source is not None:
            bus = buses[bus_of_terminal[("bus", c.id)]]
            src = c.source
            bus.p_sched += _pu(src.p_gen, s_base_va)
            bus.q_sched += _pu(src.q_gen, s_base_va)
            if src.v_set is not None:
                if bus.v_set is not None and not math.isclose(bus.v_set, src.v_set,
                                                              rel_tol=1e-12):
                    raise InvalidSpec(
                        f"conflicting voltage setpoints on merged bus {bus.index}")
                bus.v_set = src.v_set
            if src.slack:
                if any(b.kind == SLACK and b is not bus for b in buses):
                    raise InvalidSpec("more than one slack designation")
                bus.kind = SLACK
                bus.theta_set = math.radians(src.theta_set_deg)

    if buses and not any(b.kind == SLACK for b in buses):
        fallback = next((b for b in buses if b.v_set is not None), None)
        if fallback is not None:
            fallback.kind = SLACK
            warnings.append(
                f"no slack designated; bus {fallback.index} (lowest with a voltage "
                f"setpoint) assumed as slack")
        elif net.mode == comp.STATE_ESTIMATION and buses:
            buses[0].kind = SLACK
            buses[0].v_set = 1.0
            warnings.append("no reference designated; bus 0 pinned as angle reference")
        else:
            raise NoSlackDesignated("power flow needs a slack bus designation")
    for bus in buses:
        if bus.kind != SLACK and bus.v_set is not None:
            bus.kind = PV

    # branches
    branches: list[Branch] = []
    bus_shunt = np.zeros(len(buses), dtype=complex)
    branch_of_component: dict[int, int] = {}

    def add_branch(fr: int, to: int, y: complex, bsh_half: float, cid: int) -> None:
        if fr == to:
            bus_shunt[fr] += 2j * bsh_half
            warnings.append(
                f"component {cid} closes a loop on bus {fr}; series part cancels, "
                f"keeping its line charging")
            return
        branch_of_component[cid] = len(branches)
        branches.append(Branch(fr, to, y, bsh_half, cid))

    for line in net.lines.values():
        if line.spec.is_connecting:
            continue
        if line.spec.unit == "ohm":
            raise InvalidSpec(
                f"line {line.id} uses ohmic impedance; no base exists in {net.mode} mode")
        fr = bus_of_terminal[_terminal_key_from_ref(line.end_a)]
        to = bus_of_terminal[_terminal_key_from_ref(line.end_b)]
        add_branch(fr, to, 1.0 / line.spec.impedance, line.spec.shunt_b / 2.0, line.id)
    for c in net.components.values():
        if c.kind == comp.TRANSFORMER and not _transformer_merges(c.spec):
            z = c.spec.impedance * (s_base_va / c.spec.rated_power.si)
            fr = bus_of_terminal[("port", c.id, 0)]
            to = bus_of_terminal[("port", c.id, 1)]
            add_branch(fr, to, 1.0 / z, 0.0, c.id)

    system = BusSystem(buses, branches, bus_shunt, s_base_va, warnings,
                       bus_of_terminal, branch_of_component, members)
    _check_islands(system)
    return system


def _check_islands(system: BusSystem) -> None:
    if not system.buses:
        return
    adjacency: dict[int, list[int]] = {b.index: [] for b in system.buses}
    for br in system.branches:
        adjacency[br.from_bus].append(br.to_bus)
        adjacency[br.to_bus].append(br.from_bus)
    seen = set()
    stack = [system.slack_index()]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(adjacency[i])
    missing = [b.index for b in system.buses if b.index not in seen]
    if missing:
        raise IslandWithoutSlack(
            f"buses {missing} are electrically separated from the slack")


def build_ybus(branches: list[Branch], n: int,
               bus_shunt: np.ndarray | None = None) -> np.ndarray:
    """Dense bus admittance matrix from the pi-model branch stamps."""
    ybus = np.zeros((n, n), dtype=complex)
    for br in branches:
        if not (0 <= br.from_bus < n and 0 <= br.to_bus < n):
            raise IndexOutOfRange(
                f"branch {br.from_bus}-{br.to_bus} outside 0..{n - 1}")
        y = br.y_series
        ybus[br.from_bus, br.from_bus] += y + 1j * br.b_shunt_half
        ybus[br.to_bus, br.to_bus] += y + 1j * br.b_shunt_half
        ybus[br.from_bus, br.to_bus] -= y
        ybus[br.to_bus, br.from_bus] -= y
    if bus_shunt is not None:
        ybus[np.diag_indices(n)] += bus_shunt
    return ybus
