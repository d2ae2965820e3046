"""Base resolution and per-unit conversion.

The base power is global; the base voltage anchors at the component closest to
the PU base marker and propagates outward, multiplying by each transformer's
rated-voltage ratio when crossing it. Electrical regions are the connected
components of the diagram with transformer edges cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import components as comp
from .errors import (
    InconsistentBase,
    MissingPUBase,
    MultiplePUBase,
    NonPositiveBase,
    UnreachedRegion,
)
from .network import Network
from .trace import SolveTrace

_LOOP_TOLERANCE = 1e-9  # relative mismatch allowed around transformer loops


@dataclass
class ElectricalRegion:
    id: int
    terminals: set = field(default_factory=set)
    members: set[int] = field(default_factory=set)


@dataclass
class BaseAssignment:
    s_base_va: float
    v_base: dict[int, float]            # region id -> volts
    regions: list[ElectricalRegion]
    region_of_terminal: dict
    anchor_component: int
    anchor_region: int

    def z_base(self, region: int) -> float:
        return impedance_base(self.v_base[region], self.s_base_va)

    def region_of_component(self, cid: int, terminal_port: int = 0) -> int:
        key = ("port", cid, terminal_port)
        if key in self.region_of_terminal:
            return self.region_of_terminal[key]
        return self.region_of_terminal[("bus", cid)]


@dataclass
class ValueEntry:
    name: str
    original: complex | float
    unit: str
    base: float
    per_unit: complex | float


@dataclass
class ComponentReport:
    component: int
    kind: str
    values: list[ValueEntry] = field(default_factory=list)


@dataclass
class PerUnitReport:
    s_base_va: float
    regions: list[dict]
    entries: list[ComponentReport]


def impedance_base(v_base: float, s_base: float) -> float:
    """Z_base = V_base^2 / S_base (volts, VA -> ohms)."""
    if v_base <= 0 or s_base <= 0:
        raise NonPositiveBase(f"bases must be positive, got V={v_base}, S={s_base}")
    return v_base * v_base / s_base


def _region_terminal(net: Network, cid: int):
    c = net.components.get(cid)
    if c is None:  # a line: both endpoints share a region, use end a
        line = net.lines[cid]
        ref = line.end_a
        return ("bus", ref.component) if ref.point is not None else ("port", ref.component, ref.port)
    if c.kind == comp.BUSBAR:
        return ("bus", cid)
    return ("port", cid, 0)  # transformer anchors on its primary side


def build_regions(net: Network) -> tuple[list[ElectricalRegion], dict]:
    """Connected components over terminals; every line joins, no transformer does."""
    parent: dict = {}

    def add(key):
        parent.setdefault(key, key)

    def find(key):
        while parent[key] != key:
            parent[key] = parent[parent[key]]
            key = parent[key]
        return key

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for c in net.components.values():
        if c.kind == comp.BUSBAR:
            add(("bus", c.id))
        elif c.kind in (comp.GENERATOR, comp.LOAD):
            add(("port", c.id, 0))
        elif c.kind == comp.TRANSFORMER:
            add(("port", c.id, 0))
            add(("port", c.id, 1))
    for line in net.lines.values():
        for ref in (line.end_a, line.end_b):
            add(("bus", ref.component) if ref.point is not None
                else ("port", ref.component, ref.port))
        union(("bus", line.end_a.component) if line.end_a.point is not None
              else ("port", line.end_a.component, line.end_a.port),
              ("bus", line.end_b.component) if line.end_b.point is not None
              else ("port", line.end_b.component, line.end_b.port))

    groups: dict = {}
    for key in parent:
        groups.setdefault(find(key), []).append(key)
    ordered = sorted(groups.values(), key=lambda keys: min(k[1] for k in keys))
    regions = []
    region_of: dict = {}
    for i, keys in enumerate(ordered):
        region = ElectricalRegion(i, set(keys), {k[1] for k in keys})
        for line in net.lines.values():
            key = ("bus", line.end_a.component) if line.end_a.point is not None \
                else ("port", line.end_a.component, line.end_a.port)
            if key in region.terminals:
                region.members.add(line.id)
        regions.append(region)
        for key in keys:
            region_of[key] = i
    return regions, region_of


def resolve_bases(net: Network, trace: SolveTrace | None = None) -> BaseAssignment:
    """Assign the anchor region the PU base voltage, then walk every
    transformer, scaling by its secondary/primary rated ratio (direction-aware)."""
    markers = [c for c in net.components.values() if c.kind == comp.PU_BASE]
    if not markers:
        raise MissingPUBase("per-unit computations need a PU base marker")
    if len(markers) > 1:
        raise MultiplePUBase(f"{len(markers)} PU base markers; need exactly one")
    marker = markers[0]
    s_base = marker.spec.base_power.si

    anchor_cid = net.nearest_attachable(
        marker.placement.position,
        kinds=(comp.LINE, comp.BUSBAR, comp.GENERATOR, comp.TRANSFORMER, comp.LOAD))
    regions, region_of = build_regions(net)
    anchor_region = region_of[_region_terminal(net, anchor_cid)]

    v_base: dict[int, float] = {anchor_region: marker.spec.base_voltage.si}
    if trace:
        trace.record("anchor",
                     {"component": anchor_cid, "region": anchor_region,
                      "v_base_v": v_base[anchor_region], "s_base_va": s_base},
                     message="base voltage anchored at the closest component")

    edges = []
    for c in net.components.values():
        if c.kind == comp.TRANSFORMER:
            r0 = region_of[("port", c.id, 0)]
            r1 = region_of[("port", c.id, 1)]
            edges.append((r0, r1, c))

    frontier = [anchor_region]
    while frontier:
        current = frontier.pop()
        for r0, r1, t in edges:
            if current == r0:
                other, factor = r1, t.spec.ratio
            elif current == r1:
                other, factor = r0, 1.0 / t.spec.ratio
            else:
                continue
            candidate = v_base[current] * factor
            if other in v_base:
                if abs(candidate - v_base[other]) > _LOOP_TOLERANCE * abs(v_base[other]):
                    raise InconsistentBase(
                        f"transformer {t.id} implies {candidate:.6g} V for region "
                        f"{other} which already has {v_base[other]:.6g} V")
                continue
            v_base[other] = candidate
            frontier.append(other)
            if trace:
                trace.record("region-base",
                             {"region": other, "v_base_v": candidate,
                              "via_transformer": t.id})

    unreached = [r.id for r in regions if r.id not in v_base and r.members]
    if unreached:
        raise UnreachedRegion(
            f"regions {unreached} are not electrically reachable from the anchor")

    return BaseAssignment(s_base, v_base, regions, region_of,
                          anchor_cid, anchor_region)


def _impedance_entries(name: str, z: complex, base: float) -> ValueEntry:
    return ValueEntry(name, z, "ohm", base, z / base)


def convert_to_per_unit(net: Network, bases: BaseAssignment,
                        trace: SolveTrace | None = None) -> PerUnitReport:
    """Re-express every electrical component value on the system base.

    Each entry satisfies original == per_unit * base, so the report inverts
    exactly (the round-trip test relies on this).
    """
    entries: list[ComponentReport] = []
    s_base = bases.s_base_va

    for c in sorted(net.components.values(), key=lambda c: c.id):
        report = ComponentReport(c.id, c.kind)
        if c.kind == comp.GENERATOR:
            region = bases.region_of_component(c.id)
            vb = bases.v_base[region]
            report.values.append(ValueEntry(
                "rated_voltage", c.spec.rated_voltage.si, "V", vb,
                c.spec.rated_voltage.si / vb))
            report.values.append(ValueEntry(
                "rated_power", c.spec.rated_power.si, "VA", s_base,
                c.spec.rated_power.si / s_base))
            if c.spec.impedance is not None:
                base = ((c.spec.rated_power.si / s_base)
                        * (vb / c.spec.rated_voltage.si) ** 2)
                report.values.append(ValueEntry(
                    "impedance", c.spec.impedance, "pu(own)", base,
                    c.spec.impedance / base))
        elif c.kind == comp.TRANSFORMER:
            r0 = bases.region_of_component(c.id, 0)
            r1 = bases.region_of_component(c.id, 1)
            vb0, vb1 = bases.v_base[r0], bases.v_base[r1]
            report.values.append(ValueEntry(
                "primary_voltage", c.spec.primary_voltage.si, "V", vb0,
                c.spec.primary_voltage.si / vb0))
            report.values.append(ValueEntry(
                "secondary_voltage", c.spec.secondary_voltage.si, "V", vb1,
                c.spec.secondary_voltage.si / vb1))
            report.values.append(ValueEntry(
                "rated_power", c.spec.rated_power.si, "VA", s_base,
                c.spec.rated_power.si / s_base))
            if c.spec.impedance is not None:
                base = ((c.spec.rated_power.si / s_base)
                        * (vb0 / c.spec.primary_voltage.si) ** 2)
                report.values.append(ValueEntry(
                    "impedance", c.spec.impedance, "pu(own)", base,
                    c.spec.impedance / base))
        elif c.kind == comp.LOAD:
            if c.spec.form == "power":
                for name, q in (("p", c.spec.p), ("q", c.spec.q)):
                    if q.is_per_unit:
                        report.values.append(ValueEntry(name, q.magnitude, "pu", 1.0,
                                                        q.magnitude))
                    else:
                        report.values.append(ValueEntry(name, q.si, "W" if name == "p" else "VAr",
                                                        s_base, q.si / s_base))
            else:
                region = bases.region_of_component(c.id)
                zb = bases.z_base(region)
                report.values.append(_impedance_entries("impedance",
                                                        c.spec.impedance_ohm(), zb))
        if report.values:
            entries.append(report)

    for line in sorted(net.lines.values(), key=lambda l: l.id):
        if line.spec.is_connecting:
            continue
        key = ("bus", line.end_a.component) if line.end_a.point is not None \
            else ("port", line.end_a.component, line.end_a.port)
        region = bases.region_of_terminal[key]
        report = ComponentReport(line.id, comp.LINE)
        if line.spec.unit == "ohm":
            zb = bases.z_base(region)
            report.values.append(_impedance_entries("impedance", line.spec.impedance, zb))
            if line.spec.shunt_b:
                y_base = 1.0 / zb
                report.values.append(ValueEntry("shunt_b", line.spec.shunt_b,
                                                "S", y_base, line.spec.shunt_b / y_base))
        else:
            report.values.append(ValueEntry("impedance", line.spec.impedance,
                                            "pu", 1.0, line.spec.impedance))
            if line.spec.shunt_b:
                report.values.append(ValueEntry("shunt_b", line.spec.shunt_b,
                                                "pu", 1.0, line.spec.shunt_b))
        entries.append(report)

    region_summaries = [
        {"region": r.id, "v_base_v": bases.v_base[r.id],
         "z_base_ohm": bases.z_base(r.id), "members": sorted(r.members)}
        for r in bases.regions if r.id in bases.v_base
    ]
    if trace:
        trace.record("convert", {"components_converted": len(entries)},
                     message="component values re-expressed on the system base")
    return PerUnitReport(s_base, region_summaries, entries)
