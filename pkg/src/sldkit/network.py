"""The single-line-diagram graph: components, connection ports, lines and the
structural rules (no dangling lines, no line-to-line joins, mode availability,
quarter-turn rotation, orthogonal routing)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import components as comp
from .errors import (
    BusBarConnected,
    DanglingEndpoint,
    InvalidSpec,
    LineGeometryDerived,
    LineNotCopyable,
    LineToLineConnection,
    ModeUnavailable,
    NoCandidates,
    NotConnectable,
    OutOfBounds,
    PortOccupied,
    UnknownComponent,
)
from .geometry import (
    Placement,
    Point,
    Segment,
    in_bounds,
    local_to_canvas,
    point_polyline_distance,
    point_segment_distance,
    project_onto_segment,
    reroute_after_move,
    route_line,
)
from .units import Quantity


@dataclass(frozen=True)
class PortRef:
    """Line endpoint selector: an indexed device port or a point on a bus-bar."""

    component: int
    port: int | None = None
    point: Point | None = None

    def __post_init__(self):
        if (self.port is None) == (self.point is None):
            raise InvalidSpec("port reference needs exactly one of port index or point")


@dataclass
class Component:
    id: int
    kind: str
    spec: object
    placement: Placement
    source: comp.BusSourceSpec | None = None
    raw_properties: dict[str, str] = field(default_factory=dict)


@dataclass
class Line:
    id: int
    end_a: PortRef
    end_b: PortRef
    spec: comp.LineSpec
    route: list[Segment]
    # normalized offsets along the bar for bus-attachment endpoints
    along_a: float | None = None
    along_b: float | None = None


@dataclass(frozen=True)
class Violation:
    code: str
    component: int | None
    message: str

    def __str__(self):
        where = f" (component {self.component})" if self.component is not None else ""
        return f"{self.code}{where}: {self.message}"


class Network:
    """One project's diagram. Single-writer: callers serialize mutations."""

    def __init__(self, mode: str = comp.POWER_FLOW):
        if mode not in comp.MODES:
            raise InvalidSpec(f"unknown mode {mode!r}")
        self.mode = mode
        self.components: dict[int, Component] = {}
        self.lines: dict[int, Line] = {}
        self._next_id = 1

    # --- id allocation ----------------------------------------------------

    def _allocate_id(self) -> int:
        cid = self._next_id
        self._next_id += 1
        return cid

    def bump_next_id(self, floor: int) -> None:
        """Never hand out ids at or below ``floor`` (used by the loader)."""
        self._next_id = max(self._next_id, floor + 1)

    # --- geometry helpers ---------------------------------------------------

    def busbar_segment(self, c: Component) -> Segment:
        start = c.placement.position
        end = local_to_canvas(c.placement, (c.spec.length, 0.0))
        return (start, end)

    def port_position(self, c: Component, port: int) -> Point:
        offsets = comp.PORT_OFFSETS[c.kind]
        if not 0 <= port < len(offsets):
            raise DanglingEndpoint(
                f"{c.kind} {c.id} has {len(offsets)} port(s), no port {port}")
        return local_to_canvas(c.placement, offsets[port])

    def endpoint_position(self, ref: PortRef, along: float | None) -> Point:
        c = self.components[ref.component]
        if c.kind == comp.BUSBAR:
            (x1, y1), (x2, y2) = self.busbar_segment(c)
            t = 0.0 if along is None else along
            return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))
        return self.port_position(c, ref.port)

    def component_distance(self, point: Point, c: Component) -> float:
        if c.kind == comp.BUSBAR:
            return point_segment_distance(point, self.busbar_segment(c))
        return ((point[0] - c.placement.x) ** 2 + (point[1] - c.placement.y) ** 2) ** 0.5

    def _occupied_ports(self) -> set[tuple[int, int]]:
        used = set()
        for line in self.lines.values():
            for ref in (line.end_a, line.end_b):
                if ref.port is not None:
                    used.add((ref.component, ref.port))
        return used

    def lines_attached(self, cid: int) -> list[Line]:
        return [l for l in self.lines.values()
                if l.end_a.component == cid or l.end_b.component == cid]

    # --- operations ---------------------------------------------------------

    def add_component(self, kind: str, spec=None, placement: Placement | None = None,
                      source: comp.BusSourceSpec | None = None,
                      raw_properties: dict[str, str] | None = None) -> int:
        if kind not in comp.KINDS or kind == comp.LINE:
            raise InvalidSpec(f"not a placeable component kind: {kind!r}")
        if self.mode not in comp.AVAILABILITY[kind]:
            raise ModeUnavailable(
                f"{kind} is not available in {self.mode} mode")
        if spec is None:
            spec = comp.default_spec(kind)
        if not isinstance(spec, comp.SPEC_TYPES[kind]):
            raise InvalidSpec(f"{kind} spec must be {comp.SPEC_TYPES[kind].__name__}")
        if source is not None and kind != comp.BUSBAR:
            raise InvalidSpec("only bus-bars carry a source designation")
        if placement is None:
            placement = Placement(0.0, 0.0)
        if not in_bounds(placement.position):
            raise InvalidSpec(f"placement {placement.position} outside the canvas")
        cid = self._allocate_id()
        self.components[cid] = Component(cid, kind, spec, placement, source,
                                         dict(raw_properties or {}))
        return cid

    def _resolve_new_endpoint(self, ref: PortRef) -> tuple[PortRef, Point, float | None]:
        if ref.component in self.lines:
            raise LineToLineConnection(
                f"endpoint {ref.component} is a line; join lines through a bus")
        c = self.components.get(ref.component)
        if c is None:
            raise DanglingEndpoint(f"endpoint component {ref.component} does not exist")
        if c.kind in (comp.METER, comp.PU_BASE):
            raise NotConnectable(f"{c.kind} {c.id} owns no connection ports")
        if c.kind == comp.BUSBAR:
            if ref.point is None:
                raise DanglingEndpoint(f"bus-bar {c.id} endpoints attach by point")
            seg = self.busbar_segment(c)
            t, projected = project_onto_segment(ref.point, seg)
            if point_segment_distance(ref.point, seg) > comp.BUSBAR_HALF_WIDTH:
                raise DanglingEndpoint(
                    f"point {ref.point} lies outside bus-bar {c.id}")
            return PortRef(c.id, point=projected), projected, t
        if ref.port is None:
            raise DanglingEndpoint(f"{c.kind} {c.id} endpoints attach by port index")
        position = self.port_position(c, ref.port)
        return ref, position, None

    def add_line(self, a: PortRef, b: PortRef, spec: comp.LineSpec | None = None) -> int:
        if spec is None:
            spec = comp.LineSpec()
        if not isinstance(spec, comp.LineSpec):
            raise InvalidSpec("line spec must be LineSpec")
        ref_a, pos_a, along_a = self._resolve_new_endpoint(a)
        ref_b, pos_b, along_b = self._resolve_new_endpoint(b)
        occupied = self._occupied_ports()
        for ref in (ref_a, ref_b):
            if ref.port is not None and (ref.component, ref.port) in occupied:
                raise PortOccupied(
                    f"port {ref.port} of component {ref.component} already has a line")
        if ref_a.port is not None and (ref_a.component, ref_a.port) == (ref_b.component, ref_b.port):
            raise InvalidSpec("line endpoints must be two different ports")
        route = route_line(pos_a, pos_b)
        cid = self._allocate_id()
        self.lines[cid] = Line(cid, ref_a, ref_b, spec, route, along_a, along_b)
        return cid

    def remove_component(self, cid: int) -> set[int]:
        if cid in self.lines:
            del self.lines[cid]
            return {cid}
        if cid not in self.components:
            raise UnknownComponent(f"no component {cid}")
        removed = {cid}
        for line in self.lines_attached(cid):
            del self.lines[line.id]
            removed.add(line.id)
        del self.components[cid]
        return removed

    def rotate_component(self, cid: int) -> Placement:
        if cid in self.lines:
            raise LineGeometryDerived("lines re-route from their endpoints")
        c = self.components.get(cid)
        if c is None:
            raise UnknownComponent(f"no component {cid}")
        attached = self.lines_attached(cid)
        if c.kind == comp.BUSBAR and attached:
            raise BusBarConnected(
                f"bus-bar {cid} cannot be rotated with {len(attached)} line(s) attached")
        c.placement = c.placement.rotated_cw()
        for line in attached:
            self._reroute(line)
        return c.placement

    def move_component(self, cid: int, to: Point) -> dict[int, list[Segment]]:
        if cid in self.lines:
            raise LineGeometryDerived("lines re-route from their endpoints")
        c = self.components.get(cid)
        if c is None:
            raise UnknownComponent(f"no component {cid}")
        if not in_bounds(to):
            raise OutOfBounds(f"target {to} outside the canvas")
        c.placement = replace(c.placement, x=to[0], y=to[1])
        changed = {}
        for line in self.lines_attached(cid):
            if c.kind == comp.BUSBAR:
                self._refresh_bus_attachment(line, c)
            self._reroute(line)
            changed[line.id] = line.route
        return changed

    def copy_component(self, cid: int, to: Point) -> int:
        if cid in self.lines:
            raise LineNotCopyable("lines need two live endpoints and cannot be copied")
        c = self.components.get(cid)
        if c is None:
            raise UnknownComponent(f"no component {cid}")
        if not in_bounds(to):
            raise OutOfBounds(f"target {to} outside the canvas")
        new_id = self._allocate_id()
        placement = replace(c.placement, x=to[0], y=to[1])
        self.components[new_id] = Component(new_id, c.kind, c.spec, placement,
                                            c.source, dict(c.raw_properties))
        return new_id

    def nearest_attachable(self, point: Point,
                           kinds: tuple[str, ...] = (comp.LINE, comp.BUSBAR)) -> int:
        best: tuple[float, int] | None = None
        if comp.LINE in kinds:
            for line in self.lines.values():
                d = point_polyline_distance(point, line.route)
                if best is None or (d, line.id) < best:
                    best = (d, line.id)
        for c in self.components.values():
            if c.kind not in kinds:
                continue
            d = self.component_distance(point, c)
            if best is None or (d, c.id) < best:
                best = (d, c.id)
        if best is None:
            raise NoCandidates(f"no attachable component of kind {kinds}")
        return best[1]

    # --- internal geometry upkeep -------------------------------------------

    def _refresh_bus_attachment(self, line: Line, bus: Component) -> None:
        seg = self.busbar_segment(bus)
        (x1, y1), (x2, y2) = seg
        if line.end_a.component == bus.id and line.end_a.point is not None:
            t = line.along_a or 0.0
            line.end_a = replace(line.end_a,
                                 point=(x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
        if line.end_b.component == bus.id and line.end_b.point is not None:
            t = line.along_b or 0.0
            line.end_b = replace(line.end_b,
                                 point=(x1 + t * (x2 - x1), y1 + t * (y2 - y1)))

    def _reroute(self, line: Line) -> None:
        pos_a = self.endpoint_position(line.end_a, line.along_a)
        pos_b = self.endpoint_position(line.end_b, line.along_b)
        line.route = reroute_after_move(pos_a, pos_b)

    # --- validation -----------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Structural and mode-prerequisite checks; violations are data."""
        out: list[Violation] = []
        for c in self.components.values():
            if self.mode not in comp.AVAILABILITY[c.kind]:
                out.append(Violation("ModeUnavailable", c.id,
                                     f"{c.kind} not available in {self.mode} mode"))
            for q in _quantities_of(c):
                if q.qualifier == "1-ph":
                    out.append(Violation("UnsupportedQualifier", c.id,
                                         "single-phase base relations not implemented"))
                    break
        for line in self.lines.values():
            for ref in (line.end_a, line.end_b):
                if ref.component not in self.components:
                    out.append(Violation("DanglingLine", line.id,
                                         f"endpoint {ref.component} unresolved"))

        busbars = [c for c in self.components.values() if c.kind == comp.BUSBAR]
        if self.mode == comp.PER_UNIT:
            n_base = sum(1 for c in self.components.values() if c.kind == comp.PU_BASE)
            if n_base == 0:
                out.append(Violation("MissingPUBase", None,
                                     "per-unit mode needs a PU base marker"))
            elif n_base > 1:
                out.append(Violation("MultiplePUBase", None,
                                     f"{n_base} PU base markers present, need exactly 1"))

        if self.mode in (comp.POWER_FLOW, comp.STATE_ESTIMATION):
            if not busbars:
                out.append(Violation("NoBuses", None, "no bus-bar in the diagram"))
            for c in self.components.values():
                if c.kind == comp.LOAD and c.spec.form == "rlc":
                    out.append(Violation("UnsupportedLoadForm", c.id,
                                         "RLC-form loads need a per-unit base; use P/Q here"))
            for line in self.lines.values():
                if line.spec.unit == "ohm" and not line.spec.is_connecting:
                    out.append(Violation("OhmicImpedanceWithoutBase", line.id,
                                         "ohmic line impedance needs a per-unit base"))

        if self.mode == comp.POWER_FLOW:
            slacks = [c for c in busbars if c.source is not None and c.source.slack]
            with_vset = [c for c in busbars
                         if c.source is not None and c.source.v_set is not None]
            if len(slacks) > 1:
                out.append(Violation("MultipleSlack", None,
                                     f"{len(slacks)} slack designations, need exactly 1"))
            elif not slacks and not with_vset:
                out.append(Violation("NoSlackDesignated", None,
                                     "no bus carries a slack designation or voltage setpoint"))

        if self.mode == comp.STATE_ESTIMATION:
            meters = [c for c in self.components.values() if c.kind == comp.METER]
            if not meters:
                out.append(Violation("NoMeasurements", None, "no meter in the diagram"))
            for m in meters:
                missing = [q for q in m.spec.quantities if q not in m.spec.values]
                if missing:
                    out.append(Violation("MeterValueMissing", m.id,
                                         f"meter lacks readings for {missing}"))
        return out


def _quantities_of(c: Component):
    spec = c.spec
    for value in vars(spec).values():
        if isinstance(value, Quantity):
            yield value
    if c.source is not None:
        for value in (c.source.p_gen, c.source.q_gen):
            if isinstance(value, Quantity):
                yield value
