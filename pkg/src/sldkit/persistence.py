"""Save/open projects as a single .sld file: UTF-8 JSON, version 1, with
deterministic key ordering. Raw property strings ride along with the parsed
fields so the string-input workflow survives round trips. Every structural
invariant is re-validated on load, never trusted from the file."""

from __future__ import annotations

import json
import math
import os

from . import components as comp
from .errors import (
    InvalidSpec,
    InvariantViolation,
    IoFailure,
    ParseError,
    UnsupportedVersion,
)
from .geometry import (
    Placement,
    is_axis_parallel,
    point_segment_distance,
    project_onto_segment,
)
from .network import Component, Line, Network, PortRef
from .units import Quantity

FORMAT_VERSION = 1
_ENDPOINT_TOLERANCE = 1e-6


def _quantity_to_json(q: Quantity | None):
    if q is None:
        return None
    out = {"magnitude": q.magnitude, "unit": q.unit}
    if q.qualifier is not None:
        out["qualifier"] = q.qualifier
    return out


def _quantity_from_json(obj, what: str) -> Quantity | None:
    if obj is None:
        return None
    if not isinstance(obj, dict) or "magnitude" not in obj or "unit" not in obj:
        raise ParseError(f"{what}: malformed quantity {obj!r}")
    return Quantity(float(obj["magnitude"]), str(obj["unit"]), obj.get("qualifier"))


def _complex_to_json(z: complex | None):
    if z is None:
        return None
    return [z.real, z.imag]


def _complex_from_json(obj, what: str) -> complex | None:
    if obj is None:
        return None
    if not isinstance(obj, list) or len(obj) != 2:
        raise ParseError(f"{what}: malformed complex value {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def _spec_to_json(kind: str, spec) -> dict:
    if kind == comp.GENERATOR:
        return {"rated_power": _quantity_to_json(spec.rated_power),
                "rated_voltage": _quantity_to_json(spec.rated_voltage),
                "impedance": _complex_to_json(spec.impedance)}
    if kind == comp.TRANSFORMER:
        return {"rated_power": _quantity_to_json(spec.rated_power),
                "primary_voltage": _quantity_to_json(spec.primary_voltage),
                "secondary_voltage": _quantity_to_json(spec.secondary_voltage),
                "primary_connection": spec.primary_connection,
                "secondary_connection": spec.secondary_connection,
                "impedance": _complex_to_json(spec.impedance)}
    if kind == comp.LOAD:
        if spec.form == "power":
            return {"form": "power", "p": _quantity_to_json(spec.p),
                    "q": _quantity_to_json(spec.q)}
        return {"form": "rlc", "r": spec.r, "l": spec.l, "c": spec.c}
    if kind == comp.BUSBAR:
        return {"length": spec.length}
    if kind == comp.METER:
        return {"quantities": list(spec.quantities),
                "values": dict(sorted(spec.values.items())),
                "sigmas": dict(sorted(spec.sigmas.items()))}
    if kind == comp.PU_BASE:
        return {"base_power": _quantity_to_json(spec.base_power),
                "base_voltage": _quantity_to_json(spec.base_voltage)}
    raise InvalidSpec(f"unknown kind {kind!r}")


def _spec_from_json(kind: str, obj: dict):
    if not isinstance(obj, dict):
        raise ParseError(f"spec for {kind} must be an object")
    if kind == comp.GENERATOR:
        return comp.GeneratorSpec(
            _quantity_from_json(obj.get("rated_power"), "rated_power"),
            _quantity_from_json(obj.get("rated_voltage"), "rated_voltage"),
            _complex_from_json(obj.get("impedance"), "impedance"))
    if kind == comp.TRANSFORMER:
        return comp.TransformerSpec(
            _quantity_from_json(obj.get("rated_power"), "rated_power"),
            _quantity_from_json(obj.get("primary_voltage"), "primary_voltage"),
            _quantity_from_json(obj.get("secondary_voltage"), "secondary_voltage"),
            str(obj.get("primary_connection", "wye")),
            str(obj.get("secondary_connection", "wye")),
            _complex_from_json(obj.get("impedance"), "impedance"))
    if kind == comp.LOAD:
        if obj.get("form") == "power":
            return comp.LoadSpec.power(_quantity_from_json(obj.get("p"), "p"),
                                       _quantity_from_json(obj.get("q"), "q"))
        if obj.get("form") == "rlc":
            return comp.LoadSpec.rlc(float(obj.get("r", 0.0)), float(obj.get("l", 0.0)),
                                     float(obj.get("c", 0.0)))
        raise ParseError(f"load form must be power or rlc, got {obj.get('form')!r}")
    if kind == comp.BUSBAR:
        return comp.BusBarSpec(float(obj.get("length", 0.0)))
    if kind == comp.METER:
        values = obj.get("values", {})
        sigmas = obj.get("sigmas", {})
        if not isinstance(values, dict) or not isinstance(sigmas, dict):
            raise ParseError("meter values/sigmas must be objects")
        return comp.MeterSpec(tuple(obj.get("quantities", ())),
                              {str(k): float(v) for k, v in values.items()},
                              {str(k): float(v) for k, v in sigmas.items()})
    if kind == comp.PU_BASE:
        return comp.PUBaseSpec(
            _quantity_from_json(obj.get("base_power"), "base_power"),
            _quantity_from_json(obj.get("base_voltage"), "base_voltage"))
    raise ParseError(f"unknown component kind {kind!r}")


def _source_to_json(source: comp.BusSourceSpec | None):
    if source is None:
        return None
    return {"slack": source.slack, "v_set": source.v_set,
            "theta_set_deg": source.theta_set_deg,
            "p_gen": _quantity_to_json(source.p_gen),
            "q_gen": _quantity_to_json(source.q_gen)}


def _source_from_json(obj) -> comp.BusSourceSpec | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ParseError("source must be an object")
    return comp.BusSourceSpec(
        bool(obj.get("slack", False)),
        None if obj.get("v_set") is None else float(obj["v_set"]),
        float(obj.get("theta_set_deg", 0.0)),
        _quantity_from_json(obj.get("p_gen"), "p_gen"),
        _quantity_from_json(obj.get("q_gen"), "q_gen"))


def _ref_to_json(ref: PortRef) -> dict:
    if ref.point is not None:
        return {"component": ref.component, "point": [ref.point[0], ref.point[1]]}
    return {"component": ref.component, "port": ref.port}


def _ref_from_json(obj) -> PortRef:
    if not isinstance(obj, dict) or "component" not in obj:
        raise ParseError(f"malformed endpoint {obj!r}")
    if "point" in obj:
        pt = obj["point"]
        if not isinstance(pt, list) or len(pt) != 2:
            raise ParseError(f"malformed endpoint point {pt!r}")
        return PortRef(int(obj["component"]), point=(float(pt[0]), float(pt[1])))
    if "port" in obj:
        return PortRef(int(obj["component"]), port=int(obj["port"]))
    raise ParseError(f"endpoint needs a port or a point: {obj!r}")


def network_to_document(net: Network) -> dict:
    components = []
    for cid in sorted(net.components):
        c = net.components[cid]
        entry = {"id": c.id, "kind": c.kind,
                 "placement": {"x": c.placement.x, "y": c.placement.y,
                               "rotation": c.placement.rotation},
                 "spec": _spec_to_json(c.kind, c.spec),
                 "properties": dict(sorted(c.raw_properties.items()))}
        if c.source is not None:
            entry["source"] = _source_to_json(c.source)
        components.append(entry)
    lines = []
    for lid in sorted(net.lines):
        line = net.lines[lid]
        lines.append({
            "id": line.id,
            "end_a": _ref_to_json(line.end_a),
            "end_b": _ref_to_json(line.end_b),
            "spec": {"r": line.spec.r, "x": line.spec.x, "unit": line.spec.unit,
                     "shunt_b": line.spec.shunt_b},
            "route": [[p1[0], p1[1], p2[0], p2[1]] for p1, p2 in line.route],
        })
    return {"version": FORMAT_VERSION, "mode": net.mode,
            "components": components, "lines": lines}


def dumps_network(net: Network) -> str:
    try:
        return json.dumps(network_to_document(net), sort_keys=True, indent=2,
                          allow_nan=False) + "\n"
    except ValueError as exc:
        raise IoFailure(f"network contains non-finite values: {exc}") from None


def _attach_line(net: Network, entry: dict) -> Line:
    end_a = _ref_from_json(entry.get("end_a"))
    end_b = _ref_from_json(entry.get("end_b"))
    spec_obj = entry.get("spec", {})
    spec = comp.LineSpec(float(spec_obj.get("r", 0.0)), float(spec_obj.get("x", 0.0)),
                         str(spec_obj.get("unit", "pu")),
                         float(spec_obj.get("shunt_b", 0.0)))
    alongs = []
    for ref in (end_a, end_b):
        if ref.component in net.lines:
            raise InvariantViolation(f"line endpoint {ref.component} is another line")
        c = net.components.get(ref.component)
        if c is None:
            raise InvariantViolation(
                f"line endpoint references missing component {ref.component}")
        if c.kind in (comp.METER, comp.PU_BASE):
            raise InvariantViolation(f"line attached to non-connectable {c.kind} {c.id}")
        if c.kind == comp.BUSBAR:
            if ref.point is None:
                raise InvariantViolation("bus-bar endpoint without a point on line")
            seg = net.busbar_segment(c)
            if point_segment_distance(ref.point, seg) > comp.BUSBAR_HALF_WIDTH:
                raise InvariantViolation(
                    f"attachment point {ref.point} off bus-bar {c.id}")
            t, _ = project_onto_segment(ref.point, seg)
            alongs.append(t)
        else:
            if ref.port is None or not 0 <= ref.port < len(comp.PORT_OFFSETS[c.kind]):
                raise InvariantViolation(
                    f"bad port {ref.port} for {c.kind} {ref.component}")
            alongs.append(None)

    route_obj = entry.get("route")
    if not isinstance(route_obj, list) or not 1 <= len(route_obj) <= 3:
        raise InvariantViolation("route must have 1 to 3 segments")
    route = []
    for seg in route_obj:
        if not isinstance(seg, list) or len(seg) != 4:
            raise ParseError(f"malformed route segment {seg!r}")
        s = ((float(seg[0]), float(seg[1])), (float(seg[2]), float(seg[3])))
        if not is_axis_parallel(s):
            raise InvariantViolation(f"route segment {seg} is not axis-parallel")
        route.append(s)
    for first, second in zip(route, route[1:]):
        if first[1] != second[0]:
            raise InvariantViolation("route segments are not contiguous")

    pos_a_expected = route[0][0]
    pos_b_expected = route[-1][1]
    line = Line(int(entry["id"]), end_a, end_b, spec, route, alongs[0], alongs[1])
    pos_a = net.endpoint_position(end_a, alongs[0])
    pos_b = net.endpoint_position(end_b, alongs[1])
    if (math.dist(pos_a, pos_a_expected) > _ENDPOINT_TOLERANCE
            or math.dist(pos_b, pos_b_expected) > _ENDPOINT_TOLERANCE):
        raise InvariantViolation(
            f"route of line {line.id} does not meet its endpoints")
    return line


def document_to_network(doc) -> Network:
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object")
    version = doc.get("version")
    if not isinstance(version, int):
        raise ParseError(f"version must be an integer, got {version!r}")
    if version > FORMAT_VERSION:
        raise UnsupportedVersion(f"file version {version} is newer than {FORMAT_VERSION}")
    if version < 1:
        raise ParseError(f"bad version {version}")
    mode = doc.get("mode")
    if mode not in comp.MODES:
        raise ParseError(f"unknown mode {mode!r}")

    net = Network(mode)
    seen: set[int] = set()
    max_id = 0
    for entry in doc.get("components", []):
        if not isinstance(entry, dict) or "id" not in entry or "kind" not in entry:
            raise ParseError(f"malformed component entry {entry!r}")
        cid = int(entry["id"])
        kind = str(entry["kind"])
        if cid in seen:
            raise InvariantViolation(f"duplicate component id {cid}")
        seen.add(cid)
        if kind not in comp.KINDS or kind == comp.LINE:
            raise ParseError(f"unknown component kind {kind!r}")
        if mode not in comp.AVAILABILITY[kind]:
            raise InvariantViolation(f"{kind} not available in {mode} mode")
        pl = entry.get("placement", {})
        try:
            placement = Placement(float(pl.get("x", 0.0)), float(pl.get("y", 0.0)),
                                  int(pl.get("rotation", 0)))
            spec = _spec_from_json(kind, entry.get("spec", {}))
            source = _source_from_json(entry.get("source"))
        except (InvalidSpec, ValueError, TypeError) as exc:
            raise InvariantViolation(f"component {cid}: {exc}") from None
        if source is not None and kind != comp.BUSBAR:
            raise InvariantViolation(f"only bus-bars carry sources, not {kind} {cid}")
        props = entry.get("properties", {})
        if not isinstance(props, dict):
            raise ParseError(f"properties of {cid} must be an object")
        net.components[cid] = Component(cid, kind, spec, placement, source,
                                        {str(k): str(v) for k, v in props.items()})
        max_id = max(max_id, cid)

    occupied: set[tuple[int, int]] = set()
    for entry in doc.get("lines", []):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError(f"malformed line entry {entry!r}")
        lid = int(entry["id"])
        if lid in seen:
            raise InvariantViolation(f"duplicate component id {lid}")
        seen.add(lid)
        try:
            line = _attach_line(net, entry)
        except InvalidSpec as exc:
            raise InvariantViolation(f"line {lid}: {exc}") from None
        for ref in (line.end_a, line.end_b):
            if ref.port is not None:
                if (ref.component, ref.port) in occupied:
                    raise InvariantViolation(
                        f"port {ref.port} of component {ref.component} used twice")
                occupied.add((ref.component, ref.port))
        net.lines[lid] = line
        max_id = max(max_id, lid)

    net.bump_next_id(max_id)
    return net


def loads_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    return document_to_network(doc)


def save_project(net: Network, path: str | os.PathLike) -> str:
    """Write the project as one UTF-8 .sld document; output is deterministic."""
    text = dumps_network(net)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None
    return str(path)


def load_project(path: str | os.PathLike, mode: str | None = None) -> tuple[Network, str]:
    """Read and re-validate a project; ``mode`` overrides the stored one
    (the availability invariant is then re-checked for the override)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    net = loads_network(text)
    if mode is not None and mode != net.mode:
        if mode not in comp.MODES:
            raise ParseError(f"unknown mode {mode!r}")
        for c in net.components.values():
            if mode not in comp.AVAILABILITY[c.kind]:
                raise InvariantViolation(
                    f"{c.kind} {c.id} is not available in {mode} mode")
        net.mode = mode
    return net, net.mode
