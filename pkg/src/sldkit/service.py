"""Local JSON-over-HTTP service backing the diagram editor UI.

Sessions are in-memory, one project each; edits serialize through a per-session
lock and return deltas (ids created/removed, routes changed) so the client can
mirror state without full reloads. Solves run on a snapshot off the edit path.
"""

from __future__ import annotations

import copy
import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import components as comp
from .errors import (
    ArityMismatch,
    InvalidSpec,
    MalformedMagnitude,
    ParseError,
    SldError,
    UnknownComponent,
    UnknownQualifier,
    UnknownUnit,
    UnsupportedVersion,
)
from .geometry import Placement
from .network import Network, PortRef
from .persistence import (
    _source_to_json,
    _spec_to_json,
    document_to_network,
    load_project,
    network_to_document,
    save_project,
)
from .pipeline import run_solve


class ProjectNotFound(SldError):
    pass


_STATUS_400 = (ParseError, InvalidSpec, MalformedMagnitude, UnknownUnit,
               UnknownQualifier, ArityMismatch, UnsupportedVersion)
_STATUS_404 = (UnknownComponent, ProjectNotFound)


class _Session:
    def __init__(self, net: Network):
        self.network = net
        self.lock = threading.Lock()


class PlacementModel(BaseModel):
    x: float
    y: float
    rotation: int = 0


class CreateProject(BaseModel):
    mode: str


class OpenProject(BaseModel):
    path: str | None = None
    document: dict | None = None
    mode: str | None = None


class SavePath(BaseModel):
    path: str


class AddComponent(BaseModel):
    kind: str
    placement: PlacementModel
    properties: dict[str, str] | None = None


class EditProperties(BaseModel):
    properties: dict[str, str]


class TargetPoint(BaseModel):
    x: float
    y: float


class EndpointModel(BaseModel):
    component: int
    port: int | None = None
    point: tuple[float, float] | None = None


class AddLine(BaseModel):
    a: EndpointModel
    b: EndpointModel
    properties: dict[str, str] | None = None


class SolveBody(BaseModel):
    method: str | None = None
    iterations: int | None = None
    tolerance: float | None = None
    acceleration: float | None = None


def _component_payload(net: Network, cid: int) -> dict:
    c = net.components[cid]
    payload = {
        "id": c.id, "kind": c.kind,
        "placement": {"x": c.placement.x, "y": c.placement.y,
                      "rotation": c.placement.rotation},
        "spec": _spec_to_json(c.kind, c.spec),
        "properties": dict(c.raw_properties),
        "ports": [list(net.port_position(c, i))
                  for i in range(len(comp.PORT_OFFSETS[c.kind]))],
    }
    if c.kind == comp.BUSBAR:
        seg = net.busbar_segment(c)
        payload["bar"] = [list(seg[0]), list(seg[1])]
    if c.source is not None:
        payload["source"] = _source_to_json(c.source)
    return payload


def _line_payload(net: Network, lid: int) -> dict:
    line = net.lines[lid]
    return {
        "id": line.id,
        "kind": comp.LINE,
        "end_a": {"component": line.end_a.component, "port": line.end_a.port,
                  "point": list(line.end_a.point) if line.end_a.point else None},
        "end_b": {"component": line.end_b.component, "port": line.end_b.port,
                  "point": list(line.end_b.point) if line.end_b.point else None},
        "spec": {"r": line.spec.r, "x": line.spec.x, "unit": line.spec.unit,
                 "shunt_b": line.spec.shunt_b,
                 "is_connecting": line.spec.is_connecting},
        "properties": comp.properties_from_spec(comp.LINE, line.spec),
        "route": [[p1[0], p1[1], p2[0], p2[1]] for p1, p2 in line.route],
    }


def _routes_json(routes: dict) -> dict:
    return {str(lid): [[p1[0], p1[1], p2[0], p2[1]] for p1, p2 in route]
            for lid, route in routes.items()}


def catalog() -> dict:
    entries = []
    for kind in comp.KINDS:
        if kind == comp.LINE:
            entry = {
                "kind": kind, "modes": list(comp.AVAILABILITY[kind]), "ports": 0,
                "drawn_between_ports": True,
                "property_schema": {k: list(v) for k, v in
                                    comp.PROPERTY_SCHEMAS[kind].items()},
                "default_properties": comp.properties_from_spec(
                    kind, comp.default_spec(kind)),
            }
        else:
            entry = {
                "kind": kind, "modes": list(comp.AVAILABILITY[kind]),
                "ports": len(comp.PORT_OFFSETS[kind]),
                "drawn_between_ports": False,
                "property_schema": {k: list(v) for k, v in
                                    comp.PROPERTY_SCHEMAS[kind].items()},
                "default_properties": comp.properties_from_spec(
                    kind, comp.default_spec(kind)),
            }
        entries.append(entry)
    return {"components": entries, "modes": list(comp.MODES)}


def create_app() -> FastAPI:
    app = FastAPI(title="sldkit service", version="0.1.0")
    # single-user loopback service; the editor page is served from elsewhere
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    sessions: dict[str, _Session] = {}

    def session_of(pid: str) -> _Session:
        session = sessions.get(pid)
        if session is None:
            raise ProjectNotFound(f"no project session {pid}")
        return session

    @app.exception_handler(SldError)
    async def _sld_error(request: Request, exc: SldError):
        if isinstance(exc, _STATUS_404):
            status = 404
        elif isinstance(exc, _STATUS_400):
            status = 400
        else:
            status = 409
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "message": str(exc)})

    @app.get("/api/catalog")
    def get_catalog() -> dict:
        return catalog()

    @app.post("/api/projects")
    def create_project(body: CreateProject) -> dict:
        if body.mode not in comp.MODES:
            raise InvalidSpec(f"unknown mode {body.mode!r}")
        pid = uuid.uuid4().hex[:12]
        sessions[pid] = _Session(Network(body.mode))
        return {"project_id": pid, "mode": body.mode}

    @app.get("/api/projects/{pid}")
    def get_project(pid: str) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            return {"project_id": pid, "mode": net.mode,
                    "document": network_to_document(net),
                    "components": [_component_payload(net, cid)
                                   for cid in sorted(net.components)],
                    "lines": [_line_payload(net, lid) for lid in sorted(net.lines)]}

    @app.delete("/api/projects/{pid}")
    def close_project(pid: str) -> dict:
        session_of(pid)
        del sessions[pid]
        return {"closed": pid}

    @app.post("/api/projects/{pid}/open")
    def open_project(pid: str, body: OpenProject) -> dict:
        session = session_of(pid)
        if (body.path is None) == (body.document is None):
            raise InvalidSpec("open needs exactly one of path or document")
        with session.lock:
            if body.path is not None:
                net, _ = load_project(body.path, body.mode)
            else:
                net = document_to_network(body.document)
            session.network = net
            return {"mode": net.mode, "document": network_to_document(net)}

    @app.post("/api/projects/{pid}/save")
    def save(pid: str, body: SavePath) -> dict:
        session = session_of(pid)
        with session.lock:
            path = save_project(session.network, body.path)
        return {"path": path}

    @app.post("/api/projects/{pid}/components")
    def add_component(pid: str, body: AddComponent) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            spec, source = None, None
            raw: dict[str, str] = {}
            if body.properties:
                spec, source = comp.spec_from_properties(body.kind, body.properties)
                raw = dict(body.properties)
            cid = net.add_component(
                body.kind, spec,
                Placement(body.placement.x, body.placement.y, body.placement.rotation),
                source=source, raw_properties=raw)
            return {"created": [cid], "component": _component_payload(net, cid)}

    @app.get("/api/projects/{pid}/components/{cid}")
    def get_component(pid: str, cid: int) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            if cid in net.lines:
                return {"component": _line_payload(net, cid)}
            if cid not in net.components:
                raise UnknownComponent(f"no component {cid}")
            return {"component": _component_payload(net, cid)}

    @app.patch("/api/projects/{pid}/components/{cid}")
    def edit_component(pid: str, cid: int, body: EditProperties) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            if cid in net.lines:
                line = net.lines[cid]
                spec, _ = comp.spec_from_properties(comp.LINE, body.properties,
                                                    current=(line.spec, None))
                line.spec = spec
                return {"component": _line_payload(net, cid)}
            if cid not in net.components:
                raise UnknownComponent(f"no component {cid}")
            c = net.components[cid]
            spec, source = comp.spec_from_properties(
                c.kind, body.properties, current=(c.spec, c.source))
            c.spec = spec
            changed: dict[str, dict] = {}
            if c.kind == comp.BUSBAR:
                c.source = source
                for line in net.lines_attached(cid):
                    net._refresh_bus_attachment(line, c)
                    net._reroute(line)
                    changed[str(line.id)] = _line_payload(net, line.id)
            c.raw_properties.update(body.properties)
            return {"component": _component_payload(net, cid),
                    "lines_changed": changed}

    @app.delete("/api/projects/{pid}/components/{cid}")
    def delete_component(pid: str, cid: int) -> dict:
        session = session_of(pid)
        with session.lock:
            removed = session.network.remove_component(cid)
        return {"removed": sorted(removed)}

    @app.post("/api/projects/{pid}/components/{cid}/move")
    def move_component(pid: str, cid: int, body: TargetPoint) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            routes = net.move_component(cid, (body.x, body.y))
            return {"routes_changed": _routes_json(routes),
                    "lines_changed": {str(lid): _line_payload(net, lid)
                                      for lid in routes},
                    "component": _component_payload(net, cid)}

    @app.post("/api/projects/{pid}/components/{cid}/rotate")
    def rotate_component(pid: str, cid: int) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            placement = net.rotate_component(cid)
            routes = {l.id: l.route for l in net.lines_attached(cid)}
            return {"placement": {"x": placement.x, "y": placement.y,
                                  "rotation": placement.rotation},
                    "routes_changed": _routes_json(routes),
                    "lines_changed": {str(lid): _line_payload(net, lid)
                                      for lid in routes},
                    "component": _component_payload(net, cid)}

    @app.post("/api/projects/{pid}/components/{cid}/copy")
    def copy_component(pid: str, cid: int, body: TargetPoint) -> dict:
        session = session_of(pid)
        with session.lock:
            new_id = session.network.copy_component(cid, (body.x, body.y))
            return {"created": [new_id],
                    "component": _component_payload(session.network, new_id)}

    @app.post("/api/projects/{pid}/lines")
    def add_line(pid: str, body: AddLine) -> dict:
        session = session_of(pid)
        with session.lock:
            net = session.network
            spec = None
            if body.properties:
                spec, _ = comp.spec_from_properties(comp.LINE, body.properties)
            def to_ref(e: EndpointModel) -> PortRef:
                if e.point is not None:
                    return PortRef(e.component, point=(e.point[0], e.point[1]))
                return PortRef(e.component, port=e.port)
            lid = net.add_line(to_ref(body.a), to_ref(body.b), spec)
            return {"created": [lid], "line": _line_payload(net, lid)}

    @app.post("/api/projects/{pid}/validate")
    def validate(pid: str) -> dict:
        session = session_of(pid)
        with session.lock:
            violations = session.network.validate()
        return {"violations": [
            {"code": v.code, "component": v.component, "message": v.message}
            for v in violations]}

    @app.post("/api/projects/{pid}/solve")
    def solve(pid: str, body: SolveBody) -> dict:
        session = session_of(pid)
        with session.lock:
            snapshot = copy.deepcopy(session.network)
        outcome = run_solve(snapshot, method=body.method, iterations=body.iterations,
                            tolerance=body.tolerance, acceleration=body.acceleration)
        return outcome.to_json()

    return app


def app_factory() -> FastAPI:  # uvicorn --factory entry point
    return create_app()
