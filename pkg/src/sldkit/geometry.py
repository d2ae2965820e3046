"""Canvas geometry: placements, quarter-turn rotation, orthogonal line routing
and point/segment distances used by the minimum-distance attachment rule."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidRoute

CANVAS_WIDTH = 10_000.0
CANVAS_HEIGHT = 10_000.0

Point = tuple[float, float]
# segment endpoints ((x1, y1), (x2, y2)), always axis-parallel
Segment = tuple[Point, Point]

ROTATIONS = (0, 90, 180, 270)


@dataclass(frozen=True)
class Placement:
    x: float
    y: float
    rotation: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if self.rotation not in ROTATIONS:
            raise InvalidRoute(f"rotation must be a quarter turn, got {self.rotation}")

    @property
    def position(self) -> Point:
        return (self.x, self.y)

    def rotated_cw(self) -> "Placement":
        return Placement(self.x, self.y, (self.rotation + 90) % 360)


def in_bounds(point: Point) -> bool:
    x, y = point
    return 0.0 <= x <= CANVAS_WIDTH and 0.0 <= y <= CANVAS_HEIGHT


def rotate_offset(offset: Point, rotation: int) -> Point:
    """Rotate a local offset clockwise on screen coordinates (y grows down)."""
    x, y = offset
    for _ in range((rotation // 90) % 4):
        x, y = -y, x
    return (x, y)


def local_to_canvas(placement: Placement, offset: Point) -> Point:
    dx, dy = rotate_offset(offset, placement.rotation)
    return (placement.x + dx, placement.y + dy)


def is_axis_parallel(seg: Segment) -> bool:
    (x1, y1), (x2, y2) = seg
    return x1 == x2 or y1 == y2


def route_line(a: Point, b: Point) -> list[Segment]:
    """Route between two ports in orthogonal pieces.

    Collinear ports produce a single segment, everything else an L of two
    segments, horizontal first from ``a``. Coincident ports are rejected.
    """
    if a == b:
        raise InvalidRoute("coincident endpoints produce a zero-length line")
    ax, ay = a
    bx, by = b
    if ax == bx or ay == by:
        return [(a, b)]
    elbow = (bx, ay)
    return [(a, elbow), (elbow, b)]


def reroute_after_move(a: Point, b: Point) -> list[Segment]:
    """Re-route an attached line after its endpoint moved.

    Axis-aligned endpoints keep one segment; otherwise a Z of three segments
    split at the midpoint of the dominant axis. Coincident endpoints collapse
    to a degenerate single segment rather than failing mid-edit.
    """
    ax, ay = a
    bx, by = b
    if a == b or ax == bx or ay == by:
        return [(a, b)]
    if abs(bx - ax) >= abs(by - ay):
        mid = (ax + bx) / 2.0
        return [(a, (mid, ay)), ((mid, ay), (mid, by)), ((mid, by), b)]
    mid = (ay + by) / 2.0
    return [(a, (ax, mid)), ((ax, mid), (bx, mid)), ((bx, mid), b)]


def point_segment_distance(point: Point, seg: Segment) -> float:
    (px, py) = point
    (x1, y1), (x2, y2) = seg
    dx, dy = x2 - x1, y2 - y1
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return math.hypot(px - x1, py - y1)
    t = ((px - x1) * dx + (py - y1) * dy) / length_sq
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def point_polyline_distance(point: Point, segments: list[Segment]) -> float:
    return min(point_segment_distance(point, seg) for seg in segments)


def project_onto_segment(point: Point, seg: Segment) -> tuple[float, Point]:
    """Closest parameter t in [0, 1] along ``seg`` and the projected point."""
    (px, py) = point
    (x1, y1), (x2, y2) = seg
    dx, dy = x2 - x1, y2 - y1
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return 0.0, (x1, y1)
    t = ((px - x1) * dx + (py - y1) * dy) / length_sq
    t = min(1.0, max(0.0, t))
    return t, (x1 + t * dx, y1 + t * dy)
