"""Planar geometry primitives: angles, poses, wall segments, line of sight."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

TAU = 2.0 * math.pi

Point = tuple[float, float]


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi].

    Ties at exactly pi resolve to +pi, so a difference of half a turn is
    always treated as a positive rotation.
    """
    r = math.remainder(a, TAU)
    if r <= -math.pi:
        r += TAU
    return r


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in meters plus heading in radians.

    Heading 0 points along world +x, counterclockwise positive, always
    wrapped to (-pi, pi].
    """

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> Point:
        return (self.x, self.y)

    def distance_to(self, p: Sequence[float]) -> float:
        return math.hypot(p[0] - self.x, p[1] - self.y)


@dataclass(frozen=True)
class Occluder:
    """A wall segment: sound crosses it (muffled), sight does not."""

    a: Point
    b: Point

    def __post_init__(self) -> None:
        if tuple(self.a) == tuple(self.b):
            raise ValueError("occluder endpoints must be distinct")
        object.__setattr__(self, "a", (float(self.a[0]), float(self.a[1])))
        object.__setattr__(self, "b", (float(self.b[0]), float(self.b[1])))


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> bool:
    # Assumes p collinear with segment ab.
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(p: Point, q: Point, a: Point, b: Point) -> bool:
    """Inclusive segment intersection: shared endpoints and touches count."""
    px, py = p
    qx, qy = q
    ax, ay = a
    bx, by = b
    d1 = _orient(ax, ay, bx, by, px, py)
    d2 = _orient(ax, ay, bx, by, qx, qy)
    d3 = _orient(px, py, qx, qy, ax, ay)
    d4 = _orient(px, py, qx, qy, bx, by)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(ax, ay, bx, by, px, py):
        return True
    if d2 == 0 and _on_segment(ax, ay, bx, by, qx, qy):
        return True
    if d3 == 0 and _on_segment(px, py, qx, qy, ax, ay):
        return True
    if d4 == 0 and _on_segment(px, py, qx, qy, bx, by):
        return True
    return False


def los_blocked(p: Sequence[float], q: Sequence[float], occluders: Iterable[Occluder]) -> bool:
    """True iff the segment p-q touches or crosses any occluder.

    Contact at a wall corner counts as blocked; conservative occlusion
    avoids flicker when a path grazes an endpoint.
    """
    pp = (float(p[0]), float(p[1]))
    qq = (float(q[0]), float(q[1]))
    if pp == qq:
        raise ValueError("line-of-sight endpoints must differ")
    return any(segments_intersect(pp, qq, o.a, o.b) for o in occluders)
