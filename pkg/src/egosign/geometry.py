"""Egocentric lane/road localization of sign boxes.

Boundary lines are fitted as ``x = a*y + b`` and turned into an angle
``90 - atan(a)`` in degrees, so lines left of the vehicle (which lean left
toward the bottom of the image) come out above 90 and lines on the right at
or below 90. The ego lane is bounded by the last line above 90 and the first
line at or below 90. Each sign box then goes to whichever of the left,
current and right lane anchors (measured at two thirds of the image height)
is closest to its horizontal midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from . import kernels
from .errors import CannotLocalize, DegenerateLine, InvalidScene

LABELS = ("L", "C", "R")
GRANULARITIES = ("lane", "road")


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class BoundaryLine:
    points: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple(Point(float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise InvalidScene("a boundary line needs at least two points")
        if any(b.y <= a.y for a, b in zip(pts, pts[1:])):
            raise InvalidScene("boundary line points must have strictly increasing y")


@dataclass(frozen=True)
class SignBox:
    id: str
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    description_id: str

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidScene(f"box {self.id!r} has non-positive extent")

    @property
    def x_mid(self) -> float:
        return (self.x_min + self.x_max) / 2


@dataclass(frozen=True)
class SceneGeometry:
    width: float
    height: float
    lines: tuple[BoundaryLine, ...]
    boxes: tuple[SignBox, ...] = ()
    granularity: str = "lane"

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if self.width <= 0 or self.height <= 0:
            raise InvalidScene("image size must be positive")
        if self.granularity not in GRANULARITIES:
            raise InvalidScene(f"unknown granularity {self.granularity!r}")
        ids = [b.id for b in self.boxes]
        if len(set(ids)) != len(ids):
            raise InvalidScene("box ids must be unique")
        xs = [line_x_at(line, self.anchor_y) for line in self.lines]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidScene("lines must be sorted left to right at two thirds of the image height")

    @property
    def anchor_y(self) -> float:
        return 2 * self.height / 3

    @classmethod
    def from_json(cls, data: dict) -> "SceneGeometry":
        try:
            lines = [BoundaryLine(tuple(Point(*p) for p in pts)) for pts in data["lines"]]
            boxes = [
                SignBox(str(b["id"]), *map(float, b["bbox"]), description_id=str(b["description_id"]))
                for b in data.get("boxes", [])
            ]
            return cls(
                width=data["width"],
                height=data["height"],
                lines=tuple(lines),
                boxes=tuple(boxes),
                granularity=data.get("granularity", "lane"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScene(f"malformed scene: {exc}") from exc

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "granularity": self.granularity,
            "lines": [[[p.x, p.y] for p in line.points] for line in self.lines],
            "boxes": [
                {"id": b.id, "bbox": [b.x_min, b.y_min, b.x_max, b.y_max], "description_id": b.description_id}
                for b in self.boxes
            ],
        }


@dataclass(frozen=True)
class EgoLayout:
    """Split of line indices into left / ego / right groups.

    ``left_lines`` and ``right_lines`` share their innermost index with
    ``ego_pair``, mirroring the ``S[:i]``, ``S[i-1:i+1]``, ``S[i:]`` slices.
    ``line_x`` holds each fitted line's x at the anchor height.
    """

    left_lines: tuple[int, ...]
    ego_pair: tuple[int, int]
    right_lines: tuple[int, ...]
    angles: tuple[float, ...]
    line_x: tuple[float, ...] = field(repr=False)

    @property
    def has_left(self) -> bool:
        return self.ego_pair[0] > 0

    @property
    def has_right(self) -> bool:
        return self.ego_pair[1] < len(self.angles) - 1

    def to_json(self) -> dict:
        return {
            "left_lines": list(self.left_lines),
            "ego_pair": list(self.ego_pair),
            "right_lines": list(self.right_lines),
            "angles": list(self.angles),
        }


@dataclass(frozen=True)
class BoxAssignment:
    labels: dict[str, str]
    anchors: dict[str, float] = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"labels": dict(self.labels)}


def _coords(line) -> tuple[list[float], list[float]]:
    pts = line.points if isinstance(line, BoundaryLine) else line
    return [float(p[0]) for p in pts], [float(p[1]) for p in pts]


def fit_line(line) -> tuple[float, float]:
    """Return ``(slope, intercept)`` of the least-squares fit ``x = slope*y + intercept``."""
    xs, ys = _coords(line)
    if len(xs) < 2 or all(y == ys[0] for y in ys):
        raise DegenerateLine("cannot fit a line whose points share a single y value")
    return kernels.fit_line(xs, ys)


def fit_line_angle(line) -> float:
    slope, _ = fit_line(line)
    return 90.0 - math.degrees(math.atan(slope))


def line_x_at(line, y: float) -> float:
    slope, intercept = fit_line(line)
    return slope * y + intercept


def _boundary_index(angles: Sequence[float], alg1_literal: bool) -> int | None:
    """Index ``t`` of the right ego boundary, or None for a degenerate scene."""
    n = len(angles)
    if alg1_literal:
        i = 1
        for i in range(1, n):
            if angles[i - 1] <= 90 and angles[i] <= 90:
                break
        return i
    for t, theta in enumerate(angles):
        if theta <= 90:
            return t if t > 0 else None
    return None


def split_regions(scene: SceneGeometry, strict: bool = True, alg1_literal: bool = False) -> EgoLayout:
    n = len(scene.lines)
    if n < 2:
        raise CannotLocalize(f"need at least two boundary lines, got {n}")
    fits = [fit_line(line) for line in scene.lines]
    angles = tuple(90.0 - math.degrees(math.atan(a)) for a, _ in fits)
    y = scene.anchor_y
    line_x = tuple(a * y + b for a, b in fits)

    all_left = all(theta > 90 for theta in angles)
    all_right = all(theta <= 90 for theta in angles)
    if strict and (all_left or all_right):
        side = "left" if all_left else "right"
        raise CannotLocalize(f"every boundary line leans {side}; the ego lane is not in view")

    t = _boundary_index(angles, alg1_literal)
    if t is None:
        # clamp: all-left scenes put the vehicle right of every line
        t = n - 1 if angles[0] > 90 else 1
    return EgoLayout(
        left_lines=tuple(range(0, t)),
        ego_pair=(t - 1, t),
        right_lines=tuple(range(t, n)),
        angles=angles,
        line_x=line_x,
    )


def region_anchor_x(scene: SceneGeometry, layout: EgoLayout, region: str) -> float:
    xs = layout.line_x
    lo, hi = layout.ego_pair
    if region == "C":
        return (xs[lo] + xs[hi]) / 2
    lane_width = xs[hi] - xs[lo]
    if region == "L":
        if lo > 0:
            return (xs[lo - 1] + xs[lo]) / 2
        return xs[lo] - lane_width
    if region == "R":
        if hi < len(xs) - 1:
            return (xs[hi] + xs[hi + 1]) / 2
        return xs[hi] + lane_width
    raise ValueError(f"unknown region {region!r}")


def assign_sign_boxes(scene: SceneGeometry, layout: EgoLayout) -> BoxAssignment:
    anchors = {r: region_anchor_x(scene, layout, r) for r in LABELS}
    picks = kernels.nearest_labels([b.x_mid for b in scene.boxes], anchors["L"], anchors["C"], anchors["R"])
    labels = {b.id: LABELS[k] for b, k in zip(scene.boxes, picks)}
    return BoxAssignment(labels=labels, anchors=anchors)


def localize(scene: SceneGeometry, strict: bool = True, alg1_literal: bool = False):
    layout = split_regions(scene, strict=strict, alg1_literal=alg1_literal)
    return layout, assign_sign_boxes(scene, layout)


def mirror_scene(scene: SceneGeometry) -> SceneGeometry:
    """Reflect about the vertical image axis (``x -> W - x``), keeping lines sorted."""
    w = scene.width
    lines = [BoundaryLine(tuple(Point(w - p.x, p.y) for p in line.points)) for line in reversed(scene.lines)]
    boxes = [SignBox(b.id, w - b.x_max, b.y_min, w - b.x_min, b.y_max, b.description_id) for b in scene.boxes]
    return SceneGeometry(scene.width, scene.height, tuple(lines), tuple(boxes), scene.granularity)


def translate_scene(scene: SceneGeometry, dx: float) -> SceneGeometry:
    lines = [BoundaryLine(tuple(Point(p.x + dx, p.y) for p in line.points)) for line in scene.lines]
    boxes = [SignBox(b.id, b.x_min + dx, b.y_min, b.x_max + dx, b.y_max, b.description_id) for b in scene.boxes]
    return SceneGeometry(scene.width, scene.height, tuple(lines), tuple(boxes), scene.granularity)
