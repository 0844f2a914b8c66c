"""Traffic guidance: turn localized sign descriptions into driving plans.

Four questions are answered, each by picking one option from a fixed row:

    road   none | stay | left change | turn left | right change | turn right | exit
    lane   none | stay | left change | right change
    speed  none | speed within limits | speeding | driving too slowly
    other  none | excessive vehicle height | excessive vehicle width
           | excessive vehicle weight | [description]

Option indices are 1-based in row order. Every rule here is a pure function
of one snapshot (scene, descriptions, vehicle, route).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InconsistentLimits, SlotConflict, ValidationError
from .geometry import BoxAssignment, EgoLayout, SceneGeometry, localize
from .grammar import ALLOWED, DIRECTIONS, ClauseKind, StructuredDescription, canonicalize, serialize

OPTIONS = {
    "road": ("none", "stay", "left change", "turn left", "right change", "turn right", "exit"),
    "lane": ("none", "stay", "left change", "right change"),
    "speed": ("none", "speed within limits", "speeding", "driving too slowly"),
    "other": (
        "none",
        "excessive vehicle height",
        "excessive vehicle width",
        "excessive vehicle weight",
        "[description]",
    ),
}
CATEGORIES = tuple(OPTIONS)

# Road option for the first matching direction keyword; a U-turn is driven
# as a left turn.
_DIRECTION_TO_ROAD = {
    "straight": "stay",
    "turn left": "turn left",
    "turn right": "turn right",
    "u-turn": "turn left",
    "exit": "exit",
}


@dataclass(frozen=True)
class Option:
    index: int
    token: str
    text: str | None = None

    def to_json(self) -> dict:
        return {"option": self.index, "token": self.token}


def option(category: str, token: str, text: str | None = None) -> Option:
    return Option(OPTIONS[category].index(token) + 1, token, text)


@dataclass(frozen=True)
class PlanSet:
    road: Option
    lane: Option
    speed: Option
    other: Option

    def to_json(self) -> dict:
        out = {c: getattr(self, c).to_json() for c in CATEGORIES}
        out["other"]["text"] = self.other.text
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PlanSet":
        try:
            opts = {}
            for c in CATEGORIES:
                item = data[c]
                index = int(item["option"])
                row = OPTIONS[c]
                if not 1 <= index <= len(row):
                    raise ValueError(f"{c} option {index} out of range")
                token = item.get("token", row[index - 1])
                if token != row[index - 1]:
                    raise ValueError(f"{c} option {index} is {row[index - 1]!r}, not {token!r}")
                opts[c] = Option(index, token, item.get("text") if c == "other" else None)
            return cls(**opts)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed plan: {exc}") from exc


@dataclass(frozen=True)
class VehicleAttributes:
    vclass: str
    height: float
    width: float
    weight: float
    speed: float

    def __post_init__(self):
        for name in ("height", "width", "weight", "speed"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ValidationError(f"vehicle {name} must be a positive number")

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("vclass", "height", "width", "weight", "speed")}

    @classmethod
    def from_json(cls, data: dict) -> "VehicleAttributes":
        try:
            return cls(str(data["vclass"]), data["height"], data["width"], data["weight"], data["speed"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed vehicle: {exc}") from exc


@dataclass(frozen=True)
class RouteGraph:
    waypoints: tuple[str, ...]
    next_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if len(self.waypoints) < 2:
            raise ValidationError("a route needs an origin and a destination")
        if not 1 <= self.next_index < len(self.waypoints):
            raise ValidationError("next_index must point past the origin and inside the route")

    @property
    def next_waypoint(self) -> str:
        return self.waypoints[self.next_index]

    def to_json(self) -> dict:
        return {"waypoints": list(self.waypoints), "next_index": self.next_index}

    @classmethod
    def from_json(cls, data: dict) -> "RouteGraph":
        try:
            return cls(tuple(str(w) for w in data["waypoints"]), int(data.get("next_index", 1)))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed route: {exc}") from exc


@dataclass(frozen=True)
class EgoAssignment:
    """Descriptions attached to egocentric slots.

    ``present`` lists the lane slots that physically exist in the layout;
    the current lane always does.
    """

    lane_slots: dict[str, StructuredDescription | None]
    road_slots: dict[str, tuple[StructuredDescription, ...]]
    all_lanes: tuple[StructuredDescription, ...]
    present: frozenset = field(default_factory=lambda: frozenset({"C"}))

    def to_json(self) -> dict:
        return {
            "lane_slots": {k: (d.id if d else None) for k, d in self.lane_slots.items()},
            "road_slots": {k: [d.id for d in ds] for k, ds in self.road_slots.items()},
            "all_lanes": [d.id for d in self.all_lanes],
            "present": sorted(self.present),
        }

    @property
    def current(self) -> list[StructuredDescription]:
        """Descriptions regulating the vehicle's own lane."""
        lane = self.lane_slots.get("C")
        return ([lane] if lane else []) + list(self.all_lanes)


def _index_descriptions(descriptions) -> dict[str, StructuredDescription]:
    if isinstance(descriptions, Mapping):
        return dict(descriptions)
    return {d.id: d for d in descriptions}


def attach(
    scene: SceneGeometry,
    layout: EgoLayout,
    assignment: BoxAssignment,
    descriptions,
    strict: bool = True,
) -> EgoAssignment:
    """Place each box's description into its egocentric slot.

    Lane scenes: lane-scope descriptions take the lane slot of their box and
    road-scope ones apply to all lanes of the current road. Road scenes:
    road-scope descriptions on the current road apply to all lanes and those
    on neighbouring roads go to the road slots; lane-scope descriptions cannot
    be placed and raise in strict mode (they are dropped otherwise).
    """
    by_id = _index_descriptions(descriptions)
    lane_slots: dict[str, StructuredDescription | None] = {"L": None, "C": None, "R": None}
    lane_dist: dict[str, float] = {}
    road_slots: dict[str, list] = {"L": [], "R": []}
    all_lanes = []
    for box in scene.boxes:
        if box.description_id not in by_id:
            raise ValidationError(f"box {box.id!r} refers to unknown description {box.description_id!r}")
        desc = by_id[box.description_id]
        label = assignment.labels[box.id]
        if scene.granularity == "lane":
            if desc.subject == "road":
                all_lanes.append(desc)
                continue
            dist = abs(box.x_mid - assignment.anchors[label]) if assignment.anchors else 0.0
            if lane_slots[label] is not None:
                if strict:
                    raise SlotConflict(f"two lane signs compete for lane slot {label}")
                if dist >= lane_dist[label]:
                    continue
            lane_slots[label] = desc
            lane_dist[label] = dist
        else:
            if desc.subject == "lane":
                if strict:
                    raise ValidationError(f"lane sign {desc.id!r} cannot be placed in a road-level scene")
                continue
            if label == "C":
                all_lanes.append(desc)
            else:
                road_slots[label].append(desc)
    present = {"C"}
    if scene.granularity == "lane":
        if layout.has_left:
            present.add("L")
        if layout.has_right:
            present.add("R")
    return EgoAssignment(
        lane_slots=lane_slots,
        road_slots={k: tuple(v) for k, v in road_slots.items()},
        all_lanes=tuple(all_lanes),
        present=frozenset(present),
    )


def _clauses(descs: Iterable[StructuredDescription], kind: ClauseKind):
    return [c for d in descs for c in d.clauses if c.kind is kind]


def _keywords(desc: StructuredDescription, kind: ClauseKind) -> set[str]:
    return {k for c in desc.clauses if c.kind is kind for k in c.keywords}


def plan_speed(ego: EgoAssignment, vehicle: VehicleAttributes) -> Option:
    limits = _clauses(ego.current, ClauseKind.SPEED_RANGE)
    if not limits:
        return option("speed", "none")
    hi = min(c.hi for c in limits)
    los = [c.lo for c in limits if c.lo is not None]
    lo = max(los) if los else None
    if lo is not None and lo > hi:
        raise InconsistentLimits(f"stacked speed limits leave an empty band ({lo} > {hi})")
    if vehicle.speed > hi:
        return option("speed", "speeding")
    if lo is not None and vehicle.speed < lo:
        return option("speed", "driving too slowly")
    return option("speed", "speed within limits")


def _road_decision(ego: EgoAssignment, route: RouteGraph) -> tuple[Option, str | None]:
    """Road option plus the lane direction it requires (None: unconstrained)."""
    if not ego.all_lanes and not any(ego.road_slots.values()):
        return option("road", "none"), None
    target = route.next_waypoint
    for desc in ego.all_lanes:
        if target in _keywords(desc, ClauseKind.DESTINATION):
            dirs = _keywords(desc, ClauseKind.DIRECTION)
            for d in DIRECTIONS:
                if d in dirs:
                    return option("road", _DIRECTION_TO_ROAD[d]), d
            return option("road", "stay"), "straight"
    for label, token in (("L", "left change"), ("R", "right change")):
        if any(target in _keywords(d, ClauseKind.DESTINATION) for d in ego.road_slots.get(label, ())):
            return option("road", token), "straight"
    return option("road", "stay"), "straight"


def plan_road(ego: EgoAssignment, route: RouteGraph) -> Option:
    return _road_decision(ego, route)[0]


def _admits(desc: StructuredDescription | None, vehicle: VehicleAttributes, need: str | None) -> bool:
    if desc is None:
        return True
    for c in desc.clauses:
        if c.kind is ClauseKind.VEHICLE_CLASS:
            listed = vehicle.vclass in c.keywords
            if listed != (c.polarity == ALLOWED):
                return False
    if need is not None:
        dirs = _keywords(desc, ClauseKind.DIRECTION)
        if dirs and need not in dirs:
            return False
    return True


def _direction_rank(desc: StructuredDescription | None, need: str | None) -> float:
    if desc is None or need is None:
        return math.inf
    dirs = sorted(_keywords(desc, ClauseKind.DIRECTION))
    return dirs.index(need) if need in dirs else math.inf


def plan_lane(ego: EgoAssignment, vehicle: VehicleAttributes, route: RouteGraph) -> Option:
    slots = ego.lane_slots
    if not any(slots.values()):
        return option("lane", "none")
    _, need = _road_decision(ego, route)
    if _admits(slots.get("C"), vehicle, need):
        return option("lane", "stay")
    left = "L" in ego.present and _admits(slots.get("L"), vehicle, need)
    right = "R" in ego.present and _admits(slots.get("R"), vehicle, need)
    if left and right:
        if _direction_rank(slots.get("R"), need) < _direction_rank(slots.get("L"), need):
            return option("lane", "right change")
        return option("lane", "left change")
    if left:
        return option("lane", "left change")
    if right:
        return option("lane", "right change")
    return option("lane", "stay")


def plan_other(ego: EgoAssignment, vehicle: VehicleAttributes) -> Option:
    current = ego.current
    scope = current + list(ego.road_slots.get("C", ()))
    limits = _clauses(scope, ClauseKind.DIMENSION_LIMIT)
    if limits:
        for dim in ("height", "width", "weight"):
            if any(c.dimension == dim and getattr(vehicle, dim) > c.value for c in limits):
                return option("other", f"excessive vehicle {dim}")
        return option("other", "none")
    if current:
        text = " ".join(sorted(serialize(canonicalize(d)) for d in current))
        return option("other", "[description]", text)
    return option("other", "none")


def plan_from_ego(ego: EgoAssignment, vehicle: VehicleAttributes, route: RouteGraph) -> PlanSet:
    return PlanSet(
        road=plan_road(ego, route),
        lane=plan_lane(ego, vehicle, route),
        speed=plan_speed(ego, vehicle),
        other=plan_other(ego, vehicle),
    )


def run_pipeline(scene, descriptions, vehicle, route, strict=True, alg1_literal=False):
    """Localize, attach and plan; returns ``(layout, assignment, ego, plan)``."""
    layout, assignment = localize(scene, strict=strict, alg1_literal=alg1_literal)
    ego = attach(scene, layout, assignment, descriptions, strict=strict)
    return layout, assignment, ego, plan_from_ego(ego, vehicle, route)


def make_plan(
    scene: SceneGeometry,
    descriptions,
    vehicle: VehicleAttributes,
    route: RouteGraph,
    strict: bool = True,
    alg1_literal: bool = False,
) -> PlanSet:
    return run_pipeline(scene, descriptions, vehicle, route, strict, alg1_literal)[3]
