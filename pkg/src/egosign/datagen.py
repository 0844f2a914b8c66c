"""Procedural generation of labeled localization and planning samples.

Scenes are synthetic: boundary lines converge on a sampled vanishing point,
sign boxes hang above lane strips, and every box carries a freshly sampled
description. Ground truth comes from running the same localization and
planning functions the library exposes, so every stored label can be
recomputed from the sample's raw fields.

Sample ``i`` of a dataset is drawn from its own RNG seeded by
``sha256(seed, i)``, which makes output independent of worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

from .errors import InconsistentLimits, ValidationError
from .geometry import BoundaryLine, EgoLayout, Point, SceneGeometry, SignBox
from .grammar import (
    ALLOWED,
    DIMENSION_UNITS,
    GRAMMAR_VERSION,
    PROHIBITED,
    Clause,
    ClauseKind,
    StructuredDescription,
    ensure_valid,
)
from .planner import OPTIONS, EgoAssignment, PlanSet, RouteGraph, VehicleAttributes, run_pipeline


@dataclass(frozen=True)
class GenConfig:
    width: int = 1920
    height: int = 1080
    lane_count: tuple[int, int] = (1, 5)
    road_scene_prob: float = 0.25
    lane_sign_density: float = 0.6
    road_sign_count: tuple[int, int] = (0, 3)
    destinations: tuple[str, ...] = (
        "Beijing", "Tianjin", "Xi'an", "Taiyuan", "Zhengzhou", "Shijiazhuang",
        "Baoding", "Luoyang", "Datong", "Handan", "Airport", "Port Area",
    )
    vehicle_classes: tuple[str, ...] = ("car", "truck", "bus", "van", "motorcycle")
    free_texts: tuple[str, ...] = ("no parking", "bus lane 7-9 am", "tidal lane", "no honking", "emergency lane")
    # (lo, hi) in km/h; lo None means an upper limit only
    speed_bands: tuple[tuple, ...] = ((90, 120), (60, 100), (None, 80), (None, 60), (100, 120), (80, 100), (None, 120))
    height_limits: tuple[float, float] = (2.5, 5.0)
    width_limits: tuple[float, float] = (2.0, 3.5)
    weight_limits: tuple[float, float] = (5.0, 55.0)
    distance_range: tuple[float, float] = (50.0, 200.0)
    vehicle_speed: tuple[float, float] = (20.0, 140.0)
    vehicle_height: tuple[float, float] = (1.4, 4.8)
    vehicle_width: tuple[float, float] = (1.6, 2.8)
    vehicle_weight: tuple[float, float] = (1.0, 49.0)
    p_direction: float = 0.5
    p_vehicle_class: float = 0.35
    p_speed: float = 0.35
    p_dimension: float = 0.15
    p_distance: float = 0.05
    p_free_text: float = 0.05
    p_road_destination: float = 0.9
    p_road_direction: float = 0.6
    route_match_prob: float = 0.75
    balance: dict = field(default_factory=lambda: {"lane": (0.25, 0.25, 0.25, 0.25)})
    balance_attempts: int = 40

    def __post_init__(self):
        for name in ("lane_count", "road_sign_count"):
            lo, hi = getattr(self, name)
            if not (isinstance(lo, int) and isinstance(hi, int) and 0 <= lo <= hi):
                raise ValidationError(f"{name} must be an integer range lo <= hi")
        if self.lane_count[0] < 1:
            raise ValidationError("lane_count must start at 1 or more")
        if self.lane_count[1] > 5:
            raise ValidationError("at most 5 lanes (6 boundary lines) are supported")
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name.startswith("p_") or f.name.endswith("_prob") or f.name == "lane_sign_density":
                if not 0.0 <= v <= 1.0:
                    raise ValidationError(f"{f.name} must be a probability")
            elif f.name.endswith(("_limits", "_range")) or f.name.startswith("vehicle_") and f.name != "vehicle_classes":
                if not (0 < v[0] <= v[1]):
                    raise ValidationError(f"{f.name} must be a positive range lo <= hi")
        if not self.destinations or not self.vehicle_classes or not self.speed_bands:
            raise ValidationError("vocabularies must be non-empty")
        if self.width <= 0 or self.height <= 0 or self.balance_attempts < 1:
            raise ValidationError("image size and balance_attempts must be positive")
        for row, weights in self.balance.items():
            if row not in OPTIONS or len(weights) != len(OPTIONS[row]):
                raise ValidationError(f"balance for {row!r} needs {len(OPTIONS.get(row, ()))} weights")
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                raise ValidationError(f"balance weights for {row!r} must be non-negative and not all zero")

    def to_json(self) -> dict:
        return json.loads(json.dumps(dataclasses.asdict(self)))

    @classmethod
    def from_json(cls, data: dict) -> "GenConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in data.items():
            if k == "balance":
                kwargs[k] = {row: tuple(w) for row, w in v.items()}
            elif k == "speed_bands":
                kwargs[k] = tuple(tuple(b) for b in v)
            elif isinstance(v, list):
                kwargs[k] = tuple(v)
            else:
                kwargs[k] = v
        return cls(**kwargs)

    def sha256(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Sample:
    index: int
    scene: SceneGeometry
    descriptions: tuple[StructuredDescription, ...]
    vehicle: VehicleAttributes
    route: RouteGraph
    gt_layout: EgoLayout
    gt_labels: dict
    gt_assignment: EgoAssignment
    gt_plan: PlanSet

    def to_json(self) -> dict:
        assignment = {"labels": dict(self.gt_labels)}
        assignment.update(self.gt_assignment.to_json())
        return {
            "index": self.index,
            "grammar_version": GRAMMAR_VERSION,
            "scene": self.scene.to_json(),
            "descriptions": [d.to_json() for d in self.descriptions],
            "vehicle": self.vehicle.to_json(),
            "route": self.route.to_json(),
            "gt_layout": self.gt_layout.to_json(),
            "gt_assignment": assignment,
            "gt_plan": self.gt_plan.to_json(),
        }


def sub_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _round(v: float, places: int = 1) -> float:
    return round(v, places)


# -- descriptions -------------------------------------------------------------


def _speed_clause(rng, cfg):
    lo, hi = rng.choice(cfg.speed_bands)
    return Clause(ClauseKind.SPEED_RANGE, lo=lo, hi=hi)


def _dimension_clauses(rng, cfg):
    dims = rng.sample(list(DIMENSION_UNITS), rng.choice((1, 1, 2)))
    out = []
    for dim in dims:
        lo, hi = getattr(cfg, f"{dim}_limits")
        places = 0 if dim == "weight" else 1
        out.append(Clause(ClauseKind.DIMENSION_LIMIT, dimension=dim, value=_round(rng.uniform(lo, hi), places)))
    return out


def _lane_description(rng, cfg, desc_id):
    clauses = []
    if rng.random() < cfg.p_direction:
        k = rng.choice((1, 1, 2))
        dirs = rng.sample(["straight", "straight", "turn left", "turn right", "u-turn", "exit"], k)
        clauses.append(Clause(ClauseKind.DIRECTION, tuple(dict.fromkeys(dirs))))
    if rng.random() < cfg.p_vehicle_class:
        k = rng.choice((1, 1, 2))
        clauses.append(
            Clause(
                ClauseKind.VEHICLE_CLASS,
                tuple(rng.sample(list(cfg.vehicle_classes), k)),
                polarity=rng.choice((ALLOWED, PROHIBITED, PROHIBITED)),
            )
        )
    if rng.random() < cfg.p_speed:
        clauses.append(_speed_clause(rng, cfg))
    if rng.random() < cfg.p_dimension:
        clauses.extend(_dimension_clauses(rng, cfg))
    if rng.random() < cfg.p_distance:
        lo, hi = cfg.distance_range
        clauses.append(Clause(ClauseKind.DISTANCE_KEEP, value=round(rng.uniform(lo, hi) / 10) * 10))
    if rng.random() < cfg.p_free_text:
        clauses.append(Clause(ClauseKind.FREE_TEXT, text=rng.choice(cfg.free_texts)))
    if not clauses:
        clauses.append(Clause(ClauseKind.DIRECTION, (rng.choice(("straight", "turn left", "turn right")),)))
    rng.shuffle(clauses)
    return ensure_valid(StructuredDescription(desc_id, "lane", tuple(clauses)))


def _road_description(rng, cfg, desc_id):
    clauses = []
    if rng.random() < cfg.p_road_destination:
        k = min(rng.choice((1, 2, 2, 3)), len(cfg.destinations))
        clauses.append(Clause(ClauseKind.DESTINATION, tuple(rng.sample(list(cfg.destinations), k))))
        if rng.random() < cfg.p_road_direction:
            clauses.append(Clause(ClauseKind.DIRECTION, (rng.choice(("straight", "turn left", "turn right", "exit")),)))
    if rng.random() < cfg.p_speed / 2:
        clauses.append(_speed_clause(rng, cfg))
    if rng.random() < cfg.p_dimension:
        clauses.extend(_dimension_clauses(rng, cfg))
    if rng.random() < cfg.p_free_text:
        clauses.append(Clause(ClauseKind.FREE_TEXT, text=rng.choice(cfg.free_texts)))
    if not clauses:
        clauses.append(Clause(ClauseKind.DESTINATION, (rng.choice(cfg.destinations),)))
    rng.shuffle(clauses)
    return ensure_valid(StructuredDescription(desc_id, "road", tuple(clauses)))


# -- scenes -------------------------------------------------------------------


def _strip_box(rng, cfg, left_x, right_x, box_id, desc_id):
    w = right_x - left_x
    centre = (left_x + right_x) / 2 + rng.uniform(-0.2, 0.2) * w
    half = w * rng.uniform(0.2, 0.35)
    top = rng.uniform(0.04, 0.2) * cfg.height
    return SignBox(box_id, _round(centre - half), _round(top), _round(centre + half),
                   _round(top + rng.uniform(0.06, 0.12) * cfg.height), desc_id)


def _scene(rng: random.Random, cfg: GenConfig):
    W, H = cfg.width, cfg.height
    lanes = rng.randint(*cfg.lane_count)
    granularity = "road" if rng.random() < cfg.road_scene_prob else "lane"
    vy = rng.uniform(0.30, 0.45) * H
    spacing = rng.uniform(0.6, 1.0) * min(0.45 * W, 0.95 * W / lanes)
    b0 = rng.uniform(0.02 * W, 0.98 * W - lanes * spacing)
    bottoms = [b0 + i * spacing for i in range(lanes + 1)]
    ego = rng.randrange(lanes)
    vx = bottoms[ego] + spacing * rng.uniform(0.15, 0.85)
    y_top = vy + 0.12 * (H - vy)

    lines = []
    for b in bottoms:
        m = rng.randint(2, 4)
        ys = [y_top + j * (H - y_top) / (m - 1) for j in range(m)]
        lines.append(BoundaryLine(tuple(Point(_round(vx + (b - vx) * (y - vy) / (H - vy), 3), _round(y, 3)) for y in ys)))

    scale = (2 * H / 3 - vy) / (H - vy)
    at_anchor = [vx + (b - vx) * scale for b in bottoms]
    strips = [s for s in (ego - 1, ego, ego + 1) if 0 <= s < lanes]

    boxes, descriptions = [], []

    def add(desc_maker, strip=None):
        n = len(boxes)
        desc = desc_maker(rng, cfg, f"d{n}")
        if strip is None:
            bw = rng.uniform(0.08, 0.2) * W
            x0 = rng.uniform(0.02 * W, 0.98 * W - bw)
            top = rng.uniform(0.04, 0.2) * H
            box = SignBox(f"b{n}", _round(x0), _round(top), _round(x0 + bw), _round(top + 0.1 * H), desc.id)
        else:
            box = _strip_box(rng, cfg, at_anchor[strip], at_anchor[strip + 1], f"b{n}", desc.id)
        boxes.append(box)
        descriptions.append(desc)

    if granularity == "lane":
        for s in strips:
            if rng.random() < cfg.lane_sign_density:
                add(_lane_description, s)
        for _ in range(rng.randint(*cfg.road_sign_count)):
            add(_road_description)
    else:
        for _ in range(rng.randint(*cfg.road_sign_count)):
            add(_road_description, rng.choice(strips))

    scene = SceneGeometry(W, H, tuple(lines), tuple(boxes), granularity)
    return scene, tuple(descriptions)


def gen_scene(seed: int, config: GenConfig | None = None):
    """Return ``(scene, descriptions)`` for one seed."""
    return _scene(random.Random(seed), config or GenConfig())


def _vehicle(rng, cfg):
    return VehicleAttributes(
        vclass=rng.choice(cfg.vehicle_classes),
        height=_round(rng.uniform(*cfg.vehicle_height)),
        width=_round(rng.uniform(*cfg.vehicle_width)),
        weight=_round(rng.uniform(*cfg.vehicle_weight)),
        speed=float(round(rng.uniform(*cfg.vehicle_speed))),
    )


def _route(rng, cfg, descriptions):
    seen = [
        kw
        for d in descriptions
        if d.subject == "road"
        for c in d.clauses
        if c.kind is ClauseKind.DESTINATION
        for kw in c.keywords
    ]
    pool = list(dict.fromkeys(cfg.destinations))
    if seen and rng.random() < cfg.route_match_prob:
        nxt = rng.choice(seen)
    else:
        nxt = rng.choice(pool)
    rest = [p for p in pool if p != nxt]
    origin = f"Origin {rng.randint(1, 99)}"
    tail = rng.sample(rest, min(len(rest), rng.randint(0, 2)))
    return RouteGraph((origin, nxt, *tail), 1)


def _candidate(rng, cfg, index):
    scene, descriptions = _scene(rng, cfg)
    vehicle = _vehicle(rng, cfg)
    route = _route(rng, cfg, descriptions)
    layout, assignment, ego, plan = run_pipeline(scene, descriptions, vehicle, route, strict=True)
    return Sample(index, scene, descriptions, vehicle, route, layout, dict(assignment.labels), ego, plan)


def gen_sample(seed: int, config: GenConfig | None = None, index: int = 0) -> Sample:
    """One sample drawn from ``random.Random(seed)``.

    Option balancing is soft: a target option is drawn for each balanced row
    and candidates are redrawn up to ``balance_attempts`` times; the first
    candidate matching the most targets is kept.
    """
    cfg = config or GenConfig()
    rng = random.Random(seed)
    targets = {}
    for row, weights in sorted(cfg.balance.items()):
        targets[row] = rng.choices(range(1, len(weights) + 1), weights=weights)[0]
    best, best_hits = None, -1
    attempts = rejected = 0
    while attempts < cfg.balance_attempts or best is None:
        try:
            sample = _candidate(rng, cfg, index)
        except InconsistentLimits:
            rejected += 1
            if rejected > 1000:
                raise ValidationError("config keeps producing contradictory speed limits") from None
            continue
        attempts += 1
        hits = sum(getattr(sample.gt_plan, row).index == t for row, t in targets.items())
        if hits > best_hits:
            best, best_hits = sample, hits
            if hits == len(targets):
                break
    return best


def _sample_line(i, seed, config):
    sample = gen_sample(sub_seed(seed, i), config, index=i)
    return dumps(sample.to_json())


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def generate(n: int, seed: int, config: GenConfig | None = None, workers: int = 1):
    """Yield ``n`` serialized samples (one JSON line each) in index order."""
    cfg = config or GenConfig()
    if workers <= 1:
        for i in range(n):
            yield _sample_line(i, seed, cfg)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(partial(_sample_line, seed=seed, config=cfg), range(n), chunksize=64)


def write_dataset(path, n: int, seed: int, config: GenConfig | None = None, workers: int = 1) -> dict:
    """Write ``samples.jsonl`` and ``manifest.json`` into directory ``path``."""
    cfg = config or GenConfig()
    if n < 0:
        raise ValidationError("sample count must be non-negative")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for line in generate(n, seed, cfg, workers):
            fh.write(line + "\n")
    manifest = {"seed": seed, "config_sha256": cfg.sha256(), "grammar_version": GRAMMAR_VERSION, "count": n}
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def verify_sample(data: dict) -> list[str]:
    """Names of ground-truth fields that differ from a fresh recomputation."""
    scene = SceneGeometry.from_json(data["scene"])
    descriptions = [ensure_valid(StructuredDescription.from_json(d)) for d in data["descriptions"]]
    vehicle = VehicleAttributes.from_json(data["vehicle"])
    route = RouteGraph.from_json(data["route"])
    layout, assignment, ego, plan = run_pipeline(scene, descriptions, vehicle, route, strict=True)
    fresh = {"labels": dict(assignment.labels)}
    fresh.update(ego.to_json())
    recomputed = {
        "gt_layout": layout.to_json(),
        "gt_assignment": fresh,
        "gt_plan": plan.to_json(),
    }
    return [k for k, v in recomputed.items() if json.loads(dumps(v)) != data.get(k)]


def verify_dataset(path) -> tuple[int, list[tuple[int, list[str]]]]:
    """Re-check every line of a JSONL dataset; returns ``(count, mismatches)``."""
    p = Path(path)
    if p.is_dir():
        p = p / "samples.jsonl"
    count, bad = 0, []
    with open(p, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            diff = verify_sample(data)
            if diff:
                bad.append((data.get("index", count), diff))
            count += 1
    return count, bad


def default_workers() -> int:
    return os.cpu_count() or 1
