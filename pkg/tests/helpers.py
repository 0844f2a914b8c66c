"""Scene and description generators used by the tests.

The scene generator knows the exact strip boundaries it drew (lines through
a common vanishing point), which gives a containment oracle that never
touches the library's line fitting.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from egosign.geometry import BoundaryLine, Point, SceneGeometry, SignBox
from egosign.grammar import DIRECTIONS, Clause, ClauseKind, StructuredDescription, serialize

W, H = 1920, 1080


@dataclass
class OracleScene:
    scene: SceneGeometry
    strip_x: list[float]  # boundary x at 2H/3, from the generating geometry
    ego: int  # index of the strip under the vehicle
    box_strips: dict[str, int]

    def oracle_label(self, box_id):
        k = self.box_strips[box_id]
        return {self.ego - 1: "L", self.ego: "C", self.ego + 1: "R"}.get(k)


def perspective_scene(rng: random.Random, n_lines=None, n_boxes=None, margin=0.02) -> OracleScene:
    n = n_lines or rng.randint(2, 6)
    lanes = n - 1
    vy = rng.uniform(0.25, 0.45) * H
    spacing = rng.uniform(150.0, min(500.0, 0.9 * W / lanes))
    b0 = rng.uniform(0.0, W - lanes * spacing)
    bottoms = [b0 + i * spacing for i in range(n)]
    ego = rng.randrange(lanes)
    vx = bottoms[ego] + spacing * rng.uniform(0.05, 0.95)
    y_top = vy + 0.1 * (H - vy)
    lines = []
    for b in bottoms:
        m = rng.randint(2, 5)
        ys = sorted(rng.uniform(y_top, H) for _ in range(m))
        ys = [y for i, y in enumerate(ys) if i == 0 or y > ys[i - 1] + 1e-6]
        if len(ys) < 2:
            ys = [y_top, float(H)]
        lines.append(BoundaryLine(tuple(Point(vx + (b - vx) * (y - vy) / (H - vy), y) for y in ys)))
    ya = 2 * H / 3
    strip_x = [vx + (b - vx) * (ya - vy) / (H - vy) for b in bottoms]
    boxes, strips = [], {}
    for j in range(rng.randint(0, 8) if n_boxes is None else n_boxes):
        k = rng.randrange(lanes)
        width = strip_x[k + 1] - strip_x[k]
        mid = strip_x[k] + width * rng.uniform(margin, 1 - margin)
        half = rng.uniform(5.0, 60.0)
        top = rng.uniform(10.0, 200.0)
        boxes.append(SignBox(f"b{j}", mid - half, top, mid + half, top + 50.0, f"d{j}"))
        strips[f"b{j}"] = k
    scene = SceneGeometry(W, H, tuple(lines), tuple(boxes), "lane")
    return OracleScene(scene, strip_x, ego, strips)


def simple_scene(xs_at_anchor, box_mids=(), granularity="lane", desc_ids=None, vx=960.0):
    """Scene with lines through a vanishing point above the image.

    ``xs_at_anchor`` gives each line's x at y = 2H/3; the vanishing point sits
    at ``(vx, 0)``, so lines left of it lean left.
    """
    vy = 0.0
    ya = 2 * H / 3
    lines = []
    for xa in xs_at_anchor:
        def x_at(y, xa=xa):
            return vx + (xa - vx) * (y - vy) / (ya - vy)

        lines.append(BoundaryLine((Point(x_at(400.0), 400.0), Point(x_at(1000.0), 1000.0))))
    boxes = []
    for j, mid in enumerate(box_mids):
        did = desc_ids[j] if desc_ids else f"d{j}"
        boxes.append(SignBox(f"b{j}", mid - 20.0, 50.0, mid + 20.0, 120.0, did))
    return SceneGeometry(W, H, tuple(lines), tuple(boxes), granularity)


# -- descriptions -------------------------------------------------------------

WORDS = ("Beijing", "Tianjin", "Xi'an", "Taiyuan", "Datong", "A", "B", "C")
CLASSES = ("car", "truck", "bus", "van")


def random_clause(rng: random.Random, max_keywords=4) -> Clause:
    kind = rng.choice(list(ClauseKind))
    k = rng.randint(1, max_keywords)
    if kind is ClauseKind.DIRECTION:
        return Clause(kind, tuple(rng.choice(DIRECTIONS) for _ in range(k)))
    if kind is ClauseKind.DESTINATION:
        return Clause(kind, tuple(rng.choice(WORDS) for _ in range(k)))
    if kind is ClauseKind.VEHICLE_CLASS:
        return Clause(kind, tuple(rng.choice(CLASSES) for _ in range(k)), polarity=rng.choice(("allowed", "prohibited")))
    if kind is ClauseKind.SPEED_RANGE:
        hi = rng.choice((40, 60, 80, 100, 120))
        lo = rng.choice((None, hi - 20, 0, 12.5))
        return Clause(kind, lo=lo, hi=hi)
    if kind is ClauseKind.DIMENSION_LIMIT:
        return Clause(kind, dimension=rng.choice(("height", "width", "weight")), value=rng.choice((2, 3.5, 4.25, 10, 55)))
    if kind is ClauseKind.DISTANCE_KEEP:
        return Clause(kind, value=rng.choice((50, 100, 150.5)))
    return Clause(kind, text=rng.choice(("no parking", "bus lane 7-9 am", "tidal lane", "with trucks at night")))


def random_description(rng: random.Random, max_clauses=4, max_keywords=4, desc_id="d") -> StructuredDescription:
    clauses = []
    seen_speed = False
    seen_dims = set()
    for _ in range(rng.randint(1, max_clauses)):
        c = random_clause(rng, max_keywords)
        if c.kind is ClauseKind.SPEED_RANGE:
            if seen_speed:
                continue
            seen_speed = True
        if c.kind is ClauseKind.DIMENSION_LIMIT:
            if c.dimension in seen_dims:
                continue
            seen_dims.add(c.dimension)
        clauses.append(c)
    return StructuredDescription(desc_id, rng.choice(("lane", "road")), tuple(clauses))


def shuffled(rng: random.Random, desc: StructuredDescription) -> StructuredDescription:
    clauses = []
    for c in desc.clauses:
        kws = list(c.keywords)
        rng.shuffle(kws)
        clauses.append(Clause(c.kind, tuple(kws), c.lo, c.hi, c.dimension, c.value, c.polarity, c.text))
    rng.shuffle(clauses)
    return StructuredDescription(desc.id + "'", desc.subject, tuple(clauses))


def brute_force_arrangements(desc: StructuredDescription) -> set[str]:
    """Every arrangement text, built by permuting and re-serializing."""
    texts = set()
    for order in itertools.permutations(desc.clauses):
        per_clause = [itertools.permutations(c.keywords) if c.keywords else [()] for c in order]
        for combo in itertools.product(*[list(p) for p in per_clause]):
            clauses = tuple(
                Clause(c.kind, kws, c.lo, c.hi, c.dimension, c.value, c.polarity, c.text) for c, kws in zip(order, combo)
            )
            texts.add(serialize(StructuredDescription(desc.id, desc.subject, clauses)))
    return texts


_TOKEN_CHARS = "abcxyzABC0123456789 -'/éß北京"


def random_token(rng: random.Random) -> str:
    while True:
        s = "".join(rng.choice(_TOKEN_CHARS) for _ in range(rng.randint(1, 8))).strip()
        if s:
            return s


def exotic_description(rng: random.Random, desc_id="d") -> StructuredDescription:
    """Like random_description but with arbitrary keywords, free text and numbers."""
    base = random_description(rng, desc_id=desc_id)
    clauses = []
    for c in base.clauses:
        if c.kind in (ClauseKind.DESTINATION, ClauseKind.VEHICLE_CLASS):
            c = Clause(c.kind, tuple(random_token(rng) for _ in c.keywords), polarity=c.polarity)
        elif c.kind is ClauseKind.SPEED_RANGE:
            hi = round(rng.uniform(0.5, 300), rng.choice((0, 1, 3)))
            lo = rng.choice((None, round(rng.uniform(0, hi), 2)))
            c = Clause(c.kind, lo=lo if lo is None or lo < hi else None, hi=hi)
        elif c.kind is ClauseKind.DISTANCE_KEEP:
            c = Clause(c.kind, value=rng.choice((0.001, 1e-4, 12345.678, 7)))
        elif c.kind is ClauseKind.FREE_TEXT:
            text = random_token(rng)
            if not any(text.startswith(h) for h in ("allows driving ", "heading to ", "with ", "keeping ", "restricted ", "prohibited ")):
                c = Clause(c.kind, text=text)
        clauses.append(c)
    return StructuredDescription(desc_id, base.subject, tuple(clauses))
