"""Command-line interface.

Exit status: 0 on success, 1 for invalid input or usage, 2 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, kernels
from .datagen import GenConfig, verify_dataset, write_dataset
from .errors import EgoSignError
from .evaluation import evaluate_descriptions, evaluate_plans, none_plan
from .geometry import SceneGeometry, localize
from .grammar import GRAMMAR_VERSION, StructuredDescription, parse_description, serialize
from .matching import ArrangementBudget
from .planner import PlanSet, RouteGraph, VehicleAttributes, make_plan

CONFIG_ENV = "EGOSIGN_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def read_json(path):
    if str(path) == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_records(path) -> list:
    """A JSON array, or JSON Lines with one value per line."""
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        return json.loads(text)
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def emit(obj, fmt="json", table=None):
    if fmt == "table" and table is not None:
        print(table)
    else:
        print(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


def _geometry_flags(p):
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="fail on scenes where the ego lane cannot be found (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="clamp degenerate scenes to the outermost line pair")
    p.add_argument("--alg1-literal", action="store_true",
                   help="pick the ego pair with the literal 'both angles <= 90' loop")


def cmd_localize(args):
    scene = SceneGeometry.from_json(read_json(args.scene))
    layout, assignment = localize(scene, strict=args.strict, alg1_literal=args.alg1_literal)
    emit({"grammar_version": GRAMMAR_VERSION, "layout": layout.to_json(), "assignment": assignment.to_json()})


def _descriptions(records):
    out = []
    for r in records:
        if isinstance(r, str):
            out.append(parse_description(r))
        else:
            out.append(StructuredDescription.from_json(r))
    return out


def cmd_plan(args):
    raw = read_json(args.scene)
    scene = SceneGeometry.from_json(raw)
    if args.descriptions:
        descriptions = _descriptions(load_records(args.descriptions))
    else:
        descriptions = _descriptions(raw.get("descriptions", []))
    vehicle = VehicleAttributes.from_json(read_json(args.vehicle))
    route = RouteGraph.from_json(read_json(args.route))
    plan = make_plan(scene, descriptions, vehicle, route, strict=args.strict, alg1_literal=args.alg1_literal)
    out = plan.to_json()
    out["grammar_version"] = GRAMMAR_VERSION
    emit(out)


def cmd_parse(args):
    desc = parse_description(args.text, desc_id=args.id)
    out = desc.to_json()
    out["grammar_version"] = GRAMMAR_VERSION
    emit(out)


def cmd_serialize(args):
    data = read_json(args.desc)
    for item in data if isinstance(data, list) else [data]:
        print(serialize(StructuredDescription.from_json(item)))


def _load_config(path):
    path = path or os.environ.get(CONFIG_ENV)
    return GenConfig.from_json(read_json(path)) if path else GenConfig()


def cmd_gen(args):
    config = _load_config(args.config)
    start = time.perf_counter()
    manifest = write_dataset(args.out, args.n, args.seed, config, workers=args.workers)
    print(f"wrote {manifest['count']} samples to {args.out} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    emit(manifest)


def cmd_verify(args):
    count, bad = verify_dataset(args.dataset)
    for index, fields in bad[:20]:
        print(f"sample {index}: {', '.join(fields)} differ", file=sys.stderr)
    emit({"count": count, "mismatches": len(bad)})
    return 1 if bad else 0


def _plans(records):
    return [PlanSet.from_json(r.get("gt_plan", r.get("plan", r))) for r in records]


def cmd_eval_plans(args):
    gt = _plans(load_records(args.gt))
    if args.baseline == "none":
        pred = [none_plan()] * len(gt)
    elif args.pred:
        pred = _plans(load_records(args.pred))
    else:
        raise UsageError("eval plans needs --pred or --baseline none")
    report = evaluate_plans(pred, gt)
    emit(report.to_json(), args.format, report.to_table())


def cmd_eval_descriptions(args):
    preds = []
    for r in load_records(args.pred):
        preds.append(r if isinstance(r, str) else r["text"])
    gts = []
    for r in load_records(args.gt):
        if isinstance(r, dict) and "scene" in r:
            raise UsageError("--gt must list descriptions, not dataset samples")
        gts.append(StructuredDescription.from_json(r) if isinstance(r, dict) else parse_description(r))
    report = evaluate_descriptions(preds, gts, ArrangementBudget(args.budget))
    emit(report.to_json(), args.format, report.to_table())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="egosign", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("localize", help="assign sign boxes to left/current/right regions")
    s.add_argument("scene")
    _geometry_flags(s)
    s.set_defaults(func=cmd_localize)

    s = sub.add_parser("plan", help="produce road/lane/speed/other plans for a scene")
    s.add_argument("scene")
    s.add_argument("--vehicle", required=True)
    s.add_argument("--route", required=True)
    s.add_argument("--descriptions", help="descriptions file (defaults to the scene's 'descriptions' key)")
    _geometry_flags(s)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("parse", help="parse description text into JSON")
    s.add_argument("text")
    s.add_argument("--id", default="")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("serialize", help="render description JSON as text")
    s.add_argument("desc")
    s.set_defaults(func=cmd_serialize)

    s = sub.add_parser("gen", help="generate a labeled dataset")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", help=f"GenConfig JSON (default: ${CONFIG_ENV} or built-in)")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("verify", help="recompute and check a dataset's ground truth")
    s.add_argument("dataset")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("eval", help="score predictions")
    ev = s.add_subparsers(dest="target", required=True, parser_class=_Parser)
    e = ev.add_parser("plans")
    e.add_argument("--pred")
    e.add_argument("--gt", required=True)
    e.add_argument("--baseline", choices=["none"])
    e.add_argument("--format", choices=["json", "table"], default="json")
    e.set_defaults(func=cmd_eval_plans)
    e = ev.add_parser("descriptions")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--budget", type=int, default=10**6)
    e.add_argument("--format", choices=["json", "table"], default="json")
    e.set_defaults(func=cmd_eval_descriptions)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args) or 0
    except UsageError as exc:
        print(f"egosign: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"egosign: I/O error: {exc}", file=sys.stderr)
        return 2
    except (EgoSignError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"egosign: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
