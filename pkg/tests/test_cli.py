import hashlib
import json
import subprocess
import sys

import pytest

from egosign.cli import main
from egosign.datagen import GenConfig, write_dataset
from egosign.grammar import StructuredDescription, canonicalize, parse_description, serialize

from .helpers import simple_scene

SPEED_TEXT = "this lane with speed limited from 90 to 120 km/h."


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


@pytest.fixture
def speed_files(tmp_path):
    scene = simple_scene([560, 840, 1080, 1360], [960], desc_ids=["c"]).to_json()
    scene["descriptions"] = [parse_description(SPEED_TEXT, "c").to_json()]
    return {
        "scene": write(tmp_path / "scene.json", scene),
        "vehicle": write(tmp_path / "v.json", {"vclass": "car", "height": 1.5, "width": 1.8, "weight": 1.5, "speed": 60}),
        "route": write(tmp_path / "r.json", {"waypoints": ["A", "B"], "next_index": 1}),
    }


def test_localize(capsys, speed_files):
    code, out, _ = run(capsys, "localize", speed_files["scene"])
    data = json.loads(out)
    assert code == 0
    assert data["assignment"] == {"labels": {"b0": "C"}}
    assert data["layout"]["ego_pair"] == [1, 2]


def test_localize_flags(capsys, tmp_path):
    lines = [[[300.0, 400.0], [200.0, 1000.0]], [[500.0, 400.0], [400.0, 1000.0]]]
    path = write(tmp_path / "s.json", {"width": 1920, "height": 1080, "granularity": "lane", "lines": lines, "boxes": []})
    code, _, err = run(capsys, "localize", path)
    assert code == 1 and "CannotLocalize" in err
    code, out, _ = run(capsys, "localize", path, "--lenient")
    assert code == 0 and json.loads(out)["layout"]["ego_pair"] == [0, 1]
    code, _, _ = run(capsys, "localize", path, "--lenient", "--alg1-literal")
    assert code == 0


def test_plan_speed_scene(capsys, speed_files):
    code, out, _ = run(capsys, "plan", speed_files["scene"], "--vehicle", speed_files["vehicle"], "--route", speed_files["route"])
    assert code == 0
    plan = json.loads(out)
    assert plan["speed"] == {"option": 4, "token": "driving too slowly"}
    assert "driving too slowly" in out


def test_plan_with_separate_descriptions(capsys, speed_files, tmp_path):
    descs = tmp_path / "d.jsonl"
    descs.write_text(json.dumps(parse_description("this lane with speed limited to 50 km/h.", "c").to_json()) + "\n")
    code, out, _ = run(
        capsys, "plan", speed_files["scene"], "--vehicle", speed_files["vehicle"], "--route", speed_files["route"],
        "--descriptions", str(descs),
    )
    assert code == 0 and json.loads(out)["speed"]["token"] == "speeding"


def test_parse_and_serialize(capsys, tmp_path):
    code, out, _ = run(capsys, "parse", SPEED_TEXT, "--id", "x")
    assert code == 0
    data = json.loads(out)
    assert data["id"] == "x" and data["clauses"][0]["params"] == {"lo": 90, "hi": 120}
    code, out, _ = run(capsys, "serialize", write(tmp_path / "d.json", data))
    assert code == 0 and out == SPEED_TEXT + "\n"


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "parse", "this lane foobar [x].")
    assert code == 1 and "offset 10" in err


def test_usage_and_io_errors(capsys, tmp_path):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "gen", "--seed", "1")[0] == 1
    assert run(capsys, "localize", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "localize", str(bad))[0] == 1


def test_gen_verify_and_eval(capsys, tmp_path):
    out_dir = tmp_path / "ds"
    code, out, _ = run(capsys, "gen", "--n", "60", "--seed", "7", "--out", str(out_dir))
    assert code == 0 and json.loads(out)["count"] == 60
    code, out, _ = run(capsys, "verify", str(out_dir))
    assert code == 0 and json.loads(out) == {"count": 60, "mismatches": 0}

    samples = str(out_dir / "samples.jsonl")
    code, out, _ = run(capsys, "eval", "plans", "--pred", samples, "--gt", samples)
    report = json.loads(out)
    assert code == 0 and report["O_all"] == 1.0 and report["O_drop1"] == 1.0
    code, out, _ = run(capsys, "eval", "plans", "--baseline", "none", "--gt", samples)
    assert code == 0 and json.loads(out)["O_drop1"] == 0.0
    code, out, _ = run(capsys, "eval", "plans", "--pred", samples, "--gt", samples, "--format", "table")
    assert code == 0 and out.startswith("road")
    assert run(capsys, "eval", "plans", "--gt", samples)[0] == 1


def test_verify_reports_mismatch(capsys, tmp_path):
    write_dataset(tmp_path, 5, 1)
    lines = (tmp_path / "samples.jsonl").read_text().splitlines()
    sample = json.loads(lines[2])
    sample["gt_layout"]["ego_pair"] = [9, 10]
    lines[2] = json.dumps(sample)
    (tmp_path / "samples.jsonl").write_text("\n".join(lines) + "\n")
    code, out, err = run(capsys, "verify", str(tmp_path))
    assert code == 1 and json.loads(out)["mismatches"] == 1 and "gt_layout" in err


def test_gen_config_from_environment(capsys, tmp_path, monkeypatch):
    cfg = GenConfig(lane_sign_density=0.0, road_sign_count=(0, 0))
    monkeypatch.setenv("EGOSIGN_CONFIG", write(tmp_path / "cfg.json", cfg.to_json()))
    code, out, _ = run(capsys, "gen", "--n", "3", "--seed", "1", "--out", str(tmp_path / "ds"))
    assert code == 0 and json.loads(out)["config_sha256"] == cfg.sha256()


def test_eval_descriptions(capsys, tmp_path):
    gt = [parse_description(SPEED_TEXT, "a").to_json(), parse_description("this road heading to [B, A].", "b").to_json()]
    pred = [SPEED_TEXT, "this road heading to [A, B]."]
    code, out, _ = run(capsys, "eval", "descriptions", "--pred", write(tmp_path / "p.json", pred), "--gt", write(tmp_path / "g.json", gt))
    assert code == 0
    corpus = json.loads(out)["corpus"]
    assert corpus == {"bleu1": 1.0, "bleu2": 1.0, "bleu3": 1.0, "bleu4": 1.0, "rougeL": 1.0, "exact_pi": 1.0}
    code, _, err = run(
        capsys, "eval", "descriptions", "--pred", write(tmp_path / "p2.json", pred), "--gt", str(tmp_path / "g.json"),
        "--budget", "1",
    )
    assert code == 1 and "BudgetExceeded" in err


def test_serialize_parse_round_trip_on_generated_samples(capsys, tmp_path):
    write_dataset(tmp_path, 20, 3)
    for line in (tmp_path / "samples.jsonl").read_text().splitlines():
        for d in json.loads(line)["descriptions"]:
            code, text, _ = run(capsys, "serialize", write(tmp_path / "one.json", d))
            assert code == 0
            code, out, _ = run(capsys, "parse", text.rstrip("\n"), "--id", d["id"])
            assert canonicalize(StructuredDescription.from_json(json.loads(out))) == canonicalize(
                StructuredDescription.from_json(d)
            )
            assert serialize(StructuredDescription.from_json(d)) == text.rstrip("\n")


def test_gen_twice_identical_digests(tmp_path):
    digests = []
    for name in ("a", "b"):
        subprocess.run(
            [sys.executable, "-m", "egosign", "gen", "--n", "100", "--seed", "7", "--out", str(tmp_path / name)],
            check=True, capture_output=True,
        )
        digests.append(hashlib.sha256((tmp_path / name / "samples.jsonl").read_bytes()).hexdigest())
    assert digests[0] == digests[1]
