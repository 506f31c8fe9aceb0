import json

import pytest

from stablefixtures.cli import main
from stablefixtures.instance import generate, instance_to_json


@pytest.fixture
def diamond_file(tmp_path):
    path = tmp_path / "diamond.json"
    path.write_text(json.dumps(instance_to_json(generate("diamond").instance)))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_solve_diamond_exit3(capsys, diamond_file):
    code, data = run(capsys, "solve", diamond_file)
    assert code == 3
    assert data["status"] == "no_stable"
    assert data["half_b_matching_weight"] == "7/2"
    witness_total = sum(
        1 if item["value"] == "1" else 0.5 for item in data["witness"]
    )
    assert witness_total == 3.5


def test_solve_stable_exit0(capsys, tmp_path):
    path = tmp_path / "ex2.json"
    path.write_text(json.dumps(instance_to_json(generate("example2").instance)))
    code, data = run(capsys, "solve", str(path))
    assert code == 0
    assert data["status"] == "stable"
    assert data["b_matching_weight"] == "16"
    assert {"u", "v", "p_uv", "p_vu"} <= set(data["solution"]["payoffs"][0])


def test_core_check_in_core(capsys, tmp_path, diamond_file):
    alloc = tmp_path / "alloc.json"
    alloc.write_text(json.dumps({"allocation": {"s1": "1", "s2": "1", "s3": "1", "u": "0"}}))
    code, data = run(capsys, "core-check", diamond_file, str(alloc))
    assert code == 0 and data["verdict"] == "in_core"
    code, data = run(capsys, "core-check", diamond_file, str(alloc), "--brute-force")
    assert code == 0 and data["verdict"] == "in_core"


def test_core_check_violation_round_trips(capsys, tmp_path):
    gen = generate("example4", alpha=2)
    inst_path = tmp_path / "ex4.json"
    inst_path.write_text(json.dumps(instance_to_json(gen.instance)))
    alloc_path = tmp_path / "x.json"
    alloc_path.write_text(
        json.dumps({"allocation": {p: f"{q.numerator}/{q.denominator}" for p, q in gen.allocation.items()}})
    )
    code, data = run(capsys, "core-check", str(inst_path), str(alloc_path))
    assert code == 3
    assert data["verdict"] == "violation"
    assert data["deficit"] == "1/3"
    assert len(data["witness_matching"]) == 3


def test_core_check_b3_needs_brute_force(capsys, tmp_path):
    gen = generate("example4", alpha=3)
    inst_path = tmp_path / "ex4b3.json"
    inst_path.write_text(json.dumps(instance_to_json(gen.instance)))
    alloc_path = tmp_path / "x.json"
    alloc_path.write_text(
        json.dumps({"allocation": {p: str(q) for p, q in gen.allocation.items()}})
    )
    code = main(["core-check", str(inst_path), str(alloc_path)])
    assert code == 2
    code = main(["core-check", str(inst_path), str(alloc_path), "--brute-force"])
    assert code == 3  # the companion allocation is violated


def test_verify_stable(capsys, tmp_path):
    inst = generate("example3").instance
    inst_path = tmp_path / "ex3.json"
    inst_path.write_text(json.dumps(instance_to_json(inst)))
    sol_path = tmp_path / "sol.json"
    sol_path.write_text(
        json.dumps(
            {
                "matching": [{"u": "v1", "v": "v2"}, {"u": "v3", "v": "v4"}],
                "payoffs": [
                    {"u": "v1", "v": "v2", "p_uv": "3/2", "p_vu": "3/2"},
                    {"u": "v3", "v": "v4", "p_uv": "1/2", "p_vu": "1/2"},
                ],
            }
        )
    )
    code, data = run(capsys, "verify-stable", str(inst_path), str(sol_path))
    assert code == 0
    assert data["stable"] is True
    assert data["utilities"]["v1"] == "3/2"


def test_verify_unstable_exit3(capsys, tmp_path):
    inst = generate("triangle").instance
    inst_path = tmp_path / "tri.json"
    inst_path.write_text(json.dumps(instance_to_json(inst)))
    sol_path = tmp_path / "sol.json"
    sol_path.write_text(
        json.dumps(
            {
                "matching": [{"u": "a", "v": "b"}],
                "payoffs": [{"u": "a", "v": "b", "p_uv": "1/2", "p_vu": "1/2"}],
            }
        )
    )
    code, data = run(capsys, "verify-stable", str(inst_path), str(sol_path))
    assert code == 3
    assert len(data["blocking_pairs"]) == 2


def test_reduce_outputs_provenance(capsys, diamond_file):
    code, data = run(capsys, "reduce", diamond_file)
    assert code == 0
    kinds = {entry["kind"] for entry in data["provenance"].values()}
    assert kinds == {"copy", "inner", "outer"}
    assert len(data["instance"]["players"]) == 7 + 4 * 5


def test_value_subcommand(capsys, diamond_file):
    code, data = run(capsys, "value", diamond_file, "--coalition", "s1,s2,s3")
    assert code == 0
    assert data["value"] == "3"
    assert len(data["witness_matching"]) == 3


def test_gen_example4(capsys):
    code, data = run(capsys, "gen", "--family", "example4", "--alpha", "2")
    assert code == 0
    assert len(data["players"]) == 6
    assert data["allocation"]["s1"] == "4/3"


def test_gen_output_feeds_other_commands(capsys, tmp_path):
    code, data = run(capsys, "gen", "--family", "example4", "--alpha", "2")
    path = tmp_path / "gen.json"
    path.write_text(json.dumps(data))
    code, _ = run(capsys, "solve", str(path))
    assert code == 3  # empty core family has no stable solution either
    code, verdict = run(capsys, "core-check", str(path), str(path))
    assert code == 3 and verdict["verdict"] == "violation"


def test_gen_unknown_family_exit1(capsys):
    assert main(["gen", "--family", "bogus"]) == 1


def test_malformed_json_exit1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == 1


def test_invalid_instance_exit2(tmp_path):
    bad = tmp_path / "loop.json"
    bad.write_text(
        json.dumps(
            {
                "players": ["a"],
                "capacity": {"a": 1},
                "edges": [{"u": "a", "v": "a", "w": "1"}],
            }
        )
    )
    assert main(["solve", str(bad)]) == 2


def test_oracle_commands(capsys, diamond_file, tmp_path):
    code, data = run(capsys, "oracle", "b-matching", diamond_file)
    assert code == 0 and data["weight"] == "3"
    code, data = run(capsys, "oracle", "half", diamond_file)
    assert code == 0 and data["weight"] == "7/2"
    code, data = run(capsys, "oracle", "selftest", "--count", "5", "--seed", "3")
    assert code == 0 and data["selftest"] == "ok"


def test_outputs_render_rationals_as_fractions(capsys, diamond_file):
    code, data = run(capsys, "solve", diamond_file)
    text = json.dumps(data)
    assert "." not in text.replace(".json", "")  # no decimal literals
