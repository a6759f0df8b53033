import json
import math
import os

import pytest

from tbdlab.cli import build_parser, dumps, main


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("cmd", ["bound", "verify", "simulate", "experiment"])
def test_help_lists_defaults(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main([cmd, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    assert "--seed" in text and "--parallelism" in text and "default:" in text


def test_bound_reports_value_and_exponent(capsys):
    code, out, _ = run_cli(["bound", "--formula", "tbdi", "--c", "1,1,1,1", "--t", "4"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["schema_version"] == 1 and rec["command"] == "bound"
    assert rec["exponent"] == pytest.approx(16 / (2 * 4))
    assert rec["value"] == pytest.approx(math.exp(-2))
    code, out, _ = run_cli(["bound", "--formula", "tbdi", "--c", "1,1,1,1", "--t", "4", "--two-valued"], capsys)
    assert json.loads(out)["exponent"] == pytest.approx(8.0)


def test_bound_with_output_prints_summary(tmp_path, capsys):
    path = tmp_path / "b.json"
    code, out, _ = run_cli(["bound", "--formula", "bdi", "--N", "10", "--c", "1", "--t", "3", "--output", str(path)], capsys)
    assert code == 0 and out.startswith("value ") and "exponent" in out
    assert json.loads(path.read_text())["N"] == 10


def test_verify_small_suite(capsys):
    code, out, _ = run_cli(["verify", "--suite", "product-spaces", "--instances", "20", "--seed", "7"], capsys)
    assert code == 0 and json.loads(out)["violations"] == 0


def test_errors_exit_2_with_distinct_messages(tmp_path, capsys):
    msgs = set()
    code, _, err = run_cli(["simulate", "--pattern", "K9"], capsys)
    assert code == 2
    msgs.add(err)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(["simulate", "--config", str(bad)], capsys)
    assert code == 2
    msgs.add(err)
    code, _, err = run_cli(["simulate", "--variant", "reverse_removal", "--n", "65"], capsys)
    assert code == 2
    msgs.add(err)
    code, _, err = run_cli(["simulate", "--pattern", str(tmp_path / "missing.txt")], capsys)
    assert code == 2
    msgs.add(err)
    assert len(msgs) == 4
    unknown = tmp_path / "unk.json"
    unknown.write_text('{"colour": 3}')
    assert main(["simulate", "--config", str(unknown)]) == 2
    assert main(["experiment", "reverse", "--trials", "0"]) == 2
    assert main(["simulate", "--parallelism", "0"]) == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 12, "replications": 3, "seed": 5}))
    code, out, _ = run_cli(["simulate", "--config", str(cfg), "--n", "10"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["n"] == 10 and rec["replications"] == 3
    assert rec["runs"][0]["seed"] == [5, 0]


def test_csv_and_plotdata(tmp_path, capsys):
    path = tmp_path / "r.csv"
    argv = ["experiment", "reverse", "--grid", "12,16,20", "--trials", "5", "--format", "csv", "--output", str(path)]
    assert main(argv) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "n,statistic,value" and len(lines) == 1 + 3 * 7
    sidecar = json.loads((tmp_path / "r.csv.json").read_text())
    assert set(sidecar["fit"]) >= {"slope", "intercept", "r2"}
    code, out, _ = run_cli(["simulate", "--n", "10", "--replications", "3", "--format", "plotdata"], capsys)
    assert code == 0 and out.startswith("# final_edges")
    assert all(len(ln.split()) == 2 for ln in out.splitlines() if ln and not ln.startswith("#"))
    code, out, _ = run_cli(["bound", "--c", "1", "--t", "1", "--format", "csv"], capsys)
    assert out.splitlines()[0] == "key,value"
    assert main(["bound", "--c", "1", "--t", "1", "--format", "plotdata"]) == 2


def test_output_is_atomic(tmp_path):
    path = tmp_path / "sub" / "out.json"
    assert main(["simulate", "--n", "8", "--output", str(path)]) == 0
    assert json.loads(path.read_text())["n"] == 8
    assert [f for f in os.listdir(path.parent) if f.startswith(".tmp-")] == []


def test_json_floats_round_trip():
    vals = [0.1, 1 / 3, 1e-300, 2.0 ** 60, -0.0]
    text = dumps({"x": vals, "y": {"z": 5e-324}})
    back = json.loads(text)
    assert back["x"] == vals and back["y"]["z"] == 5e-324


def test_parser_defaults_visible():
    ns = build_parser().parse_args(["experiment", "triangle"])
    assert ns.p_exponent == -0.55 and ns.eps == 0.1


@pytest.mark.parametrize("argv", [
    ["experiment", "triangle", "--n", "40", "--p", "0.2", "--trials", "60"],
    ["experiment", "coupling", "--n", "12", "--trials", "20", "--m", "30"],
    ["experiment", "lipschitz", "--n", "16", "--trials", "20", "--m", "60"],
    ["experiment", "equivalence", "--trials", "60"],
    ["simulate", "--variant", "forward_hfree", "--n", "20", "--replications", "9", "--accepted"],
])
def test_byte_identical_across_parallelism(argv, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--seed", "11", "--parallelism", "1", "--output", str(a)]) == 0
    assert main(argv + ["--seed", "11", "--parallelism", "2", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
