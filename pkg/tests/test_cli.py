import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from crnmono import NetworkDocument, serialize
from crnmono.cli import run
from conftest import FIXTURES, random_network

REPORT_SCHEMA = {
    "type": "object",
    "required": ["input", "output", "verdict", "sign_product", "disconnected", "sigma", "certificate", "rule_of_two_violations"],
    "additionalProperties": False,
    "properties": {
        "input": {"type": "string"},
        "output": {"type": "string"},
        "verdict": {"enum": ["PositivelyMonotonic", "NegativelyMonotonic", "Inconclusive"]},
        "sign_product": {"enum": [1, -1, None]},
        "disconnected": {"type": "boolean"},
        "sigma": {"oneOf": [{"type": "null"}, {"type": "object", "additionalProperties": {"enum": [1, -1]}}]},
        "certificate": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["type", "negative_edges", "edges"],
                    "properties": {
                        "type": {"const": "odd_negative_cycle"},
                        "negative_edges": {"type": "integer", "minimum": 1},
                        "edges": {
                            "type": "array",
                            "minItems": 2,
                            "items": {
                                "type": "object",
                                "required": ["from", "to", "sign", "witnesses"],
                                "properties": {
                                    "from": {"type": "string"},
                                    "to": {"type": "string"},
                                    "sign": {"enum": [1, -1]},
                                    "witnesses": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                                },
                            },
                        },
                    },
                },
            ]
        },
        "rule_of_two_violations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["species", "n"],
                "properties": {"species": {"type": "string"}, "n": {"type": "integer", "minimum": 3}},
            },
        },
    },
}


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return FIXTURES / f"{name}.crn"


def test_analyze_michaelis():
    code, out, err = cli("analyze", fx("michaelis"))
    assert code == 0
    assert "verdict: PositivelyMonotonic" in out
    assert "sigma(R_IN)*sigma(R_OUT) = +1" in out
    assert "  R_OUT\t+1" in out
    assert err == ""


def test_analyze_erk_and_consumption():
    code, out, _ = cli("analyze", fx("erk"))
    assert code == 0 and "PositivelyMonotonic" in out
    code, out, _ = cli("analyze", fx("consumption"))
    assert code == 0
    assert "NegativelyMonotonic" in out and "sigma(R_IN)*sigma(R_OUT) = -1" in out


def test_analyze_competing():
    code, out, _ = cli("analyze", fx("competing"))
    assert code == 1
    assert "verdict: Inconclusive" in out
    assert "odd-negative cycle (1 negative edge(s)):" in out
    assert "R1 -- R2  [+]  via B" in out and "R2 -- R1  [-]  via A" in out
    assert "rule of 2 fails at A: n = 3" in out


def test_analyze_flags_override_file(tmp_path):
    code, out, _ = cli("analyze", fx("michaelis"), "--input", "E", "--output", "S")
    assert "input: E\noutput: S\n" in out
    assert code in (0, 1)


def test_analyze_usage_errors(tmp_path):
    assert cli("analyze", fx("rule2_fail"))[0] == 2  # no io lines
    assert cli("analyze", fx("michaelis"), "--input", "Q")[0] == 2
    assert cli("analyze", fx("michaelis"), "--input", "P")[0] == 2  # equals output
    assert cli("analyze", tmp_path / "missing.crn")[0] == 2
    assert cli("frobnicate")[0] == 2
    assert cli()[0] == 2


def test_parse_error_has_span(tmp_path):
    bad = tmp_path / "bad.crn"
    bad.write_text("A -> B @ 1\nA -> B @ 1, 2\n")
    code, out, err = cli("analyze", bad)
    assert code == 2 and out == ""
    assert f"{bad}:2:" in err and "irreversible" in err


def test_analyze_json():
    code, out, _ = cli("analyze", fx("michaelis"), "--json")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["verdict"] == "PositivelyMonotonic" and rep["sign_product"] == 1
    assert rep["sigma"] == {"R1": 1, "R2": 1, "R_IN": 1, "R_OUT": 1}
    code, out, _ = cli("analyze", fx("competing"), "--json")
    rep = json.loads(out)
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert code == 1 and rep["certificate"]["negative_edges"] == 1
    assert rep["rule_of_two_violations"] == [{"species": "A", "n": 3}]


def test_json_matches_text_on_generated_files(tmp_path, rng):
    for idx in range(50):
        net = random_network(rng)
        i, o = rng.choice(net.n_species, 2, replace=False)
        names = net.species_names
        path = tmp_path / f"net{idx}.crn"
        path.write_text(serialize(NetworkDocument(net, names[i], names[o])))
        code_j, out_j, _ = cli("analyze", path, "--json")
        code_t, out_t, _ = cli("analyze", path)
        rep = json.loads(out_j)
        jsonschema.validate(rep, REPORT_SCHEMA)
        assert f"verdict: {rep['verdict']}\n" in out_t
        assert code_j == code_t == (1 if rep["verdict"] == "Inconclusive" else 0)
        if rep["sign_product"] is not None:
            sign = "+1" if rep["sign_product"] > 0 else "-1"
            assert f"sigma(R_IN)*sigma(R_OUT) = {sign}" in out_t


def test_graph_r():
    code, out, _ = cli("graph", fx("michaelis"), "--kind", "r")
    assert code == 0
    edges = [l for l in out.splitlines() if " -- " in l]
    assert len(edges) == 1 and 'label="+"' in edges[0]


def test_graph_sr_and_augment():
    code, out, _ = cli("graph", fx("michaelis"), "--kind", "sr", "--format", "dot")
    assert code == 0 and '"S" -> "R1"' in out and '"P" -> "R2"' not in out
    code, out, _ = cli("graph", fx("michaelis"), "--kind", "r", "--augment")
    assert code == 0
    labels = [l for l in out.splitlines() if "xlabel" in l]
    assert len(labels) == 4 and all('xlabel="+1"' in l for l in labels)
    code, out, _ = cli("graph", fx("michaelis"), "--kind", "sr", "--augment")
    assert '"P" -> "R_OUT"' in out and '"R_IN" -> "S"' in out


def test_graph_bad_kind():
    assert cli("graph", fx("michaelis"), "--kind", "x")[0] == 2


def test_simulate(tmp_path):
    code, out, err = cli("simulate", fx("linear"), "--t-end", "20")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "time,A,B" and len(lines) == 1002
    assert "steady state: converged" in err
    target = tmp_path / "traj.csv"
    code, out, _ = cli("simulate", fx("linear"), "--t-end", "20", "--out", target)
    assert code == 0 and out == "" and target.read_text().splitlines()[0] == "time,A,B"
    assert cli("simulate", fx("linear"), "--t-end", "-1")[0] == 2


def test_sweep(tmp_path):
    code, out, err = cli("sweep", fx("linear"), "--input", "A", "--output", "B", "--from", "1", "--to", "3", "--points", "3", "--t-end", "30", "--empirical")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "input_value,output_ss,converged"
    assert [l.split(",")[0] for l in lines[1:]] == ["1", "2", "3"]
    assert all(l.endswith(",true") for l in lines[1:])
    assert "empirical: ConsistentPositive" in err
    code, out, _ = cli("sweep", fx("linear"), "--from", "1", "--to", "100", "--points", "3", "--log", "--input", "A", "--output", "B", "--t-end", "30")
    assert [float(l.split(",")[0]) for l in out.splitlines()[1:]] == pytest.approx([1, 10, 100])
    assert cli("sweep", fx("linear"), "--input", "A", "--output", "B", "--from", "0", "--to", "1", "--points", "3", "--log")[0] == 2
    assert cli("sweep", fx("linear"), "--input", "A", "--output", "B", "--from", "2", "--to", "1", "--points", "3")[0] == 2
    assert cli("sweep", fx("linear"), "--input", "A", "--output", "B", "--from", "1", "--to", "2")[0] == 2


def test_sweep_numeric_failure(tmp_path):
    path = tmp_path / "huge.crn"
    path.write_text("2 A -> B @ 1e100\ninput A\noutput B\n")
    code, _, err = cli("sweep", path, "--from", "1e200", "--to", "2e200", "--points", "2")
    assert code == 3 and "non-finite" in err


def test_simulate_numeric_failure(tmp_path):
    path = tmp_path / "huge.crn"
    path.write_text("2 A -> B @ 1e100\ninit A = 1e200\n")
    code, _, err = cli("simulate", path)
    assert code == 3 and "non-finite" in err


def test_oracle():
    code, out, _ = cli("oracle", fx("michaelis"))
    assert code == 0
    assert out == (
        "network: fast=labeling brute_force=labeling agree=yes\n"
        "augmented: fast=labeling brute_force=labeling agree=yes\n"
    )
    code, out, _ = cli("oracle", fx("competing"))
    assert code == 0 and "fast=odd cycle brute_force=none agree=yes" in out
    code, out, _ = cli("oracle", fx("rule2_fail"))
    assert code == 0 and out.count("\n") == 1


def test_deterministic_stdout():
    for argv in (("analyze", fx("competing")), ("graph", fx("erk"), "--kind", "r", "--augment"), ("analyze", fx("erk"), "--json")):
        outs = {cli(*argv)[1] for _ in range(3)}
        assert len(outs) == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "crnmono", "analyze", str(fx("michaelis"))], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "PositivelyMonotonic" in proc.stdout
