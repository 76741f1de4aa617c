"""Runs the CLI once per output kind and validates every JSON file against docs/schemas."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, schemas = sys.argv[1], pathlib.Path(sys.argv[2])


def schema(name):
    return json.loads((schemas / f"{name}.schema.json").read_text())


def check(doc, name):
    jsonschema.validate(doc, schema(name))


def run(*args):
    subprocess.run([cli, *args], check=True, stdout=subprocess.DEVNULL)


with tempfile.TemporaryDirectory() as tmp:
    out = pathlib.Path(tmp)
    run("simulate", "--n-true", "2", "--candidates", "1..4", "--trajectories", "3", "--seed", "1",
        "--out", str(out / "sim"))
    for line in (out / "sim" / "trajectories.jsonl").read_text().splitlines():
        check(json.loads(line), "trajectory-line")
    check(json.loads((out / "sim" / "summary.json").read_text()), "summary")

    record = {"entries": [{"tau_s": 1e-7, "outcome": "Rydberg"}, {"tau_s": 2e-7, "outcome": 0}],
              "params": {"omega": 1.57e7, "gamma": 0.0, "tau_eit": 0.0, "N": 10}}
    check(record, "record")
    (out / "record.json").write_text(json.dumps(record))
    cands = {"candidates": [[0, 1], {"p": [0, 0, 1]}], "prior": [0.5, 0.5]}
    check(cands, "candidates")
    (out / "cands.json").write_text(json.dumps(cands))
    run("infer", "--record", str(out / "record.json"), "--candidates-file", str(out / "cands.json"),
        "--out", str(out / "posterior.json"))
    check(json.loads((out / "posterior.json").read_text()), "posterior")

    cfg = {"n_true": 1, "trajectories": 2, "ejection": True, "candidates": [1, 2]}
    check(cfg, "config")

    run("oracle-check", "--cells", "2:1", "--out", str(out / "oracle.json"))
    check(json.loads((out / "oracle.json").read_text()), "oracle-report")

    run("analyze", "fisher", "--out", str(out / "a"))
    run("analyze", "detection-time", "--out", str(out / "a"))
    run("analyze", "steady-state", "--n", "5", "--out", str(out / "a"))
    run("analyze", "optimize-schedule", "--toy", "two-candidate", "--grid-points", "200", "--out", str(out / "a"))
    for f in sorted((out / "a").glob("*.json")):
        check(json.loads(f.read_text()), "analysis")

print("all outputs match their schemas")
