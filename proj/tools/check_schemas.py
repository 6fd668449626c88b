#!/usr/bin/env python3
"""Validates shipped documents and fresh CLI output against schemas/."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--source", required=True, help="repository root")
    ap.add_argument("--cli", required=True, help="path to the constellation binary")
    args = ap.parse_args()
    root = pathlib.Path(args.source)

    schemas = {p.name: load(p) for p in (root / "schemas").glob("*.schema.json")}
    registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())

    def validator(name):
        cls = jsonschema.validators.validator_for(schemas[name])
        cls.check_schema(schemas[name])
        return cls(schemas[name], registry=registry)

    constellation = validator("constellation.v1.schema.json")
    script = validator("planner-script.v1.schema.json")
    report = validator("run-report.v1.schema.json")
    stats = validator("explore-stats.v1.schema.json")
    message = validator("aip-message.v1.schema.json")

    failures = []
    checked = 0

    def check(v, doc, where):
        nonlocal checked
        checked += 1
        for err in v.iter_errors(doc):
            failures.append(f"{where}: {'/'.join(map(str, err.absolute_path))}: {err.message}")

    scen_dir = root / "scenarios"
    check(constellation, load(scen_dir / "fig4.json"), "fig4.json")
    for s in sorted(scen_dir.glob("scenario*.json")):
        spec = load(s)
        check(constellation, load(scen_dir / spec["constellation"]), spec["constellation"])
        check(script, load(scen_dir / spec["planner_script"]), spec["planner_script"])
    for g in sorted((root / "tests" / "golden").glob("*.report.json")):
        check(report, load(g), g.name)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for mode in ("tla-mirror", "extended"):
            out = tmp / f"{mode}.json"
            subprocess.run([args.cli, "explore", "--mode", mode, "--report", str(out)],
                           check=True, stdout=subprocess.DEVNULL)
            check(stats, load(out), f"explore {mode}")
        for n in (1, 2, 3):
            rep, wire = tmp / f"r{n}.json", tmp / f"w{n}.jsonl"
            subprocess.run([args.cli, "run", "--scenario", str(n), "--seed", "0",
                            "--scenarios-dir", str(scen_dir), "--out", str(rep), "--wire", str(wire)],
                           stdout=subprocess.DEVNULL)
            check(report, load(rep), f"run {n} report")
            for i, line in enumerate(wire.read_text(encoding="utf-8").splitlines()):
                frame = json.loads(line)
                if "message" not in frame:
                    failures.append(f"run {n} frame {i}: {frame.get('undecodable')}")
                    continue
                check(message, frame["message"], f"run {n} frame {i}")

    for f in failures[:20]:
        print("FAIL", f)
    print(f"{checked} documents checked, {len(failures)} problems")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
