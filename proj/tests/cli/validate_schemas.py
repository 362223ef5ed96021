#!/usr/bin/env python3
"""Validates sample specs and generated reports against schemas/."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

root = pathlib.Path(sys.argv[2])
divweb = sys.argv[1]
schemas = {n: json.loads((root / "schemas" / f"{n}.schema.json").read_text())
           for n in ("webspec", "tensor", "boundary", "report")}
for s in schemas.values():
    jsonschema.Draft7Validator.check_schema(s)

failures = 0


def check(kind, doc, label):
    global failures
    errors = sorted(jsonschema.Draft7Validator(schemas[kind]).iter_errors(doc), key=str)
    if errors:
        failures += 1
        print(f"FAIL {label}: {errors[0].message} at {list(errors[0].absolute_path)}")
    else:
        print(f"ok   {label}")


specs = root / "specs"
for path in sorted(specs.glob("*.json")):
    doc = json.loads(path.read_text())
    kind = "tensor" if path.name.startswith("tensor_") else "boundary" if path.name.startswith("boundary_") else "webspec"
    check(kind, doc, path.name)

runs = [
    ["curvature", "one_plus_xy.json", "--at", "0.1", "0.2"],
    ["trivial", "schwarzschild.json"],
    ["trivial", "separable.json", "--table", "4"],
    ["trivial", "lemaitre.json"],
    ["holonomy", "one_plus_xy.json", "--point", "0.2", "0.3", "--fit-scales", "0.1", "0.05"],
    ["reconstruct", "tensor_exy.json", "boundary_unit.json", "--grid", "5"],
    ["reconstruct", "tensor_incompatible.json", "boundary_3d.json"],
    ["normalize", "separable.json"],
    ["invariants", "canonical.json"],
    ["volumes", "one_plus_xy.json", "--lo", "0", "--lo", "0", "--hi", "0.2", "--hi", "0.2"],
    ["spacetime", "lemaitre", "--param", "m=1"],
]
with tempfile.TemporaryDirectory() as tmp:
    for k, args in enumerate(runs):
        argv = [divweb] + [str(specs / a) if a.endswith(".json") else a for a in args]
        out = pathlib.Path(tmp) / f"r{k}.json"
        proc = subprocess.run(argv + ["--out", str(out)], capture_output=True, text=True)
        if proc.returncode not in (0, 1) or not out.exists():
            failures += 1
            print(f"FAIL {' '.join(args)}: exit {proc.returncode} {proc.stderr.strip()}")
            continue
        check("report", json.loads(out.read_text()), " ".join(args))
    svg = pathlib.Path(tmp) / "p.svg"
    out = pathlib.Path(tmp) / "p.json"
    proc = subprocess.run([divweb, "plot", str(specs / "one_plus_xy.json"), "--what", "leaves",
                           "--svg", str(svg), "--out", str(out)], capture_output=True, text=True)
    if proc.returncode != 0:
        failures += 1
        print(f"FAIL plot: exit {proc.returncode} {proc.stderr.strip()}")
    else:
        check("report", json.loads(out.read_text()), "plot leaves")

sys.exit(1 if failures else 0)
