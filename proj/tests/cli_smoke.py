"""Runs the command-line tool on the sample problems, checks exit codes and
validates every JSON output against the schemas."""

import json
import pathlib
import subprocess
import sys

import jsonschema

exe, data, schemas, out = (pathlib.Path(a) for a in sys.argv[1:5])


def schema(name):
    s = json.loads((schemas / f"{name}.json").read_text())
    jsonschema.Draft202012Validator.check_schema(s)
    return jsonschema.Draft202012Validator(s)


failures = []


def run(args, rc, name, stdin=None):
    p = subprocess.run([str(exe), *args], capture_output=True, text=True, input=stdin)
    label = " ".join(args)
    if p.returncode != rc:
        failures.append(f"{label}: exit {p.returncode}, expected {rc}\n{p.stderr}")
        return None
    text = p.stdout if rc in (0, 1) else p.stderr
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        failures.append(f"{label}: output is not JSON ({e})")
        return None
    errors = sorted(schema(name).iter_errors(doc), key=str)
    if errors:
        failures.append(f"{label}: schema {name}: {errors[0].message}")
    return doc


problem = schema("problem")
for f in sorted(data.glob("*.json")):
    for e in problem.iter_errors(json.loads(f.read_text())):
        failures.append(f"{f.name}: {e.message}")

d = lambda n: str(data / n)

t = run(["tile", "check", d("dragon.json")], 0, "tile_check")
if t and not (t["is_tile"] and t["layers_histogram"]["dominant"] == 1):
    failures.append("Dragon check: not a one-layer tile")
t = run(["tile", "check", d("interval_0_3.json")], 1, "tile_check")
if t and t["layers_histogram"]["dominant"] != 3:
    failures.append("{0,3}: dominant layer count is not 3")
run(["tile", "check", d("box_322.json")], 0, "tile_check")
run(["tile", "measure", d("dragon.json")], 0, "measure_bound")
run(["tile", "measure", d("sierpinski_like.json")], 0, "measure_bound")
run(["tile", "check", "-"], 0, "tile_check", stdin=(data / "rectangle.json").read_text())

r = run(["box", "detect", d("rectangle.json")], 0, "box_detect")
if r and not r["is_box"]:
    failures.append("rectangle not detected as a box")
run(["box", "detect", d("dragon.json")], 1, "box_detect")
b = run(["box", "build", "-p", "3,2,2", "--sign", "+"], 0, "box_build")
if b and b["digit_count"] != 12:
    failures.append("box (3,2,2,+) does not have 12 digits")
run(["box", "digits", "-p", "1,1,2", "--sign", "-"], 0, "box_digits")

run(["haar", "build", d("dragon.json")], 0, "haar_system")
g = run(["haar", "gram", d("box_322.json")], 0, "gram")
if g and g["method"] != "exact":
    failures.append("box tile Gram matrix is not exact")
run(["haar", "gram", d("dragon.json"), "--raster", "-K", "12", "-r", "32"], 0, "gram")

o = run(["oned", "oracle", d("oned_example.json")], 0, "tiling_result")
if o and (o["n"], o["shifts"]) != (36, [0, 1, 2, 9, 10, 11]):
    failures.append("1-D example: wrong tiling")
run(["oned", "oracle", "0,1,3"], 1, "tiling_result")
c = run(["oned", "classify", "0,3,6,18,21,24"], 0, "classification")
if c and c["progressions"] != [{"a": 3, "d": 3}, {"a": 18, "d": 2}]:
    failures.append("1-D example: wrong progressions")
run(["oned", "classify", "0,1,3"], 1, "classification")
e = run(["oned", "enumerate", "12"], 0, "enumeration")
run(["oned", "lset", "0,1,2,9,10,11", "--block", "3"], 0, "lset")
run(["oned", "lset", "0,1,2,9,10,11", "--block", "2"], 1, "lset")

# product of two disconnected 1-D attractors: the attractor and its tiling
p = subprocess.run([str(exe), "product", d("product_x.json"), d("product_y.json"), "--with-translates"],
                   capture_output=True, text=True)
if p.returncode != 0:
    failures.append(f"product: exit {p.returncode}\n{p.stderr}")
else:
    spec = json.loads(p.stdout)
    for e in problem.iter_errors(spec):
        failures.append(f"product output: {e.message}")
    if len(spec.get("translates", [])) != 24:
        failures.append("product: expected 24 translates")
    tiled = spec.copy()
    single = {k: v for k, v in spec.items() if k != "translates"}
    img = run(["tile", "render", json.dumps(single), "-K", "2", "-r", "8", "--out", str(out / "product_attractor_cli.ppm")],
              0, "render")
    if img and img["covered_pixels"] != 24 * 64:
        failures.append("product attractor image has the wrong area")
    img = run(["tile", "render", json.dumps(tiled), "-K", "2", "-r", "8", "--out", str(out / "product_tiling_cli.ppm")],
              0, "render")
    if img and img["covered_pixels"] != img["width"] * img["height"]:
        failures.append("product tiling leaves holes")
run(["tile", "render", d("dragon.json"), "--tiling", "0:1", "-K", "14", "-r", "64", "--out", str(out / "dragon_tiling.ppm")],
    0, "render")

# input errors and resource caps
run(["tile", "check", "{"], 2, "error")
run(["tile", "check", '{"kind":"attractor","matrix":[[1,0],[0,2]],"digits":[[0,0],[0,1]]}'], 2, "error")
run(["tile", "check", str(data / "missing.json")], 2, "error")
run(["oned", "oracle", "1,2"], 2, "error")
run(["box", "build", "-p", "1,1", "--sign", "+"], 2, "error")
p = subprocess.run([str(exe), "tile", "check", "--bogus"], capture_output=True, text=True)
if p.returncode != 2:
    failures.append(f"unknown option: exit {p.returncode}, expected 2")
p = subprocess.run([str(exe), "tile", "render", d("dragon.json"), "-K", "20", "--out", str(out / "x.ppm")],
                   capture_output=True, text=True, env={"TILEFORGE_MAX_CELLS": "1000"})
if p.returncode != 3:
    failures.append(f"resource cap: exit {p.returncode}, expected 3")

for f in failures:
    print("FAIL", f)
print("cli smoke:", "ok" if not failures else f"{len(failures)} failures")
sys.exit(1 if failures else 0)
