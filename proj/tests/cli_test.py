#!/usr/bin/env python3
"""End-to-end checks of the icncache command line.

    cli_test.py PATH_TO_ICNCACHE
"""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

BIN = str(pathlib.Path(sys.argv[1]).resolve())
failures = []


def run(args, cwd):
    return subprocess.run([BIN, *args], cwd=cwd, capture_output=True, text=True)


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
    if not ok:
        failures.append(name)


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)

    # Uniform hit curve from a config: theta = c at every point.
    cfg = write_json(tmp / "uniform.json", {
        "analysis": "hitcurve",
        "law": {"kind": "zipf", "exponent": 0, "catalogue": 4},
        "sweep": {"c": [0.25, 0.5, 0.75, 1.0]},
        "output": {"data": "uniform", "summary": "uniform-summary.json"},
    })
    r = run(["--config", cfg, "--out", str(tmp / "u"), "sweep"], tmp)
    check("sweep exits 0", r.returncode == 0, r.stderr.strip())
    if r.returncode == 0:
        data = rows(tmp / "u" / "uniform.csv")
        worst = max(abs(float(d["theta"]) - float(d["c"])) for d in data)
        check("uniform theta = c", len(data) == 4 and worst < 1e-10, f"max gap {worst:.2e}")
        summary = json.loads((tmp / "u" / "uniform-summary.json").read_text())
        check("summary written", summary.get("analysis") == "hitcurve")

    # Unknown key -> exit 2.
    bad = write_json(tmp / "bad.json", {
        "analysis": "hitcurve", "lawz": {}, "sweep": {"c": [0.1]}})
    r = run(["--config", bad, "--out", str(tmp / "b"), "sweep"], tmp)
    check("unknown config key exits 2", r.returncode == 2, f"got {r.returncode}")

    r = run(["--config", str(tmp / "missing.json"), "sweep"], tmp)
    check("missing config exits 2", r.returncode == 2, f"got {r.returncode}")

    r = run(["--bogus-flag", "hitcurve"], tmp)
    check("unknown flag exits 2", r.returncode == 2, f"got {r.returncode}")

    # Tradeoff sweep past the overall target -> exit 3.
    infeasible = write_json(tmp / "infeasible.json", {
        "analysis": "tradeoff",
        "law": {"kind": "zipf", "exponent": 0.8, "catalogue": 10000},
        "cost": {"overall_target": 0.5},
        "sweep": {"c": {"from": 0.001, "to": 1.0, "points": 8, "spacing": "log"}},
    })
    r = run(["--config", infeasible, "--out", str(tmp / "i"), "sweep"], tmp)
    check("infeasible target exits 3", r.returncode == 3, f"got {r.returncode}")

    # Byte-identical reruns, independent of thread count.
    sim_cfg = write_json(tmp / "sim.json", {
        "analysis": "hitcurve",
        "law": {"kind": "zipf", "exponent": 0.8, "catalogue": 5000},
        "sweep": {"c": [0.01, 0.05, 0.2]},
        "simulation": {"enabled": True, "requests": 50000, "batches": 5},
        "seed": 9,
    })
    outs = []
    for threads in ("1", "3"):
        d = tmp / f"rep{threads}"
        r = run(["--config", sim_cfg, "--out", str(d), "--threads", threads, "sweep"], tmp)
        outs.append((d / "result.csv").read_bytes() if r.returncode == 0 else None)
    check("byte-identical CSV across runs", outs[0] is not None and outs[0] == outs[1])

    # Figure preset: deltacost endpoints.
    r = run(["--out", str(tmp / "f"), "reproduce", "figure=deltacost"], tmp)
    check("reproduce deltacost exits 0", r.returncode == 0, r.stderr.strip())
    if r.returncode == 0:
        curves = json.loads((tmp / "f" / "deltacost.json").read_text())["curves"]
        nominal = curves["nominal"]
        c0, cn = nominal["cost_at_zero"], nominal["cost_at_catalogue"]
        check("deltacost Delta(0) = $15M +-1%", abs(c0 / 15e6 - 1) <= 0.01, f"{c0:.6g}")
        check("deltacost Delta(N) = $24M +-2%", abs(cn / 24e6 - 1) <= 0.02, f"{cn:.6g}")
        check("deltacost has three curves",
              sorted(curves) == ["kb_div10", "kb_x10", "nominal"])
        header = rows(tmp / "f" / "deltacost.csv")[0].keys()
        check("deltacost columns", "cost_kb_x10" in header and "cost_kb_div10" in header)

    r = run(["reproduce", "figure=nope"], tmp)
    check("unknown figure exits 2", r.returncode == 2, f"got {r.returncode}")

    # Tradeoff subcommand on the nominal scenario.
    r = run(["--out", str(tmp / "t"), "tradeoff"], tmp)
    check("tradeoff exits 0", r.returncode == 0, r.stderr.strip())
    if r.returncode == 0:
        opt = json.loads((tmp / "t" / "tradeoff.json").read_text())["optimum"]
        check("tradeoff optimum interior", opt["kind"] == "interior", opt["kind"])

    # Popularity export round-trips through --law-file.
    r = run(["--out", str(tmp / "p"), "popularity", "--law", "empirical",
             "--catalogue", "1600000"], tmp)
    check("popularity exits 0", r.returncode == 0, r.stderr.strip())
    if r.returncode == 0:
        r2 = run(["--out", str(tmp / "p2"), "popularity", "--law", "file", "--law-file",
                  str(tmp / "p" / "law.csv")], tmp)
        same = r2.returncode == 0 and \
            (tmp / "p" / "law.csv").read_bytes() == (tmp / "p2" / "law.csv").read_bytes()
        check("law export round-trips", same)

    # Simulation subcommand.
    r = run(["--out", str(tmp / "s"), "simulate", "--law", "zipf", "--catalogue", "1000",
             "--policy", "lru", "--cache-size", "100", "--requests", "100000"], tmp)
    check("simulate exits 0", r.returncode == 0, r.stderr.strip())
    r = run(["simulate", "--law", "zipf", "--catalogue", "20000000", "--policy", "lru",
             "--cache-size", "100", "--requests", "1000"], tmp)
    check("oversized simulation exits 3", r.returncode == 3, f"got {r.returncode}")

    # Validation harness.
    r = run(["--out", str(tmp / "v"), "validate", "interaid", "--requests", "2000000"], tmp)
    check("validate interaid passes", r.returncode == 0, r.stderr.strip())
    if (tmp / "v" / "validate-interaid.json").exists():
        rep = json.loads((tmp / "v" / "validate-interaid.json").read_text())
        gap = rep["interaid"]["max_gap"]
        check("interaid max gap <= 0.02", gap <= 0.02, f"{gap:.4f}")

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
