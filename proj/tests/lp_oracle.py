#!/usr/bin/env python3
"""Cross-check the exported MILP against an independent solver.

Each small instance below is solved twice: once by the bundled
branch-and-bound search (which must prove its optimum), and once by
scipy's milp on the LP text written by `export-model`.  The LP reader is
deliberately strict so that any drift in the export format fails here
rather than in a downstream tool.  Exits 77 (skip) when scipy is missing.

Usage: lp_oracle.py <ssdmgf-binary> <data-dir>
"""

import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import numpy as np
    from scipy import sparse
    from scipy.optimize import milp, Bounds, LinearConstraint
except ImportError:
    print("scipy unavailable, skipping the external solver cross-check")
    sys.exit(77)

REL_TOL = 1e-6


class LpFormatError(Exception):
    pass


def tokenize_number(tok):
    try:
        return float(tok)
    except ValueError:
        raise LpFormatError(f"expected a number, got {tok!r}")


def parse_terms(tokens, what):
    """Parse `+ c v + c v ...` and return {var: coef}."""
    terms = {}
    i = 0
    while i < len(tokens):
        sign = tokens[i]
        if sign not in ("+", "-"):
            raise LpFormatError(f"{what}: expected sign token, got {tokens[i]!r}")
        if i + 3 > len(tokens):
            raise LpFormatError(f"{what}: truncated term after {sign!r}")
        coef = tokenize_number(tokens[i + 1])
        var = tokens[i + 2]
        if var[0].isdigit() or var[0] in "+-.":
            raise LpFormatError(f"{what}: bad variable name {var!r}")
        if sign == "-":
            coef = -coef
        terms[var] = terms.get(var, 0.0) + coef
        i += 3
    return terms


def parse_lp(text):
    """Parse the exporter's LP dialect into (objective, rows, bounds, binaries, generals)."""
    sections = {"Maximize": [], "Subject To": [], "Bounds": [],
                "Binaries": [], "Generals": []}
    current = None
    for raw in text.splitlines():
        if raw.startswith("\\"):
            continue
        if not raw.strip():
            continue
        if raw in sections:
            current = raw
            continue
        if raw == "End":
            current = "End"
            continue
        if current is None or current == "End":
            raise LpFormatError(f"content outside any section: {raw!r}")
        sections[current].append(raw)

    if current != "End":
        raise LpFormatError("missing End marker")

    obj_lines = sections["Maximize"]
    if len(obj_lines) != 1:
        raise LpFormatError(f"expected one objective line, got {len(obj_lines)}")
    obj_tokens = obj_lines[0].split()
    if not obj_tokens or not obj_tokens[0].endswith(":"):
        raise LpFormatError("objective line must start with a label")
    objective = parse_terms(obj_tokens[1:], "objective")

    rows = []
    for line in sections["Subject To"]:
        tokens = line.split()
        if len(tokens) < 5 or not tokens[0].endswith(":"):
            raise LpFormatError(f"malformed row: {line!r}")
        name = tokens[0][:-1]
        op_at = None
        for j, tok in enumerate(tokens):
            if tok in ("<=", ">=", "="):
                op_at = j
        if op_at is None or op_at != len(tokens) - 2:
            raise LpFormatError(f"row {name}: operator must precede the rhs")
        terms = parse_terms(tokens[1:op_at], f"row {name}")
        rhs = tokenize_number(tokens[-1])
        rows.append((name, terms, tokens[op_at], rhs))

    bounds = {}
    for line in sections["Bounds"]:
        tokens = line.split()
        if len(tokens) != 5 or tokens[1] != "<=" or tokens[3] != "<=":
            raise LpFormatError(f"malformed bound: {line!r}")
        lo = tokenize_number(tokens[0])
        hi = tokenize_number(tokens[4])
        var = tokens[2]
        if var in bounds:
            raise LpFormatError(f"duplicate bound for {var}")
        bounds[var] = (lo, hi)

    binaries = [n for line in sections["Binaries"] for n in line.split()]
    generals = [n for line in sections["Generals"] for n in line.split()]
    return objective, rows, bounds, binaries, generals


def solve_lp(objective, rows, bounds, binaries, generals):
    order = {}
    for source in (objective, *(terms for _, terms, _, _ in rows)):
        for var in source:
            order.setdefault(var, len(order))
    for var in list(bounds) + binaries + generals:
        order.setdefault(var, len(order))
    n = len(order)

    c = np.zeros(n)
    for var, coef in objective.items():
        c[order[var]] = -coef  # milp minimizes

    data, ri, ci = [], [], []
    con_lo = np.empty(len(rows))
    con_hi = np.empty(len(rows))
    for r, (name, terms, op, rhs) in enumerate(rows):
        for var, coef in terms.items():
            data.append(coef)
            ri.append(r)
            ci.append(order[var])
        if op == "<=":
            con_lo[r], con_hi[r] = -np.inf, rhs
        elif op == ">=":
            con_lo[r], con_hi[r] = rhs, np.inf
        else:
            con_lo[r] = con_hi[r] = rhs
    a = sparse.csc_matrix((data, (ri, ci)), shape=(len(rows), n))

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for var in binaries:
        hi[order[var]] = 1.0
    for var, (vlo, vhi) in bounds.items():
        lo[order[var]] = vlo
        hi[order[var]] = vhi
    integrality = np.zeros(n)
    for var in binaries + generals:
        integrality[order[var]] = 1

    res = milp(c=c, constraints=LinearConstraint(a, con_lo, con_hi),
               bounds=Bounds(lo, hi), integrality=integrality)
    if res.status != 0:
        raise RuntimeError(f"external solver failed: status {res.status} {res.message}")
    return -res.fun


def run_cli(cli, args):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"{Path(cli).name} {' '.join(args)} exited {proc.returncode}\n"
            f"stdout: {proc.stdout}\nstderr: {proc.stderr}")
    return proc.stdout


def check_instance(cli, data_dir, work, tag, feeder, scenario, rules):
    sc_path = work / f"{tag}.scenario.json"
    sc_path.write_text(json.dumps(scenario, indent=2) + "\n")
    lp_path = work / f"{tag}.lp"
    plan_path = work / f"{tag}.plan.csv"
    stats_path = work / f"{tag}.stats.json"
    feeder_path = str(data_dir / feeder)

    run_cli(cli, ["export-model", "--feeder", feeder_path, "--scenario",
                  str(sc_path), "--rules", rules, "--out", str(lp_path)])
    run_cli(cli, ["solve", "--feeder", feeder_path, "--scenario", str(sc_path),
                  "--rules", rules, "--out", str(plan_path),
                  "--stats", str(stats_path),
                  "--budget-nodes", "2000000", "--budget-seconds", "120"])

    stats = json.loads(stats_path.read_text())
    if not stats["proven_optimal"]:
        raise RuntimeError(f"{tag}: search did not prove its optimum")
    engine = stats["best_objective"]

    manifest = json.loads((work / f"{tag}.plan.csv.manifest.json").read_text())
    if not math.isclose(manifest["objective"], engine, rel_tol=0, abs_tol=1e-9):
        raise RuntimeError(
            f"{tag}: manifest objective {manifest['objective']} "
            f"!= stats objective {engine}")

    external = solve_lp(*parse_lp(lp_path.read_text()))
    tol = REL_TOL * max(1.0, abs(engine))
    gap = abs(external - engine)
    print(f"  {tag:14s} engine {engine:.9f}  external {external:.9f}  gap {gap:.2e}")
    if gap > tol:
        raise RuntimeError(f"{tag}: objective gap {gap} exceeds {tol}")


def scenario(sid, season, t0, damaged, horizon):
    return {"id": sid, "season": season, "t0_hour": t0, "nu_minutes": 100000,
            "damaged_block": damaged, "horizon_steps": horizon,
            "dt_minutes": 15.0, "seed": 42}


def main():
    if len(sys.argv) != 3:
        print("usage: lp_oracle.py <ssdmgf-binary> <data-dir>", file=sys.stderr)
        return 2
    cli = sys.argv[1]
    data_dir = Path(sys.argv[2])

    cases = [
        ("chain_intact", "toy3.fdr", scenario("chain_intact", "summer", 10, -1, 4), "ssdmgf"),
        ("chain_damaged", "toy3.fdr", scenario("chain_damaged", "winter", 18, 2, 4), "ssdmgf"),
        ("chain_relaxed", "toy3.fdr", scenario("chain_relaxed", "summer", 10, -1, 3), "ndmgf"),
        ("pair_intact", "toy_census.fdr", scenario("pair_intact", "summer", 8, -1, 3), "ssdmgf"),
        ("pair_locked", "toy_census.fdr", scenario("pair_locked", "summer", 8, 1, 3), "rr"),
        ("single_block", "toy_one.fdr", scenario("single_block", "winter", 20, -1, 2), "ssdmgf"),
    ]

    with tempfile.TemporaryDirectory(prefix="lp_oracle_") as tmp:
        work = Path(tmp)
        for tag, feeder, sc, rules in cases:
            check_instance(cli, data_dir, work, tag, feeder, sc, rules)

    print(f"all {len(cases)} instances agree with the external solver")
    return 0


if __name__ == "__main__":
    sys.exit(main())
