#!/usr/bin/env python3
"""Randomized validation sweep across the theorem validators.

Generates seeded instance families, runs the named validators on each, and
writes a JSON summary (counts per agreement outcome, any fatal reports, the
interesting gap instances).  This is the exploratory companion to the
acceptance suite: sizes and seeds are knobs here, pinned there.

Usage:
  python3 scripts/run_validation_suites.py [--n 40] [--seed 7] [--out report.json]
"""

import argparse
import json
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from sproclab.config import RunConfig                       # noqa: E402
from sproclab.procedures import validate_equivalence       # noqa: E402
from sproclab.randgen import (                             # noqa: E402
    random_convex_slater_instance,
    random_mixed_instance,
    random_polyhedral_instance,
    random_rhs,
)


def sweep(n, seed):
    rng = np.random.default_rng(seed)
    cfg = RunConfig(seed=seed)
    out = {"t2_1": [], "t3_1": [], "t4_1": [], "c2_1": []}
    gaps = []
    fatals = []
    for k in range(n):
        inst = random_polyhedral_instance(rng, max_dim=2, max_pieces=3,
                                          max_scenarios=3)
        rep = validate_equivalence(inst, "t2_1", cfg=cfg)
        out["t2_1"].append(rep.agreement)
        if rep.fatal:
            fatals.append({"theorem": "t2_1", "k": k})
        if rep.sides.get("hull_all") and not rep.sides.get("raw_sup"):
            gaps.append({"theorem": "t2_1", "k": k,
                         "instance": inst.to_json()})
    for k in range(n):
        inst = random_polyhedral_instance(rng, max_dim=2, max_pieces=3)
        rep = validate_equivalence(inst, "c2_1", cfg=cfg)
        out["c2_1"].append(rep.agreement)
        if rep.fatal:
            fatals.append({"theorem": "c2_1", "k": k})
    for k in range(max(4, n // 4)):
        inst = random_mixed_instance(rng, max_dim=2, max_scenarios=2)
        rep = validate_equivalence(inst, "t3_1", cfg=cfg)
        out["t3_1"].append(rep.agreement)
        if rep.fatal:
            fatals.append({"theorem": "t3_1", "k": k})
    for k in range(max(4, n // 4)):
        inst = random_convex_slater_instance(rng, dim=1)
        h = random_rhs(rng, 1, max_slopes=2)
        rep = validate_equivalence(inst, "t4_1", h=h, cfg=cfg)
        out["t4_1"].append(rep.agreement)
        if rep.fatal:
            fatals.append({"theorem": "t4_1", "k": k})

    def tally(vals):
        return {"agree": sum(1 for v in vals if v is True),
                "disagree": sum(1 for v in vals if v is False),
                "undecided": sum(1 for v in vals if v is None)}

    return {
        "seed": seed,
        "sizes": {k: len(v) for k, v in out.items()},
        "outcomes": {k: tally(v) for k, v in out.items()},
        "fatal_reports": fatals,
        "gap_instances": gaps[:5],
        "gap_count": len(gaps),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    t0 = time.time()
    summary = sweep(args.n, args.seed)
    summary["elapsed_s"] = round(time.time() - t0, 2)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        pathlib.Path(args.out).write_text(text + "\n")
        print(f"written: {args.out}")
    print(text)
    if summary["fatal_reports"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
