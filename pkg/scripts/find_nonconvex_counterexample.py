#!/usr/bin/env python3
"""Randomized search for a stored regression instance: a one-dimensional
two-constraint family whose pointwise statement holds while no multiplier
certificate exists (the certificate search must return NONE).

Search procedure (seeded, reproducible):
  * draw quadratic f, g1, g2 with small rational coefficients, at least one
    of them nonconvex (otherwise a certificate is guaranteed for a single
    constraint under a strictly feasible point, and likely in general);
  * primal oracle: the feasible set {g1 <= 0, g2 <= 0} of one-variable
    quadratics is a finite union of intervals with closed-form endpoints;
    the minimum of f over it is attained at an endpoint or at the vertex of
    f, so "pointwise statement holds" is decided analytically (and double
    checked on a dense grid);
  * dual oracle: the smallest eigenvalue of the 2x2 homogenized Lagrangian
    is evaluated in closed form on the full multiplier grid
    [0, 10]^2, step 0.01; NONE is accepted only when the grid maximum is
    below -1e-2 (a robust refusal, not a borderline one).

The first hit is written to src/sproclab/instances/regression_nonconvex.json.

Usage: python3 scripts/find_nonconvex_counterexample.py [--seed N] [--out PATH]
"""

import argparse
import json
import math
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from sproclab.rockafellian import (  # noqa: E402
    ConstraintPerturbation,
    QuadraticFn,
    RobustInstance,
)

GRID = np.arange(0.0, 10.0 + 1e-9, 0.01)


def feasible_intervals(q, a, c):
    """Solution intervals of q x^2 + a x + c <= 0 over the reals."""
    if q == 0:
        if a == 0:
            return [(-math.inf, math.inf)] if c <= 0 else []
        root = -c / a
        return [(-math.inf, root)] if a > 0 else [(root, math.inf)]
    disc = a * a - 4 * q * c
    if q > 0:
        if disc < 0:
            return []
        r = math.sqrt(disc)
        return [((-a - r) / (2 * q), (-a + r) / (2 * q))]
    # concave: complement of the open root interval (or everything)
    if disc <= 0:
        return [(-math.inf, math.inf)]
    r = math.sqrt(disc)
    lo, hi = sorted([(-a - r) / (2 * q), (-a + r) / (2 * q)])
    return [(-math.inf, lo), (hi, math.inf)]


def intersect(iv1, iv2):
    out = []
    for a1, b1 in iv1:
        for a2, b2 in iv2:
            lo, hi = max(a1, a2), min(b1, b2)
            if lo <= hi:
                out.append((lo, hi))
    return out


def min_f_on(intervals, fq, fa, fc):
    """Exact minimum of a 1-D quadratic over a union of closed intervals
    (endpoints, the vertex when interior, and the unbounded directions)."""
    def val(x):
        return fq * x * x + fa * x + fc

    best = math.inf
    for lo, hi in intervals:
        if fq < 0 or (fq == 0 and fa != 0):
            if lo == -math.inf or hi == math.inf:
                return -math.inf
        if fq < 0:
            best = min(best, val(lo), val(hi))
            continue
        cands = []
        if lo != -math.inf:
            cands.append(lo)
        if hi != math.inf:
            cands.append(hi)
        if fq > 0:
            v = -fa / (2 * fq)
            if lo <= v <= hi:
                cands.append(v)
        elif fq == 0 and fa == 0:
            cands.append(0.0 if lo == -math.inf else lo)
        if not cands:  # whole line, constant or convex handled above
            cands.append(0.0)
        best = min(best, min(val(x) for x in cands))
    return best


def grid_psi_max(f, g1, g2):
    """Closed-form smallest eigenvalue of the homogenized Lagrangian over
    the dense multiplier grid; 2x2 case only."""
    l1, l2 = np.meshgrid(GRID, GRID, indexing="ij")
    q = f[0] + l1 * g1[0] + l2 * g2[0]
    a = f[1] + l1 * g1[1] + l2 * g2[1]
    c = f[2] + l1 * g1[2] + l2 * g2[2]
    tr = q + c
    det = q * c - (a / 2) ** 2
    disc = np.sqrt(np.maximum(tr * tr - 4 * det, 0.0))
    lam_min = (tr - disc) / 2
    return float(np.max(lam_min))


def search(seed):
    rng = np.random.default_rng(seed)
    for trial in range(100_000):
        f = tuple(round(float(v), 2) for v in rng.uniform(-2, 2, 3))
        g1 = tuple(round(float(v), 2) for v in rng.uniform(-2, 2, 3))
        g2 = tuple(round(float(v), 2) for v in rng.uniform(-2, 2, 3))
        if f[0] >= 0 and g1[0] >= 0 and g2[0] >= 0:
            continue  # fully convex draws cannot defeat the certificate
        feas = intersect(feasible_intervals(*g1), feasible_intervals(*g2))
        if not feas:
            continue  # vacuous pointwise statement is not interesting here
        fmin = min_f_on(feas, *f)
        if not (0.0 <= fmin):
            continue
        # dense-grid double check of the primal oracle
        xs = np.linspace(-50, 50, 200_001)
        ok = (g1[0] * xs * xs + g1[1] * xs + g1[2] <= 0) & \
             (g2[0] * xs * xs + g2[1] * xs + g2[2] <= 0)
        if np.any(ok):
            vals = f[0] * xs * xs + f[1] * xs + f[2]
            if float(np.min(vals[ok])) < -1e-9:
                continue
        psi = grid_psi_max(f, g1, g2)
        if psi <= -1e-2:
            return trial, f, g1, g2, fmin, psi
    raise SystemExit("no counterexample found in the trial budget")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240809)
    ap.add_argument("--out", default=str(
        pathlib.Path(__file__).resolve().parent.parent
        / "src" / "sproclab" / "instances" / "regression_nonconvex.json"))
    args = ap.parse_args()

    trial, f, g1, g2, fmin, psi = search(args.seed)
    inst = RobustInstance(1, 2, (ConstraintPerturbation(
        QuadraticFn.make([[f[0]]], [f[1]], f[2]),
        (QuadraticFn.make([[g1[0]]], [g1[1]], g1[2]),
         QuadraticFn.make([[g2[0]]], [g2[1]], g2[2]))),))
    path = pathlib.Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(inst.to_json(), sort_keys=True, indent=2) + "\n")
    print(f"seed={args.seed} trial={trial}")
    print(f"f  = {f}")
    print(f"g1 = {g1}")
    print(f"g2 = {g2}")
    print(f"primal minimum on feasible set: {fmin}")
    print(f"multiplier-grid eigenvalue maximum: {psi}")
    print(f"written: {path}")


if __name__ == "__main__":
    main()
