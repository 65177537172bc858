"""Iterative searches shared by the geometric and procedural checkers.

Two searches live here:

* ``certify_scenario``: projected supergradient ascent on the concave map
  lambda -> smallest eigenvalue of the homogenized Lagrangian matrix.  The
  matrix family is affine in lambda, so its minimum eigenvalue is concave
  and a supergradient at lambda is v^T M_i v per coordinate, with v a unit
  eigenvector for the smallest eigenvalue.  Step 1/k, a fixed iteration
  budget and restart count, and a deterministic seed derived from the
  instance make runs reproducible.  Restart points are the origin, the best
  entry of a coarse multiplier grid, and seeded random draws.

* ``minimize_sup``: heuristic primal minimization of the scenario supremum
  at zero perturbation over a declared box, by dense grid scan plus
  multistart SLSQP on the epigraph formulation.  Convex instances get a
  trustworthy minimum; nonconvex ones get "best found".
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .rockafellian import (
    ConstraintPerturbation,
    ExplicitPolyhedral,
    QuadraticFn,
    RobustInstance,
    combine_quadratics,
)
from .symeig import NEG_INF, SymMatrix, eigh_sym, homogenize, min_eig

CERT_TOL = 1e-8        # ascent success threshold on the smallest eigenvalue
BORDERLINE_TOL = 1e-4  # below success but above this counts as borderline


def stable_seed(*parts) -> int:
    """Deterministic 63-bit seed from string-able parts (no salted hash())."""
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "big") >> 1


# ---------------------------------------------------------------------------
# supergradient ascent on lambda -> min-eig of the homogenized Lagrangian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AscentResult:
    best_value: float
    best_lam: np.ndarray
    note: str  # "", or "borderline" when the run ended in the gray zone


def _homogenized_parts(F: ConstraintPerturbation, xp, shift: float):
    """Constant part M0 = homog(f - <xp, .> + shift) and per-constraint
    parts M_i = homog(g_i); the family is M(lam) = M0 + sum lam_i M_i."""
    n = F.dim_x
    xpv = np.zeros(n) if xp is None else np.asarray(xp, dtype=float)
    f_shift = QuadraticFn.make(F.f.Q.a, F.f.a - xpv, F.f.c + float(shift))
    M0 = homogenize(f_shift.Q, f_shift.a, f_shift.c).a
    Ms = [homogenize(gi.Q, gi.a, gi.c).a for gi in F.g]
    return M0, Ms


def psi_value(F: ConstraintPerturbation, lam, xp=None, shift: float = 0.0):
    """(min eigenvalue, supergradient) of the homogenized Lagrangian at lam."""
    M0, Ms = _homogenized_parts(F, xp, shift)
    lamv = np.asarray(lam, dtype=float)
    M = M0.copy()
    for li, Mi in zip(lamv, Ms):
        M = M + li * Mi
    val, vec = min_eig(SymMatrix.make(M))
    grad = np.array([float(vec @ Mi @ vec) for Mi in Ms])
    return val, grad


def _coarse_grid(m: int, rng: np.random.Generator):
    """Coarse multiplier grid used only to select restart points."""
    axis = [0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
    if m == 0:
        return [np.zeros(0)]
    if m == 1:
        return [np.array([v]) for v in axis]
    if m == 2:
        return [np.array([u, v]) for u in axis for v in axis]
    pts = [np.zeros(m)]
    pts += [np.abs(rng.normal(0, 3, size=m)) for _ in range(80)]
    return pts


def certify_scenario(F: ConstraintPerturbation, *, xp=None, shift: float = 0.0,
                     iters: int = 500, restarts: int = 5, seed: int = 0,
                     step_scale: float = 1.0) -> AscentResult:
    """Maximize the smallest eigenvalue of the homogenized Lagrangian over
    lambda >= 0.  Success means best value >= -1e-8 (the caller decides)."""
    m = F.dim_y
    M0, Ms = _homogenized_parts(F, xp, shift)

    def value_at(lamv):
        M = M0.copy()
        for li, Mi in zip(lamv, Ms):
            M = M + li * Mi
        return min_eig(SymMatrix.make(M))

    rng = np.random.default_rng(seed)
    if m == 0:
        val, _ = value_at(np.zeros(0))
        return AscentResult(val, np.zeros(0), "")

    grid = _coarse_grid(m, rng)
    grid_vals = []
    for lamv in grid:
        v, _ = value_at(lamv)
        grid_vals.append(v)
    best_idx = int(np.argmax(grid_vals))
    best_value = float(grid_vals[best_idx])
    best_lam = np.array(grid[best_idx], dtype=float)

    starts = [np.zeros(m), np.array(grid[best_idx], dtype=float)]
    while len(starts) < restarts:
        starts.append(np.abs(rng.normal(0.0, 2.0, size=m)))

    for lam0 in starts[:restarts]:
        lam = np.array(lam0, dtype=float)
        for k in range(1, iters + 1):
            M = M0.copy()
            for li, Mi in zip(lam, Ms):
                M = M + li * Mi
            val, vec = min_eig(SymMatrix.make(M))
            if val > best_value:
                best_value = float(val)
                best_lam = lam.copy()
            if best_value >= CERT_TOL:
                break
            grad = np.array([float(vec @ Mi @ vec) for Mi in Ms])
            lam = np.maximum(0.0, lam + (step_scale / k) * grad)
        if best_value >= CERT_TOL:
            break

    note = ""
    if -BORDERLINE_TOL <= best_value < -CERT_TOL:
        note = "borderline"
    return AscentResult(best_value, best_lam, note)


# ---------------------------------------------------------------------------
# primal minimization of the scenario supremum at zero perturbation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupMinResult:
    value: float            # best sup found (may be +inf when nothing feasible)
    point: Optional[np.ndarray]
    unbounded_ray: Optional[np.ndarray]
    solver_ok: bool
    grid_meta: dict


def _scenario_objectives(instance: RobustInstance, shift_slope=None,
                         shift_const: float = 0.0):
    """Per-scenario (objective term list, constraint list) as float callables
    with gradients.  The objective of a scenario is the max of its terms.
    Polyhedral scenarios contribute their pieces at y = 0 and their domain
    rows as constraints; quadratic scenarios contribute f and their g's.
    An optional affine shift (slope, const) is subtracted from every
    objective term."""
    n = instance.dim_x
    slope = np.zeros(n) if shift_slope is None else np.asarray(shift_slope, float)
    scen = []
    for F in instance.scenarios:
        terms = []
        cons = []
        if isinstance(F, ConstraintPerturbation):
            Qf, af, cf = F.f.Q.a, F.f.a - slope, F.f.c - shift_const
            terms.append((Qf, af, cf))
            for gi in F.g:
                cons.append((gi.Q.a, gi.a.copy(), gi.c))
        else:
            for s, b in F.fn.pieces:
                sx = np.array([float(v) for v in s[:n]])
                terms.append((np.zeros((n, n)), sx - slope, float(b) - shift_const))
            if F.fn.domain is not None:
                for normal, off in F.fn.domain.rows:
                    nx = np.array([float(v) for v in normal[:n]])
                    cons.append((np.zeros((n, n)), nx, -float(off)))
        scen.append((terms, cons))
    return scen


def _qval(term, x):
    Q, a, c = term
    return float(x @ Q @ x + a @ x + c)


def _qgrad(term, x):
    Q, a, _ = term
    return 2.0 * (Q @ x) + a


def _sup_at(scen, x):
    total = NEG_INF
    for terms, cons in scen:
        if any(_qval(cn, x) > 0.0 for cn in cons):
            return math.inf
        val = max(_qval(t, x) for t in terms)
        total = max(total, val)
    return total


def minimize_sup(instance: RobustInstance, *, box=(-5.0, 5.0), seed: int = 0,
                 starts: int = 20, shift_slope=None, shift_const: float = 0.0,
                 grid_per_axis: int = 0) -> SupMinResult:
    """Grid scan plus multistart SLSQP for min over x of the scenario sup at
    y = 0 (optionally shifted by an affine function).  Heuristic unless the
    instance is convex."""
    n = instance.dim_x
    scen = _scenario_objectives(instance, shift_slope, shift_const)
    lo, hi = float(box[0]), float(box[1])
    if grid_per_axis <= 0:
        grid_per_axis = {1: 401, 2: 41, 3: 15}.get(n, 7)
    axes = [np.linspace(lo, hi, grid_per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([g.ravel() for g in mesh], axis=1)

    sup_vals = np.full(len(xs), -np.inf)
    feasible = np.ones(len(xs), dtype=bool)
    for terms, cons in scen:
        ok = np.ones(len(xs), dtype=bool)
        for Q, a, c in cons:
            gvals = np.einsum("ij,jk,ik->i", xs, Q, xs) + xs @ a + c
            ok &= gvals <= 0.0
        tv = np.full(len(xs), -np.inf)
        for term in terms:
            Q, a, c = term
            tv = np.maximum(tv, np.einsum("ij,jk,ik->i", xs, Q, xs) + xs @ a + c)
        sup_vals = np.maximum(sup_vals, np.where(ok, tv, np.inf))
        feasible &= ok

    best_value = math.inf
    best_point = None
    if np.any(feasible):
        idx = int(np.argmin(np.where(feasible, sup_vals, np.inf)))
        best_value = float(sup_vals[idx])
        best_point = xs[idx].copy()

    # multistart SLSQP on min t s.t. t >= every objective term, g <= 0
    rng = np.random.default_rng(seed)
    start_pts = []
    if best_point is not None:
        start_pts.append(best_point)
    while len(start_pts) < starts:
        start_pts.append(rng.uniform(lo, hi, size=n))

    all_terms = [t for terms, _ in scen for t in terms]
    all_cons = [cn for _, cons in scen for cn in cons]
    solver_ok = False
    for x0 in start_pts:
        z0 = np.concatenate([x0, [_sup_at(scen, x0) if np.isfinite(_sup_at(scen, x0)) else 0.0]])
        constraints = []
        for term in all_terms:
            constraints.append({
                "type": "ineq",
                "fun": (lambda z, t=term: z[-1] - _qval(t, z[:-1])),
                "jac": (lambda z, t=term: np.concatenate([-_qgrad(t, z[:-1]), [1.0]])),
            })
        for cn in all_cons:
            constraints.append({
                "type": "ineq",
                "fun": (lambda z, t=cn: -_qval(t, z[:-1])),
                "jac": (lambda z, t=cn: np.concatenate([-_qgrad(t, z[:-1]), [0.0]])),
            })
        try:
            res = minimize(
                lambda z: z[-1], z0, jac=lambda z: np.concatenate([np.zeros(n), [1.0]]),
                method="SLSQP", constraints=constraints,
                options={"maxiter": 200, "ftol": 1e-12},
            )
        except (ValueError, OverflowError):
            continue
        if not np.all(np.isfinite(res.x)):
            continue
        cand = res.x[:-1]
        val = _sup_at(scen, cand)
        if math.isfinite(val):
            solver_ok = solver_ok or bool(res.success)
            if val < best_value:
                best_value = val
                best_point = cand.copy()
        elif res.success:
            # repair tiny infeasibility by stepping toward a feasible anchor
            anchor = best_point
            if anchor is not None:
                lo_t, hi_t = 0.0, 1.0
                for _ in range(40):
                    mid = 0.5 * (lo_t + hi_t)
                    probe = cand + mid * (anchor - cand)
                    if math.isfinite(_sup_at(scen, probe)):
                        hi_t = mid
                    else:
                        lo_t = mid
                probe = cand + hi_t * (anchor - cand)
                val = _sup_at(scen, probe)
                if math.isfinite(val) and val < best_value:
                    solver_ok = solver_ok or bool(res.success)
                    best_value = val
                    best_point = probe.copy()

    # crude unbounded-below detection along seeded rays
    unbounded_ray = None
    for _ in range(24):
        d = rng.normal(size=n)
        nrm = float(np.linalg.norm(d))
        if nrm == 0.0:
            continue
        d = d / nrm
        far = d * 1e3
        val = _sup_at(scen, far)
        if math.isfinite(val) and val < -1e6:
            unbounded_ray = d
            best_value = NEG_INF
            best_point = far
            break

    meta = {"box": [lo, hi], "grid_per_axis": grid_per_axis, "seed": seed,
            "starts": starts}
    return SupMinResult(best_value, best_point, unbounded_ray, solver_ok, meta)
