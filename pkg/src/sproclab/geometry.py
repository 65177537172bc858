"""Geometric objects behind the certificate procedures.

For a perturbation function G on X x Y, the shadow of its epigraph on
(y, r)-space drives everything: nonnegativity of G(., 0) is equivalent to
the scaled shadow missing the probe point (0, -1), and the existence of a
linear certificate is equivalent to the closed convex hull of the scaled
shadow missing the same point.  For a robust family, the shadow of the
scenario supremum is the intersection of the per-scenario shadows.

Two computation paths exist and are never silently mixed:

* exact: polyhedral scenarios -> Fourier-Motzkin projection of the epigraph,
  combinatorial generator models, exact rational membership LPs.
* sampled: quadratic scenarios -> a generator cloud of (g(x), f(x)) values
  on a declared grid plus the upward recession rays, with three-valued
  verdicts near decision boundaries.

The dual-side set (the shadow of the union of conjugate epigraphs on
(x', s)-space) gets the same two-path treatment in ``build_f_sharp``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import ascent
from .linrat import (
    ConeModel,
    LpStatus,
    Polyhedron,
    cone_member,
    convex_member,
    feasible_point,
    fm_project,
    generator_model,
    lp_solve,
    poly_is_empty,
    rat,
    rat_vec,
)
from .rockafellian import (
    ConstraintPerturbation,
    ExplicitPolyhedral,
    PolyhedralFn,
    RobustInstance,
    Rockafellian,
    singleton,
)

BOUNDARY_TOL = 1e-6

Q0 = rat(0)
Q1 = rat(1)


def as_instance(obj: Union[Rockafellian, RobustInstance]) -> RobustInstance:
    if isinstance(obj, RobustInstance):
        return obj
    return singleton(obj)


# ---------------------------------------------------------------------------
# epigraph polyhedra and projections
# ---------------------------------------------------------------------------


def epi_polyhedron(F: ExplicitPolyhedral) -> Polyhedron:
    """Epigraph of a polyhedral scenario as rows over (x, y, r)."""
    d = F.dim_x + F.dim_y
    rows = []
    for slope, b in F.fn.pieces:
        rows.append((tuple(slope) + (rat(-1),), -b))
    if F.fn.domain is not None:
        for normal, off in F.fn.domain.rows:
            rows.append((tuple(normal) + (Q0,), off))
    return Polyhedron(d + 1, tuple(rows))


@dataclass(frozen=True)
class SampleMeta:
    box: tuple
    per_axis: int
    seed: int


@dataclass(frozen=True, eq=False)
class EpiProjection:
    """Shadow of an epigraph on (y, r)-space.

    ``poly`` is set on the exact path, ``cloud`` (k x (dim_y+1) array of
    (g(x), f(x)) samples) plus ``meta`` on the sampled path.  The set is
    upward closed in r (and in y for constraint perturbations); the
    recession ray in +r is always part of the model.
    """

    source: object
    dim_y: int
    poly: Optional[Polyhedron] = None
    cloud: Optional[np.ndarray] = None
    meta: Optional[SampleMeta] = None
    empty: bool = False

    def member(self, y, r):
        """Three-valued membership: True/False exact, None only near a
        sampled boundary."""
        if self.empty:
            return False
        if self.poly is not None:
            return self.poly.contains(tuple(y) + (r,))
        yv = np.asarray(y, dtype=float)
        rv = float(r)
        pts = self.cloud
        below = np.all(pts[:, :-1] <= yv + 1e-12, axis=1) & (pts[:, -1] <= rv + 1e-12)
        strict = np.all(pts[:, :-1] <= yv - BOUNDARY_TOL, axis=1) & (
            pts[:, -1] <= rv - BOUNDARY_TOL)
        if np.any(strict):
            return True
        if np.any(below):
            return None  # within tolerance of the sampled boundary
        return False


@lru_cache(maxsize=2048)
def _exact_shadow(F: ExplicitPolyhedral) -> Polyhedron:
    epi = epi_polyhedron(F)
    keep = list(range(F.dim_x, F.dim_x + F.dim_y + 1))
    return fm_project(epi, keep)


def epi_projection(F: Rockafellian, *, box=(-5.0, 5.0), per_axis: int = 0,
                   seed: int = 0) -> EpiProjection:
    """Shadow of epi F on (y, r).

    Polyhedral path: exact Fourier-Motzkin projection of the epigraph rows.
    Quadratic path: the (g(x), f(x)) cloud over the declared grid; the grid
    metadata rides along in the result.
    """
    if isinstance(F, ExplicitPolyhedral):
        proj = _exact_shadow(F)
        return EpiProjection(F, F.dim_y, poly=proj, empty=poly_is_empty(proj))
    n = F.dim_x
    if per_axis <= 0:
        per_axis = {1: 401, 2: 41, 3: 15}.get(n, 9)
    lo, hi = float(box[0]), float(box[1])
    axes = [np.linspace(lo, hi, per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([g.ravel() for g in mesh], axis=1)
    cols = [gi.eval_many(xs) for gi in F.g] + [F.f.eval_many(xs)]
    cloud = np.stack(cols, axis=1)
    meta = SampleMeta((lo, hi), per_axis, seed)
    return EpiProjection(F, F.dim_y, cloud=cloud, meta=meta)


def projection_cone_model(ep: EpiProjection) -> ConeModel:
    """Generator model of the shadow, suitable for the two cone semantics."""
    dim = ep.dim_y + 1
    if ep.empty:
        return ConeModel(dim, (), ())
    if ep.poly is not None:
        return generator_model(ep.poly)
    pts = tuple(rat_vec(row) for row in ep.cloud)
    rays = []
    for j in range(dim):
        e = [Q0] * dim
        e[j] = Q1
        rays.append(tuple(e))
    return ConeModel(dim, pts, tuple(rays))


def intersection_shadow(projs: Sequence[EpiProjection]) -> Polyhedron:
    """Exact path only: intersection of per-scenario shadows (row
    concatenation).  The shadow of the scenario supremum is always contained
    in this set; the reverse inclusion can fail because each scenario may
    reach its value at a different decision point.  Use ``sup_scenario`` for
    the supremum's own shadow."""
    dims = {ep.poly.dim for ep in projs if ep.poly is not None}
    if len(dims) != 1 or any(ep.poly is None for ep in projs):
        raise ValueError("intersection_shadow needs exact projections")
    d = dims.pop()
    rows = []
    for ep in projs:
        rows.extend(ep.poly.rows)
    return Polyhedron(d, tuple(rows))


def sup_scenario(instance: RobustInstance) -> ExplicitPolyhedral:
    """The scenario supremum of a polyhedral instance as one scenario:
    union of the pieces over the intersection of the domains."""
    if not instance.all_polyhedral():
        raise ValueError("sup_scenario needs a polyhedral instance")
    pieces = []
    dom_rows = []
    for F in instance.scenarios:
        pieces.extend(F.fn.pieces)
        if F.fn.domain is not None:
            dom_rows.extend(F.fn.domain.rows)
    d = instance.dim_x + instance.dim_y
    domain = Polyhedron(d, tuple(dom_rows)) if dom_rows else None
    return ExplicitPolyhedral(instance.dim_x, instance.dim_y,
                              PolyhedralFn(d, tuple(pieces), domain))


# ---------------------------------------------------------------------------
# the probe point (0_Y, -1) against the scaled shadow
# ---------------------------------------------------------------------------


def _down_probe(dim_y: int):
    return (Q0,) * dim_y + (rat(-1),)


def scaled_shadow_member_direct(poly: Polyhedron) -> bool:
    """(0, -1) in R+ . shadow, decided on the H-representation: is there a
    rho > 0 with (0, -rho) inside?  The probe differs from the origin, so
    membership in the strictly-scaled and the nonnegatively-scaled sets
    coincide."""
    d = poly.dim
    rows = []
    for normal, off in poly.rows:
        rows.append(((-normal[-1],), off))
    rows.append(((rat(-1),), Q0))  # rho >= 0
    out = lp_solve([Q1], Polyhedron(1, tuple(rows)), "max")
    if out.status is LpStatus.UNBOUNDED:
        return True
    if out.status is LpStatus.INFEASIBLE:
        return False
    return out.value > 0


def lemma21_check(obj: Union[Rockafellian, RobustInstance], via: str = "cone",
                  *, box=(-5.0, 5.0), per_axis: int = 0, seed: int = 0):
    """The three equivalent statements about G = scenario sup:

    (i)   G(x, 0) >= 0 for every x,
    (ii)  (0, -1) is missed by the strictly-scaled shadow,
    (iii) (0, -1) is missed by the nonnegatively-scaled shadow.

    Returns a dict with keys "i", "ii", "iii" (True/False/None), "path",
    and a primal "witness" when (i) fails.  ``via`` selects how the cone
    side is computed on the exact path: "direct" solves the scaling LP on
    the H-representation, "cone" queries the generator model.
    """
    if via not in ("direct", "cone"):
        raise ValueError(f"via must be 'direct' or 'cone', got {via!r}")
    instance = as_instance(obj)
    if instance.all_polyhedral():
        G = sup_scenario(instance)
        shadow = epi_projection(G).poly
        i_val, witness = _primal_nonneg_exact(instance)
        if via == "direct":
            member = scaled_shadow_member_direct(shadow)
        else:
            model = projection_cone_model(
                EpiProjection(G, instance.dim_y, poly=shadow,
                              empty=poly_is_empty(shadow)))
            member = cone_member(_down_probe(instance.dim_y), model, "raw_cone")
        return {"i": i_val, "ii": not member, "iii": not member,
                "path": "exact", "witness": witness}

    # sampled path: the primal route refines with local descent, the cone
    # route scans the recorded sample cloud for a point of the scaled shadow
    # below the probe; disagreement downgrades everything to unknown.
    res = ascent.minimize_sup(instance, box=box, seed=seed,
                              grid_per_axis=per_axis)
    if res.value == -math.inf or (res.point is not None and res.value < -1e-9):
        i_val = False
        witness = res.point
    else:
        i_val = True
        witness = None

    member = _sampled_sup_shadow_member(instance, box=box, per_axis=per_axis)
    ii = not member
    iii = ii
    if i_val != (not member):
        # heuristic primal and sampled cone disagree within tolerance
        return {"i": None, "ii": None, "iii": None, "path": "sampled",
                "witness": witness}
    return {"i": i_val, "ii": ii, "iii": iii, "path": "sampled",
            "witness": witness}


def _sampled_sup_shadow_member(instance: RobustInstance, *, box, per_axis):
    """(0, -1) in the scaled shadow of the scenario sup, from the grid cloud
    alone: some sample must be feasible for every scenario with every
    objective value strictly negative."""
    n = instance.dim_x
    if per_axis <= 0:
        per_axis = {1: 401, 2: 41, 3: 15}.get(n, 9)
    lo, hi = float(box[0]), float(box[1])
    axes = [np.linspace(lo, hi, per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([g.ravel() for g in mesh], axis=1)
    ok = np.ones(len(xs), dtype=bool)
    sup_vals = np.full(len(xs), -np.inf)
    for F in instance.scenarios:
        if isinstance(F, ConstraintPerturbation):
            for gi in F.g:
                ok &= gi.eval_many(xs) <= 0.0
            sup_vals = np.maximum(sup_vals, F.f.eval_many(xs))
        else:
            vals = np.full(len(xs), -np.inf)
            for slope, b in F.fn.pieces:
                sx = np.array([float(v) for v in slope[:n]])
                vals = np.maximum(vals, xs @ sx + float(b))
            if F.fn.domain is not None:
                for normal, off in F.fn.domain.rows:
                    nx = np.array([float(v) for v in normal[:n]])
                    ok &= xs @ nx <= float(off)
            sup_vals = np.maximum(sup_vals, vals)
    return bool(np.any(ok & (sup_vals < -1e-9)))


def sup_epigraph_slice(instance: RobustInstance) -> Polyhedron:
    """Exact path: {(x, t) : t >= scenario sup at (x, 0)} as one polyhedron
    (pieces of every scenario plus every domain row, all sliced at y = 0)."""
    n = instance.dim_x
    rows = []
    for F in instance.scenarios:
        for slope, b in F.fn.pieces:
            rows.append((tuple(slope[:n]) + (rat(-1),), -b))
        if F.fn.domain is not None:
            for normal, off in F.fn.domain.rows:
                rows.append((tuple(normal[:n]) + (Q0,), off))
    return Polyhedron(n + 1, tuple(rows))


def _primal_nonneg_exact(instance: RobustInstance):
    """Exact LP for inf over x of the scenario sup at y = 0 (polyhedral)."""
    n = instance.dim_x
    feas = sup_epigraph_slice(instance)
    obj = [Q0] * n + [Q1]
    out = lp_solve(obj, feas, "min")
    if out.status is LpStatus.INFEASIBLE:
        return True, None  # sup is +inf everywhere: vacuously nonnegative
    if out.status is LpStatus.UNBOUNDED:
        return False, out.ray
    if out.value >= 0:
        return True, None
    return False, out.point[:n]


def closed_convex_regarding(c: ConeModel, probes: Sequence) -> bool:
    """True when, at every probe, membership in the closed convex conic hull
    agrees with membership in the nonnegatively-scaled set itself."""
    for p in probes:
        if cone_member(p, c, "closed_hull") != cone_member(p, c, "raw_cone"):
            return False
    return True


# ---------------------------------------------------------------------------
# the dual-side shadow on (x', s)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FSharpModel:
    """Shadow of the union of conjugate epigraphs on (x', s).

    Exact path: one polyhedron per scenario (membership is their
    disjunction), the matching polyhedra with the multiplier coordinates
    still present (for witness extraction), and per-scenario generator
    models whose union answers closed-convex-hull queries.  Quadratic path:
    a certificate-search oracle with recorded search configuration.
    """

    instance: RobustInstance
    exact: Optional[tuple] = None        # per-scenario Polyhedron in (x', s)
    mu_polys: Optional[tuple] = None     # per-scenario Polyhedron in (x', mu, s)
    gen_models: Optional[tuple] = None   # per-scenario ConeModel in (x', s)
    oracle_cfg: Optional[dict] = None

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def member(self, xp, s, with_witness: bool = False):
        """Three-valued membership of (x', s); optionally returns
        (verdict, (scenario index, multiplier vector) or None)."""
        if self.exact is not None:
            point = rat_vec(tuple(xp) + (s,))
            for idx, poly in enumerate(self.exact):
                if poly.contains(point):
                    if not with_witness:
                        return True
                    mu = self._mu_witness(idx, xp, s)
                    return True, (idx, mu)
            return (False, None) if with_witness else False
        cfg = self.oracle_cfg
        definite_false = True
        for idx, F in enumerate(self.instance.scenarios):
            res = ascent.certify_scenario(
                F, xp=np.asarray([float(v) for v in xp]),
                shift=float(s), iters=cfg["iters"], restarts=cfg["restarts"],
                seed=ascent.stable_seed(cfg["seed"], "fsharp", idx),
                step_scale=cfg["step_scale"])
            if res.best_value >= -ascent.CERT_TOL:
                lam = res.best_lam
                if not with_witness:
                    return True
                return True, (idx, [-float(v) for v in lam])
            if res.note == "borderline":
                definite_false = False
        if definite_false:
            return (False, None) if with_witness else False
        return (None, None) if with_witness else None

    def _mu_witness(self, idx: int, xp, s):
        mu_poly = self.mu_polys[idx]
        dx = self.instance.dim_x
        dy = self.instance.dim_y
        point = rat_vec(xp)
        sval = rat(s)
        rows = []
        for normal, off in mu_poly.rows:
            fixed = sum((normal[j] * point[j] for j in range(dx)), Q0)
            fixed += normal[dx + dy] * sval
            mu_part = tuple(normal[dx:dx + dy])
            rows.append((mu_part, off - fixed))
        if dy == 0:
            return ()
        reduced = Polyhedron(dy, tuple(rows))
        return feasible_point(reduced)

    def hull_member(self, xp, s):
        """Membership of (x', s) in the closed convex hull of the shadow."""
        if self.gen_models is None:
            return None
        pts = []
        rays = []
        for gm in self.gen_models:
            pts.extend(gm.points)
            rays.extend(gm.rays)
        if not pts:
            return False
        union = ConeModel(self.instance.dim_x + 1, tuple(pts), tuple(dict.fromkeys(rays)))
        return convex_member(tuple(xp) + (s,), union)


def conjugate_epi_rows(F: ExplicitPolyhedral):
    """H-rows of the conjugate epigraph over (x', mu, s), straight from the
    generators of the primal epigraph: point generators bound <z, w> - t by
    s, ray generators force <d, w> <= rho."""
    dx, dy = F.dim_x, F.dim_y
    epi = epi_polyhedron(F)
    gm = generator_model(epi)
    rows = []
    for v in gm.points:
        z, t = v[:-1], v[-1]
        rows.append((tuple(z) + (rat(-1),), t))
    for rvec in gm.rays:
        d, rho = rvec[:-1], rvec[-1]
        rows.append((tuple(d) + (Q0,), rho))
    return Polyhedron(dx + dy + 1, tuple(rows)) if rows else Polyhedron(
        dx + dy + 1, ())


def build_f_sharp(instance: RobustInstance, *, seed: int = 0,
                  iters: int = 500, restarts: int = 5,
                  step_scale: float = 1.0) -> FSharpModel:
    """Construct the dual-side shadow model.

    Polyhedral instances: per scenario, enumerate the epigraph generators,
    write the conjugate epigraph rows over (x', mu, s), and project the
    multiplier coordinates away; membership is the disjunction of the
    per-scenario polyhedra.  Quadratic instances: a membership oracle that
    searches for a multiplier certificate with the same ascent machinery the
    procedural checkers use.
    """
    if instance.all_polyhedral():
        dx, dy = instance.dim_x, instance.dim_y
        polys = []
        mu_polys = []
        models = []
        for F in instance.scenarios:
            mu_poly = conjugate_epi_rows(F)
            keep = list(range(dx)) + [dx + dy]
            proj = fm_project(mu_poly, keep) if mu_poly.rows else Polyhedron(
                dx + 1, ())
            polys.append(proj)
            mu_polys.append(mu_poly)
            models.append(generator_model(proj))
        return FSharpModel(instance, exact=tuple(polys),
                           mu_polys=tuple(mu_polys), gen_models=tuple(models))
    cfg = {"seed": seed, "iters": iters, "restarts": restarts,
           "step_scale": step_scale}
    return FSharpModel(instance, oracle_cfg=cfg)
