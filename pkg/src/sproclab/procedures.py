"""Statement checkers, certificate searches and theorem validators.

The two core statements about a robust family {F_u}:

* pointwise: the scenario supremum at zero perturbation is nonnegative
  everywhere ("holds" / "violated" / "unknown"), decided exactly on the
  polyhedral path and by grid-plus-descent search on the quadratic path;
* certificate: some scenario u-bar and multiplier lambda-bar make
  F_ubar(x, y) + <lambda-bar, y> nonnegative on all of X x Y; searched per
  scenario in index order, exactly by LP on the polyhedral path and by
  projected supergradient ascent on the homogenized Lagrangian otherwise.

The right-hand-side variants replace zero with a proper convex piecewise
affine bound h and certify pointwise over a finite probe set inside the
domain of the conjugate of h, which is why their reports say
"valid on probes", never "valid".

Only the exact polyhedral path may claim equivalences at zero tolerance;
every heuristic path carries three-valued verdicts and its search
configuration, and validators downgrade to "unknown" instead of guessing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from gmpy2 import mpq

from . import ascent, geometry
from .config import RunConfig
from .linrat import (
    ConeModel,
    LpStatus,
    Polyhedron,
    cone_member,
    convex_member,
    feasible_point,
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
    biconjugate_at,
    biconjugate_is_exact,
    conjugate_at,
    evaluate,
    is_pos_inf,
)
from .symeig import NEG_INF, POS_INF

HOLDS = "holds"
VIOLATED = "violated"
UNKNOWN = "unknown"

THEOREMS = ("t2_1", "t3_1", "t4_1", "c2_1", "c2_2", "c3_1", "c4_1")

Q0 = rat(0)
Q1 = rat(1)


def _inst_seed(cfg: RunConfig, instance: RobustInstance, *tags) -> int:
    return ascent.stable_seed(cfg.seed, instance.dumps(), *tags)


def _require_heuristic_allowed(cfg: RunConfig, instance: RobustInstance, what: str):
    if cfg.exact_only and not instance.all_polyhedral():
        raise ValueError(
            f"{what} needs the heuristic path but exact-only mode is set")


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    verdict: str                     # holds / violated / unknown
    witness: Optional[tuple] = None  # point (or ray) exhibiting a violation
    certified: bool = False          # exact LP or convex minimization
    value: Optional[object] = None   # best infimum seen (exact or float)
    path: str = "exact"
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": _jsonify(self.witness),
            "certified": self.certified,
            "value": _jsonify(self.value),
            "path": self.path,
            "details": _jsonify(self.details),
        }


@dataclass(frozen=True)
class Certificate:
    """Scenario index and nonnegative multiplier vector, with its quality:
    the smallest eigenvalue of the certified homogenized matrix on the
    search path, or the exact conjugate margin on the LP path."""

    scenario: int
    lam: tuple
    quality: object
    exact: bool

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "lam": [_decimal(v) for v in self.lam],
            "lam_exact": [str(v) for v in self.lam] if self.exact else None,
            "quality": _decimal(self.quality),
            "exact": self.exact,
        }


@dataclass(frozen=True)
class CertifyResult:
    certificate: Optional[Certificate]
    skipped: tuple = ()
    per_scenario: tuple = ()

    @property
    def verdict(self) -> str:
        if self.certificate is not None:
            return "certificate"
        return UNKNOWN if self.skipped else "none"

    def to_json(self) -> dict:
        return {
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "verdict": self.verdict,
            "skipped": _jsonify(list(self.skipped)),
            "per_scenario": _jsonify(list(self.per_scenario)),
        }


# ---------------------------------------------------------------------------
# right-hand-side functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhsFunction:
    """Proper convex lower-semicontinuous bound: a finite max of affine
    pieces (a single piece for the affine variant).  The slopes generate the
    domain of the conjugate; the conjugate value at any point of that domain
    comes from an exact LP over the simplex of slopes."""

    kind: str      # "affine" | "polyhedral_max"
    pieces: tuple  # of (slope vec, intercept), rational

    def __post_init__(self):
        if self.kind not in ("affine", "polyhedral_max"):
            raise ValueError(f"unknown rhs kind {self.kind!r}")
        if not self.pieces:
            raise ValueError("rhs function needs at least one piece")
        if self.kind == "affine" and len(self.pieces) != 1:
            raise ValueError("affine rhs must have exactly one piece")

    @staticmethod
    def affine(slope, intercept) -> "RhsFunction":
        return RhsFunction("affine", ((rat_vec(slope), rat(intercept)),))

    @staticmethod
    def polyhedral_max(pieces) -> "RhsFunction":
        packed = tuple((rat_vec(s), rat(b)) for s, b in pieces)
        kind = "affine" if len(packed) == 1 else "polyhedral_max"
        return RhsFunction(kind, packed)

    @staticmethod
    def zero(dim: int) -> "RhsFunction":
        return RhsFunction.affine([0] * dim, 0)

    @property
    def dim(self) -> int:
        return len(self.pieces[0][0])

    def __call__(self, x):
        xv = rat_vec(x)
        return max(sum((s * v for s, v in zip(slope, xv)), Q0) + b
                   for slope, b in self.pieces)

    def dom_generators(self):
        return tuple(slope for slope, _b in self.pieces)

    def h_star(self, aprime):
        """Conjugate value at a'; +inf outside the convex hull of slopes."""
        ap = rat_vec(aprime)
        if self.kind == "affine":
            slope, b = self.pieces[0]
            return -b if ap == slope else POS_INF
        d = self.dim
        rows = [(tuple(s) + (rat(-1),), -b) for s, b in self.pieces]
        epi = Polyhedron(d + 1, tuple(rows))
        out = lp_solve(list(ap) + [rat(-1)], epi, "max")
        if out.status is LpStatus.OPTIMAL:
            return out.value
        return POS_INF  # unbounded: a' outside dom h*

    def probe_points(self, seed: int, extra: int):
        """Slope generators plus seeded random convex combinations."""
        gens = list(dict.fromkeys(self.dom_generators()))
        if self.kind == "affine" or len(gens) == 1:
            return tuple(gens)
        rng = np.random.default_rng(seed)
        probes = list(gens)
        seen = set(gens)
        for _ in range(extra):
            w = rng.dirichlet(np.ones(len(gens)))
            wq = [rat(float(v)) for v in w]
            total = sum(wq, Q0)
            wq = [v / total for v in wq]
            pt = tuple(sum((wq[i] * gens[i][j] for i in range(len(gens))), Q0)
                       for j in range(self.dim))
            if pt not in seen:
                seen.add(pt)
                probes.append(pt)
        return tuple(probes)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "pieces": [{"slope": [str(v) for v in s], "intercept": str(b)}
                       for s, b in self.pieces],
        }

    @staticmethod
    def from_json(data: dict) -> "RhsFunction":
        pieces = [(p["slope"], p["intercept"]) for p in data["pieces"]]
        fn = RhsFunction.polyhedral_max(pieces)
        if data.get("kind") == "affine" and len(pieces) != 1:
            raise ValueError("affine rhs must have exactly one piece")
        return fn


# ---------------------------------------------------------------------------
# pointwise checks
# ---------------------------------------------------------------------------


def _exact_shifted_inf(instance: RobustInstance, slope, const):
    """LP value of inf over x of (scenario sup at y=0) - <slope, x> - const."""
    n = instance.dim_x
    feas = geometry.sup_epigraph_slice(instance)
    obj = [-s for s in slope] + [Q1]
    out = lp_solve(obj, feas, "min")
    if out.status is LpStatus.INFEASIBLE:
        return POS_INF, None
    if out.status is LpStatus.UNBOUNDED:
        return NEG_INF, out.ray
    return out.value - const, out.point[:n]


def check_a(instance: RobustInstance, cfg: RunConfig = RunConfig()) -> CheckResult:
    """Decides whether the scenario supremum at zero perturbation is
    nonnegative everywhere.

    Polyhedral path: one exact LP, verdict certified.  Quadratic path: grid
    scan over the declared box plus multistart local descent; "violated"
    carries a witness with supremum below -1e-9, "holds" means no violation
    was found and is certified only when every scenario is convex.
    """
    return check_a_h(instance, RhsFunction.zero(instance.dim_x), cfg)


def check_a_h(instance: RobustInstance, h: RhsFunction,
              cfg: RunConfig = RunConfig()) -> CheckResult:
    """Pointwise dominance of the scenario supremum over the bound h,
    checked piece by piece (sup >= max of pieces iff sup >= each piece)."""
    if h.dim != instance.dim_x:
        raise ValueError("rhs dimension does not match instance")
    if instance.all_polyhedral():
        worst = None
        witness = None
        for slope, const in h.pieces:
            val, pt = _exact_shifted_inf(instance, slope, const)
            if val == NEG_INF:
                return CheckResult(VIOLATED, witness=pt, certified=True,
                                   value=NEG_INF, path="exact",
                                   details={"unbounded_ray": _jsonify(pt)})
            if is_pos_inf(val):
                continue
            if worst is None or val < worst:
                worst, witness = val, pt
        if worst is None:
            return CheckResult(HOLDS, certified=True, value=POS_INF,
                               path="exact",
                               details={"note": "supremum is +inf everywhere"})
        if worst >= 0:
            return CheckResult(HOLDS, certified=True, value=worst, path="exact")
        return CheckResult(VIOLATED, witness=witness, certified=True,
                           value=worst, path="exact")

    _require_heuristic_allowed(cfg, instance, "check of the pointwise statement")
    seed = _inst_seed(cfg, instance, "check_a", h.to_json())
    worst = math.inf
    worst_pt = None
    meta = None
    for idx, (slope, const) in enumerate(h.pieces):
        res = ascent.minimize_sup(
            instance, box=cfg.box, seed=ascent.stable_seed(seed, idx),
            shift_slope=[float(s) for s in slope], shift_const=float(const),
            grid_per_axis=cfg.grid_per_axis)
        meta = res.grid_meta
        if res.value == NEG_INF:
            ray = None if res.unbounded_ray is None else tuple(
                float(v) for v in res.unbounded_ray)
            return CheckResult(VIOLATED, witness=ray, certified=False,
                               value=NEG_INF, path="sampled",
                               details={"unbounded_ray": _jsonify(ray),
                                        "search": _jsonify(res.grid_meta)})
        if res.value < worst:
            worst = res.value
            worst_pt = res.point
    certified = instance.all_convex(cfg.tol_psd)
    if worst < -1e-9 and worst_pt is not None:
        return CheckResult(VIOLATED,
                           witness=tuple(float(v) for v in worst_pt),
                           certified=certified, value=worst, path="sampled",
                           details={"search": _jsonify(meta)})
    return CheckResult(HOLDS, certified=certified, value=worst,
                       path="sampled",
                       details={"search": _jsonify(meta),
                                "note": "no violation found"})


# ---------------------------------------------------------------------------
# certificate searches
# ---------------------------------------------------------------------------


def _certify_scenario_exact(F: ExplicitPolyhedral, aprime, bound):
    """Multiplier lambda with F(x,y) + <lambda, y> >= <a', x> - bound for
    every (x, y), or None.

    The condition says the shadow of the tilted scenario (pieces' x-slopes
    shifted by -a', intercepts by +bound) sits inside the epigraph of the
    linear functional -lambda, which is a small LP over the shadow's
    generators in (y, r)-space.  Returns lambda itself (not its negative).
    """
    dx, dy = F.dim_x, F.dim_y
    ap = rat_vec(aprime)
    bnd = rat(bound)
    shifted_pieces = []
    for slope, b in F.fn.pieces:
        sx = tuple(slope[j] - ap[j] for j in range(dx))
        shifted_pieces.append((sx + tuple(slope[dx:]), b + bnd))
    shifted = ExplicitPolyhedral(
        dx, dy, PolyhedralFn(dx + dy, tuple(shifted_pieces), F.fn.domain))
    shadow = geometry.epi_projection(shifted).poly
    gm = generator_model(shadow)
    if gm.is_empty:
        return (Q0,) * dy  # scenario identically +inf: anything certifies
    rows = []
    for gen in gm.points + gm.rays:
        y_part, r_part = gen[:-1], gen[-1]
        rows.append((tuple(-v for v in y_part), r_part))
    if dy == 0:
        feasible = all(off >= 0 for _n, off in rows)
        return () if feasible else None
    reduced = Polyhedron(dy, tuple(rows))
    return feasible_point(reduced)


def certify_b(instance: RobustInstance, cfg: RunConfig = RunConfig()) -> CertifyResult:
    """Searches scenarios in index order for a multiplier certificate.

    Polyhedral path: exact LP feasibility of the conjugate condition at the
    origin pair.  Quadratic path: projected supergradient ascent on the
    smallest eigenvalue of the homogenized Lagrangian (step 1/k, fixed
    iteration and restart budget, seed derived from the instance), success
    at best value >= -1e-8.  "None" is an answer, not an error; scenarios
    whose ascent ends in the borderline band are skipped with a note.
    """
    return certify_b_at(instance, None, 0, cfg)


def certify_b_at(instance: RobustInstance, aprime, bound,
                 cfg: RunConfig = RunConfig()) -> CertifyResult:
    """Certificate search with the conjugate threshold shifted to the dual
    point a' and level ``bound`` (the plain search uses the origin and 0)."""
    ap = [0] * instance.dim_x if aprime is None else list(aprime)
    skipped = []
    summaries = []
    for idx, F in enumerate(instance.scenarios):
        if isinstance(F, ExplicitPolyhedral):
            lam = _certify_scenario_exact(F, ap, bound)
            if lam is not None:
                mu = tuple(-v for v in lam)
                conj = conjugate_at(F, rat_vec(ap), mu)
                margin = POS_INF if conj == NEG_INF else rat(bound) - conj
                summaries.append({"scenario": idx, "result": "certificate"})
                return CertifyResult(
                    Certificate(idx, lam, margin, True),
                    tuple(skipped), tuple(summaries))
            summaries.append({"scenario": idx, "result": "infeasible"})
        else:
            _require_heuristic_allowed(cfg, instance, "certificate search")
            res = ascent.certify_scenario(
                F, xp=np.asarray([float(v) for v in ap]), shift=float(bound),
                iters=cfg.ascent_iters, restarts=cfg.restarts,
                seed=_inst_seed(cfg, instance, "certify", idx,
                                [str(v) for v in ap], str(bound)),
                step_scale=cfg.step_scale)
            if res.best_value >= -ascent.CERT_TOL:
                lam = tuple(float(v) for v in res.best_lam)
                summaries.append({"scenario": idx, "result": "certificate",
                                  "psi": res.best_value})
                return CertifyResult(
                    Certificate(idx, lam, res.best_value, False),
                    tuple(skipped), tuple(summaries))
            if res.note == "borderline":
                skipped.append({"scenario": idx, "note": "borderline",
                                "psi": res.best_value})
                summaries.append({"scenario": idx, "result": "borderline",
                                  "psi": res.best_value})
            else:
                summaries.append({"scenario": idx, "result": "no_certificate",
                                  "psi": res.best_value})
    return CertifyResult(None, tuple(skipped), tuple(summaries))


@dataclass(frozen=True)
class BhResult:
    """Per-probe certificates for the right-hand-side procedure."""

    probes: tuple          # of (a', h*(a'), CertifyResult)
    valid_on_probes: Optional[bool]

    def to_json(self) -> dict:
        return {
            "probes": [
                {"aprime": [_decimal(v) for v in ap],
                 "h_star": _decimal(hs),
                 "search": res.to_json()}
                for ap, hs, res in self.probes
            ],
            "valid_on_probes": self.valid_on_probes,
        }


def certify_b_h(instance: RobustInstance, h: RhsFunction,
                cfg: RunConfig = RunConfig()) -> BhResult:
    """Runs the certificate search at every probe of the conjugate domain of
    h: the slope generators plus seeded random convex combinations.  The
    overall verdict is "valid on probes" only; the probe set is finite."""
    if h.dim != instance.dim_x:
        raise ValueError("rhs dimension does not match instance")
    seed = _inst_seed(cfg, instance, "bh_probes", h.to_json())
    entries = []
    all_ok: Optional[bool] = True
    for ap in h.probe_points(seed, cfg.probes):
        hs = h.h_star(ap)
        if is_pos_inf(hs):
            continue
        res = certify_b_at(instance, ap, hs, cfg)
        entries.append((ap, hs, res))
        if res.certificate is None:
            all_ok = None if res.skipped else False
    return BhResult(tuple(entries), all_ok)


# ---------------------------------------------------------------------------
# hypotheses
# ---------------------------------------------------------------------------

HOLDS_SUFF = "HOLDS-sufficient"
HOLDS_NUM = "HOLDS-numeric"
FAILS = "FAILS-witness"
UNKNOWN_FLAG = "UNKNOWN"


@dataclass(frozen=True)
class HypFlag:
    status: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"status": self.status, "evidence": _jsonify(self.evidence)}


@dataclass(frozen=True)
class HypothesisReport:
    flags: dict

    def to_json(self) -> dict:
        return {k: v.to_json() for k, v in self.flags.items()}

    def holds(self, name: str) -> bool:
        f = self.flags.get(name)
        return f is not None and f.status in (HOLDS_SUFF, HOLDS_NUM)


def _feasible_slice_point(instance: RobustInstance, cfg: RunConfig):
    """A decision point where the scenario sup at y = 0 is finite, or None."""
    if instance.all_polyhedral():
        slice_poly = geometry.sup_epigraph_slice(instance)
        pt = feasible_point(slice_poly)
        return None if pt is None else pt[:instance.dim_x]
    n = instance.dim_x
    per_axis = {1: 201, 2: 31, 3: 11}.get(n, 7)
    axes = [np.linspace(cfg.box_lo, cfg.box_hi, per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([g.ravel() for g in mesh], axis=1)
    ok = np.ones(len(xs), dtype=bool)
    for F in instance.scenarios:
        if isinstance(F, ConstraintPerturbation):
            for gi in F.g:
                ok &= gi.eval_many(xs) <= 0.0
    if not np.any(ok):
        return None
    return tuple(float(v) for v in xs[int(np.argmax(ok))])


def _empty_domain_scenario(instance: RobustInstance, cfg: RunConfig):
    """Index of a scenario whose y=0 slice is certifiably empty (a convex
    constraint with positive infimum), making the scenario identically +inf
    and the supremum's infimum +inf; None when no certificate is found."""
    from .symeig import quad_inf
    for idx, F in enumerate(instance.scenarios):
        if not isinstance(F, ConstraintPerturbation):
            continue
        for gi in F.g:
            if gi.is_convex(cfg.tol_psd):
                mn = quad_inf(gi.Q, gi.a, gi.c)
                if mn != NEG_INF and mn > cfg.tol_sub:
                    return idx
    return None


def _h1_like(instance: RobustInstance, cfg: RunConfig, slope=None) -> HypFlag:
    """Shared logic for the no-duality-gap hypotheses: the primal and
    biconjugate infima agree and are not +inf (optionally with an affine
    tilt, which does not affect the +inf clause)."""
    empty_idx = _empty_domain_scenario(instance, cfg)
    if empty_idx is not None:
        return HypFlag(FAILS, {
            "reason": "infimum is +inf",
            "scenario_with_empty_slice": empty_idx})
    point = _feasible_slice_point(instance, cfg)
    if instance.all_polyhedral():
        if point is None:
            return HypFlag(FAILS, {"reason": "infimum is +inf",
                                   "note": "no scenario-sup-finite point"})
        return HypFlag(HOLDS_SUFF, {
            "reason": "polyhedral scenarios equal their biconjugates",
            "finite_point": _jsonify(point)})
    if instance.all_convex(cfg.tol_psd):
        if point is None:
            return HypFlag(UNKNOWN_FLAG, {
                "reason": "no finite point found on the sampling grid"})
        return HypFlag(HOLDS_SUFF, {
            "reason": "convex proper scenarios equal their biconjugates",
            "finite_point": _jsonify(point)})
    if point is None:
        return HypFlag(UNKNOWN_FLAG, {
            "reason": "nonconvex scenarios and no finite sample point"})
    # numeric squeeze: inf sup of biconjugate lower bounds vs inf sup itself
    seed = _inst_seed(cfg, instance, "h1")
    slope_v = None if slope is None else [float(v) for v in slope]
    res = ascent.minimize_sup(instance, box=cfg.box, seed=seed,
                              shift_slope=slope_v,
                              grid_per_axis=cfg.grid_per_axis)
    n = instance.dim_x
    rng = np.random.default_rng(seed)
    xs = rng.uniform(cfg.box_lo, cfg.box_hi, size=(200, n))
    if res.point is not None:
        xs = np.vstack([xs, np.asarray(res.point, dtype=float).reshape(1, n)])
    best_bicon = math.inf
    zeros = [0.0] * instance.dim_y
    for x in xs:
        vals = []
        for F in instance.scenarios:
            v = biconjugate_at(F, x, zeros, seed=seed, probe_count=120)
            vals.append(_float_ext(v))
        tilt = 0.0 if slope_v is None else float(np.dot(slope_v, x))
        best_bicon = min(best_bicon, max(vals) - tilt)
    primal = _float_ext(res.value)
    if primal <= best_bicon + cfg.tol_sub:
        return HypFlag(HOLDS_NUM, {
            "primal_inf": primal, "biconjugate_inf_upper": best_bicon,
            "tolerance": cfg.tol_sub})
    return HypFlag(UNKNOWN_FLAG, {
        "reason": "biconjugate lower bounds leave a gap",
        "primal_inf": primal, "biconjugate_inf_upper": best_bicon})


def _h4_like(instance: RobustInstance, h: RhsFunction, cfg: RunConfig) -> HypFlag:
    """Closed-convex-regarding check of the dual-side shadow at the graph
    points of the conjugate of h."""
    seed = _inst_seed(cfg, instance, "h4", h.to_json())
    model = geometry.build_f_sharp(
        instance, seed=seed, iters=cfg.ascent_iters, restarts=cfg.restarts,
        step_scale=cfg.step_scale)
    probes = []
    for ap in h.probe_points(seed, cfg.probes):
        hs = h.h_star(ap)
        if not is_pos_inf(hs):
            probes.append((ap, hs))
    if model.is_exact:
        for ap, hs in probes:
            raw = model.member(ap, hs)
            hull = model.hull_member(ap, hs)
            if hull and not raw:
                return HypFlag(FAILS, {
                    "probe": _jsonify(tuple(ap) + (hs,)),
                    "reason": "hull contains the probe but the shadow does not"})
        return HypFlag(HOLDS_SUFF, {"probes": len(probes), "path": "exact"})
    verdicts = [model.member(ap, float(hs)) for ap, hs in probes]
    if all(v is True for v in verdicts):
        return HypFlag(HOLDS_NUM, {
            "probes": len(probes),
            "reason": "shadow membership certified at every probe"})
    return HypFlag(UNKNOWN_FLAG, {
        "probes": len(probes),
        "reason": "some probe lacks a certificate; hull side undecidable "
                  "on the sampled path"})


def check_hypotheses(instance: RobustInstance, h: Optional[RhsFunction] = None,
                     cfg: RunConfig = RunConfig()) -> HypothesisReport:
    """Evaluates the no-gap and closedness hypotheses that upgrade the
    one-way implications to equivalences.  Singleton-family variants are
    evaluated only when the family is a singleton; the right-hand-side
    variants only when a bound h is supplied."""
    flags = {}
    flags["H1"] = _h1_like(instance, cfg)
    if len(instance.scenarios) == 1:
        flags["H2"] = flags["H1"]
    if h is not None:
        worst: Optional[HypFlag] = None
        for slope, _b in h.pieces:
            f = _h1_like(instance, cfg, slope=slope)
            if worst is None or _flag_rank(f.status) > _flag_rank(worst.status):
                worst = f
        flags["H3"] = worst
        flags["H4"] = _h4_like(instance, h, cfg)
        if len(instance.scenarios) == 1:
            flags["H5"] = flags["H3"]
            flags["H6"] = flags["H4"]
    return HypothesisReport(flags)


def _flag_rank(status: str) -> int:
    return {HOLDS_SUFF: 0, HOLDS_NUM: 1, UNKNOWN_FLAG: 2, FAILS: 3}[status]


# ---------------------------------------------------------------------------
# theorem validators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    theorem: str
    sides: dict
    agreement: Optional[bool]
    fatal: bool
    hypothesis: Optional[HypothesisReport] = None
    witnesses: dict = field(default_factory=dict)
    notes: tuple = ()

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "sides": _jsonify(self.sides),
            "agreement": self.agreement,
            "fatal": self.fatal,
            "hypotheses": None if self.hypothesis is None else self.hypothesis.to_json(),
            "witnesses": _jsonify(self.witnesses),
            "notes": list(self.notes),
        }


def _procedure_valid(instance: RobustInstance, cfg: RunConfig):
    """Validity of the plain procedure: either the pointwise statement fails
    or a certificate exists.  Returns (True/False/None, evidence dict)."""
    ca = check_a(instance, cfg)
    cb = certify_b(instance, cfg)
    ev = {"check_a": ca.to_json(), "certify_b": cb.to_json()}
    if cb.certificate is not None:
        return True, ev
    if ca.verdict == VIOLATED:
        if cb.skipped:
            return None, ev
        return True, ev  # vacuously valid: pointwise statement fails
    if ca.verdict == UNKNOWN or cb.skipped:
        return None, ev
    return False, ev  # holds but no certificate anywhere


def _geometric_t2_sides(instance: RobustInstance, cfg: RunConfig):
    """hull_all: the probe is in every scenario's closed conic hull;
    raw_sup: the probe is in the scaled shadow of the scenario sup;
    raw_intersection: the probe is in the scaled intersection of scenario
    shadows (reported for reference; the sup shadow is what the validated
    equivalence uses, since scenarios may reach their values at different
    decision points)."""
    dy = instance.dim_y
    probe = (Q0,) * dy + (rat(-1),)
    if instance.all_polyhedral():
        hull_all = True
        raw_each = []
        for F in instance.scenarios:
            epr = geometry.epi_projection(F)
            model = geometry.projection_cone_model(epr)
            hull_all = hull_all and cone_member(probe, model, "closed_hull")
            raw_each.append(geometry.scaled_shadow_member_direct(epr.poly))
        sup_shadow = geometry.epi_projection(geometry.sup_scenario(instance)).poly
        raw_sup = geometry.scaled_shadow_member_direct(sup_shadow)
        return {"hull_all": hull_all, "raw_sup": raw_sup,
                "raw_intersection": all(raw_each), "path": "exact"}
    seed = _inst_seed(cfg, instance, "t2_geo")
    hull_all = True
    raw_each = []
    for F in instance.scenarios:
        epr = geometry.epi_projection(F, box=cfg.box, seed=seed)
        model = geometry.projection_cone_model(epr)
        hull_all = hull_all and cone_member(probe, model, "closed_hull")
        sub = RobustInstance(instance.dim_x, instance.dim_y, (F,))
        res = ascent.minimize_sup(sub, box=cfg.box, seed=seed,
                                  grid_per_axis=cfg.grid_per_axis)
        raw_each.append(res.value == NEG_INF or res.value < -1e-9)
    raw_sup = geometry._sampled_sup_shadow_member(
        instance, box=cfg.box, per_axis=cfg.grid_per_axis)
    return {"hull_all": hull_all, "raw_sup": raw_sup,
            "raw_intersection": all(raw_each), "path": "sampled"}


def validate_equivalence(instance: RobustInstance, theorem: str,
                         h: Optional[RhsFunction] = None,
                         cfg: RunConfig = RunConfig()) -> ValidationReport:
    """Evaluates both sides of the named characterization and checks the
    direction(s) it asserts.  A contradiction on the exact path under
    satisfied hypotheses is flagged fatal (it would mean an implementation
    bug, the mathematics guarantees agreement); heuristic paths downgrade to
    an unknown agreement instead."""
    theorem = theorem.lower()
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem!r}")
    if theorem in ("c2_1", "c2_2", "c3_1", "c4_1") and len(instance.scenarios) != 1:
        raise ValueError(f"{theorem} applies to singleton families")
    if theorem in ("t4_1", "c4_1"):
        if h is None:
            raise ValueError(f"{theorem} needs a right-hand-side function")
        return _validate_rhs(instance, theorem, h, cfg)
    if theorem in ("t2_1", "c2_1", "c2_2"):
        return _validate_t2(instance, theorem, cfg)
    return _validate_t3(instance, theorem, cfg)


def _validate_t2(instance, theorem, cfg) -> ValidationReport:
    valid, ev = _procedure_valid(instance, cfg)
    geo = _geometric_t2_sides(instance, cfg)
    exact = geo["path"] == "exact"
    notes = []
    if theorem == "c2_2":
        model = geometry.projection_cone_model(
            geometry.epi_projection(instance.scenarios[0]))
        pre_ok = _closure_convex_precondition(model, cfg)
        if not pre_ok:
            return ValidationReport(theorem, {"procedure_valid": valid, **geo,
                                              "precondition_convex_closure": False},
                                    None, False, witnesses=ev,
                                    notes=("precondition failed: the closure "
                                           "of the scaled shadow is not convex",))
        notes.append("closure-convexity precondition accepted on sampled combinations")
        in_cl = _closure_member(model, (Q0,) * instance.dim_y + (rat(-1),))
        geo_valid = not (in_cl and not geo["raw_sup"])
        geo["closure_member"] = in_cl
    else:
        geo_valid = not (geo["hull_all"] and not geo["raw_sup"])
    agreement = None
    fatal = False
    if valid is not None:
        agreement = (valid == geo_valid)
        fatal = exact and not agreement
    sides = {"procedure_valid": valid, "geometric_valid": geo_valid, **geo}
    return ValidationReport(theorem, sides, agreement, fatal,
                            witnesses=ev, notes=tuple(notes))


def _closure_member(model: ConeModel, probe) -> bool:
    """Membership in the closure of the scaled set: the scaled set itself
    plus the limit directions contributed by the recession cone."""
    if cone_member(probe, model, "raw_cone"):
        return True
    if not model.rays:
        return False
    ray_cone = ConeModel(model.dim, (tuple([Q0] * model.dim),), model.rays)
    return cone_member(probe, ray_cone, "closed_hull")


def _closure_convex_precondition(model: ConeModel, cfg: RunConfig) -> bool:
    """Sampled acceptance of "the closure of the scaled shadow is convex":
    random conic combinations of generators must land back inside the
    closure."""
    if model.is_empty:
        return True
    rng = np.random.default_rng(ascent.stable_seed(cfg.seed, "c22_pre"))
    gens = list(model.points) + list(model.rays)
    for _ in range(50):
        k = rng.integers(2, min(4, len(gens)) + 1) if len(gens) >= 2 else 1
        idx = rng.choice(len(gens), size=int(k), replace=False)
        w = rng.uniform(0.2, 2.0, size=int(k))
        combo = [Q0] * model.dim
        for j, i in enumerate(idx):
            wq = rat(float(w[j]))
            combo = [c + wq * g for c, g in zip(combo, gens[int(i)])]
        if not _closure_member(model, tuple(combo)):
            return False
    return True


def _validate_t3(instance, theorem, cfg) -> ValidationReport:
    valid, ev = _procedure_valid(instance, cfg)
    exact_bi = all(biconjugate_is_exact(F) for F in instance.scenarios)
    notes = []
    if exact_bi:
        bicon_valid = valid
        notes.append("biconjugate family coincides with the family itself "
                     "(closed convex scenarios); statement (ii) inherits (i)")
    else:
        bicon_valid = None
        notes.append("nonconvex scenarios: biconjugate-family validity is "
                     "not exactly computable, reported as unknown")
    seed = _inst_seed(cfg, instance, "t3_fsharp")
    model = geometry.build_f_sharp(
        instance, seed=seed, iters=cfg.ascent_iters, restarts=cfg.restarts,
        step_scale=cfg.step_scale)
    origin = [Q0] * instance.dim_x if model.is_exact else [0.0] * instance.dim_x
    raw0 = model.member(origin, Q0 if model.is_exact else 0.0)
    hull0 = model.hull_member(origin, Q0) if model.is_exact else (
        True if raw0 is True else None)
    if raw0 is None or hull0 is None:
        ccr = True if raw0 is True else None
    else:
        ccr = not (hull0 and not raw0)
    hyp = check_hypotheses(instance, None, cfg)
    sides = {"procedure_valid": valid, "biconjugate_procedure_valid": bicon_valid,
             "fsharp_closed_convex_regarding_origin": ccr,
             "fsharp_raw_origin": raw0, "fsharp_hull_origin": hull0,
             "path": "exact" if model.is_exact else "sampled"}
    # asserted chain: (i) => (ii) => (iii); equivalence under the no-gap flag
    fatal = False
    agreement = None
    if valid is not None and ccr is not None:
        chain_ok = (not valid) or (bicon_valid in (True, None) and ccr)
        h1 = "H2" if theorem == "c3_1" else "H1"
        if hyp.holds(h1):
            agreement = (valid == ccr) and chain_ok
        else:
            agreement = chain_ok
            notes.append("no-gap hypothesis not established: only the "
                         "forward chain is asserted")
        fatal = model.is_exact and instance.all_polyhedral() and not agreement
    return ValidationReport(theorem, sides, agreement, fatal, hypothesis=hyp,
                            witnesses=ev, notes=tuple(notes))


def _validate_rhs(instance, theorem, h, cfg) -> ValidationReport:
    hyp = check_hypotheses(instance, h, cfg)
    cah = check_a_h(instance, h, cfg)
    cbh = certify_b_h(instance, h, cfg)
    h3, h4 = ("H5", "H6") if theorem == "c4_1" else ("H3", "H4")
    sides = {"pointwise_dominance": cah.verdict,
             "certified_on_probes": cbh.valid_on_probes}
    notes = []
    fatal = False
    agreementelems = []
    # unconditional direction: certificates on every probe forbid "violated"
    if cbh.valid_on_probes is True and cah.verdict == VIOLATED:
        gap = _float_ext(cah.value)
        if instance.all_polyhedral() or gap < -cfg.tol_sub:
            fatal = True
            notes.append("certificates on all probes contradict a pointwise "
                         "violation")
        agreementelems.append(False)
    if hyp.holds(h3) and hyp.holds(h4):
        if cah.verdict == HOLDS and cbh.valid_on_probes is True:
            agreementelems.append(True)
        elif cah.verdict == VIOLATED and cbh.valid_on_probes is False:
            agreementelems.append(True)
        elif cah.verdict == UNKNOWN or cbh.valid_on_probes is None:
            pass
        else:
            agreementelems.append(False)
            if instance.all_polyhedral():
                fatal = True
        agreement = all(agreementelems) if agreementelems else None
    else:
        notes.append("hypotheses not established: validity is not asserted, "
                     "only the certificate-to-pointwise direction is checked")
        agreement = all(agreementelems) if agreementelems else None
    return ValidationReport(theorem, sides, agreement, fatal, hypothesis=hyp,
                            witnesses={"check_a_h": cah.to_json(),
                                       "certify_b_h": cbh.to_json()},
                            notes=tuple(notes))


# ---------------------------------------------------------------------------
# json plumbing
# ---------------------------------------------------------------------------


def _decimal(v) -> Optional[str]:
    if v is None:
        return None
    if is_pos_inf(v):
        return "inf"
    if isinstance(v, float) and v == NEG_INF:
        return "-inf"
    return repr(float(v))


def _float_ext(v) -> float:
    if v is None:
        return math.nan
    if is_pos_inf(v):
        return math.inf
    if isinstance(v, float) and v == NEG_INF:
        return -math.inf
    return float(v)


def _jsonify(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, mpq):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(float(v)) for v in obj.tolist()]
    if isinstance(obj, np.floating):
        return _jsonify(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return str(obj)


def report_payload(kind: str, cfg: RunConfig, body: dict, *,
                   input_digest: Optional[str] = None,
                   tool_version: str = "") -> dict:
    return {
        "kind": kind,
        "tool": {"name": "sproclab", "version": tool_version},
        "config": cfg.to_json(),
        "input_sha256": input_digest,
        "result": _jsonify(body),
    }


def dump_report(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
