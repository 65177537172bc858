"""Concrete perturbation-function families, their evaluation and conjugacy.

Two families are supported, chosen so that every dual object the checkers
need is either exactly computable or comes with an honest lower bound:

* ``ExplicitPolyhedral``: a finite max of affine pieces over a joint
  (x, y) space, optionally restricted to a polyhedral domain, +inf outside.
  All data is rational; conjugates and biconjugates reduce to exact LPs.
* ``ConstraintPerturbation``: F(x, y) = f(x) when g_i(x) <= y_i for all i
  and +inf otherwise, with f and the g_i quadratic (convexity NOT assumed,
  difference-of-convex instances are first-class citizens).  Conjugates
  reduce to unconstrained quadratic infima; biconjugates of nonconvex
  instances are reported as certified lower bounds over a recorded probe
  set, never as exact values.

Extended-real convention: values live in Q u {-inf, +inf} (rationals on the
exact path, floats on the quadratic path).  Adding +inf and -inf is a bug in
the caller's instance and is rejected loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .linrat import (
    LpStatus,
    Polyhedron,
    lp_solve,
    rat,
    rat_vec,
)
from .symeig import NEG_INF, POS_INF, PSD_TOL, SymMatrix, eigh_sym, quad_inf

ExtReal = Union[int, float, object]  # rationals, floats, or +-inf floats


def is_pos_inf(v) -> bool:
    return isinstance(v, float) and v == POS_INF


def is_neg_inf(v) -> bool:
    return isinstance(v, float) and v == NEG_INF


def is_finite_ext(v) -> bool:
    return not is_pos_inf(v) and not is_neg_inf(v)


def ext_add(u, v):
    """Extended-real addition; (+inf) + (-inf) is rejected as an error."""
    if is_pos_inf(u) and is_neg_inf(v) or is_neg_inf(u) and is_pos_inf(v):
        raise ValueError("undefined sum (+inf) + (-inf)")
    if is_pos_inf(u) or is_pos_inf(v):
        return POS_INF
    if is_neg_inf(u) or is_neg_inf(v):
        return NEG_INF
    return u + v


# ---------------------------------------------------------------------------
# Quadratic functions (float path)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadraticFn:
    """q(x) = x^T Q x + a^T x + c (no 1/2 factor)."""

    Q: SymMatrix
    a: np.ndarray
    c: float

    @staticmethod
    def make(Q, a, c) -> "QuadraticFn":
        Qm = Q if isinstance(Q, SymMatrix) else SymMatrix.make(Q)
        av = np.asarray(a, dtype=float)
        if av.shape != (Qm.n,):
            raise ValueError("linear term length does not match Q")
        if not (np.all(np.isfinite(av)) and math.isfinite(float(c))):
            raise ValueError("quadratic coefficients must be finite")
        av = av.copy()
        av.setflags(write=False)
        return QuadraticFn(Qm, av, float(c))

    @property
    def dim(self) -> int:
        return self.Q.n

    def __call__(self, x) -> float:
        xv = np.asarray(x, dtype=float)
        return float(xv @ self.Q.a @ xv + self.a @ xv + self.c)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.einsum("ij,jk,ik->i", xs, self.Q.a, xs) + xs @ self.a + self.c

    def is_convex(self, tol: float = PSD_TOL) -> bool:
        return float(eigh_sym(self.Q).values[0]) >= -tol

    def to_json(self) -> dict:
        return {"Q": [[float(v) for v in row] for row in self.Q.a],
                "a": [float(v) for v in self.a], "c": self.c}

    @staticmethod
    def from_json(data: dict) -> "QuadraticFn":
        return QuadraticFn.make(data["Q"], data["a"], data["c"])

    @staticmethod
    def constant(dim: int, c: float) -> "QuadraticFn":
        return QuadraticFn.make(np.zeros((dim, dim)), np.zeros(dim), c)


def combine_quadratics(fns: Sequence[QuadraticFn], weights: Sequence[float]) -> QuadraticFn:
    """Weighted coefficient sum; exact in the coefficient arrays."""
    if len(fns) != len(weights) or not fns:
        raise ValueError("need matching nonempty functions and weights")
    n = fns[0].dim
    Q = np.zeros((n, n))
    a = np.zeros(n)
    c = 0.0
    for fn, w in zip(fns, weights):
        if fn.dim != n:
            raise ValueError("mixed dimensions in combination")
        Q = Q + w * fn.Q.a
        a = a + w * fn.a
        c = c + w * fn.c
    return QuadraticFn.make(Q, a, c)


# ---------------------------------------------------------------------------
# Polyhedral functions (exact path)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyhedralFn:
    """Finite max of affine pieces <slope, z> + intercept over an optional
    polyhedral domain in z; +inf outside the domain."""

    dim: int
    pieces: tuple  # of (slope vec, intercept)
    domain: Optional[Polyhedron]

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a polyhedral function needs at least one piece")
        for slope, _b in self.pieces:
            if len(slope) != self.dim:
                raise ValueError("piece slope length does not match dimension")
        if self.domain is not None and self.domain.dim != self.dim:
            raise ValueError("domain dimension mismatch")

    @staticmethod
    def make(dim, pieces, domain=None) -> "PolyhedralFn":
        packed = tuple((rat_vec(s), rat(b)) for s, b in pieces)
        return PolyhedralFn(dim, packed, domain)

    def __call__(self, z) -> ExtReal:
        zv = rat_vec(z)
        if self.domain is not None and not self.domain.contains(zv):
            return POS_INF
        return max(sum((s * x for s, x in zip(slope, zv)), rat(0)) + b
                   for slope, b in self.pieces)

    def to_json(self) -> dict:
        out = {"pieces": [{"slope": [str(v) for v in s], "intercept": str(b)}
                          for s, b in self.pieces]}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out


# ---------------------------------------------------------------------------
# Rockafellian variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitPolyhedral:
    """Exactly-computable family member: a polyhedral function of (x, y)."""

    dim_x: int
    dim_y: int
    fn: PolyhedralFn

    def __post_init__(self):
        if self.fn.dim != self.dim_x + self.dim_y:
            raise ValueError("piece dimension must equal dim_x + dim_y")

    kind = "explicit_polyhedral"


@dataclass(frozen=True, eq=False)
class ConstraintPerturbation:
    """F(x, y) = f(x) on {g(x) <= y componentwise}, +inf elsewhere."""

    f: QuadraticFn
    g: tuple  # of QuadraticFn, one per perturbation coordinate

    def __post_init__(self):
        for gi in self.g:
            if gi.dim != self.f.dim:
                raise ValueError("constraint dimension mismatch")

    @property
    def dim_x(self) -> int:
        return self.f.dim

    @property
    def dim_y(self) -> int:
        return len(self.g)

    kind = "constraint_perturbation"

    def is_convex(self, tol: float = PSD_TOL) -> bool:
        return self.f.is_convex(tol) and all(gi.is_convex(tol) for gi in self.g)


Rockafellian = Union[ExplicitPolyhedral, ConstraintPerturbation]


@dataclass(frozen=True, eq=False)
class RobustInstance:
    """Finite scenario family sharing decision and perturbation dimensions."""

    dim_x: int
    dim_y: int
    scenarios: tuple

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("instance needs at least one scenario")
        for s in self.scenarios:
            if s.dim_x != self.dim_x or s.dim_y != self.dim_y:
                raise ValueError("scenario dimensions disagree with instance")

    def all_polyhedral(self) -> bool:
        return all(isinstance(s, ExplicitPolyhedral) for s in self.scenarios)

    def all_quadratic(self) -> bool:
        return all(isinstance(s, ConstraintPerturbation) for s in self.scenarios)

    def all_convex(self, tol: float = PSD_TOL) -> bool:
        return all(
            isinstance(s, ExplicitPolyhedral) or s.is_convex(tol)
            for s in self.scenarios
        )

    def to_json(self) -> dict:
        scen = []
        for s in self.scenarios:
            if isinstance(s, ExplicitPolyhedral):
                entry = {"kind": s.kind}
                entry.update(s.fn.to_json())
            else:
                entry = {"kind": s.kind, "f": s.f.to_json(),
                         "g": [gi.to_json() for gi in s.g]}
            scen.append(entry)
        return {"dim_x": self.dim_x, "dim_y": self.dim_y, "scenarios": scen}

    @staticmethod
    def from_json(data: dict) -> "RobustInstance":
        dim_x = int(data["dim_x"])
        dim_y = int(data["dim_y"])
        scenarios = []
        for entry in data["scenarios"]:
            kind = entry["kind"]
            if kind == "explicit_polyhedral":
                domain = (Polyhedron.from_json(entry["domain"])
                          if "domain" in entry and entry["domain"] is not None
                          else None)
                pieces = [(p["slope"], p["intercept"]) for p in entry["pieces"]]
                fn = PolyhedralFn.make(dim_x + dim_y, pieces, domain)
                scenarios.append(ExplicitPolyhedral(dim_x, dim_y, fn))
            elif kind == "constraint_perturbation":
                f = QuadraticFn.from_json(entry["f"])
                g = tuple(QuadraticFn.from_json(gj) for gj in entry["g"])
                scenarios.append(ConstraintPerturbation(f, g))
            else:
                raise ValueError(f"unknown scenario kind {kind!r}")
        return RobustInstance(dim_x, dim_y, tuple(scenarios))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "RobustInstance":
        return RobustInstance.from_json(json.loads(text))


def singleton(F: Rockafellian) -> RobustInstance:
    return RobustInstance(F.dim_x, F.dim_y, (F,))


# ---------------------------------------------------------------------------
# Evaluation / conjugation
# ---------------------------------------------------------------------------


def evaluate(F: Rockafellian, x, y) -> ExtReal:
    """Pointwise value of the perturbation function at (x, y)."""
    if isinstance(F, ExplicitPolyhedral):
        if len(x) != F.dim_x or len(y) != F.dim_y:
            raise ValueError("dimension mismatch in evaluate")
        return F.fn(tuple(x) + tuple(y))
    if len(x) != F.dim_x or len(y) != F.dim_y:
        raise ValueError("dimension mismatch in evaluate")
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    for gi, yi in zip(F.g, yv):
        if gi(xv) > yi:
            return POS_INF
    return F.f(xv)


def _conjugate_poly_lp(F: ExplicitPolyhedral, w):
    """Conjugate of a polyhedral-max function as an exact LP in (z, t)."""
    d = F.fn.dim
    rows = []
    for slope, b in F.fn.pieces:
        rows.append((tuple(slope) + (rat(-1),), -b))
    if F.fn.domain is not None:
        for normal, off in F.fn.domain.rows:
            rows.append((tuple(normal) + (rat(0),), off))
    epi = Polyhedron(d + 1, tuple(rows))
    obj = list(w) + [rat(-1)]
    out = lp_solve(obj, epi, "max")
    if out.status is LpStatus.OPTIMAL:
        return out.value
    if out.status is LpStatus.UNBOUNDED:
        return POS_INF
    return NEG_INF  # empty epigraph: F is identically +inf


def conjugate_at(F: Rockafellian, xp, mu) -> ExtReal:
    """The convex conjugate F*(x', mu) = sup over (x, y) of
    <x', x> + <mu, y> - F(x, y).

    Polyhedral variant: exact rational LP value.  Constraint-perturbation
    variant: +inf unless mu <= 0 componentwise (exactly), else minus the
    closed-form infimum of f - sum_i mu_i g_i - <x', .>.
    """
    if isinstance(F, ExplicitPolyhedral):
        if len(xp) != F.dim_x or len(mu) != F.dim_y:
            raise ValueError("dual dimension mismatch")
        w = rat_vec(tuple(xp) + tuple(mu))
        return _conjugate_poly_lp(F, w)
    if len(xp) != F.dim_x or len(mu) != F.dim_y:
        raise ValueError("dual dimension mismatch")
    muv = np.asarray(mu, dtype=float)
    if np.any(muv > 0.0):
        return POS_INF
    xpv = np.asarray(xp, dtype=float)
    n = F.dim_x
    Q = F.f.Q.a - sum((m * gi.Q.a for m, gi in zip(muv, F.g)), np.zeros((n, n)))
    a = F.f.a - sum((m * gi.a for m, gi in zip(muv, F.g)), np.zeros(n)) - xpv
    c = F.f.c - float(sum(m * gi.c for m, gi in zip(muv, F.g)))
    val = quad_inf(SymMatrix.make(Q), a, c)
    return POS_INF if val == NEG_INF else -val


def dual_probe_points(F: ConstraintPerturbation, seed: int, count: int):
    """Deterministic dual probe set used for nonconvex biconjugate bounds."""
    rng = np.random.default_rng(seed)
    n, m = F.dim_x, F.dim_y
    probes = [(np.zeros(n), np.zeros(m))]
    for j in range(n):
        for s in (1.0, -1.0):
            xp = np.zeros(n)
            xp[j] = s
            probes.append((xp, np.zeros(m)))
    for scale in (0.5, 1.0, 2.0, 4.0):
        if m:
            probes.append((np.zeros(n), -scale * np.ones(m)))
    k = max(0, count - len(probes))
    for _ in range(k):
        xp = rng.uniform(-5.0, 5.0, size=n)
        mu = -np.abs(rng.uniform(0.0, 5.0, size=m)) if m else np.zeros(0)
        probes.append((xp, mu))
    return probes


class BiconjugateLowerBound:
    """Certified affine minorant family for a nonconvex constraint
    perturbation: each dual probe (x', mu) with a finite conjugate value
    contributes the affine function <x', x> + <mu, y> - F*(x', mu), and the
    pointwise max of these lower-bounds the biconjugate.  The probe set and
    its conjugate values are computed once and reused across points."""

    def __init__(self, F: "ConstraintPerturbation", seed: int = 0,
                 probe_count: int = 200):
        self.F = F
        self.seed = seed
        self.probe_count = probe_count
        xps, mus, vals = [], [], []
        for xp, mu in dual_probe_points(F, seed, probe_count):
            conj = conjugate_at(F, xp, mu)
            if is_pos_inf(conj):
                continue
            xps.append(xp)
            mus.append(mu)
            vals.append(float(conj))
        self._xp = np.array(xps) if xps else np.zeros((0, F.dim_x))
        self._mu = np.array(mus) if mus else np.zeros((0, F.dim_y))
        self._conj = np.array(vals)

    def value(self, x, y) -> ExtReal:
        if len(self._conj) == 0:
            return NEG_INF
        xv = np.asarray(x, dtype=float)
        yv = np.asarray(y, dtype=float)
        return float(np.max(self._xp @ xv + self._mu @ yv - self._conj))

    def value_many(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if len(self._conj) == 0:
            return np.full(len(xs), NEG_INF)
        vals = xs @ self._xp.T + ys @ self._mu.T - self._conj
        return np.max(vals, axis=1)


def biconjugate_at(F: Rockafellian, x, y, *, seed: int = 0,
                   probe_count: int = 200) -> ExtReal:
    """F**(x, y).

    Exact whenever F is closed convex: polyhedral-max functions are fixed by
    biconjugation, and a constraint perturbation with convex f and g equals
    its biconjugate because its epigraph is closed convex.  For nonconvex
    constraint perturbations the value is a certified lower bound: the sup of
    <x',x> + <mu,y> - F*(x',mu) over the deterministic probe set
    ``dual_probe_points(F, seed, probe_count)``.
    """
    if isinstance(F, ExplicitPolyhedral):
        return evaluate(F, x, y)
    if F.is_convex():
        return evaluate(F, x, y)
    return BiconjugateLowerBound(F, seed, probe_count).value(x, y)


def biconjugate_is_exact(F: Rockafellian) -> bool:
    return isinstance(F, ExplicitPolyhedral) or F.is_convex()


def lagrangian_combine(F: ConstraintPerturbation, lam) -> QuadraticFn:
    """f + sum_i lambda_i g_i for lambda >= 0, as one quadratic."""
    lamv = np.asarray(lam, dtype=float)
    if lamv.shape != (F.dim_y,):
        raise ValueError("multiplier length does not match constraint count")
    if np.any(lamv < 0.0):
        raise ValueError("multipliers must be nonnegative")
    return combine_quadratics((F.f,) + F.g, [1.0] + [float(v) for v in lamv])


# ---------------------------------------------------------------------------
# Aggregate dual objects for a robust instance
# ---------------------------------------------------------------------------


class DualObjects:
    """Evaluation hooks around a robust instance.

    ``p(x)`` is the scenario supremum at y = 0; ``q_star(x)`` is the
    scenario supremum of biconjugates at y = 0 (a lower bound wherever some
    scenario's biconjugate is only bounded); ``q_upper(x')`` is a probe-set
    upper bound for the dual infimum over scenarios and multipliers.  The
    dual infimum itself is never claimed to be attained.
    """

    def __init__(self, instance: RobustInstance, seed: int = 0,
                 probe_count: int = 100):
        self.instance = instance
        self.seed = seed
        self.probe_count = probe_count

    def p(self, x) -> ExtReal:
        zeros = [0] * self.instance.dim_y
        vals = [evaluate(F, x, zeros) for F in self.instance.scenarios]
        return max(vals, key=_ext_key)

    def q_star(self, x) -> ExtReal:
        zeros = [0] * self.instance.dim_y
        vals = [
            biconjugate_at(F, x, zeros, seed=self.seed,
                           probe_count=self.probe_count)
            for F in self.instance.scenarios
        ]
        return max(vals, key=_ext_key)

    def q_star_is_exact(self) -> bool:
        return all(biconjugate_is_exact(F) for F in self.instance.scenarios)

    def q_upper(self, xp) -> ExtReal:
        """Upper bound on inf over (scenario, mu) of F*(x', mu)."""
        rng = np.random.default_rng(self.seed)
        m = self.instance.dim_y
        best = POS_INF
        mus = [np.zeros(m)] + [-np.abs(rng.uniform(0, 5, size=m))
                               for _ in range(self.probe_count)]
        for F in self.instance.scenarios:
            for mu in mus:
                val = conjugate_at(F, xp, mu)
                if _ext_key(val) < _ext_key(best):
                    best = val
        return best


def _ext_key(v):
    if is_pos_inf(v):
        return math.inf
    if is_neg_inf(v):
        return -math.inf
    return float(v)
