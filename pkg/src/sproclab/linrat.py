"""Exact rational polyhedra: LP with certificates, projection, cone membership.

Everything in this module is computed over arbitrary-precision rationals
(gmpy2.mpq); there are no tolerances anywhere.  The simplex uses Bland's
pivoting rule, so every outcome is deterministic for a fixed input and the
solver cannot cycle.  Scale is deliberately small (single-digit dimensions,
a few dozen rows): the goal is certifiable answers, not throughput.

Conventions
-----------
* A ``Polyhedron`` is an H-representation ``{z : <normal_i, z> <= offset_i}``
  over free variables.
* A ``ConeModel`` is a generator pair (points V, rays R).  Used "as a set" it
  stands for conv(V) + cone(R); used under cone semantics it stands for the
  cone spanned by that set.
* ``lp_solve`` always returns a certificate that can be checked by
  substitution: optimal point + dual multipliers, a Farkas vector, or an
  improving ray.
* Coordinate index sets (``fm_project``) are 0-based.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from gmpy2 import mpq

Rational = mpq
RationalLike = Union[int, str, float, Fraction, mpq]
Vec = tuple

Q0 = mpq(0)
Q1 = mpq(1)


def rat(value: RationalLike) -> mpq:
    """Coerce ints, 'p/q' strings, Fractions and floats to an exact rational.

    Floats are lifted exactly (binary expansion), which keeps downstream
    arithmetic honest when sampled data enters the exact machinery.
    """
    if isinstance(value, mpq):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str, Fraction)):
        return mpq(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {value!r} is not a rational")
        return mpq(Fraction(value))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rat_vec(values: Iterable[RationalLike]) -> Vec:
    return tuple(rat(v) for v in values)


def dot(u: Sequence, v: Sequence) -> mpq:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), Q0)


def _fmt(q: mpq) -> str:
    return str(q)


# ---------------------------------------------------------------------------
# Polyhedron / ConeModel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polyhedron:
    """H-representation: rows (normal, offset) meaning <normal, z> <= offset."""

    dim: int
    rows: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("polyhedron dimension must be >= 1")
        for normal, _offset in self.rows:
            if len(normal) != self.dim:
                raise ValueError("row length does not match dimension")

    @staticmethod
    def make(dim: int, rows: Iterable) -> "Polyhedron":
        packed = tuple((rat_vec(n), rat(b)) for n, b in rows)
        return Polyhedron(dim, packed)

    def contains(self, point: Sequence[RationalLike]) -> bool:
        p = rat_vec(point)
        return all(dot(n, p) <= b for n, b in self.rows)

    def slack(self, point: Sequence[RationalLike]) -> mpq:
        """Smallest row slack offset - <normal, point>; +inf convention absent
        (a polyhedron with no rows returns 0)."""
        p = rat_vec(point)
        slacks = [b - dot(n, p) for n, b in self.rows]
        return min(slacks) if slacks else Q0

    def is_empty(self) -> bool:
        return poly_is_empty(self)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "rows": [
                {"normal": [_fmt(v) for v in n], "offset": _fmt(b)}
                for n, b in self.rows
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "Polyhedron":
        rows = [(r["normal"], r["offset"]) for r in data["rows"]]
        return Polyhedron.make(int(data["dim"]), rows)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "Polyhedron":
        return Polyhedron.from_json(json.loads(text))


@dataclass(frozen=True)
class ConeModel:
    """Generator representation: finite point set V and ray set R.

    Empty V and R together flag the empty set; membership queries on an empty
    model are vacuously false for every probe, including the origin.
    """

    dim: int
    points: tuple
    rays: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("cone model dimension must be >= 1")
        for v in self.points + self.rays:
            if len(v) != self.dim:
                raise ValueError("generator length does not match dimension")

    @property
    def is_empty(self) -> bool:
        return not self.points and not self.rays

    @staticmethod
    def make(dim: int, points: Iterable = (), rays: Iterable = ()) -> "ConeModel":
        return ConeModel(dim, tuple(rat_vec(p) for p in points),
                         tuple(rat_vec(r) for r in rays))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "points": [[_fmt(v) for v in p] for p in self.points],
            "rays": [[_fmt(v) for v in r] for r in self.rays],
        }

    @staticmethod
    def from_json(data: dict) -> "ConeModel":
        return ConeModel.make(int(data["dim"]), data.get("points", ()),
                              data.get("rays", ()))


# ---------------------------------------------------------------------------
# Simplex over rationals (equality standard form)
# ---------------------------------------------------------------------------


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    """Result of ``lp_solve``.  Exactly one certificate family is populated.

    * OPTIMAL: ``value``, ``point`` and ``dual`` (y >= 0 with
      c_solved + A^T y = 0 for the internally minimized objective).
    * INFEASIBLE: ``farkas`` (y >= 0, y^T A = 0, y^T b < 0).
    * UNBOUNDED: ``point`` (a feasible point) and ``ray`` (direction d with
      A d <= 0 along which the requested objective improves forever).
    """

    status: LpStatus
    value: Optional[mpq] = None
    point: Optional[tuple] = None
    dual: Optional[tuple] = None
    farkas: Optional[tuple] = None
    ray: Optional[tuple] = None


def _pivot(T, z, basis, r, jc):
    pivot = T[r][jc]
    if pivot != 1:
        inv = Q1 / pivot
        T[r] = [v * inv for v in T[r]]
    rowr = T[r]
    for i in range(len(T)):
        if i == r:
            continue
        f = T[i][jc]
        if f:
            T[i] = [a - f * b for a, b in zip(T[i], rowr)]
    f = z[jc]
    if f:
        z[:] = [a - f * b for a, b in zip(z, rowr)]
    basis[r] = jc


def _bland_iterate(T, z, basis, allowed):
    """Run simplex iterations with Bland's rule.

    Returns None at optimality or the entering column index whose whole
    column is nonpositive (unboundedness witness).
    """
    while True:
        jc = -1
        for j in allowed:
            if z[j] < 0:
                jc = j
                break
        if jc < 0:
            return None
        r = -1
        best = None
        for i in range(len(T)):
            a = T[i][jc]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    best = ratio
                    r = i
        if r < 0:
            return jc
        _pivot(T, z, basis, r, jc)


def solve_eq(rows, rhs, cost):
    """Exactly solve min cost.x  s.t.  rows.x = rhs, x >= 0.

    Returns (status, x, y, ray, value) where y is the equality dual in the
    caller's row orientation: at OPTIMAL, cost_j - y.A_j >= 0 for every j and
    value = y.rhs; at INFEASIBLE, y.A <= 0 componentwise and y.rhs > 0.
    """
    m = len(rows)
    n = len(cost)
    cost = [rat(c) for c in cost]
    if m == 0:
        for j, cj in enumerate(cost):
            if cj < 0:
                ray = [Q0] * n
                ray[j] = Q1
                return (LpStatus.UNBOUNDED, None, None, ray, None)
        return (LpStatus.OPTIMAL, [Q0] * n, [], None, Q0)

    sigma = []
    T = []
    for i in range(m):
        row = [rat(v) for v in rows[i]]
        b = rat(rhs[i])
        if len(row) != n:
            raise ValueError("row length does not match cost length")
        if b < 0:
            row = [-v for v in row]
            b = -b
            sigma.append(-1)
        else:
            sigma.append(1)
        art = [Q0] * m
        art[i] = Q1
        T.append(row + art + [b])

    basis = [n + i for i in range(m)]
    # Phase-1 reduced-cost row: cost 1 on artificials, 0 elsewhere.
    z = [Q0] * n + [Q1] * m + [Q0]
    for Ti in T:
        z = [a - b for a, b in zip(z, Ti)]
    allowed = range(n)
    _bland_iterate(T, z, basis, allowed)
    if -z[-1] > 0:
        y_int = [Q1 - z[n + i] for i in range(m)]
        y = [s * v for s, v in zip(sigma, y_int)]
        return (LpStatus.INFEASIBLE, None, y, None, None)

    # Drive remaining artificials out of the basis; drop dependent rows.
    dropped = set()
    r = 0
    while r < len(T):
        if basis[r] >= n:
            jc = -1
            for j in range(n):
                if T[r][j] != 0:
                    jc = j
                    break
            if jc >= 0:
                _pivot(T, z, basis, r, jc)
                r += 1
            else:
                art_index = basis[r] - n
                dropped.add(art_index)
                del T[r]
                del basis[r]
        else:
            r += 1

    # Phase-2 reduced-cost row, rebuilt from scratch for the real objective.
    z2 = list(cost) + [Q0] * m + [Q0]
    for i, bi in enumerate(basis):
        cb = cost[bi] if bi < n else Q0
        if cb:
            Ti = T[i]
            z2 = [a - cb * b for a, b in zip(z2, Ti)]
    jc = _bland_iterate(T, z2, basis, allowed)
    if jc is not None:
        ray = [Q0] * n
        ray[jc] = Q1
        for i, bi in enumerate(basis):
            if bi < n:
                ray[bi] = -T[i][jc]
        x = [Q0] * n
        for i, bi in enumerate(basis):
            if bi < n:
                x[bi] = T[i][-1]
        return (LpStatus.UNBOUNDED, x, None, ray, None)

    x = [Q0] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = T[i][-1]
    y = [Q0] * m
    for i in range(m):
        if i not in dropped:
            y[i] = sigma[i] * (-z2[n + i])
    value = -z2[-1]
    return (LpStatus.OPTIMAL, x, y, None, value)


def lp_solve(objective: Sequence[RationalLike], constraints: Polyhedron,
             sense: str = "min") -> LpOutcome:
    """Exact LP over a polyhedron of free variables.

    min/max <objective, z>  s.t.  z in constraints.  The returned
    certificates are in the caller's data: ``farkas`` is y >= 0 with
    y^T A = 0 and y^T b < 0; ``dual`` is y >= 0 with A^T y = -c_solved where
    c_solved is the minimized objective (the negated objective for "max").
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    obj = rat_vec(objective)
    d = constraints.dim
    if len(obj) != d:
        raise ValueError(f"objective length {len(obj)} != dimension {d}")
    c = [-v for v in obj] if sense == "max" else list(obj)
    m = len(constraints.rows)
    rows = []
    rhs = []
    for i, (normal, off) in enumerate(constraints.rows):
        slack = [Q0] * m
        slack[i] = Q1
        rows.append(list(normal) + [-v for v in normal] + slack)
        rhs.append(off)
    cost = c + [-v for v in c] + [Q0] * m
    status, x, y, ray, value = solve_eq(rows, rhs, cost)
    if status is LpStatus.INFEASIBLE:
        farkas = tuple(-v for v in y)
        return LpOutcome(LpStatus.INFEASIBLE, farkas=farkas)
    if status is LpStatus.UNBOUNDED:
        point = tuple(x[j] - x[d + j] for j in range(d)) if x is not None else None
        direction = tuple(ray[j] - ray[d + j] for j in range(d))
        return LpOutcome(LpStatus.UNBOUNDED, point=point, ray=direction)
    point = tuple(x[j] - x[d + j] for j in range(d))
    dual = tuple(-v for v in y)
    if sense == "max":
        value = -value
    return LpOutcome(LpStatus.OPTIMAL, value=value, point=point, dual=dual)


@lru_cache(maxsize=4096)
def poly_is_empty(p: Polyhedron) -> bool:
    """Emptiness is a computed property, certified by the LP either way."""
    out = lp_solve([Q0] * p.dim, p, "min")
    return out.status is LpStatus.INFEASIBLE


def feasible_point(p: Polyhedron):
    out = lp_solve([Q0] * p.dim, p, "min")
    return out.point if out.status is LpStatus.OPTIMAL else None


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection
# ---------------------------------------------------------------------------


def _canon_row(normal, offset):
    """Scale an inequality by a positive rational so entries are a primitive
    integer vector; returns None for trivially true rows (0 <= b, b >= 0)."""
    dens = [v.denominator for v in normal] + [offset.denominator]
    lcm = 1
    for dnm in dens:
        g = _int_gcd(lcm, int(dnm))
        lcm = lcm // g * int(dnm)
    ints = [int(v * lcm) for v in normal] + [int(offset * lcm)]
    g = 0
    for v in ints:
        g = _int_gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    normal = tuple(mpq(v) for v in ints[:-1])
    offset = mpq(ints[-1])
    if all(v == 0 for v in normal) and offset >= 0:
        return None
    return (normal, offset)


def _int_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


_EMPTY_MARK = "empty"


def _dedupe_rows(rows):
    """Canonicalize, drop trivially-true rows, keep the tightest offset per
    normal direction.  Returns the string "empty" when a 0 <= negative row
    shows up."""
    best = {}
    order = []
    for normal, offset in rows:
        cr = _canon_row(normal, offset)
        if cr is None:
            continue
        n2, b2 = cr
        if all(v == 0 for v in n2):
            return _EMPTY_MARK
        if n2 in best:
            if b2 < best[n2]:
                best[n2] = b2
        else:
            best[n2] = b2
            order.append(n2)
    return [(n, best[n]) for n in order]


def _canonical_empty(dim: int) -> Polyhedron:
    return Polyhedron(dim, (((Q0,) * dim, mpq(-1)),))


def _prune_redundant(dim: int, rows):
    """One LP per row: drop rows implied by the others."""
    rows = list(rows)
    i = 0
    while i < len(rows):
        others = [rw[:2] for j, rw in enumerate(rows) if j != i]
        normal, offset = rows[i][0], rows[i][1]
        out = lp_solve(normal, Polyhedron(dim, tuple(others)), "max")
        if out.status is LpStatus.OPTIMAL and out.value <= offset:
            rows.pop(i)
        elif out.status is LpStatus.INFEASIBLE:
            # The remaining system is already empty; this row adds nothing.
            rows.pop(i)
        else:
            i += 1
    return rows


def _dedupe_hist_rows(rows):
    """Like _dedupe_rows but rows carry ancestor-index history sets."""
    best = {}
    order = []
    for normal, offset, hist in rows:
        cr = _canon_row(normal, offset)
        if cr is None:
            continue
        n2, b2 = cr
        if all(v == 0 for v in n2):
            return _EMPTY_MARK
        cur = best.get(n2)
        if cur is None:
            best[n2] = (b2, hist)
            order.append(n2)
        elif b2 < cur[0] or (b2 == cur[0] and len(hist) < len(cur[1])):
            best[n2] = (b2, hist)
    return [(n, best[n][0], best[n][1]) for n in order]


def fm_project(p: Polyhedron, keep: Iterable[int]) -> Polyhedron:
    """Exact projection onto the kept coordinates (0-based, reported in
    ascending order) via Fourier-Motzkin elimination.

    Intermediate blowup is held down three ways: Imbert's ancestor-count
    acceleration discards combination rows that are provably redundant, the
    eliminated coordinate is dropped from the working rows immediately, and
    after each eliminated variable the survivors are pruned by one LP per
    row.  Variables are eliminated in a greedy min-fill order.
    """
    keep_sorted = sorted(set(keep))
    if not keep_sorted:
        raise ValueError("keep set must be nonempty")
    for k in keep_sorted:
        if not (0 <= k < p.dim):
            raise ValueError(f"keep index {k} out of range for dim {p.dim}")

    newd = len(keep_sorted)
    # coords: original coordinate carried by each current column
    coords = list(range(p.dim))
    rows = [(n, b, frozenset([i])) for i, (n, b) in enumerate(p.rows)]
    rows = _dedupe_hist_rows(rows)
    if rows == _EMPTY_MARK:
        return _canonical_empty(newd)
    eliminated = 0
    while True:
        elim_cols = [c for c, orig in enumerate(coords) if orig not in keep_sorted]
        if not elim_cols:
            break
        # greedy: smallest product of positive and negative occurrence counts
        def fill(col):
            np_ = sum(1 for n, _, _ in rows if n[col] > 0)
            nn = sum(1 for n, _, _ in rows if n[col] < 0)
            return np_ * nn - np_ - nn

        col = min(elim_cols, key=fill)
        pos, neg, zero = [], [], []
        for normal, offset, hist in rows:
            cv = normal[col]
            if cv > 0:
                pos.append((normal, offset, hist))
            elif cv < 0:
                neg.append((normal, offset, hist))
            else:
                zero.append((normal, offset, hist))

        def drop_col(vec):
            return tuple(v for j, v in enumerate(vec) if j != col)

        new_rows = [(drop_col(n), b, h) for n, b, h in zero]
        eliminated += 1
        limit = eliminated + 1
        for (np_, bp, hp) in pos:
            cp = np_[col]
            for (nn, bn, hn) in neg:
                hist = hp | hn
                if len(hist) > limit:
                    continue  # Imbert: provably redundant combination
                cn = nn[col]
                normal = tuple(-cn * a + cp * b for a, b in zip(np_, nn))
                offset = -cn * bp + cp * bn
                new_rows.append((drop_col(normal), offset, hist))
        coords.pop(col)
        rows = _dedupe_hist_rows(new_rows)
        if rows == _EMPTY_MARK:
            return _canonical_empty(newd)
        rows = _prune_redundant(len(coords), rows)

    rows = _prune_redundant(len(coords), rows)
    # reorder columns into ascending original-coordinate order
    perm = sorted(range(newd), key=lambda j: coords[j])
    packed = []
    for normal, offset, _hist in rows:
        packed.append((tuple(normal[j] for j in perm), offset))
    return Polyhedron(newd, tuple(packed))


# ---------------------------------------------------------------------------
# Cone membership
# ---------------------------------------------------------------------------


def cone_member(point: Sequence[RationalLike], c: ConeModel,
                semantics: str = "closed_hull") -> bool:
    """Membership of ``point`` under one of two cone readings of the model.

    closed_hull : point in cone(V u R), the closed convex conic hull.
    raw_cone    : point in R+ . (conv(V) + cone(R)); decided by maximizing
                  the total point-coefficient mass and accepting either the
                  zero vector or a positive optimal mass.
    """
    if semantics not in ("closed_hull", "raw_cone"):
        raise ValueError(f"unknown semantics {semantics!r}")
    pt = rat_vec(point)
    if len(pt) != c.dim:
        raise ValueError("point dimension does not match cone model")
    if c.is_empty:
        return False
    gens = list(c.points) + list(c.rays)
    k = len(gens)
    rows = [[g[i] for g in gens] for i in range(c.dim)]
    rhs = list(pt)
    if semantics == "closed_hull":
        status, *_ = solve_eq(rows, rhs, [Q0] * k)
        return status is LpStatus.OPTIMAL
    # raw_cone
    if all(v == 0 for v in pt):
        return True
    if not c.points:
        return False
    cost = [mpq(-1)] * len(c.points) + [Q0] * len(c.rays)
    status, x, y, ray, value = solve_eq(rows, rhs, cost)
    if status is LpStatus.INFEASIBLE:
        return False
    if status is LpStatus.UNBOUNDED:
        return True
    return -value > 0


def cone_member_certified(point: Sequence[RationalLike], c: ConeModel,
                          semantics: str = "closed_hull"):
    """Like ``cone_member`` but returns (verdict, certificate-dict) so audit
    trails can replay the answer: membership carries the generator
    coefficients, non-membership carries a separating functional y with
    <y, g> <= 0 for every generator and <y, point> > 0."""
    verdict = cone_member(point, c, semantics)
    pt = rat_vec(point)
    if c.is_empty:
        return verdict, {"empty_model": True}
    gens = list(c.points) + list(c.rays)
    rows = [[g[i] for g in gens] for i in range(c.dim)]
    if semantics == "raw_cone" and all(v == 0 for v in pt):
        return verdict, {"zero_point": True}
    cost = [Q0] * len(gens)
    if semantics == "raw_cone":
        cost = [mpq(-1)] * len(c.points) + [Q0] * len(c.rays)
    status, x, y, _ray, _val = solve_eq(rows, list(pt), cost)
    if verdict and status is not LpStatus.INFEASIBLE and x is not None:
        return verdict, {
            "point_coefficients": [str(v) for v in x[:len(c.points)]],
            "ray_coefficients": [str(v) for v in x[len(c.points):]],
        }
    if status is LpStatus.INFEASIBLE:
        # y satisfies <y, g> <= 0 for every generator and <y, point> > 0
        return verdict, {"separating_functional": [str(v) for v in y]}
    return verdict, {"mass_maximum": None if status is LpStatus.UNBOUNDED
                     else str(-_val)}


def convex_member(point: Sequence[RationalLike], c: ConeModel) -> bool:
    """Membership in conv(V) + cone(R) (the model read as a set)."""
    pt = rat_vec(point)
    if len(pt) != c.dim:
        raise ValueError("point dimension does not match cone model")
    if c.is_empty or not c.points:
        return False
    gens = list(c.points) + list(c.rays)
    k = len(gens)
    rows = [[g[i] for g in gens] for i in range(c.dim)]
    rows.append([Q1] * len(c.points) + [Q0] * len(c.rays))
    rhs = list(pt) + [Q1]
    status, *_ = solve_eq(rows, rhs, [Q0] * k)
    return status is LpStatus.OPTIMAL


# ---------------------------------------------------------------------------
# Generator enumeration (tiny dimensions only)
# ---------------------------------------------------------------------------


def _solve_square(mat, rhs):
    """Solve a square rational system; None if singular."""
    n = len(mat)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if aug[r][col] != 0:
                piv = r
                break
        if piv < 0:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        prow = aug[col]
        inv = Q1 / prow[col]
        aug[col] = prow = [v * inv for v in prow]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], prow)]
    return tuple(aug[i][n] for i in range(n))


def _nullspace(mat, dim: int):
    """Basis of {z : mat z = 0} by RREF; rows are rational vectors."""
    rows = [list(r) for r in mat]
    pivots = []
    r = 0
    for col in range(dim):
        piv = -1
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                piv = i
                break
        if piv < 0:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        inv = Q1 / prow[col]
        rows[r] = prow = [v * inv for v in prow]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        v = [Q0] * dim
        v[fc] = Q1
        for ri, pc in enumerate(pivots):
            v[pc] = -rows[ri][fc]
        basis.append(tuple(v))
    return basis


def _canon_ray(vec):
    dens = [v.denominator for v in vec]
    lcm = 1
    for dnm in dens:
        g = _int_gcd(lcm, int(dnm))
        lcm = lcm // g * int(dnm)
    ints = [int(v * lcm) for v in vec]
    g = 0
    for v in ints:
        g = _int_gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(mpq(v) for v in ints)


_ENUM_GUARD = 200_000


@lru_cache(maxsize=1024)
def generator_model(p: Polyhedron) -> ConeModel:
    """Enumerate a generator representation (V, R) with conv(V)+cone(R) = p.

    Combinatorial vertex and extreme-ray enumeration after splitting off the
    lineality space; intended for the tiny dimensions used here.  An empty
    polyhedron yields the flagged-empty model.
    """
    if poly_is_empty(p):
        return ConeModel(p.dim, (), ())
    d = p.dim
    normals = [n for n, _ in p.rows]
    lin_basis = _nullspace(normals, d) if normals else _nullspace([], d)
    # Work inside the orthogonal complement of the lineality space so the
    # reduced polyhedron is pointed and has vertices.
    eq_rows = []
    for l in lin_basis:
        eq_rows.append((l, Q0))
        eq_rows.append((tuple(-v for v in l), Q0))
    work_rows = list(p.rows) + eq_rows
    n_rows = len(work_rows)
    if n_rows and _comb(n_rows, d) > _ENUM_GUARD:
        raise ValueError("generator enumeration guard tripped: too many rows")

    verts = []
    seen = set()
    for subset in itertools.combinations(range(n_rows), d):
        mat = [work_rows[i][0] for i in subset]
        rhs = [work_rows[i][1] for i in subset]
        sol = _solve_square(mat, rhs)
        if sol is None or sol in seen:
            continue
        if all(dot(n, sol) <= b for n, b in work_rows):
            seen.add(sol)
            verts.append(sol)

    rays = []
    seen_r = set()
    rec_normals = [n for n, _ in work_rows]
    if d == 1:
        candidates = [(_canon_ray((Q1,))), (_canon_ray((mpq(-1),)))]
        for cand in candidates:
            if all(dot(n, cand) <= 0 for n in rec_normals) and cand not in seen_r:
                seen_r.add(cand)
                rays.append(cand)
    else:
        for subset in itertools.combinations(range(n_rows), d - 1):
            mat = [work_rows[i][0] for i in subset]
            null = _nullspace(mat, d)
            if len(null) != 1:
                continue
            direction = null[0]
            for cand in (direction, tuple(-v for v in direction)):
                if all(v == 0 for v in cand):
                    continue
                if all(dot(n, cand) <= 0 for n in rec_normals):
                    canon = _canon_ray(cand)
                    if canon not in seen_r:
                        seen_r.add(canon)
                        rays.append(canon)
    for l in lin_basis:
        for cand in (l, tuple(-v for v in l)):
            canon = _canon_ray(cand)
            if canon not in seen_r:
                seen_r.add(canon)
                rays.append(canon)
    verts.sort()
    rays.sort()
    return ConeModel(d, tuple(verts), tuple(rays))


def _comb(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out
