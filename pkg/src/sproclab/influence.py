"""Influence regions of point masses under interval-uncertain coefficients.

A star field assigns each star a position and an interval for the product
of the gravitational constant and its mass.  A point x lies in the robust
influence region of a center star s when, for every rival t and every
coefficient draw inside the intervals, the rival's scaled squared distance
beats the center's:

    u_t |x - t|^2 - u_s |x - s|^2  <=  0.

The left side is monotone increasing in u_t and decreasing in u_s, so the
whole interval family reduces to one worst-case quadratic per rival,
q_t(x) = h_t |x - t|^2 - l_s |x - s|^2, built here with exact rational
coefficients.  With all intervals degenerate at 1 the region degenerates to
the classical nearest-star cell bounded by perpendicular bisectors.

Membership and rasters are exact rational computations; the raster is
bit-for-bit reproducible from its inputs.  Note the quadratics are defined
at the star positions themselves even though the underlying inverse-square
potentials are not; such points are evaluated like any other and flagged in
exported reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from gmpy2 import mpq

from .linrat import rat, rat_vec
from .procedures import RhsFunction
from .rockafellian import (
    ConstraintPerturbation,
    QuadraticFn,
    RobustInstance,
)

Q0 = rat(0)

MAX_ENDPOINT_SCENARIOS = 64


@dataclass(frozen=True)
class Star:
    ident: str
    pos: tuple
    interval: tuple  # (low, high), both positive

    def __post_init__(self):
        lo, hi = self.interval
        if not (0 < lo <= hi):
            raise ValueError(f"star {self.ident!r}: need 0 < low <= high")


@dataclass(frozen=True)
class StarField:
    dim: int
    stars: tuple

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("star fields live in dimension 2 or 3")
        if not self.stars:
            raise ValueError("star field needs at least one star")
        seen_pos = set()
        seen_id = set()
        for st in self.stars:
            if len(st.pos) != self.dim:
                raise ValueError(f"star {st.ident!r} has wrong dimension")
            if st.pos in seen_pos:
                raise ValueError("star positions must be distinct")
            if st.ident in seen_id:
                raise ValueError("star ids must be distinct")
            seen_pos.add(st.pos)
            seen_id.add(st.ident)

    @staticmethod
    def make(dim: int, stars: Iterable) -> "StarField":
        packed = []
        for ident, pos, interval in stars:
            packed.append(Star(str(ident), rat_vec(pos),
                               (rat(interval[0]), rat(interval[1]))))
        return StarField(dim, tuple(packed))

    def star(self, ident: str) -> Star:
        for st in self.stars:
            if st.ident == ident:
                return st
        raise KeyError(f"no star with id {ident!r}")

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "stars": [
                {"id": st.ident, "pos": [str(v) for v in st.pos],
                 "interval": [str(st.interval[0]), str(st.interval[1])]}
                for st in self.stars
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "StarField":
        stars = [(s["id"], s["pos"], s["interval"]) for s in data["stars"]]
        return StarField.make(int(data["dim"]), stars)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def loads(text: str) -> "StarField":
        return StarField.from_json(json.loads(text))


@dataclass(frozen=True)
class ExactQuadratic:
    """u |x - t|^2 - w |x - s|^2 expanded to rational coefficients:
    lead * |x|^2 + <lin, x> + const."""

    lead: object
    lin: tuple
    const: object

    def __call__(self, x) -> object:
        xv = rat_vec(x)
        sq = sum((v * v for v in xv), Q0)
        return self.lead * sq + sum((l * v for l, v in zip(self.lin, xv)), Q0) \
            + self.const

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        sq = np.sum(xs * xs, axis=1)
        lin = np.array([float(v) for v in self.lin])
        return float(self.lead) * sq + xs @ lin + float(self.const)

    def to_quadratic_fn(self, dim: int) -> QuadraticFn:
        Q = float(self.lead) * np.eye(dim)
        a = np.array([float(v) for v in self.lin])
        return QuadraticFn.make(Q, a, float(self.const))

    def negated(self) -> "ExactQuadratic":
        return ExactQuadratic(-self.lead, tuple(-v for v in self.lin),
                              -self.const)


def _scaled_distance_quadratic(u, center: tuple, w, sub: tuple) -> ExactQuadratic:
    """u |x - center|^2 - w |x - sub|^2 in expanded coefficients."""
    lead = u - w
    lin = tuple(-2 * (u * c - w * s) for c, s in zip(center, sub))
    const = u * sum((c * c for c in center), Q0) - w * sum((s * s for s in sub), Q0)
    return ExactQuadratic(lead, lin, const)


@dataclass(frozen=True)
class InfluenceSystem:
    """Worst-case reduced constraint system for one center star."""

    field: StarField
    center: str
    constraints: tuple  # of (rival id, ExactQuadratic)

    @property
    def dim(self) -> int:
        return self.field.dim

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "center": self.center,
            "constraints": [
                {"rival": ident,
                 "lead": str(q.lead),
                 "lin": [str(v) for v in q.lin],
                 "const": str(q.const)}
                for ident, q in self.constraints
            ],
        }


def worst_case_reduce(field: StarField, center: str) -> InfluenceSystem:
    """One quadratic per rival with the adversarial endpoint coefficients:
    the rival at its interval top, the center at its interval bottom.  A
    point satisfies every reduced constraint exactly when it satisfies the
    original family for every coefficient draw."""
    s = field.star(center)
    l_s = s.interval[0]
    constraints = []
    for t in field.stars:
        if t.ident == center:
            continue
        h_t = t.interval[1]
        constraints.append((t.ident,
                            _scaled_distance_quadratic(h_t, t.pos, l_s, s.pos)))
    return InfluenceSystem(field, center, tuple(constraints))


def robust_member(x: Sequence, sys: InfluenceSystem) -> bool:
    """Exact rational membership: every reduced constraint is <= 0."""
    xv = rat_vec(x)
    if len(xv) != sys.dim:
        raise ValueError("point dimension does not match the field")
    return all(q(xv) <= 0 for _ident, q in sys.constraints)


def endpoint_scenarios(field: StarField, center: str):
    """All coefficient draws with every star at an interval endpoint,
    deduplicated; each draw yields one certain constraint system.  Guarded
    against combinatorial blowup."""
    s = field.star(center)
    rivals = [t for t in field.stars if t.ident != center]
    n_combos = 2 ** (len(rivals) + 1)
    if n_combos > MAX_ENDPOINT_SCENARIOS:
        raise ValueError(
            f"{n_combos} endpoint combinations exceed the guard "
            f"({MAX_ENDPOINT_SCENARIOS}); use the worst-case reduction")
    systems = []
    seen = set()
    for s_pick in range(2):
        u_s = s.interval[s_pick]
        for mask in range(2 ** len(rivals)):
            cons = []
            key = [str(u_s)]
            for j, t in enumerate(rivals):
                u_t = t.interval[(mask >> j) & 1]
                key.append(str(u_t))
                cons.append((t.ident,
                             _scaled_distance_quadratic(u_t, t.pos, u_s, s.pos)))
            k = tuple(key)
            if k not in seen:
                seen.add(k)
                systems.append(tuple(cons))
    return systems


def region_raster(sys: InfluenceSystem, bbox, resolution) -> np.ndarray:
    """Row-major boolean membership grid over a 2-D box.

    bbox = (x_lo, x_hi, y_lo, y_hi); resolution = (nx, ny) with at least 2
    samples per axis.  grid[i, j] is membership at
    (x_lo + j*(x_hi-x_lo)/(nx-1), y_lo + i*(y_hi-y_lo)/(ny-1)); rows scan y
    from low to high.  All sample coordinates and evaluations are rational,
    so two runs are byte-identical.
    """
    if sys.dim != 2:
        raise ValueError("rasters are only defined for 2-D fields")
    nx, ny = int(resolution[0]), int(resolution[1])
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    x_lo, x_hi, y_lo, y_hi = (rat(v) for v in bbox)
    grid = np.zeros((ny, nx), dtype=bool)
    dx = (x_hi - x_lo) / (nx - 1)
    dy = (y_hi - y_lo) / (ny - 1)
    for i in range(ny):
        yv = y_lo + i * dy
        for j in range(nx):
            xv = x_lo + j * dx
            grid[i, j] = robust_member((xv, yv), sys)
    grid.setflags(write=False)
    return grid


def raster_to_csv(grid: np.ndarray) -> str:
    lines = [",".join("1" if v else "0" for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def raster_to_pgm(grid: np.ndarray) -> str:
    """Plain (ASCII) PGM with maxval 1; rows written top row first, which
    mirrors the raster's low-to-high y order (the image appears flipped
    relative to mathematical orientation)."""
    ny, nx = grid.shape
    lines = ["P2", f"{nx} {ny}", "1"]
    for row in grid:
        lines.append(" ".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"


def to_robust_instance(sys: InfluenceSystem,
                       claim: Union[QuadraticFn, RhsFunction, float, int, None] = None,
                       drop: Optional[str] = None,
                       endpoints: bool = False) -> RobustInstance:
    """Recast a membership claim over the influence region as a scenario
    family, so the pointwise checker asks whether the claim is a consequence
    of the robust system.

    * ``drop=t0``: claim that rival t0's constraint is redundant; the
      objective is the negated t0 quadratic and the remaining constraints
      form the perturbation (worst-case singleton mode only).
    * ``claim``: an explicit objective asserted nonnegative on the region: a
      quadratic, a constant, or an affine bound h read as "h <= 0 on the
      region" (objective -h).  Piecewise bounds are not representable as a
      single scenario objective; use the h-variant checkers instead.
    * ``endpoints=True``: one scenario per endpoint coefficient draw instead
      of the single worst-case scenario; the region is then the set where
      every scenario is feasible, and the checkers see a genuinely robust
      family.
    """
    dim = sys.dim
    if (claim is None) == (drop is None):
        raise ValueError("provide exactly one of claim or drop")
    if drop is not None:
        if endpoints:
            raise ValueError("drop-mode is defined for the worst-case "
                             "reduction only")
        kept = [q for ident, q in sys.constraints if ident != drop]
        dropped = [q for ident, q in sys.constraints if ident == drop]
        if not dropped:
            raise KeyError(f"no rival constraint for {drop!r}")
        f = dropped[0].negated().to_quadratic_fn(dim)
        gs = tuple(q.to_quadratic_fn(dim) for q in kept)
        return RobustInstance(dim, len(gs), (ConstraintPerturbation(f, gs),))

    if isinstance(claim, RhsFunction):
        if claim.kind != "affine":
            raise ValueError("piecewise claims are not a single scenario "
                             "objective; check them with the rhs variants")
        slope, intercept = claim.pieces[0]
        f = QuadraticFn.make(np.zeros((dim, dim)),
                             [-float(v) for v in slope], -float(intercept))
    elif isinstance(claim, QuadraticFn):
        if claim.dim != dim:
            raise ValueError("claim dimension does not match the field")
        f = claim
    else:
        f = QuadraticFn.constant(dim, float(claim))

    if endpoints:
        scen = []
        for cons in endpoint_scenarios(sys.field, sys.center):
            gs = tuple(q.to_quadratic_fn(dim) for _ident, q in cons)
            scen.append(ConstraintPerturbation(f, gs))
        m = len(scen[0].g)
        return RobustInstance(dim, m, tuple(scen))
    gs = tuple(q.to_quadratic_fn(dim) for _ident, q in sys.constraints)
    return RobustInstance(dim, len(gs), (ConstraintPerturbation(f, gs),))
