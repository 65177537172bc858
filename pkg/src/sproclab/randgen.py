"""Seeded random instance generators for test suites and experiments.

All draws go through a caller-provided numpy Generator, so suites are
reproducible from a single seed.  Rational coefficients stay inside [-5, 5]
with denominators 1 or 2; boxed domains keep most epigraph shadows bounded
(unbounded and empty cases are still produced at a controlled rate, they
exercise the vacuous branches).
"""

from __future__ import annotations

import numpy as np
from gmpy2 import mpq

from .linrat import Polyhedron
from .procedures import RhsFunction
from .rockafellian import (
    ConstraintPerturbation,
    ExplicitPolyhedral,
    PolyhedralFn,
    QuadraticFn,
    RobustInstance,
)


def rat_coeff(rng, scale: int = 10):
    """Rational in [-scale/2, scale/2] with denominator 1 or 2."""
    return mpq(int(rng.integers(-scale, scale + 1)), int(rng.integers(1, 3)))


def random_polyhedral_scenario(rng, dim_x: int, dim_y: int,
                               max_pieces: int = 4,
                               boxed_prob: float = 0.7) -> ExplicitPolyhedral:
    d = dim_x + dim_y
    n_pieces = int(rng.integers(1, max_pieces + 1))
    pieces = [([rat_coeff(rng) for _ in range(d)], rat_coeff(rng))
              for _ in range(n_pieces)]
    domain = None
    u = rng.random()
    if u < boxed_prob:
        rows = []
        for j in range(d):
            e = [mpq(0)] * d
            e[j] = mpq(1)
            b = mpq(int(rng.integers(1, 6)))
            rows.append((list(e), b))
            rows.append(([-v for v in e], b))
        if rng.random() < 0.3:
            rows.append(([rat_coeff(rng) for _ in range(d)], rat_coeff(rng)))
        domain = Polyhedron.make(d, rows)
    elif u < boxed_prob + 0.1:
        # a thin or empty slab: exercises vacuous branches
        normal = [rat_coeff(rng) for _ in range(d)]
        rows = [(normal, mpq(-6)), ([-v for v in normal], mpq(-1))]
        domain = Polyhedron.make(d, rows)
    return ExplicitPolyhedral(dim_x, dim_y, PolyhedralFn.make(d, pieces, domain))


def random_polyhedral_instance(rng, max_dim: int = 3, max_pieces: int = 4,
                               max_scenarios: int = 1) -> RobustInstance:
    dim_x = int(rng.integers(1, max_dim + 1))
    dim_y = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_scenarios + 1))
    scen = tuple(random_polyhedral_scenario(rng, dim_x, dim_y, max_pieces)
                 for _ in range(k))
    return RobustInstance(dim_x, dim_y, scen)


def random_psd_quadratic(rng, dim: int, lo: float = 0.3, hi: float = 2.0,
                         lin: float = 2.0, const=(-2.0, 2.0)) -> QuadraticFn:
    B = rng.uniform(-1, 1, size=(dim, dim))
    Q = B @ B.T
    w = np.linalg.eigvalsh(Q)
    Q = Q + (lo - min(0.0, float(w[0]))) * np.eye(dim)
    scale = hi / max(hi, float(np.linalg.eigvalsh(Q)[-1]))
    Q = Q * scale
    a = rng.uniform(-lin, lin, size=dim)
    c = float(rng.uniform(*const))
    return QuadraticFn.make(Q, a, c)


def random_convex_slater_instance(rng, dim: int = 0,
                                  min_gap: float = 5e-3) -> RobustInstance:
    """Single convex constraint with an interior (strictly feasible) point,
    filtered away from razor-edge decisions: the grid estimate of the
    constrained minimum must clear ``min_gap`` in absolute value."""
    if dim <= 0:
        dim = int(rng.integers(1, 3))
    while True:
        center = rng.uniform(-2, 2, size=dim)
        radius = float(rng.uniform(0.5, 2.5))
        g = QuadraticFn.make(np.eye(dim), -2 * center,
                             float(center @ center - radius ** 2))
        f = random_psd_quadratic(rng, dim, const=(-3.0, 3.0))
        per_axis = 241 if dim == 1 else 61
        axes = [np.linspace(center[j] - radius, center[j] + radius, per_axis)
                for j in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        xs = np.stack([m.ravel() for m in mesh], axis=1)
        feas = g.eval_many(xs) <= 0.0
        if not np.any(feas):
            continue
        est = float(np.min(f.eval_many(xs)[feas]))
        if abs(est) < min_gap:
            continue
        return RobustInstance(dim, 1, (ConstraintPerturbation(f, (g,)),))


def random_mixed_instance(rng, max_dim: int = 2,
                          max_scenarios: int = 2) -> RobustInstance:
    """Constraint-perturbation scenarios with unconstrained-sign Hessians,
    occasionally mixed with a polyhedral scenario."""
    dim_x = int(rng.integers(1, max_dim + 1))
    dim_y = int(rng.integers(1, max_dim + 1))
    scen = []
    for _ in range(int(rng.integers(1, max_scenarios + 1))):
        if rng.random() < 0.25:
            scen.append(random_polyhedral_scenario(rng, dim_x, dim_y))
        else:
            f = QuadraticFn.make(rng.uniform(-1, 1, size=(dim_x, dim_x)),
                                 rng.uniform(-2, 2, size=dim_x),
                                 float(rng.uniform(-2, 2)))
            gs = tuple(
                QuadraticFn.make(rng.uniform(-1, 1, size=(dim_x, dim_x)),
                                 rng.uniform(-2, 2, size=dim_x),
                                 float(rng.uniform(-2, 2)))
                for _ in range(dim_y))
            scen.append(ConstraintPerturbation(f, gs))
    return RobustInstance(dim_x, dim_y, tuple(scen))


def random_rhs(rng, dim: int, max_slopes: int = 3) -> RhsFunction:
    k = int(rng.integers(1, max_slopes + 1))
    pieces = [([rat_coeff(rng, 4) for _ in range(dim)], rat_coeff(rng, 4))
              for _ in range(k)]
    return RhsFunction.polyhedral_max(pieces)


# ---------------------------------------------------------------------------
# conjugate-oracle aligned generators: the brute-force grid supremum is only
# a faithful oracle when the maximizer lands on (or extremely near) the grid
# ---------------------------------------------------------------------------


def oracle_quadratic_conjugate_case(rng, dim: int):
    """(scenario, dual point (xp, mu)) whose conjugate integrand is strictly
    concave with its maximizer well inside the sampling box, so the
    0.01-grid supremum matches the closed form within 1e-3."""
    while True:
        f = random_psd_quadratic(rng, dim, lo=0.5, hi=2.0, lin=1.0)
        m = int(rng.integers(1, 3))
        gs = []
        for _ in range(m):
            S = rng.uniform(-0.1, 0.1, size=(dim, dim))
            gs.append(QuadraticFn.make(S + S.T, rng.uniform(-0.4, 0.4, size=dim),
                                       float(rng.uniform(-1, 1))))
        F = ConstraintPerturbation(f, tuple(gs))
        mu = -np.abs(rng.uniform(0.1, 1.0, size=m))
        xp = rng.uniform(-1.5, 1.5, size=dim)
        H = f.Q.a - sum(float(m_) * g.Q.a for m_, g in zip(mu, gs))
        w = np.linalg.eigvalsh(H)
        if float(w[0]) < 0.1:
            continue
        lin = f.a - sum(float(m_) * g.a for m_, g in zip(mu, gs)) - xp
        xstar = np.linalg.solve(2 * H, -lin)
        if np.max(np.abs(xstar)) > 4.0:
            continue
        return F, xp, mu


def oracle_polyhedral_conjugate_case(rng, dim: int):
    """(scenario with dim_y = 0, dual slope) built so that the conjugate's
    maximizer is a kink or corner on the 0.01 grid: kinks at multiples of
    1/4, box corners at integers, slopes at integers."""
    def one_dim_pieces():
        k = int(rng.integers(2, 4))
        kinks = np.sort(rng.choice(np.arange(-12, 13), size=k - 1,
                                   replace=False)) / 4.0
        slopes = np.cumsum(rng.integers(1, 3, size=k)) - int(rng.integers(0, 4))
        pieces = [(int(slopes[0]), mpq(0))]
        for i in range(1, k):
            kink = mpq(int(kinks[i - 1] * 4), 4)
            prev_s, prev_b = pieces[-1]
            b = prev_b + (prev_s - int(slopes[i])) * kink
            pieces.append((int(slopes[i]), b))
        return pieces

    axes_pieces = [one_dim_pieces() for _ in range(dim)]
    pieces = []

    def build(j, slope, intercept):
        if j == dim:
            pieces.append((list(slope), intercept))
            return
        for s, b in axes_pieces[j]:
            build(j + 1, slope + [mpq(s)], intercept + b)

    build(0, [], mpq(0))
    rows = []
    for j in range(dim):
        e = [mpq(0)] * dim
        e[j] = mpq(1)
        hi = mpq(int(rng.integers(2, 5)))
        lo = mpq(-int(rng.integers(2, 5)))
        rows.append((list(e), hi))
        rows.append(([-v for v in e], -lo))
    domain = Polyhedron.make(dim, rows)
    F = ExplicitPolyhedral(dim, 0, PolyhedralFn.make(dim, pieces, domain))
    xp = [mpq(int(rng.integers(-6, 7)), 2) for _ in range(dim)]
    return F, xp
