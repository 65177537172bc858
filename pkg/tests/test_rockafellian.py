"""Tests for perturbation-function families, conjugates and biconjugates."""

import math

import numpy as np
import pytest
from gmpy2 import mpq

from sproclab.linrat import Polyhedron
from sproclab.rockafellian import (
    ConstraintPerturbation,
    DualObjects,
    ExplicitPolyhedral,
    PolyhedralFn,
    QuadraticFn,
    RobustInstance,
    biconjugate_at,
    biconjugate_is_exact,
    conjugate_at,
    evaluate,
    ext_add,
    is_pos_inf,
    lagrangian_combine,
    singleton,
)
from sproclab.symeig import NEG_INF, POS_INF


def quad1(q, a, c):
    return QuadraticFn.make([[q]], [a], c)


def trust_region():
    # f = x^2 on the perturbation of {x^2 - 1 <= y}
    return ConstraintPerturbation(quad1(1, 0, 0), (quad1(1, 0, -1),))


def ep_max_xy():
    # max(x + y, -x) over the whole (x, y) plane
    fn = PolyhedralFn.make(2, [([1, 1], 0), ([-1, 0], 0)])
    return ExplicitPolyhedral(1, 1, fn)


def ep_abs():
    # max(x, -x), no perturbation coordinate
    fn = PolyhedralFn.make(1, [([1], 0), ([-1], 0)])
    return ExplicitPolyhedral(1, 0, fn)


# ---------------------------------------------------------------------------
# extended reals
# ---------------------------------------------------------------------------


def test_ext_add_rules():
    assert ext_add(POS_INF, 3.0) == POS_INF
    assert ext_add(NEG_INF, 3.0) == NEG_INF
    assert ext_add(2, mpq(1, 2)) == mpq(5, 2)
    with pytest.raises(ValueError):
        ext_add(POS_INF, NEG_INF)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_evaluate_constraint_perturbation():
    F = trust_region()
    assert evaluate(F, [0], [0]) == 0.0
    assert is_pos_inf(evaluate(F, [2], [0]))  # g(2) = 3 > 0
    assert evaluate(F, [2], [3]) == 4.0


def test_evaluate_polyhedral():
    F = ep_max_xy()
    assert evaluate(F, [1], [1]) == 2
    assert evaluate(F, [-3], [1]) == 3


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(trust_region(), [0, 0], [0])


# ---------------------------------------------------------------------------
# conjugate_at
# ---------------------------------------------------------------------------


def test_conjugate_affine_piece():
    # single piece <(2, -1), z> + 3: conjugate is -3 at the slope, +inf away
    fn = PolyhedralFn.make(2, [([2, -1], 3)])
    F = ExplicitPolyhedral(1, 1, fn)
    assert conjugate_at(F, [2], [-1]) == -3
    assert is_pos_inf(conjugate_at(F, [2], [0]))
    assert is_pos_inf(conjugate_at(F, [0], [-1]))


def test_conjugate_trust_region_hand_value():
    # F*(0, -1) = -inf_x (2x^2 - 1) = 1; grid cross-check below
    F = trust_region()
    val = conjugate_at(F, [0], [-1])
    assert abs(val - 1.0) < 1e-12
    xs = np.linspace(-5, 5, 2001)
    ys = xs * xs - 1  # boundary y = g(x) maximizes <mu, y> for mu <= 0
    brute = np.max(0 * xs + (-1) * ys - (xs * xs))
    assert abs(val - brute) < 1e-3


def test_conjugate_positive_mu_component():
    F = trust_region()
    assert is_pos_inf(conjugate_at(F, [0], [1e-12]))
    assert is_pos_inf(conjugate_at(F, [1], [2]))


def test_conjugate_empty_domain_polyhedral():
    empty = Polyhedron.make(2, [([1, 0], -1), ([-1, 0], -1)])
    F = ExplicitPolyhedral(1, 1, PolyhedralFn.make(2, [([0, 0], 0)], empty))
    assert conjugate_at(F, [0], [0]) == NEG_INF


def _brute_conjugate_cp(F, xp, mu, lo=-5.0, hi=5.0, steps=1001):
    if any(m > 0 for m in mu):
        return POS_INF
    grids = np.meshgrid(*[np.linspace(lo, hi, steps)] * F.dim_x, indexing="ij")
    xs = np.stack([g.ravel() for g in grids], axis=1)
    vals = xs @ np.asarray(xp, dtype=float) - F.f.eval_many(xs)
    for m, gi in zip(mu, F.g):
        vals = vals + m * gi.eval_many(xs)
    return float(np.max(vals))


def test_conjugate_matches_grid_quadratic():
    rng = np.random.default_rng(11)
    for _ in range(10):
        # strictly concave integrand with the maximizer inside the box
        q = float(rng.uniform(0.5, 2.0))
        gq = float(rng.uniform(-0.2, 0.2))
        f = quad1(q, float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
        g = quad1(gq, float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-1, 0)))
        F = ConstraintPerturbation(f, (g,))
        xp = [float(rng.uniform(-1, 1))]
        mu = [float(-rng.uniform(0, 1))]
        exact = conjugate_at(F, xp, mu)
        brute = _brute_conjugate_cp(F, xp, mu)
        assert abs(exact - brute) < 1e-3


def test_fenchel_young_sampled():
    rng = np.random.default_rng(5150)
    F = trust_region()
    for _ in range(200):
        x = rng.uniform(-3, 3, size=1)
        y = rng.uniform(-1, 4, size=1)
        xp = rng.uniform(-3, 3, size=1)
        mu = -np.abs(rng.uniform(0, 3, size=1))
        lhs_f = evaluate(F, x, y)
        lhs_c = conjugate_at(F, xp, mu)
        if is_pos_inf(lhs_f) or is_pos_inf(lhs_c):
            continue
        assert lhs_f + lhs_c >= float(x @ xp + y @ mu) - 1e-8


# ---------------------------------------------------------------------------
# biconjugate_at
# ---------------------------------------------------------------------------


def test_biconjugate_convex_identity():
    F = trust_region()
    assert biconjugate_is_exact(F)
    rng = np.random.default_rng(8)
    for _ in range(100):
        x = rng.uniform(-2, 2, size=1)
        y = rng.uniform(-2, 4, size=1)
        assert biconjugate_at(F, x, y) == evaluate(F, x, y)


def test_biconjugate_polyhedral_identity():
    F = ep_abs()
    assert biconjugate_at(F, [0.5], []) == mpq(1, 2)
    assert biconjugate_at(F, [-3], []) == 3


def test_biconjugate_nonconvex_lower_bound():
    # F(x, 0) = -x^2 on {x^2 <= 1}: restriction value at x is -x^2; its
    # convex hull on [-1, 1] is the chord -1 (the biconjugate cannot exceed
    # the chord at 0 since the endpoints pin it).
    F = ConstraintPerturbation(quad1(-1, 0, 0), (quad1(1, 0, -1),))
    assert not biconjugate_is_exact(F)
    rng = np.random.default_rng(17)
    for _ in range(50):
        x = rng.uniform(-0.9, 0.9, size=1)
        val = biconjugate_at(F, x, [0.0], seed=3, probe_count=300)
        direct = evaluate(F, x, [0.0])
        assert val <= direct + 1e-8
        assert val > NEG_INF
    # dense dual probe comparison against the 1-D convexification oracle:
    # conv hull of {(x, -x^2), |x|<=1} evaluated at 0 equals -1.
    val0 = biconjugate_at(F, [0.0], [0.0], seed=3, probe_count=500)
    assert val0 <= -1.0 + 1e-6


def test_biconjugate_minorization_random():
    rng = np.random.default_rng(909)
    for _ in range(20):
        f = quad1(float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                  float(rng.uniform(-2, 2)))
        g = quad1(float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                  float(rng.uniform(-2, 2)))
        F = ConstraintPerturbation(f, (g,))
        for _ in range(50):
            x = rng.uniform(-4, 4, size=1)
            y = rng.uniform(-4, 4, size=1)
            val = biconjugate_at(F, x, y, seed=1, probe_count=60)
            direct = evaluate(F, x, y)
            if is_pos_inf(direct):
                continue
            assert val <= direct + 1e-8


# ---------------------------------------------------------------------------
# lagrangian_combine
# ---------------------------------------------------------------------------


def test_lagrangian_zero_function():
    F = ConstraintPerturbation(quad1(-1, 0, 1), (quad1(1, 0, -1),))
    L = lagrangian_combine(F, [1.0])
    assert np.allclose(L.Q.a, 0) and np.allclose(L.a, 0) and L.c == 0


def test_lagrangian_identity_at_zero():
    F = trust_region()
    L = lagrangian_combine(F, [0.0])
    assert np.allclose(L.Q.a, F.f.Q.a) and np.allclose(L.a, F.f.a)
    assert L.c == F.f.c


def test_lagrangian_coefficient_add():
    F = ConstraintPerturbation(quad1(0, 1, 0), (quad1(1, 0, 0),))
    L = lagrangian_combine(F, [2.0])
    assert np.allclose(L.Q.a, [[2.0]])
    assert np.allclose(L.a, [1.0])
    assert L.c == 0.0


def test_lagrangian_rejects_negative():
    with pytest.raises(ValueError):
        lagrangian_combine(trust_region(), [-0.5])


def test_lagrangian_bridge_to_certificate():
    # nonnegative combined quadratic implies F(x,y) + <lam, y> >= 0 wherever
    # finite (the substitution that makes a certificate a certificate)
    F = ConstraintPerturbation(quad1(-1, 0, 1), (quad1(1, 0, -1),))
    lam = [1.0]
    rng = np.random.default_rng(44)
    for _ in range(200):
        x = rng.uniform(-3, 3, size=1)
        y = [F.g[0](x) + abs(rng.uniform(0, 2))]
        val = evaluate(F, x, y)
        assert val + lam[0] * y[0] >= -1e-6


# ---------------------------------------------------------------------------
# instances and serialization
# ---------------------------------------------------------------------------


def test_instance_roundtrip_rational_strings():
    fn = PolyhedralFn.make(
        2, [(["1/3", "-2/5"], "7/2")],
        Polyhedron.make(2, [(["1", "0"], "1/4")]))
    inst = RobustInstance(1, 1, (ExplicitPolyhedral(1, 1, fn), trust_region()))
    text = inst.dumps()
    again = RobustInstance.loads(text)
    assert again.dumps() == text
    assert again.scenarios[0].fn.pieces == fn.pieces


def test_instance_dimension_validation():
    with pytest.raises(ValueError):
        RobustInstance(2, 1, (trust_region(),))
    with pytest.raises(ValueError):
        RobustInstance(1, 1, ())


def test_dual_objects_qstar_below_p():
    inst = RobustInstance(1, 1, (trust_region(),
                                 ConstraintPerturbation(quad1(-1, 0, 2),
                                                        (quad1(1, 0, -1),))))
    dual = DualObjects(inst, seed=2, probe_count=80)
    assert not dual.q_star_is_exact()
    rng = np.random.default_rng(3)
    for _ in range(40):
        x = rng.uniform(-2, 2, size=1)
        qs = dual.q_star(x)
        pv = dual.p(x)
        if is_pos_inf(pv):
            continue
        assert float(qs) <= float(pv) + 1e-8


def test_dual_objects_q_upper_is_upper_bound():
    inst = singleton(trust_region())
    dual = DualObjects(inst, seed=5, probe_count=60)
    # q(0) <= F*(0, -1) = 1, so any probe upper bound is >= the true inf but
    # must not exceed the specific witness value by construction
    up = dual.q_upper([0.0])
    assert float(up) <= 1.0 + 1e-9
