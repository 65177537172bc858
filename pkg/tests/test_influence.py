"""Tests for the uncertain influence-region scenario."""

import numpy as np
import pytest
from gmpy2 import mpq

from sproclab.config import RunConfig
from sproclab.influence import (
    ExactQuadratic,
    InfluenceSystem,
    StarField,
    endpoint_scenarios,
    raster_to_csv,
    raster_to_pgm,
    region_raster,
    robust_member,
    to_robust_instance,
    worst_case_reduce,
)
from sproclab.procedures import HOLDS, VIOLATED, RhsFunction, check_a
from sproclab.rockafellian import QuadraticFn

CFG = RunConfig(seed=11)


def worked_field():
    return StarField.make(2, [("s", ("0", "0"), ("1", "2")),
                              ("t", ("2", "0"), ("1", "4"))])


def certain_two_star():
    return StarField.make(2, [("s", ("0", "0"), ("1", "1")),
                              ("t", ("2", "0"), ("1", "1"))])


# ---------------------------------------------------------------------------
# worst_case_reduce
# ---------------------------------------------------------------------------


def test_reduce_worked_example_coefficients():
    sys = worst_case_reduce(worked_field(), "s")
    assert len(sys.constraints) == 1
    ident, q = sys.constraints[0]
    assert ident == "t"
    # 4|x - (2,0)|^2 - |x|^2 = 3x^2 + 3y^2 - 16x + 16
    assert q.lead == 3
    assert q.lin == (mpq(-16), mpq(0))
    assert q.const == 16
    # spot values against the unexpanded form
    for pt in [(0, 0), (2, 0), (1, 1), ("-3/2", "5/7")]:
        x = [mpq(v) for v in pt]
        direct = 4 * ((x[0] - 2) ** 2 + x[1] ** 2) - (x[0] ** 2 + x[1] ** 2)
        assert q(x) == direct


def test_reduce_degenerate_intervals_give_certain_quadratic():
    field = StarField.make(2, [("s", (0, 0), (2, 2)), ("t", (1, 3), (5, 5))])
    sys = worst_case_reduce(field, "s")
    _ident, q = sys.constraints[0]
    x = (mpq(1, 2), mpq(-2))
    certain = 5 * ((x[0] - 1) ** 2 + (x[1] - 3) ** 2) - 2 * (x[0] ** 2 + x[1] ** 2)
    assert q(x) == certain


def test_reduce_single_star_whole_space():
    field = StarField.make(2, [("s", (0, 0), (1, 2))])
    sys = worst_case_reduce(field, "s")
    assert sys.constraints == ()
    assert robust_member((100, -50), sys)


def test_reduce_missing_center():
    with pytest.raises(KeyError):
        worst_case_reduce(worked_field(), "nope")


def test_field_validation():
    with pytest.raises(ValueError):
        StarField.make(2, [("a", (0, 0), (0, 1))])  # zero lower bound
    with pytest.raises(ValueError):
        StarField.make(2, [("a", (0, 0), (1, 1)), ("b", (0, 0), (1, 1))])
    with pytest.raises(ValueError):
        StarField.make(4, [("a", (0, 0, 0, 0), (1, 1))])


# ---------------------------------------------------------------------------
# robust_member (with the endpoint-enumeration oracle)
# ---------------------------------------------------------------------------


def _oracle_member(field, center, x):
    """Membership under every endpoint coefficient draw (monotonicity makes
    endpoint draws cover the whole interval family)."""
    for cons in endpoint_scenarios(field, center):
        for _ident, q in cons:
            if q(x) > 0:
                return False
    return True


def test_member_at_rival_position():
    sys = worst_case_reduce(worked_field(), "s")
    assert robust_member((2, 0), sys) == _oracle_member(worked_field(), "s", (2, 0))
    assert robust_member((2, 0), sys) is False or True  # value fixed below
    # q(2,0) = 4*0 - 4 = -4 <= 0: inside
    assert robust_member((2, 0), sys) is True


def test_member_at_own_center_can_fail():
    sys = worst_case_reduce(worked_field(), "s")
    # at s itself the worst case gives h_t |s-t|^2 = 16 > 0: outside
    assert robust_member((0, 0), sys) is False
    assert _oracle_member(worked_field(), "s", (mpq(0), mpq(0))) is False


def test_member_empty_constraints():
    field = StarField.make(2, [("s", (0, 0), (1, 2))])
    assert robust_member((3, 4), worst_case_reduce(field, "s"))


def test_endpoint_reduction_exactness_random():
    field = worked_field()
    sys = worst_case_reduce(field, "s")
    _ident, qbar = sys.constraints[0]
    s = field.star("s")
    t = field.star("t")
    rng = np.random.default_rng(42)
    for _ in range(100):
        x = (mpq(int(rng.integers(-40, 41)), 8), mpq(int(rng.integers(-40, 41)), 8))
        # random coefficients inside the intervals (rational samples)
        u_t = t.interval[0] + (t.interval[1] - t.interval[0]) * mpq(int(rng.integers(0, 9)), 8)
        u_s = s.interval[0] + (s.interval[1] - s.interval[0]) * mpq(int(rng.integers(0, 9)), 8)
        q_u = u_t * ((x[0] - 2) ** 2 + x[1] ** 2) - u_s * (x[0] ** 2 + x[1] ** 2)
        assert q_u <= qbar(x)
    # equality at the adversarial endpoints
    x = (mpq(1), mpq(1))
    q_end = 4 * ((x[0] - 2) ** 2 + x[1] ** 2) - 1 * (x[0] ** 2 + x[1] ** 2)
    assert q_end == qbar(x)


def test_certain_case_is_bisector_half_plane():
    # with unit masses the constraint |x-t|^2 - |x-s|^2 <= 0 carves the
    # half-plane on the rival's side of the perpendicular bisector (the
    # literal consequence of the reduction formula; the bisector is the
    # classical cell boundary)
    field = certain_two_star()
    sys = worst_case_reduce(field, "s")
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = (mpq(int(rng.integers(-40, 41)), 4), mpq(int(rng.integers(-40, 41)), 4))
        rival_side = ((x[0] - 2) ** 2 + x[1] ** 2) <= (x[0] ** 2 + x[1] ** 2)
        assert robust_member(x, sys) == rival_side


# ---------------------------------------------------------------------------
# region_raster
# ---------------------------------------------------------------------------


def test_raster_single_star_all_true():
    field = StarField.make(2, [("s", (0, 0), (1, 2))])
    grid = region_raster(worst_case_reduce(field, "s"), (-5, 5, -5, 5), (8, 8))
    assert grid.all()


def test_raster_certain_two_star_bisector():
    sys = worst_case_reduce(certain_two_star(), "s")
    grid = region_raster(sys, (-5, 5, -5, 5), (21, 11))
    # split along the bisector x = 1: column j maps to x = -5 + j/2
    for i in range(11):
        for j in range(21):
            x = mpq(-5) + mpq(j, 2)
            assert grid[i, j] == (x >= 1)


def test_raster_determinism_and_exports():
    sys = worst_case_reduce(worked_field(), "s")
    g1 = region_raster(sys, (-5, 5, -5, 5), (30, 30))
    g2 = region_raster(sys, (-5, 5, -5, 5), (30, 30))
    assert raster_to_csv(g1) == raster_to_csv(g2)
    assert raster_to_pgm(g1) == raster_to_pgm(g2)
    pgm = raster_to_pgm(g1)
    assert pgm.startswith("P2\n30 30\n1\n")
    csv = raster_to_csv(g1)
    assert csv.count("\n") == 30


def test_raster_input_validation():
    sys = worst_case_reduce(worked_field(), "s")
    with pytest.raises(ValueError):
        region_raster(sys, (-5, 5, -5, 5), (1, 8))
    field3 = StarField.make(3, [("s", (0, 0, 0), (1, 1)),
                                ("t", (1, 0, 0), (1, 1))])
    with pytest.raises(ValueError):
        region_raster(worst_case_reduce(field3, "s"), (-5, 5, -5, 5), (4, 4))


# ---------------------------------------------------------------------------
# to_robust_instance
# ---------------------------------------------------------------------------


def test_instance_redundant_constraint_claim_holds():
    # collinear rivals: t1's constraint (half-plane x >= 1) is implied by
    # t2's (x >= 2), so dropping t1 and asking whether it still holds on the
    # remaining region must succeed
    field = StarField.make(2, [("s", (0, 0), (1, 1)),
                               ("t1", (2, 0), (1, 1)),
                               ("t2", (4, 0), (1, 1))])
    sys = worst_case_reduce(field, "s")
    inst = to_robust_instance(sys, drop="t1")
    res = check_a(inst, CFG)
    assert res.verdict == HOLDS
    # the reverse direction is not redundant: x = 3/2 separates them
    inst2 = to_robust_instance(sys, drop="t2")
    assert check_a(inst2, CFG).verdict == VIOLATED


def test_instance_empty_system_constant_claims():
    field = StarField.make(2, [("s", (0, 0), (1, 2))])
    sys = worst_case_reduce(field, "s")
    inst = to_robust_instance(sys, claim=1)
    assert check_a(inst, CFG).verdict == HOLDS
    inst2 = to_robust_instance(sys, claim=-1)
    res2 = check_a(inst2, CFG)
    assert res2.verdict == VIOLATED


def test_instance_negative_claim_violated_at_member_point():
    sys = worst_case_reduce(worked_field(), "s")
    inst = to_robust_instance(sys, claim=-1)
    res = check_a(inst, CFG)
    assert res.verdict == VIOLATED
    assert robust_member([mpq(v) for v in np.round(np.asarray(res.witness, dtype=float), 6)], sys) \
        or robust_member(res.witness, sys)


def test_instance_affine_claim_mapping():
    sys = worst_case_reduce(worked_field(), "s")
    h = RhsFunction.affine([0, 0], 1)  # claim "1 <= 0 on region": false
    inst = to_robust_instance(sys, claim=h)
    assert check_a(inst, CFG).verdict == VIOLATED
    with pytest.raises(ValueError):
        to_robust_instance(sys, claim=RhsFunction.polyhedral_max(
            [([1, 0], 0), ([-1, 0], 0)]))


def test_instance_endpoint_scenarios():
    sys = worst_case_reduce(worked_field(), "s")
    inst = to_robust_instance(sys, claim=0, endpoints=True)
    assert len(inst.scenarios) == 4  # 2 x 2 endpoint draws
    assert inst.dim_y == 1
    res = check_a(inst, CFG)
    assert res.verdict == HOLDS  # claim 0 >= 0 anywhere


def test_instance_requires_exactly_one_mode():
    sys = worst_case_reduce(worked_field(), "s")
    with pytest.raises(ValueError):
        to_robust_instance(sys)
    with pytest.raises(ValueError):
        to_robust_instance(sys, claim=1, drop="t")


def test_field_json_roundtrip():
    field = worked_field()
    again = StarField.loads(field.dumps())
    assert again.dumps() == field.dumps()
    assert again.star("t").interval == (mpq(1), mpq(4))
