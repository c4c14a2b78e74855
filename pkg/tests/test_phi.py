import json
import math

import numpy as np
import pytest

from bellshape.errors import GridTooCoarse, NotAdmissible
from bellshape.phi import (
    RW_HI,
    RW_LO,
    ConstantPiece,
    ExponentialRep,
    ExpressionPiece,
    PhiFunction,
    SampledPiece,
    SignedBoundaryMeasure,
    check_admissible,
    check_boundary_mass,
    classify_infinitely_divisible,
    classify_powers_bellshaped,
    iar_witness,
    pf_amcm_split,
    piece_from_dict,
    rrw_arctan,
    rw_arccot,
    wiener_hopf_split,
)
from bellshape.walks import rrw_phi_function, rw_phi_function


def pieces(*triples):
    return tuple(ConstantPiece(a, b, v) for a, b, v in triples)


INF = math.inf
GRID = np.concatenate([-np.geomspace(1e-3, 50, 60), np.geomspace(1e-3, 50, 120)])


class TestPhiFunction:
    def test_evaluation(self):
        phi = PhiFunction(((-2.0, 2), (-1.0, 1)), 0, pieces((0, 1, -0.5), (1, INF, 0.25)))
        assert phi(-5) == 2 and phi(-1.5) == 1 and phi(-0.5) == 0
        assert phi(0.5) == -0.5 and phi(3.0) == 0.25
        assert phi.leftmost_tail_value == 2
        assert phi.negative_intervals() == [(-INF, -2.0, 2), (-2.0, -1.0, 1), (-1.0, 0.0, 0)]

    def test_not_evaluated_at_zero(self):
        with pytest.raises(ValueError):
            rw_phi_function()(0.0)

    def test_invariants(self):
        with pytest.raises(ValueError):
            PhiFunction(((-1.0, 0.5),), 0)
        with pytest.raises(ValueError):
            PhiFunction((), 0, pieces((0, 1, 0), (2, INF, 0)))
        with pytest.raises(ValueError):
            PhiFunction(((1.0, 1),), 0)

    def test_from_intervals(self):
        phi = PhiFunction.from_intervals([(-INF, 0, 1), (-3, -1, 1), (2, INF, 1)])
        assert phi(-5) == 1 and phi(-2) == 2 and phi(-0.5) == 1
        assert phi(1.0) == 0 and phi(3) == 1
        with pytest.raises(ValueError):
            PhiFunction.from_intervals([(-1, 0, 0.5)])

    def test_sampled_piece_interpolates(self):
        p = SampledPiece(0.0, INF, ((0.0, 0.0), (1.0, 0.0), (3.0, 1.0)))
        np.testing.assert_allclose(p(np.array([0.5, 2.0, 10.0])), [0.0, 0.5, 1.0])

    def test_round_trip(self):
        for phi in (rw_phi_function(), rrw_phi_function(),
                    PhiFunction(((-1.0, 2),), 1, (SampledPiece(0, 2, ((0, -1), (2, 0))),
                                                  ConstantPiece(2, INF, 1.0)))):
            d = json.loads(json.dumps(phi.to_dict()))
            back = PhiFunction.from_dict(d)
            np.testing.assert_array_equal(back(GRID), phi(GRID))

    def test_piece_from_dict_inf(self):
        p = piece_from_dict({"from": 1, "to": "inf", "kind": "constant", "params": {"value": 1}})
        assert math.isinf(p.hi) and p(5.0) == 1.0

    def test_scaled(self):
        phi = rrw_phi_function().scaled(3)
        assert phi(-0.5) == -3
        assert phi(4.0) == pytest.approx(3 * rrw_arctan(4.0))
        with pytest.raises(ValueError):
            rrw_phi_function().scaled(0.5)

    def test_signed_measure(self):
        rep = ExponentialRep(0.3, 0.2, 0.0, rw_phi_function())
        m = SignedBoundaryMeasure.from_rep(rep)
        assert m.atom_at_infinity == 0.3 and m.atom_at_zero == -0.2
        assert m.density(2.0) == pytest.approx(rw_arccot(2.0) / 5)
        assert math.isfinite(m.total_variation())

    def test_rep_validation(self):
        with pytest.raises(ValueError):
            ExponentialRep(-1.0, 0.0, 0.0, PhiFunction())


class TestBranches:
    def test_rw_branch_values(self):
        assert RW_LO == pytest.approx(3 - 2 * math.sqrt(2))
        assert RW_HI == pytest.approx(3 + 2 * math.sqrt(2))
        phi = rw_phi_function()
        assert phi(0.1) == -1 and phi(10.0) == 1
        # continuity across the branch points
        for b in (RW_LO, RW_HI):
            assert phi(b * (1 - 1e-9)) == pytest.approx(phi(b * (1 + 1e-9)), abs=1e-3)
        assert abs(phi(1 + 1e-6)) < 1e-3 and abs(phi(1 - 1e-6)) < 1e-3

    def test_rw_antisymmetry(self):
        # s ↦ 1/s maps the expression to its negative
        s = np.geomspace(RW_LO * 1.001, RW_HI / 1.001, 50)
        np.testing.assert_allclose(rw_arccot(s), -rw_arccot(1 / s), atol=1e-14)

    def test_rrw_values(self):
        assert rrw_arctan(1.0) == 0.0
        assert rrw_arctan(4.0) == pytest.approx(math.atan(0.75) / math.pi)
        assert rrw_phi_function()(-0.5) == -1 and rrw_phi_function()(-2.0) == 0


class TestAdmissible:
    def test_rw_passes(self):
        assert check_admissible(rw_phi_function()).passed

    def test_rrw_passes(self):
        assert check_admissible(rrw_phi_function()).passed

    def test_sign_violation(self):
        rep = check_admissible(PhiFunction((), 0, pieces((0, 1, 0.5), (1, INF, 0))))
        assert not rep["iii"].passed and rep["iii"].witness
        assert rep["i"].passed and rep["ii"].passed and rep["iv"].passed

    def test_negative_steps_increasing(self):
        rep = check_admissible(PhiFunction(((-2.0, 2),), 3))
        assert not rep["i"].passed and "rises" in rep["i"].witness

    def test_not_increasing_after_rounding(self):
        phi = PhiFunction((), 0, pieces((0, 1, 0), (1, 2, 2.5), (2, INF, 1.0)))
        rep = check_admissible(phi)
        assert not rep["ii"].passed

    def test_integrability(self):
        grow = PhiFunction((), 0, (ConstantPiece(0, 1, 0.0),
                                   ExpressionPiece(1, INF, "power", {"exponent": 1.0})))
        assert not check_admissible(grow)["iv"].passed
        slow = PhiFunction((), 0, (ConstantPiece(0, 1, 0.0),
                                   ExpressionPiece(1, INF, "power", {"exponent": 0.5})))
        assert check_admissible(slow)["iv"].passed

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            check_admissible(PhiFunction(), grid_density=1)

    def test_report_dict(self):
        d = check_admissible(rw_phi_function()).to_dict()
        assert set(d) == {"i", "ii", "iii", "iv"}


class TestBoundaryMass:
    def test_boundary_case(self):
        bm = check_boundary_mass(PhiFunction((), 0, pieces((0, 1, -0.5), (1, INF, 0.5))))
        assert (bm.p, bm.q, bm.passed) == (0.5, 0.5, False)

    def test_geometric_phi(self):
        bm = check_boundary_mass(PhiFunction((), 0, pieces((0, 2, 0), (2, INF, 1))))
        assert (bm.p, bm.q, bm.passed) == (0.0, 0.0, True)

    def test_rw(self):
        bm = check_boundary_mass(rw_phi_function())
        assert bm.passed and bm.p == pytest.approx(0, abs=1e-3) and bm.q == pytest.approx(0, abs=1e-3)


class TestWienerHopf:
    def test_rrw(self):
        pos, neg = wiener_hopf_split(rrw_phi_function())
        phi = rrw_phi_function()
        assert pos(-0.5) == 0 and neg(-0.5) == -1
        s = np.array([0.2, 0.7, 1.5, 9.0])
        np.testing.assert_allclose(pos(s), np.maximum(phi(s), 0))
        np.testing.assert_allclose(neg(s), np.minimum(phi(s), 0))
        assert np.all(pos(s[:2]) == 0) and np.all(neg(s[2:]) == 0)

    def test_nonnegative(self):
        phi = PhiFunction((), 0, pieces((0, 2, 0), (2, INF, 1)))
        pos, neg = wiener_hopf_split(phi)
        np.testing.assert_array_equal(pos(GRID), phi(GRID))
        np.testing.assert_array_equal(neg(GRID), 0)

    def test_indicators(self):
        phi = PhiFunction((), 0, pieces((0, 0.5, -1), (0.5, 3, 0), (3, INF, 1)))
        pos, neg = wiener_hopf_split(phi)
        assert pos(0.2) == 0 and pos(4) == 1 and neg(0.2) == -1 and neg(4) == 0

    def test_resum(self):
        for phi in (rw_phi_function(), rrw_phi_function()):
            pos, neg = wiener_hopf_split(phi)
            np.testing.assert_array_equal(pos(GRID) + neg(GRID), phi(GRID))


class TestPfAmcm:
    def test_in_bands(self):
        phi = PhiFunction((), 0, pieces((0, 1, -0.3), (1, INF, 0.6)))
        pf, am = pf_amcm_split(phi)
        np.testing.assert_array_equal(pf(GRID), 0)
        np.testing.assert_allclose(am(GRID[GRID > 0]), phi(GRID[GRID > 0]))

    def test_hand_example(self):
        phi = PhiFunction((), 0, pieces((0, 0.5, -1.5), (0.5, 1, 0), (1, INF, 0)))
        pf, am = pf_amcm_split(phi)
        assert pf(0.25) == -1 and am(0.25) == -0.5
        assert pf(0.75) == 0 and am(0.75) == 0 and pf(4) == 0

    def test_rw(self):
        phi = rw_phi_function()
        pf, am = pf_amcm_split(phi)
        s = phi.samples(64)
        vp, va = pf(s), am(s)
        assert np.all(vp == np.round(vp))
        assert np.all(np.diff(vp) >= 0)
        assert np.all((va[s < 1] >= -1 - 1e-12) & (va[s < 1] <= 1e-12))
        assert np.all((va[s > 1] >= -1e-12) & (va[s > 1] <= 1 + 1e-12))
        np.testing.assert_allclose(vp + va, phi(s), atol=1e-14)
        assert pf(1 - 1e-3) == 0 and pf(1 + 1e-3) == 0

    def test_iar_witness(self):
        phi = PhiFunction((), 0, (ConstantPiece(0, 1, 0.0),
                                  ExpressionPiece(1, 100, "power", {"exponent": 0.5}),
                                  ConstantPiece(100, INF, 10.0)))
        steps = iar_witness(phi)
        # ⌈√s⌉ − 1 jumps at s = 1, 4, 9, ...
        xs = [x for x, _ in steps if x > 1]
        np.testing.assert_allclose(xs, [4, 9, 16, 25, 36, 49, 64, 81], rtol=1e-10)

    def test_not_admissible(self):
        with pytest.raises(NotAdmissible):
            pf_amcm_split(PhiFunction((), 0, pieces((0, 1, 0.5), (1, INF, 0))))
        with pytest.raises(NotAdmissible):
            pf_amcm_split(PhiFunction((), 0, pieces((0, 1, -0.5), (1, INF, 0.5))))


class TestClassify:
    def test_infinitely_divisible(self):
        assert classify_infinitely_divisible(rw_phi_function())
        assert not classify_infinitely_divisible(rrw_phi_function())
        assert classify_infinitely_divisible(PhiFunction())

    def test_powers(self):
        assert classify_powers_bellshaped(rw_phi_function())
        assert classify_powers_bellshaped(PhiFunction())
        down = PhiFunction((), 0, pieces((0, 1, 0), (1, 2, 0.8), (2, INF, 0.4)))
        assert check_admissible(down).passed
        assert not classify_powers_bellshaped(down)
