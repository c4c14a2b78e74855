import math

import numpy as np
import pytest

from bellshape.constructors import (
    DiscreteMeasure,
    PolyaFrequencyParams,
    amcm_sequence,
    binomial_pmf,
    convolve,
    geometric_seq,
    pf_sequence,
)
from bellshape.errors import GridTooCoarse, NotAdmissible, SingularitySampled, ZeroCrossing
from bellshape.genfunc import (
    CircleEvaluator,
    amcm_gf,
    amcm_rep,
    boundary_phi,
    check_c5,
    eval_direct,
    eval_exponential,
    geometric_rep,
    kernel_integral,
    pf_rep,
    recover_sequence,
)
from bellshape.phi import ConstantPiece, ExponentialRep, ExpressionPiece, PhiFunction, SampledPiece
from bellshape.sequences import delta, from_values
from bellshape.walks import rrw_phi_closed, walk_rep

from conftest import circle_points

INF = math.inf


def step_rep(lo, hi, c=0.0):
    return ExponentialRep(0.0, 0.0, c, PhiFunction.from_intervals([(lo, hi, 1)]))


class TestEvalDirect:
    def test_delta(self):
        assert eval_direct(delta(), 1j) == 1

    def test_geometric(self):
        s = geometric_seq(0.5, tol=1e-14)
        assert abs(eval_direct(s, -1) - 2 / 3) <= s.deficit + 1e-15

    def test_binomial(self):
        assert abs(eval_direct(binomial_pmf(2, 0.5), -1)) < 1e-15

    def test_offset(self):
        s = from_values([1.0, 2.0], offset=-3)
        z = np.exp(0.7j)
        assert eval_direct(s, z) == pytest.approx(z**-3 + 2 * z**-2, rel=1e-14)


class TestKernel:
    def test_against_quadrature(self):
        from scipy import integrate

        z = 0.3 + 0.8j
        f = lambda s: 1 / (s - z) - s / (s * s + 1)
        for u, v in [(0.5, 2.0), (-3.0, -1.0), (0.1, 40.0)]:
            re = integrate.quad(lambda s: f(s).real, u, v, epsabs=1e-13)[0]
            im = integrate.quad(lambda s: f(s).imag, u, v, epsabs=1e-13)[0]
            assert kernel_integral(u, v, z) == pytest.approx(re + 1j * im, abs=1e-11)

    def test_negative_half_line_is_log(self):
        for z in (1j, 2 + 0.5j, -1 + 1e-3j):
            assert kernel_integral(-INF, 0.0, z) == pytest.approx(np.log(z), abs=1e-13)


class TestEvalExponential:
    def test_geometric_rep(self):
        rep = step_rep(2.0, INF, -0.5 * math.log(5 / 4))
        assert eval_exponential(rep, -1) == pytest.approx(2 / 3, abs=1e-13)
        assert geometric_rep(0.5).c == pytest.approx(rep.c)

    def test_log_z(self):
        rep = step_rep(-INF, 0.0)
        assert eval_exponential(rep, 1j) == pytest.approx(1j, abs=1e-15)
        assert eval_exponential(rep, 2j) == pytest.approx(2j, abs=1e-15)
        assert eval_exponential(rep, 1 + 1j) == pytest.approx(1 + 1j, abs=1e-14)

    def test_zero_phi(self):
        z = np.array([1j, -1, 0.3 + 2j, np.exp(2j)])
        np.testing.assert_allclose(eval_exponential(ExponentialRep(0, 0, 0, PhiFunction()), z), 1)

    def test_b_terms(self):
        rep = ExponentialRep(0.4, 0.3, 0.1, PhiFunction())
        z = np.exp(1.1j)
        assert eval_exponential(rep, z) == pytest.approx(np.exp(0.4 * z + 0.3 / z + 0.1), rel=1e-14)

    def test_lower_circle_by_symmetry(self):
        rep = geometric_rep(0.5)
        z = np.exp(-0.9j)
        assert eval_exponential(rep, z) == pytest.approx(1 / (1 - 0.5 * z), abs=1e-13)
        with pytest.raises(ValueError):
            eval_exponential(rep, 0.5 - 0.5j)

    def test_singular_point(self):
        with pytest.raises(SingularitySampled):
            eval_exponential(geometric_rep(0.5), 1.0)

    def test_not_admissible(self):
        bad = ExponentialRep(0, 0, 0, PhiFunction((), 0, (ConstantPiece(0, 1, 0.5), ConstantPiece(1, INF, 0))))
        with pytest.raises(NotAdmissible):
            eval_exponential(bad, 1j)

    def test_pf_reps(self):
        z = circle_points(32)
        for p in (PolyaFrequencyParams(gamma_plus=(0.7,)), PolyaFrequencyParams(b_plus=1.3),
                  PolyaFrequencyParams(m=2, c=0.1, b_minus=0.4, gamma_minus=(0.3,),
                                       delta_plus=(0.5,), delta_minus=(0.2,))):
            np.testing.assert_allclose(eval_exponential(pf_rep(p), z), p.gf(z), atol=1e-12)
            s = pf_sequence(p, tol=1e-14)
            np.testing.assert_allclose(eval_exponential(pf_rep(p), z), eval_direct(s, z),
                                       atol=1e-8)

    def test_amcm_rep(self):
        mp = DiscreteMeasure(((0.2, 0.5), (0.6, 0.5)))
        mm = DiscreteMeasure(((0.3, 1.0),))
        z = circle_points(32)
        rep = amcm_rep(mp, mm)
        np.testing.assert_allclose(eval_exponential(rep, z), amcm_gf(mp, mm, z), atol=1e-12)
        s = amcm_sequence(mp, mm, tol=1e-14)
        np.testing.assert_allclose(eval_exponential(rep, z), eval_direct(s, z), atol=1e-8)
        # AM–CM φ takes values in the bands
        v = rep.phi(rep.phi.samples(32))
        assert np.all(v >= -1 - 1e-12) and np.all(v <= 1 + 1e-12)

    def test_amcm_example_value(self):
        assert amcm_gf(DiscreteMeasure.point(0.5), DiscreteMeasure.point(1 / 3), -1) == pytest.approx(5 / 12, abs=1e-14)

    def test_sampled_and_expression_pieces(self):
        # the same linear φ on (0, 2) written two ways
        lin_s = PhiFunction((), 0, (SampledPiece(0, 2, ((0, -1), (2, 0))), ConstantPiece(2, INF, 0)))
        lin_e = PhiFunction((), 0, (ExpressionPiece(0, 2, "power", {"coef": 0.5, "exponent": 1.0},
                                                    shift=-1.0), ConstantPiece(2, INF, 0)))
        z = np.concatenate([circle_points(16), [0.5 + 0.5j, 3j]])
        a = eval_exponential(ExponentialRep(0, 0, 0, lin_s), z, check=False)
        b = eval_exponential(ExponentialRep(0, 0, 0, lin_e), z, check=False)
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_sampled_piece_to_infinity(self):
        a = PhiFunction((), 0, (ConstantPiece(0, 1, 0.0), SampledPiece(1, INF, ((1, 0), (3, 1), (5, 1)))))
        b = PhiFunction((), 0, (ConstantPiece(0, 1, 0.0), SampledPiece(1, 3, ((1, 0), (3, 1))),
                                ConstantPiece(3, INF, 1.0)))
        z = np.exp(1j * np.linspace(0.1, 3.0, 7))
        np.testing.assert_allclose(eval_exponential(ExponentialRep(0, 0, 0, a), z),
                                   eval_exponential(ExponentialRep(0, 0, 0, b), z), atol=1e-14)

    def test_holomorphy_probe(self):
        rep = walk_rep("square", 1)
        z0, h = 1.5j, 1e-4
        F = lambda z: eval_exponential(rep, z, tol=1e-13)
        dx = (F(z0 + h) - F(z0 - h)) / (2 * h)
        dy = (F(z0 + 1j * h) - F(z0 - 1j * h)) / (2 * h)
        assert abs(0.5 * (dx + 1j * dy)) < 1e-6


class TestRecover:
    def test_power(self):
        s = recover_sequence(CircleEvaluator.closed_form("power", k=1), (-3, 3), 16)
        np.testing.assert_allclose(s.values, [0, 0, 0, 0, 1, 0, 0], atol=1e-15)

    def test_binomial_round_trip(self):
        s = recover_sequence(binomial_pmf(2, 0.5), (0, 2), 64)
        np.testing.assert_allclose(s.values, [0.25, 0.5, 0.25], atol=1e-12)
        assert s.truncated and math.isinf(s.deficit)

    def test_unsymmetric_mode(self):
        a = from_values([0.1, -0.4, 0.3, 0.2], offset=-2)
        s = recover_sequence(a, (-2, 1), 8, symmetric=False)
        np.testing.assert_allclose(s.values, a.values, atol=1e-15)

    def test_grid_checks(self):
        with pytest.raises(GridTooCoarse):
            recover_sequence(delta(), (0, 0), 12)
        with pytest.raises(GridTooCoarse):
            recover_sequence(delta(), (-10, 10), 16)

    def test_singular(self):
        with pytest.raises(SingularitySampled):
            with np.errstate(divide="ignore", invalid="ignore"):
                recover_sequence(lambda z: 1 / (z - np.exp(1j * np.pi / 8)), (0, 3), 8)


class TestBoundaryPhi:
    def test_rrw_closed(self):
        F = CircleEvaluator.closed_form("rrw", y=1)
        assert boundary_phi(F, 4.0) == pytest.approx(math.atan(0.75) / math.pi, abs=1e-5)
        assert boundary_phi(F, -0.5) == pytest.approx(-1, abs=1e-5)

    def test_rw_closed(self):
        F = CircleEvaluator.closed_form("rw", y=1)
        assert boundary_phi(F, 0.1) == pytest.approx(-1, abs=1e-4)

    def test_rep_convergence(self):
        F = CircleEvaluator.from_rep(walk_rep("diagonal", 1))
        for s in (0.5, 4.0):
            target = float(rrw_phi_closed(s))
            errs = [abs(boundary_phi(F, s, t) - target) for t in (1e-2, 1e-4, 1e-6)]
            assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-4

    def test_zero_crossing(self):
        # z − 1 − i vanishes on the tracking path
        F = CircleEvaluator.closed_form(lambda z: z - (1 + 1j))
        with pytest.raises(ZeroCrossing):
            boundary_phi(F, 2.0)

    def test_bad_arguments(self):
        F = CircleEvaluator.closed_form("rrw", y=1)
        with pytest.raises(ValueError):
            boundary_phi(F, 0.0)
        with pytest.raises(ValueError):
            boundary_phi(binomial_pmf(2, 0.5), 1.0)


class TestC5:
    T = np.geomspace(1e-1, 1e-5, 9)

    def test_binomial(self):
        assert check_c5(binomial_pmf(2, 0.5), self.T).verdict

    def test_cauchy(self):
        r = check_c5(CircleEvaluator.closed_form("cauchy"), self.T)
        assert not r.verdict
        np.testing.assert_allclose(r.residuals, 1.0, rtol=1e-12)

    def test_geometric(self):
        assert check_c5(geometric_seq(0.5, tol=1e-14), self.T).verdict

    def test_input(self):
        with pytest.raises(ValueError):
            check_c5(delta(), [1e-3, 1e-2])


class TestMultiplicative:
    def test_convolve(self):
        a = pf_sequence(PolyaFrequencyParams(gamma_plus=(0.5,), delta_minus=(0.3,)), tol=1e-15)
        b = binomial_pmf(5, 0.2)
        z = circle_points(32)
        np.testing.assert_allclose(eval_direct(convolve(a, b), z), eval_direct(a, z) * eval_direct(b, z),
                                   atol=1e-10)
