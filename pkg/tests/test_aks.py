import math
import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm

from aks import (
    AksCurve,
    aks_factors,
    aks_factors_generic,
    b_velocity,
    exact_trajectory,
    exp_curve,
    legendre_f,
    momentum_curve,
    orbit_curve,
    solve,
    solve_r2,
    solve_tb,
    solve_tsu2,
    time_grid,
)
from algebra import BCov, H, Su2Cov, Su2Vec, collective_f
from errors import DegenerateOrbitError, NormalizationError
from groups import BEl, SU2El, coadjoint_b_on_su2
from phase import (
    R2Params,
    R2Pt,
    SystemId,
    TBPt,
    TSU2Pt,
    momentum_tsu2,
    orbit_coords,
    r2_preimage,
    tb_preimage,
    tsu2_preimage,
)
from conftest import SIGMA, angles, bels, su2vecs, unit_leaf_vectors

HALF_LN2 = 0.5 * math.log(2.0)
unit_times = st.floats(min_value=-3.0, max_value=3.0)


class TestLegendreMap:
    def test_examples(self):
        assert_allclose(legendre_f(Su2Vec(a3=1.0)), -0.5 * H)
        assert_allclose(legendre_f(Su2Vec()), 0.0)
        assert_allclose(legendre_f(Su2Vec(a1=1.0)), 0.5 * np.array([[0, -1], [-1, 0]]))

    def test_b_velocity_of_x3(self):
        assert_allclose(b_velocity(Su2Vec(a3=1.0)).as_array(), [0.0, 0.0, -0.5])


class TestExpCurve:
    def test_examples(self):
        t = 0.7
        assert_allclose(exp_curve(Su2Vec(a3=1.0), t), np.diag([math.exp(-t / 2), math.exp(t / 2)]), atol=1e-15)
        ch, sh = math.cosh(t / 2), math.sinh(t / 2)
        assert_allclose(exp_curve(Su2Vec(a1=1.0), t), [[ch, -sh], [-sh, ch]], atol=1e-15)
        assert_allclose(exp_curve(Su2Vec(a1=0.3, a2=0.2), 0.0), np.eye(2))
        assert_allclose(exp_curve(Su2Vec(), 5.0), np.eye(2))

    @given(su2vecs(), unit_times)
    def test_matches_expm(self, X, t):
        expected = expm(t * legendre_f(X))
        assert_allclose(exp_curve(X, t), expected, atol=1e-9, rtol=1e-9)
        assert abs(np.linalg.det(exp_curve(X, t)) - 1.0) < 1e-9


class TestFactors:
    def test_x3(self):
        t = 1.3
        g, b = aks_factors(Su2Vec(a3=1.0), t)
        assert_allclose(g.matrix(), np.eye(2), atol=1e-15)
        assert_allclose(b.matrix(), np.diag([math.exp(-t / 2), math.exp(t / 2)]), atol=1e-14)

    def test_time_zero(self):
        g, b = aks_factors(Su2Vec(a1=0.6, a3=0.8), 0.0)
        assert_allclose(g.matrix(), np.eye(2), atol=1e-15)
        assert_allclose(b.matrix(), np.eye(2), atol=1e-15)

    def test_x1_at_one(self):
        _, b = aks_factors(Su2Vec(a1=1.0), 1.0)
        root = math.sqrt(math.cosh(1.0))
        assert b.a == pytest.approx(root)
        assert b.upper == pytest.approx(complex(-math.sinh(1.0) / root, 0.0))

    @given(unit_leaf_vectors(), unit_times)
    def test_closed_form_matches_generic(self, X, t):
        g, b = aks_factors(X, t)
        g2, b2 = aks_factors_generic(X, t)
        assert_allclose(g.matrix(), g2.matrix(), atol=1e-11)
        assert_allclose(b.matrix(), b2.matrix(), atol=1e-11)
        assert np.max(np.abs(g.matrix() @ b.matrix() - exp_curve(X, t))) < 1e-11

    def test_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            aks_factors(Su2Vec(a1=2.0), 1.0)

    def test_generic_path_for_non_unit(self):
        X = Su2Vec(a1=1.0, a3=1.0)
        curve = AksCurve(X0=X)
        assert not curve.closed_form_valid
        g, b = curve.factors(0.8)
        assert_allclose(g.matrix() @ b.matrix(), exp_curve(X, 0.8), atol=1e-12)

    def test_curve_rejects_zero(self):
        with pytest.raises(ValueError):
            AksCurve(X0=Su2Vec())


class TestToda:
    def test_worked_curve(self):
        params = R2Params.toda()
        for t in np.linspace(-3.0, 3.0, 25):
            pt = solve_r2(params, -HALF_LN2, 0.0, float(t))
            assert pt.q == pytest.approx(-HALF_LN2 - math.log(math.cosh(t)), abs=1e-12)
            assert pt.p == pytest.approx(-math.tanh(t), abs=1e-12)
            assert 0.5 * pt.p ** 2 + math.exp(2 * pt.q) == pytest.approx(0.5, abs=1e-12)

    def test_time_zero(self):
        params = R2Params.toda()
        pt = solve_r2(params, -HALF_LN2, 0.0, 0.0)
        assert pt.q == pytest.approx(-HALF_LN2, abs=1e-15)
        assert pt.p == pytest.approx(0.0, abs=1e-15)

    @given(st.floats(min_value=-0.9, max_value=0.9), unit_times)
    def test_general_solution_keeps_q0(self, p0, t):
        # (p0/2mu)^2 + eps^2 exp(4 mu q0) = 1 with mu = 1/2, eps = sqrt 2
        q0 = 0.5 * math.log((1.0 - p0 ** 2) / 2.0)
        pt = solve_r2(R2Params.toda(), q0, p0, t)
        assert pt.q == pytest.approx(q0 - math.log(math.cosh(t) - p0 * math.sinh(t)), abs=1e-10)

    def test_normalization_error_names_constraint(self):
        with pytest.raises(NormalizationError, match=r"\(p0/2mu\)\^2"):
            solve_r2(R2Params.toda(), 0.0, 0.0, 1.0)

    def test_degenerate_eps(self):
        with pytest.raises(DegenerateOrbitError):
            solve_r2(R2Params(mu=1.0, eps=0.0), 0.0, 2.0, 1.0)


class TestCotangentB:
    def test_x3_data(self):
        pt0 = TBPt(bel=BEl(), eta=BCov(ch=-2.0))
        t = 0.9
        pt = solve_tb(pt0, t)
        assert pt.bel.a == pytest.approx(math.exp(-t / 2))
        assert abs(pt.bel.upper) < 1e-14
        assert pt.eta == pt0.eta

    def test_time_zero(self):
        pt0 = tb_preimage(Su2Vec(a1=0.6, a2=0.0, a3=-0.8), BEl(a=1.5, b=0.2, c=-0.1))
        pt = solve_tb(pt0, 0.0)
        assert_allclose(pt.bel.matrix(), pt0.bel.matrix(), atol=1e-14)

    def test_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            solve_tb(TBPt(bel=BEl(), eta=BCov(ce=2.0)), 1.0)


class TestCotangentSU2:
    def test_sigma_curve_is_equivariant(self):
        pt0 = TSU2Pt(g=SIGMA, eta=Su2Cov(c1=1.0))
        X0 = momentum_tsu2(pt0)
        for t in (-1.5, 0.3, 2.0):
            expected = coadjoint_b_on_su2(aks_factors(X0, t)[1], X0)
            assert_allclose(momentum_tsu2(solve_tsu2(pt0, t)).as_array(), expected.as_array(), atol=1e-12)

    @hyp_settings(max_examples=40)
    @given(unit_leaf_vectors(), angles, unit_times)
    def test_arg_beta_is_constant(self, X, chi, t):
        pt0 = tsu2_preimage(X, chi=chi, eta3=0.4)
        pt = solve_tsu2(pt0, t)
        delta = (pt.g.vartheta - pt0.g.vartheta + math.pi) % (2 * math.pi) - math.pi
        assert abs(delta) < 1e-10

    def test_rejects_point_orbit(self):
        with pytest.raises(DegenerateOrbitError):
            solve_tsu2(TSU2Pt(g=SU2El.identity(), eta=Su2Cov(c1=1.0)), 1.0)


class TestOrbitCurve:
    def test_x3_is_fixed(self):
        for t in (-2.0, 0.5, 5.0):
            assert_allclose(orbit_curve(Su2Vec(a3=1.0), t).as_array(), [0, 0, 1], atol=1e-15)

    def test_x1_curve(self):
        for t in np.linspace(-3.0, 3.0, 13):
            expected = [1.0 / math.cosh(t), 0.0, -math.tanh(t)]
            assert_allclose(orbit_curve(Su2Vec(a1=1.0), float(t)).as_array(), expected, atol=1e-12)

    @given(unit_leaf_vectors(), unit_times)
    def test_stays_on_leaf_and_conserves_energy(self, X, t):
        gamma = orbit_curve(X, t)
        delta = (orbit_coords(gamma).theta - orbit_coords(X).theta + math.pi) % (2 * math.pi) - math.pi
        assert abs(delta) < 1e-12
        assert collective_f(gamma) == pytest.approx(collective_f(X), abs=1e-10)

    @hyp_settings(max_examples=30)
    @given(unit_leaf_vectors(), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
    def test_group_property(self, X, t, s):
        direct = orbit_curve(X, t + s)
        stepwise = orbit_curve(orbit_curve(X, t), s, tolerance=1e-6)
        assert_allclose(direct.as_array(), stepwise.as_array(), atol=1e-9)

    def test_rejects_non_unit(self):
        with pytest.raises(NormalizationError):
            orbit_curve(Su2Vec(a1=3.0), 1.0)


class TestFlowGroupProperty:
    @hyp_settings(max_examples=30)
    @given(st.floats(-0.9, 0.9), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
    def test_plane(self, p0, t, s):
        params = R2Params(mu=0.8, eps=1.5)
        q0 = math.log((1.0 - (p0 / 1.6) ** 2) / 2.25) / 3.2
        direct = solve_r2(params, q0, p0, t + s)
        first = solve_r2(params, q0, p0, t)
        stepwise = solve_r2(params, first.q, first.p, s, tolerance=1e-6)
        assert_allclose([stepwise.q, stepwise.p], [direct.q, direct.p], atol=1e-9)

    @hyp_settings(max_examples=30)
    @given(unit_leaf_vectors(), bels(), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
    def test_cotangent_b(self, X, bel, t, s):
        pt0 = tb_preimage(X, bel)
        direct = solve_tb(pt0, t + s)
        stepwise = solve_tb(solve_tb(pt0, t), s, tolerance=1e-6)
        scale = max(1.0, float(np.max(np.abs(direct.bel.matrix()))))
        assert_allclose(stepwise.bel.matrix(), direct.bel.matrix(), atol=1e-9 * scale)
        assert stepwise.eta == pt0.eta

    @hyp_settings(max_examples=30)
    @given(unit_leaf_vectors(), angles, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
    def test_cotangent_su2(self, X, chi, t, s):
        pt0 = tsu2_preimage(X, chi=chi, eta3=0.3)
        direct = solve_tsu2(pt0, t + s)
        stepwise = solve_tsu2(solve_tsu2(pt0, t), s, tolerance=1e-6)
        assert_allclose(stepwise.g.matrix(), direct.g.matrix(), atol=1e-9)
        assert_allclose(stepwise.eta.as_array(), direct.eta.as_array(), atol=1e-9)


class TestTDuality:
    @hyp_settings(max_examples=25)
    @given(unit_leaf_vectors(theta=math.pi), bels(), angles, unit_times)
    def test_three_systems_share_the_momentum_curve(self, X0, bel, chi, t):
        reference = orbit_curve(X0, t).as_array()
        plane = SystemId.plane(R2Params(mu=0.5, eps=math.sqrt(2.0)))
        states = [
            (plane, r2_preimage(plane.r2, X0)),
            (SystemId.cotangent_b(), tb_preimage(X0, bel)),
            (SystemId.cotangent_su2(math.pi), tsu2_preimage(X0, chi=chi)),
        ]
        for system, state0 in states:
            curve = momentum_curve(system, state0, np.array([t]))
            assert_allclose(curve[0], reference, atol=1e-9)


class TestSampling:
    def test_time_grid(self):
        assert time_grid(1.0, 3).tolist() == [0.0, 0.5, 1.0]
        assert time_grid(-1.0, 3).tolist() == [-1.0, -0.5, 0.0]

    def test_exact_trajectory(self):
        traj = exact_trajectory(SystemId.toda(), R2Pt(q=-HALF_LN2, p=0.0), 2.0, 21)
        assert traj.method == "exact"
        assert len(traj.samples) == 21
        assert np.max(np.abs(traj.energies() - 0.5)) < 1e-12

    def test_exact_trajectory_rejects_bad_start(self):
        with pytest.raises(NormalizationError):
            exact_trajectory(SystemId.toda(), R2Pt(q=0.0, p=0.0), 2.0, 21)

    def test_solve_dispatch(self):
        assert solve(SystemId.orbit(), Su2Vec(a3=1.0), 3.0) == Su2Vec(a3=1.0)
        assert_allclose(solve(SystemId.orbit(), Su2Vec(a1=1.0), 0.0).as_array(), [1.0, 0.0, 0.0], atol=1e-15)
