import math
import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose

from aks import exact_trajectory, solve, solve_r2
from algebra import BCov, Su2Cov, Su2Vec, lie_poisson_field
from errors import DegenerateOrbitError, GridError, InputError, LeafMembershipError
from groups import BEl, SU2El
from oracle import (
    TSU2_GENERATOR_SCALE,
    bfactor_residual,
    energy,
    exact_vs_rk4,
    hb_display,
    lagrangian,
    lagrangian_r2,
    lagrangian_tb,
    lagrangian_tb_top,
    lagrangian_tsu2,
    lax_field,
    legendre_defect,
    residual_report,
    rk4_integrate,
    toda_hamiltonian,
    tsu2_body_velocity,
    vector_field,
    _project,
)
from phase import (
    R2Params,
    R2Pt,
    SystemId,
    TBPt,
    TSU2Pt,
    momentum_r2,
    momentum_tb,
    pi_hat_v0,
    r2_preimage,
    state_to_array,
    tb_preimage,
    tsu2_preimage,
)
from schemas import Trajectory
from conftest import SIGMA, angles, bels, su2vecs, unit_leaf_vectors

HALF_LN2 = 0.5 * math.log(2.0)
TODA_START = R2Pt(q=-HALF_LN2, p=0.0)


class TestEnergy:
    def test_examples(self):
        assert energy(SystemId.toda(), TODA_START) == pytest.approx(0.5)
        assert energy(SystemId.cotangent_b(), TBPt(bel=BEl(), eta=BCov(ce=1.0))) == pytest.approx(0.5)
        assert energy(SystemId.orbit(), Su2Vec()) == 0.0

    @given(st.floats(-2, 1), st.floats(-3, 3))
    def test_toda_specialization(self, q, p):
        value = energy(SystemId.toda(), R2Pt(q=q, p=p))
        assert value == pytest.approx(toda_hamiltonian(q, p), rel=1e-12)

    @given(bels(), su2vecs())
    def test_hb_display(self, bel, X):
        pt = tb_preimage(X, bel)
        assert hb_display(pt) == pytest.approx(energy(SystemId.cotangent_b(), pt), rel=1e-9, abs=1e-12)

    def test_rejects_mismatched_state(self):
        with pytest.raises(InputError):
            energy(SystemId.orbit(), TODA_START)


class TestVectorField:
    def test_toda_example(self):
        assert_allclose(vector_field(SystemId.toda(), R2Pt(q=0.0, p=1.0)), [1.0, -2.0])

    def test_orbit_examples(self):
        assert_allclose(vector_field(SystemId.orbit(), Su2Vec(a3=1.0)), 0.0, atol=1e-15)
        assert_allclose(vector_field(SystemId.orbit(), Su2Vec(a1=1.0)), [0.0, 0.0, -1.0], atol=1e-15)

    @given(su2vecs())
    def test_lax_field_matches_lie_poisson_bracket(self, X):
        # the gradient of f = det/2 at X is X itself
        expected = lie_poisson_field(X, X.as_array()).as_array()
        assert_allclose(lax_field(X).as_array(), expected, atol=1e-12)

    @given(st.floats(-1, 1), st.floats(-2, 2), angles)
    def test_r2_gradient_check(self, q, p, theta):
        params = R2Params(mu=0.7, eps=1.3, theta=theta)
        system = SystemId.plane(params)
        h = 1e-5

        def H(q_, p_):
            return energy(system, R2Pt(q=q_, p=p_))

        dH_dq = (H(q + h, p) - H(q - h, p)) / (2 * h)
        dH_dp = (H(q, p + h) - H(q, p - h)) / (2 * h)
        assert_allclose(vector_field(system, R2Pt(q=q, p=p)), [dH_dp, -dH_dq], atol=1e-6, rtol=1e-6)

    def test_tb_field_matches_exact_curve(self, rng):
        system = SystemId.cotangent_b()
        for _ in range(20):
            X = Su2Vec.from_array(rng.normal(size=3))
            X = X.scaled(1.0 / math.sqrt(X.det()))
            bel = BEl(a=math.exp(rng.uniform(-0.5, 0.5)), b=rng.normal(), c=rng.normal())
            pt = tb_preimage(X, bel)
            h = 1e-5
            fd = (state_to_array(solve(system, pt, h)) - state_to_array(solve(system, pt, -h))) / (2 * h)
            assert_allclose(vector_field(system, pt), fd, atol=1e-6)

    def test_pinned_tsu2_constant(self, rng):
        assert TSU2_GENERATOR_SCALE == -0.125
        for _ in range(20):
            theta = rng.uniform(0.0, 2 * math.pi)
            z = rng.uniform(-0.8, 0.8)
            X = Su2Vec(a1=math.sqrt(1 - z * z) * math.cos(theta), a2=math.sqrt(1 - z * z) * math.sin(theta), a3=z)
            pt = tsu2_preimage(X, chi=rng.uniform(0.0, 2 * math.pi), eta3=rng.normal())
            system = SystemId.cotangent_su2(theta)
            h = 1e-5
            fd = (state_to_array(solve(system, pt, h)) - state_to_array(solve(system, pt, -h))) / (2 * h)
            assert_allclose(vector_field(system, pt), fd, atol=1e-6)

    def test_tsu2_preconditions(self):
        with pytest.raises(DegenerateOrbitError):
            vector_field(SystemId.cotangent_su2(0.0), TSU2Pt(g=SU2El.identity(), eta=Su2Cov(c1=1.0)))
        with pytest.raises(LeafMembershipError):
            vector_field(SystemId.cotangent_su2(0.0), TSU2Pt(g=SIGMA, eta=Su2Cov(c1=1.0)))

    def test_tsu2_normal_velocity_vanishes(self):
        pt = tsu2_preimage(Su2Vec(a1=0.6, a3=0.8), chi=0.3, eta3=1.2)
        pi_hat, _ = pi_hat_v0(pt.g)
        assert abs(pi_hat.pair(tsu2_body_velocity(pt))) < 1e-8


class TestRK4:
    def test_toda_endpoint(self):
        traj = rk4_integrate(SystemId.toda(), TODA_START, 2.0, h=1e-3, samples=3)
        exact = solve_r2(R2Params.toda(), TODA_START.q, TODA_START.p, 2.0)
        end = traj.samples[-1].state
        assert abs(end[0] - exact.q) < 1e-8
        assert abs(end[1] - exact.p) < 1e-8

    def test_step_halving_ratio(self):
        exact = solve_r2(R2Params.toda(), TODA_START.q, TODA_START.p, 2.0)

        def endpoint_error(h):
            end = rk4_integrate(SystemId.toda(), TODA_START, 2.0, h=h, samples=2).samples[-1].state
            return max(abs(end[0] - exact.q), abs(end[1] - exact.p))

        ratio = endpoint_error(0.05) / endpoint_error(0.025)
        assert 12.0 <= ratio <= 20.0

    def test_tiny_horizon_returns_start(self):
        traj = rk4_integrate(SystemId.toda(), TODA_START, 1e-12, h=1e-3)
        assert_allclose(traj.samples[-1].state, state_to_array(TODA_START), atol=1e-12)

    def test_backward_integration_is_increasing(self):
        traj = rk4_integrate(SystemId.toda(), TODA_START, -1.0, h=1e-2, samples=11)
        assert traj.times()[0] == -1.0
        assert traj.times()[-1] == 0.0
        exact = solve_r2(R2Params.toda(), TODA_START.q, TODA_START.p, -1.0)
        assert abs(traj.samples[0].state[0] - exact.q) < 1e-8

    def test_dual_systems_match_exact(self):
        X0 = Su2Vec(a1=-0.6, a2=0.0, a3=0.8)
        systems = [
            (SystemId.cotangent_b(), tb_preimage(X0, BEl(a=1.2, b=0.3, c=-0.4))),
            (SystemId.cotangent_su2(math.pi), tsu2_preimage(X0, chi=0.7, eta3=0.5)),
            (SystemId.orbit(), X0),
        ]
        for system, state0 in systems:
            assert exact_vs_rk4(system, state0, 3.0, 1e-3, 31) < 1e-6

    def test_rk4_energy_drift(self):
        traj = rk4_integrate(SystemId.toda(), TODA_START, 3.0, h=1e-3, samples=31)
        assert np.max(np.abs(traj.energies() - 0.5)) < 1e-7

    def test_rejects_bad_arguments(self):
        with pytest.raises(InputError):
            rk4_integrate(SystemId.toda(), TODA_START, 1.0, h=0.0)
        with pytest.raises(InputError):
            rk4_integrate(SystemId.toda(), TODA_START, 0.0)


class TestCotangentBProjection:
    def test_flip_reports_pre_flip_displacement(self):
        y, displacement = _project(SystemId.cotangent_b(), np.array([-0.25, 0.1, 0.2, 1.0, 0.0, 0.0]))
        assert y[0] == 0.25
        assert displacement == pytest.approx(0.5)

    def test_positive_a_untouched(self):
        y0 = np.array([0.25, 0.1, 0.2, 1.0, 0.0, 0.0])
        y, displacement = _project(SystemId.cotangent_b(), y0)
        assert_allclose(y, y0)
        assert displacement == 0.0


class TestResidualReport:
    def test_exact_toda(self):
        traj = exact_trajectory(SystemId.toda(), TODA_START, 1.0, 10001)
        report = residual_report(traj)
        assert report.max_hamilton_residual < 1e-6
        assert report.max_lax_residual < 1e-6
        assert report.max_energy_drift < 1e-10
        assert report.max_equivariance_defect < 1e-9
        assert report.flagged_samples == []
        assert report.step == pytest.approx(1e-4)

    def test_fixed_point(self):
        traj = exact_trajectory(SystemId.orbit(), Su2Vec(a3=1.0), 5.0, 11)
        report = residual_report(traj)
        assert report.max_hamilton_residual < 1e-12
        assert report.max_lax_residual < 1e-12
        assert report.max_energy_drift < 1e-12
        assert report.max_equivariance_defect < 1e-12

    def test_corrupted_sample_is_flagged(self):
        traj = exact_trajectory(SystemId.toda(), TODA_START, 1.0, 101)
        samples = [s.model_copy() for s in traj.samples]
        samples[50] = samples[50].model_copy(update={"state": [samples[50].state[0] + 0.01, samples[50].state[1]]})
        corrupted = Trajectory(system=traj.system, method="exact", samples=samples)
        report = residual_report(corrupted)
        assert report.max_hamilton_residual > 1e-3
        assert 50 in report.flagged_samples

    def test_rejects_short_and_irregular_grids(self):
        short = exact_trajectory(SystemId.toda(), TODA_START, 1.0, 2)
        with pytest.raises(GridError):
            residual_report(short)
        states = [TODA_START] * 3
        irregular = Trajectory.from_states(SystemId.toda(), "exact", [0.0, 0.1, 0.5], states)
        with pytest.raises(GridError):
            residual_report(irregular)

    def test_rejects_other_system(self):
        traj = exact_trajectory(SystemId.toda(), TODA_START, 1.0, 11)
        with pytest.raises(InputError):
            residual_report(traj, SystemId.cotangent_b())

    @hyp_settings(max_examples=20)
    @given(unit_leaf_vectors(), st.floats(-2, 2))
    def test_b_factor_ode(self, X, t):
        assert bfactor_residual(X, t) < 1e-6


class TestLagrangians:
    def test_toda_value(self):
        assert lagrangian_r2(R2Params.toda(), 0.0, 1.0) == pytest.approx(-0.5)
        assert lagrangian(SystemId.toda(), 0.0, 1.0) == pytest.approx(-0.5)

    def test_b_at_rest(self):
        assert lagrangian_tb(BEl(a=2.0, b=1.0, c=3.0), (0.0, 0.0, 0.0)) == 0.0
        assert lagrangian_tb_top(BEl(a=2.0, b=1.0, c=3.0), (0.0, 0.0, 0.0)) == 0.0

    @given(bels(), st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)))
    def test_b_forms_agree(self, bel, velocity):
        coordinate = lagrangian_tb(bel, velocity)
        top = lagrangian_tb_top(bel, velocity)
        assert top == pytest.approx(coordinate, rel=1e-12, abs=1e-12)

    def test_tsu2_rejects_point_orbit(self):
        with pytest.raises(DegenerateOrbitError):
            lagrangian_tsu2(SU2El.identity(), Su2Vec(a1=1.0), 0.5)

    def test_dispatch_errors(self):
        with pytest.raises(InputError):
            lagrangian(SystemId.cotangent_su2(0.0), SIGMA, Su2Vec(a1=1.0))
        with pytest.raises(InputError):
            lagrangian(SystemId.orbit(), Su2Vec(a3=1.0), Su2Vec())

    def test_legendre_consistency(self):
        X0 = Su2Vec(a1=-0.6, a2=0.0, a3=0.8)
        plane = SystemId.plane(R2Params(mu=0.5, eps=math.sqrt(2.0)))
        states = [
            (plane, r2_preimage(plane.r2, X0)),
            (SystemId.cotangent_b(), tb_preimage(X0, BEl(a=1.3, b=-0.2, c=0.5))),
            (SystemId.cotangent_su2(math.pi), tsu2_preimage(X0, chi=1.1, eta3=-0.7)),
        ]
        for system, state in states:
            assert legendre_defect(system, state) < 1e-8

    def test_toda_momentum_image(self):
        assert_allclose(momentum_r2(R2Params.toda(), TODA_START).as_array(), [-1.0, 0.0, 0.0], atol=1e-15)
        assert momentum_tb(TBPt(bel=BEl(), eta=BCov(ce=1.0))).det() == pytest.approx(1.0)
