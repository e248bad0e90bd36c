"""
LangGraph verification workflow for the PL-duality lab.

Each suite is a pure function of a seeded generator that checks one layer
of the library against independent computations: factorization round
trips, equivariance, T-duality agreement, Lax residuals and Lagrangian
identities. The workflow plans the requested suites, runs them one by one
and folds the results into a deterministic VerifyReport.
"""

import cmath
import math
import operator
from typing import Annotated, Callable, Optional, Sequence, TypedDict
import numpy as np
from langgraph.graph import END, StateGraph
from loguru import logger
from scipy.linalg import expm

from aks import aks_factors, aks_factors_generic, exact_trajectory, exp_curve, legendre_f, orbit_curve, solve
from algebra import (
    BAlgVec,
    BCov,
    Su2Cov,
    Su2Vec,
    bracket,
    collective_f,
    gram_matrix,
    lie_poisson_field,
    pair_sl2,
    project_sl2,
    psi_adjoint,
    psi_map,
    su2_coords,
)
from config import settings
from errors import InputError, VerificationFailure
from groups import (
    BEl,
    PointOrbit,
    SU2El,
    SphereOrbit,
    TWO_PI,
    b_exp,
    classify_dressing_orbit,
    coadjoint_b_on_su2,
    dressing_inf_gen,
    dressing_inf_gen_closed_form,
    dressing_pair,
    iwasawa_factorize,
    stabilizer_element,
)
from oracle import (
    bfactor_residual,
    energy,
    exact_vs_rk4,
    hb_display,
    lagrangian_r2,
    lagrangian_tb,
    lagrangian_tb_top,
    lax_field,
    legendre_defect,
    residual_report,
    rk4_integrate,
    toda_hamiltonian,
    tsu2_body_velocity,
    vector_field,
)
from phase import (
    OrbitPt,
    PhasePoint,
    R2Params,
    R2Pt,
    SystemId,
    TBPt,
    TSU2Pt,
    act_r2,
    act_tb,
    act_tsu2,
    gauge_slice,
    gauge_slice_inverse,
    is_tsu2_member,
    momentum_image,
    momentum_r2,
    momentum_tb,
    momentum_tsu2,
    momentum_tsu2_components,
    orbit_coords,
    orbit_vector,
    pi_hat_v0,
    r2_preimage,
    state_to_array,
    tb_preimage,
    tsu2_preimage,
)
from schemas import PropertyResult, VerifyReport

SuiteFn = Callable[[np.random.Generator, Optional[int], int], list[PropertyResult]]


# ===== Random samplers =====

def random_su2vec(rng: np.random.Generator) -> Su2Vec:
    return Su2Vec.from_array(rng.normal(size=3))


def random_leaf_vector(rng: np.random.Generator, theta: float) -> Su2Vec:
    """Unit vector of O_theta with |a3| <= 0.8."""
    z = rng.uniform(-0.8, 0.8)
    return orbit_vector(OrbitPt(theta=theta % TWO_PI, x=math.sqrt(1.0 - z * z), z=z))


def random_unit_su2vec(rng: np.random.Generator) -> Su2Vec:
    return random_leaf_vector(rng, rng.uniform(0.0, TWO_PI))


def random_traceless(rng: np.random.Generator) -> np.ndarray:
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return M - 0.5 * np.trace(M) * np.eye(2)


def random_sl2(rng: np.random.Generator) -> np.ndarray:
    """Complex 2x2 matrix rescaled to determinant one."""
    while True:
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        det = complex(np.linalg.det(M))
        if abs(det) > 0.1:
            return M / cmath.sqrt(det)


def random_su2el(rng: np.random.Generator) -> SU2El:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return SU2El(alpha=complex(v[0], v[1]), beta=complex(v[2], v[3]))


def random_bel(rng: np.random.Generator) -> BEl:
    return BEl(a=math.exp(0.5 * rng.normal()), b=rng.normal(), c=rng.normal())


def random_balg(rng: np.random.Generator) -> BAlgVec:
    return BAlgVec.from_array(rng.normal(size=3))


def random_r2_params(rng: np.random.Generator) -> R2Params:
    return R2Params(
        mu=rng.uniform(0.3, 1.5),
        eps=rng.uniform(0.5, 2.0),
        theta=rng.uniform(0.0, TWO_PI),
    )


def random_tsu2(rng: np.random.Generator) -> TSU2Pt:
    return TSU2Pt(g=random_su2el(rng), eta=Su2Cov.from_array(rng.normal(size=3)))


def random_dual_triple(rng: np.random.Generator) -> tuple[Su2Vec, list[tuple[SystemId, PhasePoint]]]:
    """
    A unit momentum image X0 together with one state of each dual system
    whose momentum image is X0.
    """
    params = random_r2_params(rng)
    X0 = random_leaf_vector(rng, params.theta + math.pi)
    leaf = orbit_coords(X0)
    systems = [
        (SystemId.plane(params), r2_preimage(params, X0)),
        (SystemId.cotangent_b(), tb_preimage(X0, random_bel(rng))),
        (
            SystemId.cotangent_su2(leaf.theta),
            tsu2_preimage(X0, chi=rng.uniform(0.0, TWO_PI), eta3=rng.normal()),
        ),
    ]
    return X0, systems


def _count(samples: Optional[int], default: int) -> int:
    return default if samples is None else samples


def _property(suite: str, name: str, defects: Sequence[float], tolerance: float, seed: int) -> PropertyResult:
    values = np.asarray(defects, dtype=float)
    if values.size == 0:
        return PropertyResult(
            suite=suite, name=name, passed=True, max_defect=0.0,
            tolerance=tolerance, seed=seed, samples=0,
        )
    values = np.where(np.isfinite(values), values, np.inf)
    worst = int(np.argmax(values))
    max_defect = float(values[worst])
    return PropertyResult(
        suite=suite,
        name=name,
        passed=bool(max_defect < tolerance),
        max_defect=max_defect if math.isfinite(max_defect) else 1e308,
        tolerance=tolerance,
        seed=seed,
        samples=int(values.size),
        worst_sample=worst,
    )


def _diff(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


def _vec_diff(X: Su2Vec, Y: Su2Vec) -> float:
    return _diff(X.as_array(), Y.as_array())


def _angle_gap(x: float, y: float) -> float:
    return abs(cmath.phase(cmath.exp(1j * (x - y))))


def _su2_product(g: SU2El, h: SU2El) -> SU2El:
    G = g.matrix() @ h.matrix()
    return SU2El(alpha=complex(G[0, 0]), beta=complex(G[0, 1]))


def _orbit_class_defect(before: SU2El, after: SU2El) -> float:
    """Angle change of the orbit label; inf when the orbit kind changes."""
    old, new = classify_dressing_orbit(before), classify_dressing_orbit(after)
    if isinstance(old, PointOrbit) and isinstance(new, PointOrbit):
        return _angle_gap(old.chi, new.chi)
    if isinstance(old, SphereOrbit) and isinstance(new, SphereOrbit):
        return _angle_gap(old.vartheta, new.vartheta)
    return math.inf


# ===== Suites =====

def algebra_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 500)
    expected = np.zeros((6, 6))
    expected[0, 3], expected[1, 4], expected[2, 5] = -1.0, 1.0, -2.0
    expected = expected + expected.T

    bracket_defects, projection, invariance, duality, lax, energy_form = [], [], [], [], [], []
    for _ in range(n):
        u, v = random_su2vec(rng), random_su2vec(rng)
        commutator = su2_coords(bracket(u.matrix(), v.matrix()))
        bracket_defects.append(_diff(commutator, -2.0 * np.cross(u.as_array(), v.as_array())))

        Z = random_balg(rng)
        K, B = project_sl2(u.matrix() + Z.matrix())
        projection.append(max(_vec_diff(K, u), _diff(B.as_array(), Z.as_array())))

        g = random_sl2(rng)
        g_inv = np.linalg.inv(g)
        X, Y = random_traceless(rng), random_traceless(rng)
        invariance.append(abs(pair_sl2(g @ X @ g_inv, g @ Y @ g_inv) - pair_sl2(X, Y)))

        duality.append(max(
            abs(psi_map(u).pair(Z) - pair_sl2(u.matrix(), Z.matrix())),
            abs(psi_adjoint(Z).pair(u) - psi_map(u).pair(Z)),
        ))
        lax.append(_vec_diff(lie_poisson_field(u, u.as_array()), lax_field(u)))
        energy_form.append(abs(collective_f(u) - 0.5 * u.det()))

    return [
        _property("algebra", "gram_matrix", [_diff(gram_matrix(), expected)], 1e-14, seed),
        _property("algebra", "bracket_is_scaled_cross_product", bracket_defects, 1e-12, seed),
        _property("algebra", "projection_round_trip", projection, 1e-12, seed),
        _property("algebra", "pairing_ad_invariance", invariance, 1e-9, seed),
        _property("algebra", "psi_is_the_pairing", duality, 1e-12, seed),
        _property("algebra", "lie_poisson_matches_lax_form", lax, 1e-12, seed),
        _property("algebra", "collective_f_is_half_det", energy_form, 1e-12, seed),
    ]


def groups_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 1000)
    round_trip, structure, generator, left_action, conjugation, stabilizer, exponential = [], [], [], [], [], [], []
    cocycle, classification = [], []
    for _ in range(n):
        l = random_sl2(rng)
        g, b = iwasawa_factorize(l)
        round_trip.append(_diff(g.matrix() @ b.matrix(), l))
        structure.append(max(abs(abs(g.alpha) ** 2 + abs(g.beta) ** 2 - 1.0), max(0.0, -b.a)))

        h = random_su2el(rng)
        Z = random_balg(rng)
        generator.append(_vec_diff(dressing_inf_gen(h, Z), dressing_inf_gen_closed_form(h, Z)))

        b1, b2, X = random_bel(rng), random_bel(rng), random_su2vec(rng)
        left_action.append(_vec_diff(
            coadjoint_b_on_su2(b1.compose(b2), X),
            coadjoint_b_on_su2(b1, coadjoint_b_on_su2(b2, X)),
        ))
        B = b1.matrix()
        conjugation.append(_diff(su2_coords(B @ X.matrix() @ np.linalg.inv(B)), coadjoint_b_on_su2(b1, X).as_array()))

        theta = rng.uniform(0.0, TWO_PI)
        on_leaf = random_leaf_vector(rng, theta)
        fixed = coadjoint_b_on_su2(stabilizer_element(theta, rng.normal()), on_leaf)
        stabilizer.append(_vec_diff(fixed, on_leaf))

        W, t = random_balg(rng), rng.uniform(-1.0, 1.0)
        exponential.append(_diff(b_exp(W, t).matrix(), expm(t * W.matrix())))

        g = random_su2el(rng)
        dressed_gh, residual_gh = dressing_pair(b1, _su2_product(g, h))
        dressed_g, residual_g = dressing_pair(b1, g)
        dressed_h, residual_h = dressing_pair(residual_g, h)
        twice, _ = dressing_pair(b2, dressed_g)
        once, _ = dressing_pair(b2.compose(b1), g)
        cocycle.append(max(
            _diff(dressed_gh.matrix(), dressed_g.matrix() @ dressed_h.matrix()),
            _diff(residual_gh.matrix(), residual_h.matrix()),
            _diff(twice.matrix(), once.matrix()),
        ))

        start = h if len(classification) % 2 else SU2El(alpha=cmath.exp(1j * rng.uniform(0.0, TWO_PI)), beta=0j)
        classification.append(_orbit_class_defect(start, dressing_pair(b2, start)[0]))

    return [
        _property("groups", "iwasawa_round_trip", round_trip, 1e-12, seed),
        _property("groups", "iwasawa_factor_structure", structure, 1e-12, seed),
        _property("groups", "dressing_generator_closed_form", generator, 1e-12, seed),
        _property("groups", "coadjoint_is_left_action", left_action, 1e-9, seed),
        _property("groups", "coadjoint_is_projected_conjugation", conjugation, 1e-10, seed),
        _property("groups", "stabilizer_fixes_leaf", stabilizer, 1e-12, seed),
        _property("groups", "b_exp_matches_expm", exponential, 1e-12, seed),
        _property("groups", "dressing_cocycle", cocycle, 1e-9, seed),
        _property("groups", "dressing_orbit_classification", classification, 1e-9, seed),
    ]


def phase_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 500)
    eq_r2, eq_tb, eq_tsu2 = [], [], []
    pre_r2, pre_tb, pre_tsu2 = [], [], []
    components, slices, annihilator = [], [], []
    for _ in range(n):
        bt = random_bel(rng)

        params = random_r2_params(rng)
        plane = R2Pt(q=rng.uniform(-1.0, 1.0), p=rng.uniform(-2.0, 2.0))
        eq_r2.append(_vec_diff(
            momentum_r2(params, act_r2(params, bt, plane)),
            coadjoint_b_on_su2(bt, momentum_r2(params, plane)),
        ))
        X = random_leaf_vector(rng, params.theta + math.pi).scaled(rng.uniform(0.5, 2.0))
        pre_r2.append(_vec_diff(momentum_r2(params, r2_preimage(params, X)), X))

        tb = TBPt(bel=random_bel(rng), eta=BCov.from_array(rng.normal(size=3)))
        eq_tb.append(_vec_diff(momentum_tb(act_tb(bt, tb)), coadjoint_b_on_su2(bt, momentum_tb(tb))))
        Y = random_su2vec(rng)
        pre_tb.append(_vec_diff(momentum_tb(tb_preimage(Y, random_bel(rng))), Y))

        pt = random_tsu2(rng)
        eq_tsu2.append(_vec_diff(momentum_tsu2(act_tsu2(bt, pt)), coadjoint_b_on_su2(bt, momentum_tsu2(pt))))
        built = tsu2_preimage(Y, chi=rng.uniform(0.0, TWO_PI), eta3=rng.normal())
        leaf = orbit_coords(Y)
        membership = 0.0 if is_tsu2_member(built, leaf.theta) and abs(built.g.beta) > settings.degenerate_beta else 1.0
        pre_tsu2.append(max(_vec_diff(momentum_tsu2(built), Y), membership))

        theta = rng.uniform(0.0, TWO_PI)
        J = momentum_tsu2(pt).as_array()
        along = np.array([math.cos(theta), math.sin(theta), 0.0])
        across = np.array([-math.sin(theta), math.cos(theta), 0.0])
        components.append(_diff(momentum_tsu2_components(pt, theta), [J @ along, J @ across, J[2]]))

        t, a, v3, vtheta = rng.normal(), math.exp(0.5 * rng.normal()), rng.normal(), rng.normal()
        slice_pt = gauge_slice(theta, t, a, v3, vtheta)
        slices.append(_diff(gauge_slice_inverse(theta, t, a, slice_pt.p_a, slice_pt.p_t), [v3, vtheta]))

        if abs(pt.g.beta) > 1e-3:
            pi_hat, v0 = pi_hat_v0(pt.g)
            pairings = [pi_hat.pair(dressing_inf_gen(pt.g, BAlgVec.from_array(e))) for e in np.eye(3)]
            annihilator.append(max(max(abs(p) for p in pairings), abs(pi_hat.pair(v0) - 1.0)))

    return [
        _property("phase", "equivariance_r2", eq_r2, 1e-10, seed),
        _property("phase", "equivariance_tb", eq_tb, 1e-10, seed),
        _property("phase", "equivariance_tsu2", eq_tsu2, 1e-10, seed),
        _property("phase", "preimage_r2", pre_r2, 1e-10, seed),
        _property("phase", "preimage_tb", pre_tb, 1e-10, seed),
        _property("phase", "preimage_tsu2", pre_tsu2, 1e-10, seed),
        _property("phase", "tsu2_component_display", components, 1e-12, seed),
        _property("phase", "gauge_slice_round_trip", slices, 1e-12, seed),
        _property("phase", "pi_hat_annihilates_dressing", annihilator, 1e-10, seed),
    ]


def aks_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 200)
    toda = SystemId.toda()
    q_start = -0.5 * math.log(2.0)

    closed, reconstruction, exponential, toda_curve, general_toda, bfactor, conserved = [], [], [], [], [], [], []
    flow = {"r2": [], "tb": [], "tsu2": []}
    for _ in range(n):
        X, t = random_unit_su2vec(rng), rng.uniform(-3.0, 3.0)
        g, b = aks_factors(X, t)
        g_gen, b_gen = aks_factors_generic(X, t)
        closed.append(max(
            abs(g.alpha - g_gen.alpha), abs(g.beta - g_gen.beta),
            abs(b.a - b_gen.a), abs(b.upper - b_gen.upper),
        ))
        reconstruction.append(_diff(g.matrix() @ b.matrix(), exp_curve(X, t)))
        exponential.append(_diff(exp_curve(X, t), expm(t * legendre_f(X))))

        exact = solve(toda, R2Pt(q=q_start, p=0.0), t)
        toda_curve.append(max(abs(exact.q - (q_start - math.log(math.cosh(t)))), abs(exact.p + math.tanh(t))))

        p0 = rng.uniform(-0.9, 0.9)
        q0 = 0.5 * math.log(0.5 * (1.0 - p0 * p0))
        moved = solve(toda, R2Pt(q=q0, p=p0), t)
        general_toda.append(abs(moved.q - (q0 - math.log(math.cosh(t) - p0 * math.sinh(t)))))

        bfactor.append(bfactor_residual(X, rng.uniform(-2.0, 2.0)))
        conserved.append(abs(orbit_curve(X, t).det() - 1.0))

        _, systems = random_dual_triple(rng)
        t1, t2 = rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)
        for system, state in systems:
            direct = state_to_array(solve(system, state, t1 + t2))
            stepwise = state_to_array(solve(system, solve(system, state, t1, 1e-6), t2, 1e-6))
            flow[system.kind].append(_diff(direct, stepwise) / max(1.0, float(np.max(np.abs(direct)))))

    return [
        _property("aks", "closed_form_matches_generic_factors", closed, 1e-11, seed),
        _property("aks", "factors_reconstruct_exp_curve", reconstruction, 1e-12, seed),
        _property("aks", "exp_curve_matches_expm", exponential, 1e-11, seed),
        _property("aks", "toda_closed_form_curve", toda_curve, 1e-12, seed),
        _property("aks", "general_toda_solution", general_toda, 1e-10, seed),
        _property("aks", "b_factor_ode", bfactor, 1e-6, seed),
        _property("aks", "orbit_curve_conserves_det", conserved, 1e-10, seed),
        _property("aks", "flow_group_property_r2", flow["r2"], 1e-9, seed),
        _property("aks", "flow_group_property_tb", flow["tb"], 1e-9, seed),
        _property("aks", "flow_group_property_tsu2", flow["tsu2"], 1e-9, seed),
    ]


def tduality_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 50)
    grid = np.linspace(-3.0, 3.0, 100)
    defects = []
    for _ in range(n):
        X0, systems = random_dual_triple(rng)
        worst = 0.0
        for t in grid:
            reference = orbit_curve(X0, float(t))
            for system, state in systems:
                image = momentum_image(system, solve(system, state, float(t)))
                worst = max(worst, _vec_diff(image, reference))
        defects.append(worst)
    return [_property("tduality", "momentum_image_agreement", defects, 1e-9, seed)]


def _fd_residual(system: SystemId, state: PhasePoint, t: float, h: float = 1e-4) -> float:
    forward = state_to_array(solve(system, state, t + h))
    backward = state_to_array(solve(system, state, t - h))
    here = solve(system, state, t)
    return _diff((forward - backward) / (2.0 * h), vector_field(system, here))


def oracle_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 50)
    toda = SystemId.toda()
    toda_start = R2Pt(q=-0.5 * math.log(2.0), p=0.0)

    hamilton = {"r2": [], "tb": [], "tsu2": [], "orbit": []}
    lax, arg_drift, normal_velocity, hb = [], [], [], []
    for _ in range(n):
        X0, systems = random_dual_triple(rng)
        t = rng.uniform(-2.0, 2.0)
        for system, state in systems:
            hamilton[system.kind].append(_fd_residual(system, state, t))
        hamilton["orbit"].append(_fd_residual(SystemId.orbit(), X0, t))

        h = 1e-4
        derivative = (orbit_curve(X0, t + h).as_array() - orbit_curve(X0, t - h).as_array()) / (2.0 * h)
        lax.append(_diff(derivative, lax_field(orbit_curve(X0, t)).as_array()))

        tsu2_system, tsu2_state = systems[2]
        moved = solve(tsu2_system, tsu2_state, t)
        arg_drift.append(abs(cmath.phase(moved.g.beta * tsu2_state.g.beta.conjugate())))
        pi_hat, _ = pi_hat_v0(moved.g)
        normal_velocity.append(abs(pi_hat.pair(tsu2_body_velocity(moved))))

        tb_state = TBPt(bel=random_bel(rng), eta=BCov.from_array(rng.normal(size=3)))
        hb.append(abs(hb_display(tb_state) - energy(SystemId.cotangent_b(), tb_state)))

    rk4_toda = [exact_vs_rk4(toda, toda_start, 3.0, 1e-3, 31)]
    for p0 in (-0.5, 0.3):
        start = R2Pt(q=0.5 * math.log(0.5 * (1.0 - p0 * p0)), p=p0)
        rk4_toda.append(exact_vs_rk4(toda, start, 3.0, 1e-3, 31))
    rk4_dual = {"r2": [], "tb": [], "tsu2": [], "orbit": []}
    rk4_drift = []
    for _ in range(_count(samples, 20)):
        X0, systems = random_dual_triple(rng)
        for system, state in [*systems, (SystemId.orbit(), X0)]:
            numeric = rk4_integrate(system, state, 3.0, h=1e-3, samples=31)
            exact_states = np.array([state_to_array(solve(system, state, float(t))) for t in numeric.times()])
            rk4_dual[system.kind].append(_diff(exact_states, numeric.state_array()))
            rk4_drift.append(float(np.max(np.abs(numeric.energies() - 0.5))))

    exact = exact_trajectory(toda, toda_start, 3.0, 301)
    drift = [abs(e - 0.5) for e in exact.energies()]
    display = [
        abs(toda_hamiltonian(s.state[0], s.state[1]) - s.energy) for s in exact.samples
    ]
    report = residual_report(exact)
    report_defect = max(
        report.max_hamilton_residual, report.max_energy_drift,
        report.max_equivariance_defect, report.max_lax_residual,
    )
    if report.flagged_samples:
        report_defect = max(report_defect, settings.residual_flag_threshold)

    def endpoint_error(step: float) -> float:
        numeric = rk4_integrate(toda, toda_start, 2.0, h=step)
        return _diff(numeric.state_array()[-1], state_to_array(solve(toda, toda_start, 2.0)))

    ratio = endpoint_error(0.05) / endpoint_error(0.025)
    logger.debug(f"RK4 step-halving ratio: {ratio:.4f}")

    return [
        _property("oracle", "hamilton_residual_r2", hamilton["r2"], 1e-6, seed),
        _property("oracle", "hamilton_residual_tb", hamilton["tb"], 1e-6, seed),
        _property("oracle", "hamilton_residual_tsu2", hamilton["tsu2"], 1e-6, seed),
        _property("oracle", "hamilton_residual_orbit", hamilton["orbit"], 1e-6, seed),
        _property("oracle", "lax_residual", lax, 1e-6, seed),
        _property("oracle", "tsu2_arg_beta_drift", arg_drift, 1e-10, seed),
        _property("oracle", "tsu2_normal_velocity", normal_velocity, 1e-8, seed),
        _property("oracle", "hb_display_matches_energy", hb, 1e-10, seed),
        _property("oracle", "rk4_matches_exact_toda", rk4_toda, 1e-6, seed),
        _property("oracle", "rk4_matches_exact_r2", rk4_dual["r2"], 1e-6, seed),
        _property("oracle", "rk4_matches_exact_tb", rk4_dual["tb"], 1e-6, seed),
        _property("oracle", "rk4_matches_exact_tsu2", rk4_dual["tsu2"], 1e-6, seed),
        _property("oracle", "rk4_matches_exact_orbit", rk4_dual["orbit"], 1e-6, seed),
        _property("oracle", "rk4_energy_drift", rk4_drift, 1e-7, seed),
        _property("oracle", "toda_energy_drift", drift, 1e-10, seed),
        _property("oracle", "toda_hamiltonian_matches_energy", display, 1e-12, seed),
        _property("oracle", "exact_trajectory_residuals", [report_defect], settings.residual_flag_threshold, seed),
        _property("oracle", "rk4_order_ratio", [abs(ratio - 16.0)], 4.0, seed),
    ]


def lagrangian_suite(rng: np.random.Generator, samples: Optional[int], seed: int) -> list[PropertyResult]:
    n = _count(samples, 500)
    forms = []
    for _ in range(n):
        bel = random_bel(rng)
        velocity = tuple(rng.normal(size=3))
        value = lagrangian_tb(bel, velocity)
        forms.append(abs(value - lagrangian_tb_top(bel, velocity)) / max(1.0, abs(value)))

    legendre = {"r2": [], "tb": [], "tsu2": []}
    for _ in range(max(1, n // 10)):
        _, systems = random_dual_triple(rng)
        t = rng.uniform(-1.0, 1.0)
        for system, state in systems:
            legendre[system.kind].append(legendre_defect(system, solve(system, state, t)))

    toda_value = lagrangian_r2(R2Params.toda(), 0.0, 1.0)
    return [
        _property("lagrangian", "tb_forms_agree", forms, 1e-12, seed),
        _property("lagrangian", "toda_lagrangian_value", [abs(toda_value + 0.5)], 1e-15, seed),
        _property("lagrangian", "legendre_r2", legendre["r2"], 1e-8, seed),
        _property("lagrangian", "legendre_tb", legendre["tb"], 1e-8, seed),
        _property("lagrangian", "legendre_tsu2", legendre["tsu2"], 1e-8, seed),
    ]


SUITES: dict[str, SuiteFn] = {
    "algebra": algebra_suite,
    "groups": groups_suite,
    "phase": phase_suite,
    "aks": aks_suite,
    "tduality": tduality_suite,
    "oracle": oracle_suite,
    "lagrangian": lagrangian_suite,
}


def suite_rng(seed: int, suite: str) -> np.random.Generator:
    """Per-suite generator; a suite sees the same stream whatever else runs."""
    return np.random.default_rng([seed, list(SUITES).index(suite)])


# ===== Workflow =====

class VerificationState(TypedDict):
    """State that flows through the workflow."""
    # Input
    requested: list[str]
    seed: int
    samples: Optional[int]

    # Planning
    pending: list[str]
    planned: list[str]

    # Execution
    results: Annotated[list[PropertyResult], operator.add]
    error: Optional[str]
    error_kind: Optional[str]

    # Output
    report: Optional[VerifyReport]


class VerificationWorkflow:
    """
    Orchestrates the property suites using LangGraph.

    Workflow:
    1. plan_suites - Expand "all" and reject unknown suite names
    2. run_suite - Run the next pending suite (loops until none remain)
    3. summarize - Fold results into a VerifyReport

    A planning or suite failure routes to handle_error.
    """

    def __init__(self):
        self.graph = self._build_graph()
        self.app = self.graph.compile()
        logger.info("VerificationWorkflow initialized")

    def _build_graph(self) -> StateGraph:
        workflow = StateGraph(VerificationState)

        workflow.add_node("plan_suites", self._plan_suites)
        workflow.add_node("run_suite", self._run_suite)
        workflow.add_node("summarize", self._summarize)
        workflow.add_node("handle_error", self._handle_error)

        workflow.set_entry_point("plan_suites")

        workflow.add_conditional_edges(
            "plan_suites",
            self._should_run,
            {
                "run": "run_suite",
                "error": "handle_error"
            }
        )
        workflow.add_conditional_edges(
            "run_suite",
            self._next_step,
            {
                "run": "run_suite",
                "summarize": "summarize",
                "error": "handle_error"
            }
        )

        workflow.add_edge("summarize", END)
        workflow.add_edge("handle_error", END)

        return workflow

    # ===== Workflow Nodes =====

    def _plan_suites(self, state: VerificationState) -> dict:
        requested = state["requested"] or ["all"]
        logger.info(f"[plan_suites] Requested: {requested}")

        planned: list[str] = []
        for name in requested:
            if name == "all":
                planned.extend(s for s in SUITES if s not in planned)
            elif name in SUITES:
                if name not in planned:
                    planned.append(name)
            else:
                return {
                    "error": f"Unknown suite: {name} (choose from {', '.join(['all', *SUITES])})",
                    "error_kind": "input",
                }
        return {"planned": planned, "pending": list(planned)}

    def _run_suite(self, state: VerificationState) -> dict:
        suite, pending = state["pending"][0], state["pending"][1:]
        logger.info(f"[run_suite] Running {suite}")

        try:
            results = SUITES[suite](suite_rng(state["seed"], suite), state["samples"], state["seed"])
        except Exception as e:
            logger.error(f"[run_suite] {suite} crashed: {e}")
            return {"pending": pending, "error": f"Suite {suite} crashed: {str(e)}", "error_kind": "suite"}

        failed = [r.name for r in results if not r.passed]
        logger.info(f"[run_suite] {suite}: {len(results) - len(failed)}/{len(results)} properties passed")
        return {"pending": pending, "results": results}

    def _summarize(self, state: VerificationState) -> dict:
        report = VerifyReport(seed=state["seed"], suites=state["planned"], results=state["results"])
        logger.info(f"[summarize] {len(report.failures())} failures over {len(report.results)} properties")
        return {"report": report}

    def _handle_error(self, state: VerificationState) -> dict:
        logger.error(f"[handle_error] Verification error: {state.get('error')}")
        return {"report": None}

    # ===== Conditional Edge Functions =====

    def _should_run(self, state: VerificationState) -> str:
        if state.get("error") or not state.get("pending"):
            return "error"
        return "run"

    def _next_step(self, state: VerificationState) -> str:
        if state.get("error"):
            return "error"
        if state.get("pending"):
            return "run"
        return "summarize"

    # ===== Public API =====

    def run(self, suites: Sequence[str], seed: Optional[int] = None, samples: Optional[int] = None) -> VerifyReport:
        """
        Run the requested suites.

        Args:
            suites: Suite names or "all"
            seed: Generator seed (default settings.default_seed)
            samples: Override of every property's sample count

        Returns:
            VerifyReport; check report.passed

        Raises:
            InputError: unknown suite or non-positive sample count
            VerificationFailure: a suite crashed
        """
        seed = settings.default_seed if seed is None else seed
        if samples is not None and samples < 1:
            raise InputError(f"samples must be positive, got {samples}")
        logger.info(f"Starting verification: suites={list(suites)}, seed={seed}, samples={samples}")

        initial_state: VerificationState = {
            "requested": list(suites),
            "seed": seed,
            "samples": samples,
            "pending": [],
            "planned": [],
            "results": [],
            "error": None,
            "error_kind": None,
            "report": None,
        }
        final_state = self.app.invoke(initial_state, {"recursion_limit": 4 * len(SUITES) + 10})

        if final_state.get("error"):
            if final_state.get("error_kind") == "input":
                raise InputError(final_state["error"])
            raise VerificationFailure(final_state["error"])
        return final_state["report"]

    def get_graph(self):
        return self.app


# Singleton workflow instance
_workflow: Optional[VerificationWorkflow] = None


def get_workflow() -> VerificationWorkflow:
    """Get or create the workflow singleton."""
    global _workflow
    if _workflow is None:
        _workflow = VerificationWorkflow()
    return _workflow


def run_verification(suites: Sequence[str] = ("all",), seed: Optional[int] = None, samples: Optional[int] = None) -> VerifyReport:
    """Convenience function to run verification suites."""
    workflow = get_workflow()
    return workflow.run(suites, seed, samples)
