"""
Independent verification oracle for the PL-duality lab.

Hamiltonians, Hamilton-equation vector fields, a classical RK4 integrator,
finite-difference residual meters and the Lagrangians of the dual systems.
Vector fields act on the flat state arrays of phase.state_to_array so the
integrator never builds validated models inside its inner loop.
"""

import math
from typing import Callable, Optional
import numpy as np
from loguru import logger

from aks import AksCurve, b_velocity, solve
from algebra import (
    BAlgVec,
    Su2Vec,
    b_matrix,
    collective_f,
    k_operator,
    killing,
    pair_sl2,
    split_coords,
    su2_coords,
    su2_matrix,
)
from config import settings
from errors import (
    BlowUpError,
    DegenerateOrbitError,
    GridError,
    InputError,
    LeafMembershipError,
)
from groups import BEl, SU2El
from phase import (
    PhasePoint,
    R2Params,
    SystemId,
    TBPt,
    TSU2Pt,
    check_state,
    is_tsu2_member,
    momentum_image,
    pi_hat_v0,
    state_from_array,
    state_to_array,
)
from schemas import ResidualReport, Trajectory

# g^-1 dg/dt = TSU2_GENERATOR_SCALE * g^-1 g^Z with Z = psi_star(kappa_hat(phi)),
# pinned by the exact AKS curve.
TSU2_GENERATOR_SCALE = -0.125

Field = Callable[[np.ndarray], np.ndarray]


# ===== Hamiltonians =====

def energy(system: SystemId, state: PhasePoint) -> float:
    """Collective energy f(J(state)) = det(J)/2."""
    return collective_f(momentum_image(system, state))


def toda_hamiltonian(q: float, p: float) -> float:
    return 0.5 * p ** 2 + math.exp(2.0 * q)


def hb_display(pt: TBPt) -> float:
    """Collective Hamiltonian on T*B written in group coordinates."""
    a, b, c = pt.bel.a, pt.bel.b, pt.bel.c
    e, et, h = pt.eta.ce, pt.eta.cet, pt.eta.ch
    return 0.5 * (e ** 2 + et ** 2) / a ** 4 + 0.5 * (0.5 * h + (b * e + c * et) / a) ** 2


# ===== Vector fields on flat arrays =====

def _r2_field(params: R2Params) -> Field:
    mu, eps = params.mu, params.eps

    def field(y: np.ndarray) -> np.ndarray:
        q, p = y
        return np.array([p / (4.0 * mu ** 2), -2.0 * mu * eps ** 2 * math.exp(4.0 * mu * q)])

    return field


def _tb_field(y: np.ndarray) -> np.ndarray:
    """db/dt b^-1 = b-part of L_f(J); the covector is constant."""
    a, b, c, e, et, h = y
    j1, j2, j3 = -e / a ** 2, et / a ** 2, -(0.5 * h + (b * e + c * et) / a)
    u, v, w = -j1, j2, -0.5 * j3
    a_dot = a * w
    return np.array([a_dot, (u + a_dot * b) / a, (v + a_dot * c) / a, 0.0, 0.0, 0.0])


def _tsu2_field(y: np.ndarray) -> np.ndarray:
    """Lifted dressing generator of Z = c psi_star(kappa_hat(phi)) at (g, eta)."""
    alpha, beta = complex(y[0], y[1]), complex(y[2], y[3])
    eta = y[4:7]
    G = np.array([[alpha, beta], [-beta.conjugate(), alpha.conjugate()]])
    U = G / math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    xi = b_matrix([-eta[0], eta[1], -0.5 * eta[2]])
    phi = su2_coords(U @ xi @ U.conj().T)
    lowered = -8.0 * phi
    Z = TSU2_GENERATOR_SCALE * b_matrix([-lowered[0], lowered[1], -0.5 * lowered[2]])
    body_k, body_b = split_coords(U.conj().T @ Z @ U)
    g_dot = G @ su2_matrix(body_k)
    B = b_matrix(body_b)
    C = B @ xi - xi @ B
    return np.array([
        g_dot[0, 0].real, g_dot[0, 0].imag, g_dot[0, 1].real, g_dot[0, 1].imag,
        -C[0, 1].real, C[0, 1].imag, -2.0 * C[0, 0].real,
    ])


def _orbit_field(y: np.ndarray) -> np.ndarray:
    """Lax form d(gamma)/dt = [b-part of L_f(gamma), gamma]."""
    gamma = su2_matrix(y)
    B = b_matrix(split_coords(0.5j * gamma)[1])
    return su2_coords(B @ gamma - gamma @ B)


def field_function(system: SystemId) -> Field:
    if system.kind == "r2":
        return _r2_field(system.r2)
    if system.kind == "tb":
        return _tb_field
    if system.kind == "tsu2":
        return _tsu2_field
    return _orbit_field


def vector_field(system: SystemId, state: PhasePoint) -> np.ndarray:
    """
    Hamilton-equation tangent at state, in the coordinates of state_to_array.

    Raises:
        InputError: state does not belong to system
        DegenerateOrbitError: tsu2 state on a point orbit
        LeafMembershipError: tsu2 state off the preimage of the leaf
    """
    check_state(system, state)
    if system.kind == "tsu2":
        if abs(state.g.beta) <= settings.degenerate_beta:
            raise DegenerateOrbitError(f"|beta| = {abs(state.g.beta):.3e}: point orbit")
        if not is_tsu2_member(state, system.theta):
            raise LeafMembershipError(f"State is not on the preimage of O_theta, theta={system.theta}")
    return field_function(system)(state_to_array(state))


def lax_field(X: Su2Vec) -> Su2Vec:
    return Su2Vec.from_array(_orbit_field(X.as_array()))


# ===== RK4 =====

def _project(system: SystemId, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Pull group components back onto their manifold; returns the displacement."""
    if system.kind == "tsu2":
        norm = float(np.linalg.norm(y[:4]))
        y = y.copy()
        y[:4] /= norm
        return y, abs(norm - 1.0)
    if system.kind == "tb" and y[0] <= 0.0:
        displacement = 2.0 * abs(y[0])
        y = y.copy()
        y[0] = -y[0]
        return y, displacement
    return y, 0.0


def _rk4_step(field: Field, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = field(y)
    k2 = field(y + 0.5 * dt * k1)
    k3 = field(y + 0.5 * dt * k2)
    k4 = field(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(
    system: SystemId,
    state0: PhasePoint,
    t_end: float,
    h: Optional[float] = None,
    samples: Optional[int] = None,
) -> Trajectory:
    """
    Classical fixed-step RK4 over the system's vector field.

    Args:
        system: System of state0
        state0: Initial state at t = 0
        t_end: Final time, nonzero; negative integrates backwards
        h: Largest step (default settings.rk4_step)
        samples: Output grid size; default records every step

    Returns:
        Trajectory tagged "rk4" in increasing time order

    Raises:
        BlowUpError: state norm exceeded settings.blowup_norm
    """
    h = settings.rk4_step if h is None else h
    if h <= 0.0:
        raise InputError(f"RK4 step must be positive, got {h}")
    if t_end == 0.0:
        raise InputError("t_end must be nonzero")
    vector_field(system, state0)

    if samples is None:
        samples = max(1, math.ceil(abs(t_end) / h - 1e-9)) + 1
    grid = np.linspace(0.0, t_end, samples)
    field = field_function(system)

    y = state_to_array(state0)
    states = [state0]
    max_displacement = 0.0
    total_steps = 0
    for t0, t1 in zip(grid[:-1], grid[1:]):
        span = t1 - t0
        substeps = max(1, math.ceil(abs(span) / h - 1e-9))
        dt = span / substeps
        for _ in range(substeps):
            y, displacement = _project(system, _rk4_step(field, y, dt))
            max_displacement = max(max_displacement, displacement)
            norm = float(np.linalg.norm(y))
            if not math.isfinite(norm) or norm > settings.blowup_norm:
                logger.error(f"RK4 blow-up near t={t0:.6g}: |state| = {norm:.3e}")
                raise BlowUpError(f"State norm {norm:.3e} exceeded {settings.blowup_norm:g} near t={t0:.6g}")
        total_steps += substeps
        states.append(state_from_array(system, y))

    logger.debug(
        f"RK4 {system.kind}: {total_steps} steps, max projection displacement {max_displacement:.3e}"
    )
    if t_end < 0:
        grid, states = grid[::-1], states[::-1]
    return Trajectory.from_states(system, "rk4", grid, states, step=h)


# ===== Residual meters =====

def _uniform_step(times: np.ndarray) -> float:
    steps = np.diff(times)
    step = float(np.mean(steps))
    if np.max(np.abs(steps - step)) > 1e-9 * max(1.0, abs(step)):
        raise GridError("Residual report needs a uniform time grid")
    return step


def residual_report(traj: Trajectory, system: Optional[SystemId] = None) -> ResidualReport:
    """
    Finite-difference diagnostics of a trajectory, recomputed from its states.

    Args:
        traj: Trajectory with at least 3 samples on a uniform grid
        system: Expected system (defaults to the trajectory's own)

    Returns:
        ResidualReport with per-index flags above settings.residual_flag_threshold
    """
    system = traj.system if system is None else system
    if system != traj.system:
        raise InputError(f"Trajectory belongs to {traj.system.kind}, not {system.kind}")
    n = len(traj.samples)
    if n < 3:
        raise GridError(f"Residual report needs at least 3 samples, got {n}")
    times = traj.times()
    step = _uniform_step(times)

    states = traj.state_array()
    typed = [state_from_array(system, s) for s in states]
    field = field_function(system)
    momenta = np.array([momentum_image(system, s).as_array() for s in typed])
    energies = np.array([collective_f(Su2Vec.from_array(J)) for J in momenta])

    hamilton = np.zeros(n)
    lax = np.zeros(n)
    state_fd = (states[2:] - states[:-2]) / (2.0 * step)
    momentum_fd = (momenta[2:] - momenta[:-2]) / (2.0 * step)
    for i in range(1, n - 1):
        hamilton[i] = np.max(np.abs(state_fd[i - 1] - field(states[i])))
        lax[i] = np.max(np.abs(momentum_fd[i - 1] - _orbit_field(momenta[i])))

    drift = np.abs(energies - energies[0])

    J0 = Su2Vec.from_array(momenta[0])
    equivariance = np.zeros(n)
    if J0.det() > 0.0:
        curve = AksCurve(X0=J0)
        for i in range(n):
            reference = curve.coadjoint(float(times[i] - times[0])).as_array()
            equivariance[i] = np.max(np.abs(momenta[i] - reference))
    else:
        equivariance = np.max(np.abs(momenta - momenta[0]), axis=1)

    threshold = settings.residual_flag_threshold
    worst = np.maximum.reduce([hamilton, lax, drift, equivariance])
    flagged = [int(i) for i in np.nonzero(worst > threshold)[0]]
    if flagged:
        logger.warning(f"Residual report flagged {len(flagged)} samples, first at index {flagged[0]}")

    return ResidualReport(
        max_hamilton_residual=float(hamilton.max()),
        max_energy_drift=float(drift.max()),
        max_equivariance_defect=float(equivariance.max()),
        max_lax_residual=float(lax.max()),
        step=step,
        t_start=float(times[0]),
        t_end=float(times[-1]),
        n_samples=n,
        flagged_samples=flagged,
    )


def bfactor_residual(X0: Su2Vec, t: float, h: float = 1e-5) -> float:
    """max |db/dt b^-1 - b-part of L_f(gamma(t))| with a centered difference."""
    curve = AksCurve(X0=X0)
    forward = curve.b_factor(t + h).matrix()
    backward = curve.b_factor(t - h).matrix()
    velocity = (forward - backward) / (2.0 * h) @ np.linalg.inv(curve.b_factor(t).matrix())
    expected = b_velocity(curve.coadjoint(t)).matrix()
    return float(np.max(np.abs(velocity - expected)))


# ===== Lagrangians =====

def lagrangian_r2(params: R2Params, q: float, q_dot: float) -> float:
    """2 mu^2 q_dot^2 - eps^2 exp(4 mu q) / 2; the Toda case is q_dot^2/2 - exp(2q)."""
    mu, eps = params.mu, params.eps
    return 2.0 * mu ** 2 * q_dot ** 2 - 0.5 * eps ** 2 * math.exp(4.0 * mu * q)


def lagrangian_tb(bel: BEl, velocity: tuple[float, float, float]) -> float:
    a, b, c = bel.a, bel.b, bel.c
    a_dot, b_dot, c_dot = velocity
    return (
        0.5 * (b * a_dot - a * b_dot) ** 2
        + 0.5 * (c * a_dot - a * c_dot) ** 2
        + 2.0 * (a_dot / a) ** 2
    )


def right_velocity(bel: BEl, velocity: tuple[float, float, float]) -> BAlgVec:
    """db/dt b^-1 as an element of b."""
    a_dot, b_dot, c_dot = velocity
    B_dot = np.array([[a_dot, complex(b_dot, c_dot)], [0.0, -a_dot / bel.a ** 2]])
    return BAlgVec.from_array(split_coords(B_dot @ np.linalg.inv(bel.matrix()))[1])


def lagrangian_tb_top(bel: BEl, velocity: tuple[float, float, float]) -> float:
    """Top-like form -4 (K xi, xi) with xi = db/dt b^-1."""
    xi = right_velocity(bel, velocity)
    return -4.0 * pair_sl2(k_operator(xi).matrix(), xi.matrix())


def lagrangian_tsu2(g: SU2El, body_velocity: Su2Vec, eta3: float) -> float:
    """(V, V)/2 in the metric -kappa/(8|beta|^2), plus eta3 <pi_hat, V>."""
    if abs(g.beta) <= settings.degenerate_beta:
        raise DegenerateOrbitError(f"|beta| = {abs(g.beta):.3e}: Lagrangian undefined on a point orbit")
    pi_hat, _ = pi_hat_v0(g)
    V = body_velocity.matrix()
    metric = -killing(V, V).real / (8.0 * abs(g.beta) ** 2)
    return 0.5 * metric + eta3 * pi_hat.pair(body_velocity)


def lagrangian(system: SystemId, configuration, velocity, extra: Optional[float] = None) -> float:
    """
    Dispatch to the Lagrangian of a system.

    Args:
        system: r2, tb or tsu2
        configuration: q (r2), BEl (tb) or SU2El (tsu2)
        velocity: q_dot, (a_dot, b_dot, c_dot) or the body velocity g^-1 dg/dt
        extra: eta3 for tsu2
    """
    if system.kind == "r2":
        return lagrangian_r2(system.r2, configuration, velocity)
    if system.kind == "tb":
        return lagrangian_tb(configuration, velocity)
    if system.kind == "tsu2":
        if extra is None:
            raise InputError("tsu2 Lagrangian needs eta3")
        return lagrangian_tsu2(configuration, velocity, extra)
    raise InputError("The orbit system has no configuration-space Lagrangian")


def legendre_defect(system: SystemId, state: PhasePoint, h: float = 1e-5) -> float:
    """
    |L - (<momentum, velocity> - H)| at state, with the velocity taken from
    a centered difference of the exact solution through state.
    """
    forward = solve(system, state, h)
    backward = solve(system, state, -h)
    H = energy(system, state)
    if system.kind == "r2":
        q_dot = (forward.q - backward.q) / (2.0 * h)
        L = lagrangian_r2(system.r2, state.q, q_dot)
        return abs(L - (state.p * q_dot - H))
    if system.kind == "tb":
        B_dot = (forward.bel.matrix() - backward.bel.matrix()) / (2.0 * h)
        velocity = (B_dot[0, 0].real, B_dot[0, 1].real, B_dot[0, 1].imag)
        L = lagrangian_tb(state.bel, velocity)
        left = np.linalg.inv(state.bel.matrix()) @ B_dot
        body = BAlgVec.from_array(split_coords(left)[1])
        return abs(L - (state.eta.pair(body) - H))
    if system.kind == "tsu2":
        G = state.g.matrix()
        G_dot = (forward.g.matrix() - backward.g.matrix()) / (2.0 * h)
        body = Su2Vec.from_array(su2_coords(G.conj().T @ G_dot))
        L = lagrangian_tsu2(state.g, body, state.eta.c3)
        return abs(L - (state.eta.pair(body) - H))
    raise InputError("The orbit system has no Legendre transform")


def tsu2_body_velocity(pt: TSU2Pt, h: float = 1e-5) -> Su2Vec:
    """g^-1 dg/dt along the exact curve through pt, by centered difference."""
    forward = solve(SystemId.cotangent_su2(0.0), pt, h)
    backward = solve(SystemId.cotangent_su2(0.0), pt, -h)
    G_dot = (forward.g.matrix() - backward.g.matrix()) / (2.0 * h)
    return Su2Vec.from_array(su2_coords(pt.g.matrix().conj().T @ G_dot))


def exact_vs_rk4(
    system: SystemId,
    state0: PhasePoint,
    t_end: float,
    h: float,
    samples: int,
    tolerance: Optional[float] = None,
) -> float:
    """Largest state deviation between exact and RK4 samples on a common grid."""
    numeric = rk4_integrate(system, state0, t_end, h=h, samples=samples)
    exact = np.array([state_to_array(solve(system, state0, float(t), tolerance)) for t in numeric.times()])
    return float(np.max(np.abs(exact - numeric.state_array())))
