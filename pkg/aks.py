"""
AKS solution engine for the PL-duality lab.

Every collective system with Hamiltonian f(J) is solved by one curve in B:
factor exp(t L_f(X0)) = g(t) b(t) with L_f(X) = (i/2) X, then act on the
initial state with b(t). For det X0 = 1 the factors have closed forms with
denominator sqrt(cosh t - a3 sinh t); otherwise the exponential curve is
factored numerically.
"""

import math
from typing import Optional
import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator

from algebra import BAlgVec, IDENTITY, Mat2C, Su2Vec, split_coords
from config import settings
from errors import DegenerateOrbitError, NormalizationError
from groups import BEl, SU2El, coadjoint_b_on_su2, iwasawa_factorize
from phase import (
    PhasePoint,
    R2Params,
    R2Pt,
    SystemId,
    TBPt,
    TSU2Pt,
    act_r2,
    act_tb,
    act_tsu2,
    check_state,
    momentum_image,
    momentum_r2,
    momentum_tb,
    momentum_tsu2,
)
from schemas import Trajectory


def legendre_f(X: Su2Vec) -> Mat2C:
    """Linear Legendre map of f: L_f(X) = (i/2) X."""
    return 0.5j * X.matrix()


def b_velocity(X: Su2Vec) -> BAlgVec:
    """b-part of L_f(X); equals db/dt b^-1 along the AKS curve through X."""
    return BAlgVec.from_array(split_coords(legendre_f(X))[1])


def exp_curve(X: Su2Vec, t: float) -> Mat2C:
    """exp(t L_f(X)) = cosh(t s/2) I + (iX/s) sinh(t s/2), s = sqrt(det X)."""
    d = X.det()
    if d == 0.0:
        return IDENTITY.copy()
    s = math.sqrt(d)
    return math.cosh(0.5 * t * s) * IDENTITY + (1j * X.matrix() / s) * math.sinh(0.5 * t * s)


def aks_factors(X: Su2Vec, t: float) -> tuple[SU2El, BEl]:
    """
    Closed-form Iwasawa factors of the exponential curve for det X = 1.

    Raises:
        NormalizationError: det X differs from 1; use aks_factors_generic
    """
    det = X.det()
    if abs(det - 1.0) > settings.identity_tolerance:
        raise NormalizationError(
            f"Closed-form factors need det X = 1, got {det:.17g}; use the generic path"
        )
    a1, a2, a3 = X.a1, X.a2, X.a3
    ch, sh = math.cosh(0.5 * t), math.sinh(0.5 * t)
    root = math.sqrt(math.cosh(t) - a3 * math.sinh(t))
    g = SU2El.normalized(
        alpha=complex((ch - a3 * sh) / root, 0.0),
        beta=complex(a1, -a2) * sh / root,
        tolerance=settings.normalization_tolerance,
    )
    upper = -complex(a1, -a2) * math.sinh(t) / root
    return g, BEl(a=root, b=upper.real, c=upper.imag)


def aks_factors_generic(X: Su2Vec, t: float) -> tuple[SU2El, BEl]:
    return iwasawa_factorize(exp_curve(X, t))


class AksCurve(BaseModel):
    """The AKS datum X0 and the B-curve it generates."""
    X0: Su2Vec = Field(..., description="Initial momentum image")

    @model_validator(mode="after")
    def _check_nonzero(self) -> "AksCurve":
        if self.X0.det() <= 0.0:
            raise ValueError("AKS curve needs det X0 > 0")
        return self

    @property
    def closed_form_valid(self) -> bool:
        return abs(self.X0.det() - 1.0) <= settings.closed_form_tolerance()

    def factors(self, t: float) -> tuple[SU2El, BEl]:
        if self.closed_form_valid:
            return aks_factors(self.X0, t)
        return aks_factors_generic(self.X0, t)

    def b_factor(self, t: float) -> BEl:
        return self.factors(t)[1]

    def coadjoint(self, t: float) -> Su2Vec:
        """Coadjoint orbit curve through X0."""
        return coadjoint_b_on_su2(self.b_factor(t), self.X0)


def _unit_curve(X0: Su2Vec, tolerance: Optional[float], constraint: str) -> AksCurve:
    tol = settings.normalization_tolerance if tolerance is None else tolerance
    det = X0.det()
    if abs(det - 1.0) > tol:
        logger.error(f"Normalization violated: {constraint} evaluates to {det:.17g}")
        raise NormalizationError(
            f"Initial data must satisfy {constraint}; got {det:.17g} (tolerance {tol:g})"
        )
    return AksCurve(X0=X0)


def solve_r2(params: R2Params, q0: float, p0: float, t: float, tolerance: Optional[float] = None) -> R2Pt:
    """Exact plane solution rho(b(t), (q0, p0))."""
    if params.eps == 0.0:
        raise DegenerateOrbitError("eps = 0: the plane embeds in a zero-dimensional leaf")
    pt0 = R2Pt(q=q0, p=p0)
    curve = _unit_curve(momentum_r2(params, pt0), tolerance, "(p0/2mu)^2 + eps^2 exp(4 mu q0) = 1")
    return act_r2(params, curve.b_factor(t), pt0)


def solve_tb(pt0: TBPt, t: float, tolerance: Optional[float] = None) -> TBPt:
    """Exact T*B solution (b(t) b0, eta0)."""
    curve = _unit_curve(momentum_tb(pt0), tolerance, "det of the T*B momentum image = 1")
    return act_tb(curve.b_factor(t), pt0)


def solve_tsu2(pt0: TSU2Pt, t: float, tolerance: Optional[float] = None) -> TSU2Pt:
    """Exact T*SU(2) solution: lifted dressing action of b(t)."""
    if abs(pt0.g.beta) <= settings.degenerate_beta:
        raise DegenerateOrbitError(f"|beta| = {abs(pt0.g.beta):.3e}: initial data on a point orbit")
    curve = _unit_curve(momentum_tsu2(pt0), tolerance, "det of the T*SU(2) momentum image = 1")
    return act_tsu2(curve.b_factor(t), pt0)


def orbit_curve(X0: Su2Vec, t: float, tolerance: Optional[float] = None) -> Su2Vec:
    return _unit_curve(X0, tolerance, "a1^2 + a2^2 + a3^2 = 1").coadjoint(t)


def solve(system: SystemId, state0: PhasePoint, t: float, tolerance: Optional[float] = None) -> PhasePoint:
    """Exact solution of any of the four systems at time t."""
    check_state(system, state0)
    if system.kind == "r2":
        return solve_r2(system.r2, state0.q, state0.p, t, tolerance)
    if system.kind == "tb":
        return solve_tb(state0, t, tolerance)
    if system.kind == "tsu2":
        return solve_tsu2(state0, t, tolerance)
    return orbit_curve(state0, t, tolerance)


def time_grid(t_end: float, samples: int) -> np.ndarray:
    """Uniform grid between 0 and t_end in increasing order."""
    grid = np.linspace(0.0, t_end, samples)
    return grid if t_end > 0 else grid[::-1]


def exact_trajectory(
    system: SystemId,
    state0: PhasePoint,
    t_end: float,
    samples: int,
    tolerance: Optional[float] = None,
) -> Trajectory:
    """
    Sample the exact solution on a uniform grid.

    Args:
        system: System of state0
        state0: Initial state at t = 0
        t_end: Final time; negative values sample backwards
        samples: Number of grid points (>= 2)
        tolerance: Accepted |det J - 1| of the initial data

    Returns:
        Trajectory tagged "exact"
    """
    times = time_grid(t_end, samples)
    # Validate once so a bad initial state fails before the loop
    solve(system, state0, 0.0, tolerance)
    states = [solve(system, state0, float(t), tolerance) for t in times]
    logger.info(f"Exact {system.kind} trajectory: {samples} samples to t={t_end}")
    return Trajectory.from_states(system, "exact", times, states)


def momentum_curve(system: SystemId, state0: PhasePoint, times: np.ndarray) -> np.ndarray:
    """Momentum images of the exact solution at the given times."""
    return np.array([momentum_image(system, solve(system, state0, float(t))).as_array() for t in times])
