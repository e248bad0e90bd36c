"""
State Builder for the PL-duality lab.

Turns a validated RunConfig into a system identifier and a typed initial
state, re-checking every solver precondition with a readable message.
"""

import math
from typing import Optional
from loguru import logger

from algebra import BCov, Su2Cov, Su2Vec
from config import settings
from errors import InputError, LeafMembershipError, NormalizationError
from groups import BEl, SU2El
from phase import (
    PhasePoint,
    R2Params,
    R2Pt,
    SystemId,
    TBPt,
    TSU2Pt,
    is_tsu2_member,
    momentum_image,
    orbit_coords,
    r2_preimage,
    tb_preimage,
    tsu2_preimage,
)
from schemas import RunConfig

# Fields that describe an initial state directly; --x0 can replace them
_REQUIRED_FIELDS = {
    "toda": ["q0", "p0"],
    "r2": ["q0", "p0", "mu", "eps"],
    "tb": ["a", "b", "c", "eta"],
    "tsu2": ["alpha", "beta", "eta"],
    "orbit": ["x0"],
}

_CONSTRAINTS = {
    "r2": "(p0/2mu)^2 + eps^2 exp(4 mu q0) = 1",
    "tb": "det of the T*B momentum image = 1",
    "tsu2": "det of the T*SU(2) momentum image = 1",
    "orbit": "a1^2 + a2^2 + a3^2 = 1",
}


class StateBuilder:
    """
    Builds initial states from run requests.

    Supports:
    - Direct coordinates for every system
    - Construction from a target momentum image (--x0) for r2, tb and tsu2
    - The Toda preset (mu = 1/2, eps = sqrt 2) with optional overrides
    """

    def __init__(self):
        logger.debug("StateBuilder initialized")

    def validate_config(self, config: RunConfig) -> tuple[bool, Optional[str]]:
        """
        Check that the request names every field its system needs.

        Returns:
            Tuple of (is_valid, error_message)
        """
        errors = []
        required = list(_REQUIRED_FIELDS[config.system])
        if config.system != "orbit" and config.x0 is not None:
            required = ["mu", "eps"] if config.system == "r2" else []
        for name in required:
            if getattr(config, name) is None:
                errors.append(f"--{name.replace('_', '-')} is required for system {config.system}")

        if errors:
            return False, "; ".join(errors)
        return True, None

    def _params(self, config: RunConfig) -> R2Params:
        if config.system == "toda":
            return R2Params(
                mu=0.5 if config.mu is None else config.mu,
                eps=math.sqrt(2.0) if config.eps is None else config.eps,
                theta=config.theta or 0.0,
            )
        return R2Params(mu=config.mu, eps=config.eps, theta=config.theta or 0.0)

    def _build_plane(self, config: RunConfig) -> tuple[SystemId, PhasePoint]:
        params = self._params(config)
        system = SystemId.plane(params)
        if config.x0 is not None:
            return system, r2_preimage(params, Su2Vec.from_array(config.x0))
        return system, R2Pt(q=config.q0, p=config.p0)

    def _build_tb(self, config: RunConfig) -> tuple[SystemId, PhasePoint]:
        bel = BEl(
            a=1.0 if config.a is None else config.a,
            b=config.b or 0.0,
            c=config.c or 0.0,
        )
        if config.x0 is not None:
            return SystemId.cotangent_b(), tb_preimage(Su2Vec.from_array(config.x0), bel)
        return SystemId.cotangent_b(), TBPt(bel=bel, eta=BCov.from_array(config.eta))

    def _build_tsu2(self, config: RunConfig) -> tuple[SystemId, PhasePoint]:
        if config.x0 is not None:
            eta3 = config.eta[2] if config.eta is not None else 0.0
            state = tsu2_preimage(Su2Vec.from_array(config.x0), eta3=eta3)
        else:
            g = SU2El.normalized(
                alpha=complex(*config.alpha),
                beta=complex(*config.beta),
                tolerance=config.tolerance,
            )
            state = TSU2Pt(g=g, eta=Su2Cov.from_array(config.eta))

        leaf = orbit_coords(momentum_image(SystemId.cotangent_su2(0.0), state))
        if leaf is None:
            raise LeafMembershipError("Momentum image lies on the X3 axis: no two-dimensional leaf")
        if config.theta is not None and config.x0 is None:
            if not is_tsu2_member(state, config.theta):
                raise LeafMembershipError(
                    f"State is not on the preimage of O_theta for theta={config.theta} "
                    f"(momentum image angle {leaf.theta:.17g})"
                )
            return SystemId.cotangent_su2(config.theta), state
        return SystemId.cotangent_su2(leaf.theta), state

    def build(self, config: RunConfig) -> tuple[SystemId, PhasePoint]:
        """
        Build the system and initial state of a run request.

        Args:
            config: Validated run request

        Returns:
            Tuple of (system, initial state)

        Raises:
            InputError: missing or contradictory fields
            DomainError: the state violates a solver precondition
        """
        is_valid, error = self.validate_config(config)
        if not is_valid:
            logger.error(f"Run request rejected: {error}")
            raise InputError(error)

        if config.system in ("toda", "r2"):
            system, state = self._build_plane(config)
        elif config.system == "tb":
            system, state = self._build_tb(config)
        elif config.system == "tsu2":
            system, state = self._build_tsu2(config)
        else:
            system = SystemId.orbit(config.theta)
            state = Su2Vec.from_array(config.x0)

        self.check_normalization(system, state, config.tolerance)
        logger.info(f"Built {system.kind} initial state: {state}")
        return system, state

    def check_normalization(self, system: SystemId, state: PhasePoint, tolerance: Optional[float] = None) -> float:
        """
        Require det J(state) = 1 within tolerance.

        Returns:
            The determinant of the momentum image
        """
        tol = settings.cli_normalization_tolerance if tolerance is None else tolerance
        det = momentum_image(system, state).det()
        if abs(det - 1.0) > tol:
            constraint = _CONSTRAINTS[system.kind]
            logger.error(f"Normalization violated: {constraint} evaluates to {det:.17g}")
            raise NormalizationError(
                f"Initial data must satisfy {constraint}; got {det:.17g} (tolerance {tol:g})"
            )
        return det


# Singleton instance
_builder: Optional[StateBuilder] = None


def get_state_builder() -> StateBuilder:
    """Get or create the state builder singleton."""
    global _builder
    if _builder is None:
        _builder = StateBuilder()
    return _builder


def build_initial_state(config: RunConfig) -> tuple[SystemId, PhasePoint]:
    """Convenience function to build (system, state) from a run request."""
    builder = get_state_builder()
    return builder.build(config)
