"""
Phase spaces for the PL-duality lab.

The three Hamiltonian B-spaces sharing the momentum target su(2) ~ b*:

    r2    plane (q, p) with the family of transitive actions rho
    tb    T*B = B x b*, left-trivialized, B acting by left translation
    tsu2  T*SU(2) = SU(2) x su(2)*, with the lifted dressing action

plus the orbit space su(2) itself. Also home of SystemId, which selects one
of the four, and of the flat array codec used by integrators and file I/O.
"""

import cmath
import math
from typing import Literal, Optional, Union
import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from algebra import (
    BAlgVec,
    BCov,
    Su2Cov,
    Su2Vec,
    psi_adjoint,
    psi_map,
    psi_star,
    su2_coords,
)
from config import settings
from errors import DegenerateOrbitError, InputError, LeafMembershipError
from groups import BEl, SU2El, TWO_PI, coadjoint_b_on_su2, dressing_pair

_FROZEN = ConfigDict(frozen=True, allow_inf_nan=False)


# ===== Domain types =====

class R2Params(BaseModel):
    """Parameters of the momentum embedding of the plane onto the leaf O_theta."""
    model_config = _FROZEN

    mu: float = Field(..., gt=0.0, description="Exponential rate")
    eps: float = Field(..., description="Amplitude (zero degenerates onto the X3 axis)")
    theta: float = Field(0.0, description="Leaf angle in radians")

    @classmethod
    def toda(cls, theta: float = 0.0) -> "R2Params":
        """mu = 1/2, eps = sqrt(2): the energy becomes p^2/2 + exp(2q)."""
        return cls(mu=0.5, eps=math.sqrt(2.0), theta=theta)


class R2Pt(BaseModel):
    model_config = _FROZEN
    q: float
    p: float


class TBPt(BaseModel):
    model_config = _FROZEN
    bel: BEl
    eta: BCov


class TSU2Pt(BaseModel):
    model_config = _FROZEN
    g: SU2El
    eta: Su2Cov


class OrbitPt(BaseModel):
    """Point x X_theta + z X3 of the leaf O_theta, X_theta = cos(theta) X1 + sin(theta) X2."""
    model_config = _FROZEN

    theta: float
    x: float = Field(..., gt=0.0)
    z: float


PhasePoint = Union[R2Pt, TBPt, TSU2Pt, Su2Vec]

SystemKind = Literal["r2", "tb", "tsu2", "orbit"]

STATE_COLUMNS: dict[str, list[str]] = {
    "r2": ["q", "p"],
    "tb": ["a", "b", "c", "eta_e", "eta_et", "eta_h"],
    "tsu2": ["re_alpha", "im_alpha", "re_beta", "im_beta", "eta1", "eta2", "eta3"],
    "orbit": ["j1", "j2", "j3"],
}


class SystemId(BaseModel):
    """Which of the dual systems a state or trajectory belongs to."""
    model_config = _FROZEN

    kind: SystemKind
    r2: Optional[R2Params] = Field(None, description="Plane parameters (r2 only)")
    theta: Optional[float] = Field(None, description="Leaf angle (tsu2, optionally orbit)")

    @model_validator(mode="after")
    def _check_parameters(self) -> "SystemId":
        if self.kind == "r2" and self.r2 is None:
            raise ValueError("r2 system requires R2Params")
        if self.kind != "r2" and self.r2 is not None:
            raise ValueError(f"{self.kind} system takes no R2Params")
        if self.kind == "tsu2" and self.theta is None:
            raise ValueError("tsu2 system requires the leaf angle theta")
        return self

    @classmethod
    def plane(cls, params: R2Params) -> "SystemId":
        return cls(kind="r2", r2=params)

    @classmethod
    def toda(cls) -> "SystemId":
        return cls(kind="r2", r2=R2Params.toda())

    @classmethod
    def cotangent_b(cls) -> "SystemId":
        return cls(kind="tb")

    @classmethod
    def cotangent_su2(cls, theta: float) -> "SystemId":
        return cls(kind="tsu2", theta=theta % TWO_PI)

    @classmethod
    def orbit(cls, theta: Optional[float] = None) -> "SystemId":
        return cls(kind="orbit", theta=theta)

    @property
    def columns(self) -> list[str]:
        return STATE_COLUMNS[self.kind]


class GaugeSlicePoint(BaseModel):
    """Image of the gauge slice map together with its canonical momenta."""
    bel: BEl
    algebra: Su2Vec
    p_a: float
    p_t: float


# ===== Plane =====

def momentum_r2(params: R2Params, pt: R2Pt) -> Su2Vec:
    """(p / 2mu) X3 - eps exp(2 mu q) (cos theta X1 + sin theta X2)."""
    radial = -params.eps * math.exp(2.0 * params.mu * pt.q)
    return Su2Vec(
        a1=radial * math.cos(params.theta),
        a2=radial * math.sin(params.theta),
        a3=pt.p / (2.0 * params.mu),
    )


def act_r2(params: R2Params, bt: BEl, pt: R2Pt) -> R2Pt:
    mu, eps, theta = params.mu, params.eps, params.theta
    shear = bt.b * math.cos(theta) - bt.c * math.sin(theta)
    return R2Pt(
        q=pt.q - math.log(bt.a) / mu,
        p=pt.p - 2.0 * mu * (eps / bt.a) * math.exp(2.0 * mu * pt.q) * shear,
    )


def r2_preimage(params: R2Params, X: Su2Vec) -> R2Pt:
    """
    Invert the plane momentum map on its leaf.

    Raises:
        DegenerateOrbitError: eps = 0
        LeafMembershipError: X is not in the image of the embedding
    """
    if params.eps == 0.0:
        raise DegenerateOrbitError("eps = 0 maps the plane onto the X3 axis only")
    cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
    growth = -(X.a1 * cos_t + X.a2 * sin_t) / params.eps
    across = -X.a1 * sin_t + X.a2 * cos_t
    if growth <= 0.0 or abs(across) > settings.membership_tolerance * max(1.0, growth):
        raise LeafMembershipError(
            f"{X} is not in the image of the plane for theta={params.theta}, eps={params.eps}"
        )
    return R2Pt(q=math.log(growth) / (2.0 * params.mu), p=2.0 * params.mu * X.a3)


# ===== Cotangent bundle of B =====

def momentum_tb(pt: TBPt) -> Su2Vec:
    """-eta_e/a^2 X1 + eta_et/a^2 X2 - (eta_h/2 + (b eta_e + c eta_et)/a) X3."""
    a, b, c = pt.bel.a, pt.bel.b, pt.bel.c
    e, et, h = pt.eta.ce, pt.eta.cet, pt.eta.ch
    return Su2Vec(
        a1=-e / a ** 2,
        a2=et / a ** 2,
        a3=-(0.5 * h + (b * e + c * et) / a),
    )


def act_tb(ht: BEl, pt: TBPt) -> TBPt:
    return TBPt(bel=ht.compose(pt.bel), eta=pt.eta)


def tb_preimage(X: Su2Vec, bel: BEl) -> TBPt:
    """The covector over bel whose momentum image is X."""
    return TBPt(bel=bel, eta=psi_map(coadjoint_b_on_su2(bel.inverse(), X)))


# ===== Cotangent bundle of SU(2) =====

def _covector_matrix(eta: Su2Cov) -> np.ndarray:
    return psi_star(eta).matrix()


def momentum_tsu2(pt: TSU2Pt) -> Su2Vec:
    """su(2)-part of g psi_star(eta) g^-1."""
    G = pt.g.matrix()
    return Su2Vec.from_array(su2_coords(G @ _covector_matrix(pt.eta) @ G.conj().T))


def momentum_tsu2_components(pt: TSU2Pt, theta: float) -> tuple[float, float, float]:
    """
    Coefficients of the momentum image along (X_theta, X_theta*, X3) from the
    component formula, X_theta* = -sin(theta) X1 + cos(theta) X2.
    """
    al, be = pt.g.alpha, pt.g.beta
    e1, e2, e3 = pt.eta.c1, pt.eta.c2, pt.eta.c3
    rot = cmath.exp(1j * theta)
    along = e1 * math.cos(theta) - e2 * math.sin(theta)
    across = e1 * math.sin(theta) + e2 * math.cos(theta)
    be2 = be * be
    x_theta = -be2.imag * along - be2.real * across - e3 * (al * be * rot).imag
    x_theta_star = be2.imag * across - be2.real * along - e3 * (al * be * rot).real
    x3 = (al.conjugate() * be * pt.eta.plus).imag
    return x_theta, x_theta_star, x3


def act_tsu2(bt: BEl, pt: TSU2Pt) -> TSU2Pt:
    """Lifted dressing action: (g^bt, psi* Ad(residual) psi_star eta)."""
    g_dressed, residual = dressing_pair(bt, pt.g)
    R = residual.matrix()
    conjugated = R @ _covector_matrix(pt.eta) @ np.linalg.inv(R)
    moved = BAlgVec(u=conjugated[0, 1].real, v=conjugated[0, 1].imag, w=conjugated[0, 0].real)
    return TSU2Pt(g=g_dressed, eta=psi_adjoint(moved))


def tsu2_constraints(pt: TSU2Pt, theta: float) -> tuple[float, float]:
    """Real and imaginary parts of (beta^2 eta_+ + eta3 alpha beta) exp(i theta)."""
    al, be = pt.g.alpha, pt.g.beta
    value = (be * be * pt.eta.plus + pt.eta.c3 * al * be) * cmath.exp(1j * theta)
    return value.real, value.imag


def is_tsu2_member(pt: TSU2Pt, theta: float, tolerance: Optional[float] = None) -> bool:
    tol = settings.membership_tolerance if tolerance is None else tolerance
    c_re, c_im = tsu2_constraints(pt, theta)
    return abs(c_re) < tol and c_im < 0.0


def tsu2_preimage(X: Su2Vec, chi: float = 0.0, eta3: float = 0.0) -> TSU2Pt:
    """
    A point of T*SU(2) on a two-dimensional dressing orbit whose momentum image is X.

    Starts from alpha = 0, beta = exp(i chi) carrying x X_theta, then shears
    along X3 with a unipotent element of B.
    """
    coords = orbit_coords(X)
    if coords is None:
        raise DegenerateOrbitError(f"{X} lies on the X3 axis; no sphere-orbit preimage is built")
    theta, x, z = coords.theta, coords.x, coords.z
    beta = cmath.exp(1j * chi)
    eta_plus = (-x * math.sin(theta) - 1j * x * math.cos(theta)) / (beta * beta)
    start = TSU2Pt(
        g=SU2El(alpha=0j, beta=beta),
        eta=Su2Cov(c1=eta_plus.real, c2=eta_plus.imag, c3=eta3),
    )
    shear = BEl(a=1.0, b=(z / x) * math.cos(theta), c=-(z / x) * math.sin(theta))
    return act_tsu2(shear, start)


def pi_hat_v0(g: SU2El) -> tuple[Su2Cov, Su2Vec]:
    """
    Annihilator of the dressing generators at g and the normal tangent vector.

    Returns:
        Tuple of (pi_hat, v0) with <pi_hat, v0> = 1

    Raises:
        DegenerateOrbitError: |beta| too small (point orbit)
    """
    al, be = g.alpha, g.beta
    beta2 = abs(be) ** 2
    if abs(be) <= settings.degenerate_beta:
        logger.error(f"pi_hat requested on a point orbit (|beta| = {abs(be):.3e})")
        raise DegenerateOrbitError(f"|beta| = {abs(be):.3e}: point orbit has no annihilator")
    ab = al * be.conjugate()
    pi_hat = Su2Cov(c1=-ab.real / beta2, c2=-ab.imag / beta2, c3=1.0)
    v0 = Su2Vec(a1=-ab.real, a2=-ab.imag, a3=beta2)
    return pi_hat, v0


# ===== Leaves and gauge slice =====

def orbit_coords(X: Su2Vec) -> Optional[OrbitPt]:
    radius2 = X.a1 ** 2 + X.a2 ** 2
    if radius2 <= 1e-24:
        return None
    theta = math.atan2(X.a2, X.a1) % TWO_PI
    return OrbitPt(theta=theta, x=math.sqrt(radius2), z=X.a3)


def orbit_vector(pt: OrbitPt) -> Su2Vec:
    return Su2Vec(a1=pt.x * math.cos(pt.theta), a2=pt.x * math.sin(pt.theta), a3=pt.z)


def gauge_slice(theta: float, t: float, a: float, v3: float, vtheta: float) -> GaugeSlicePoint:
    """
    Slice of T*B over O_theta: B element (a, -t exp(-i theta)), algebra part
    -v3/2 X3 - vtheta X_theta, with momenta p_a = (t vtheta - v3)/a^2, p_t = vtheta/a.
    """
    if a <= 0.0:
        raise InputError(f"Gauge slice requires a > 0, got {a}")
    upper = -t * cmath.exp(-1j * theta)
    algebra = Su2Vec(
        a1=-vtheta * math.cos(theta),
        a2=-vtheta * math.sin(theta),
        a3=-0.5 * v3,
    )
    return GaugeSlicePoint(
        bel=BEl(a=a, b=upper.real, c=upper.imag),
        algebra=algebra,
        p_a=(t * vtheta - v3) / a ** 2,
        p_t=vtheta / a,
    )


def gauge_slice_inverse(theta: float, t: float, a: float, p_a: float, p_t: float) -> tuple[float, float]:
    """Recover (v3, vtheta) from the canonical momenta; theta does not enter."""
    if a <= 0.0:
        raise InputError(f"Gauge slice requires a > 0, got {a}")
    vtheta = a * p_t
    return t * vtheta - a ** 2 * p_a, vtheta


# ===== Dispatch and array codec =====

_STATE_TYPES = {"r2": R2Pt, "tb": TBPt, "tsu2": TSU2Pt, "orbit": Su2Vec}


def check_state(system: SystemId, state: PhasePoint) -> None:
    expected = _STATE_TYPES[system.kind]
    if not isinstance(state, expected):
        raise InputError(
            f"{system.kind} system expects {expected.__name__}, got {type(state).__name__}"
        )


def momentum_image(system: SystemId, state: PhasePoint) -> Su2Vec:
    check_state(system, state)
    if system.kind == "r2":
        return momentum_r2(system.r2, state)
    if system.kind == "tb":
        return momentum_tb(state)
    if system.kind == "tsu2":
        return momentum_tsu2(state)
    return state


def state_to_array(state: PhasePoint) -> np.ndarray:
    if isinstance(state, R2Pt):
        return np.array([state.q, state.p])
    if isinstance(state, TBPt):
        return np.concatenate([[state.bel.a, state.bel.b, state.bel.c], state.eta.as_array()])
    if isinstance(state, TSU2Pt):
        g = state.g
        return np.concatenate([
            [g.alpha.real, g.alpha.imag, g.beta.real, g.beta.imag],
            state.eta.as_array(),
        ])
    return state.as_array()


def state_from_array(system: SystemId, y: np.ndarray) -> PhasePoint:
    """Rebuild a typed state from its flat coordinates (group parts must be on-manifold)."""
    y = np.asarray(y, dtype=float)
    if y.shape != (len(system.columns),):
        raise InputError(f"{system.kind} state needs {len(system.columns)} coordinates, got {y.shape}")
    if system.kind == "r2":
        return R2Pt(q=y[0], p=y[1])
    if system.kind == "tb":
        return TBPt(bel=BEl(a=y[0], b=y[1], c=y[2]), eta=BCov.from_array(y[3:]))
    if system.kind == "tsu2":
        return TSU2Pt(
            g=SU2El(alpha=complex(y[0], y[1]), beta=complex(y[2], y[3])),
            eta=Su2Cov.from_array(y[4:]),
        )
    return Su2Vec.from_array(y)

