"""
Group layer for the PL-duality lab.

Iwasawa factors SU(2) x B of SL(2,C), the dressing action of B on SU(2),
the coadjoint action of B on su(2) ~ b*, and the dressing-orbit classification.
"""

import cmath
import math
from typing import Annotated, Literal, Union
import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from algebra import (
    BAlgVec,
    Mat2C,
    Su2Vec,
    as_mat2c,
    su2_coords,
)
from config import settings
from errors import DeterminantError, InputError

_FROZEN = ConfigDict(frozen=True, allow_inf_nan=False)
TWO_PI = 2.0 * math.pi


class SU2El(BaseModel):
    """Unitary factor [[alpha, beta], [-conj(beta), conj(alpha)]]."""
    model_config = ConfigDict(frozen=True)

    alpha: complex = Field(1 + 0j, description="Diagonal entry")
    beta: complex = Field(0j, description="Off-diagonal entry")

    @model_validator(mode="after")
    def _check_unit(self) -> "SU2El":
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if not math.isfinite(norm) or abs(norm - 1.0) > settings.input_tolerance:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        return self

    @classmethod
    def identity(cls) -> "SU2El":
        return cls()

    @classmethod
    def normalized(cls, alpha: complex, beta: complex, tolerance: float) -> "SU2El":
        """Rescale (alpha, beta) onto the unit sphere if it is within tolerance of it."""
        norm2 = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm2 - 1.0) > tolerance:
            raise InputError(
                f"|alpha|^2 + |beta|^2 = {norm2:.17g} is not 1 (tolerance {tolerance:g})"
            )
        scale = 1.0 / math.sqrt(norm2)
        return cls(alpha=complex(alpha) * scale, beta=complex(beta) * scale)

    @classmethod
    def from_matrix(cls, M: Mat2C) -> "SU2El":
        M = as_mat2c(M)
        alpha, beta = complex(M[0, 0]), complex(M[0, 1])
        expected = np.array([[alpha, beta], [-beta.conjugate(), alpha.conjugate()]])
        if np.max(np.abs(M - expected)) > settings.input_tolerance:
            raise InputError(f"Matrix is not in SU(2): {M.tolist()}")
        return cls(alpha=alpha, beta=beta)

    def matrix(self) -> Mat2C:
        a, b = self.alpha, self.beta
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)

    def inverse(self) -> "SU2El":
        return SU2El(alpha=self.alpha.conjugate(), beta=-self.beta)

    @property
    def vartheta(self) -> float:
        """arg(beta) in [0, 2pi)."""
        return cmath.phase(self.beta) % TWO_PI


class BEl(BaseModel):
    """Upper-triangular factor [[a, b + ic], [0, 1/a]] with a > 0."""
    model_config = _FROZEN

    a: float = Field(1.0, gt=0.0, description="Positive diagonal entry")
    b: float = Field(0.0, description="Real part of the upper entry")
    c: float = Field(0.0, description="Imaginary part of the upper entry")

    @classmethod
    def identity(cls) -> "BEl":
        return cls()

    @classmethod
    def from_matrix(cls, M: Mat2C) -> "BEl":
        M = as_mat2c(M)
        tol = settings.input_tolerance
        a = M[0, 0]
        if abs(M[1, 0]) > tol or abs(a.imag) > tol or a.real <= 0.0:
            raise InputError(f"Matrix is not in B: {M.tolist()}")
        if abs(M[1, 1] - 1.0 / a.real) > tol:
            raise InputError(f"Matrix is not in B (diagonal {M[0, 0]}, {M[1, 1]})")
        return cls(a=a.real, b=M[0, 1].real, c=M[0, 1].imag)

    @property
    def upper(self) -> complex:
        return complex(self.b, self.c)

    def matrix(self) -> Mat2C:
        return np.array([[self.a, self.upper], [0.0, 1.0 / self.a]], dtype=complex)

    def inverse(self) -> "BEl":
        return BEl(a=1.0 / self.a, b=-self.b, c=-self.c)

    def compose(self, other: "BEl") -> "BEl":
        """Matrix product self * other."""
        upper = self.a * other.upper + self.upper / other.a
        return BEl(a=self.a * other.a, b=upper.real, c=upper.imag)


class PointOrbit(BaseModel):
    """Zero-dimensional dressing orbit diag(t, 1/t), t = exp(i chi)."""
    kind: Literal["point"] = "point"
    chi: float


class SphereOrbit(BaseModel):
    """Two-dimensional dressing orbit on which arg(beta) = vartheta."""
    kind: Literal["sphere"] = "sphere"
    vartheta: float


OrbitClass = Annotated[Union[PointOrbit, SphereOrbit], Field(discriminator="kind")]


def iwasawa_factorize(l: Mat2C) -> tuple[SU2El, BEl]:
    """
    Factor l = g * b with g in SU(2) and b in B.

    Gram-Schmidt on the first column: g's first column is (l11, l21) normalized,
    and det l = 1 fixes the rest.

    Args:
        l: 2x2 complex matrix with determinant 1

    Returns:
        Tuple of (g, b)
    """
    l = as_mat2c(l)
    det = complex(np.linalg.det(l))
    if abs(det - 1.0) > settings.identity_tolerance:
        logger.error(f"Iwasawa factorization refused: det = {det}")
        raise DeterminantError(f"Matrix determinant is {det}, expected 1")

    norm = math.hypot(abs(l[0, 0]), abs(l[1, 0]))
    alpha = complex(l[0, 0]) / norm
    beta = -complex(l[1, 0]).conjugate() / norm
    g = SU2El(alpha=alpha, beta=beta)
    upper = alpha.conjugate() * l[0, 1] - beta * l[1, 1]
    return g, BEl(a=norm, b=upper.real, c=upper.imag)


def dressing_pair(bt: BEl, g: SU2El) -> tuple[SU2El, BEl]:
    """Dressed factor and residual: bt * g = g_dressed * b_residual."""
    return iwasawa_factorize(bt.matrix() @ g.matrix())


def coadjoint_b_on_su2(bt: BEl, X: Su2Vec) -> Su2Vec:
    """
    Coadjoint action of B on su(2) ~ b*: X1 -> (b/a) X3 + X1/a^2,
    X2 -> -(c/a) X3 + X2/a^2, X3 -> X3.

    Equals the su(2)-part of bt X bt^-1 and is a left action.
    """
    a, b, c = bt.a, bt.b, bt.c
    return Su2Vec(
        a1=X.a1 / a ** 2,
        a2=X.a2 / a ** 2,
        a3=X.a3 + (b * X.a1 - c * X.a2) / a,
    )


def classify_dressing_orbit(g: SU2El) -> PointOrbit | SphereOrbit:
    if abs(g.beta) <= settings.point_orbit_beta:
        return PointOrbit(chi=cmath.phase(g.alpha))
    return SphereOrbit(vartheta=g.vartheta)


def dressing_inf_gen(g: SU2El, Z: BAlgVec) -> Su2Vec:
    """Body form g^-1 g^Z of the dressing generator: su(2)-part of Ad(g^-1) Z."""
    G = g.matrix()
    return Su2Vec.from_array(su2_coords(G.conj().T @ Z.matrix() @ G))


def dressing_inf_gen_closed_form(g: SU2El, Z: BAlgVec) -> Su2Vec:
    """The same generator from the explicit formulas for H, iE and E."""
    al, be = g.alpha, g.beta
    alc, bec = al.conjugate(), be.conjugate()
    gen_h = np.array([-1j * (al * bec - alc * be), -(al * bec + alc * be), 0.0])
    gen_ie = np.array([
        -0.5 * (be ** 2 + bec ** 2),
        -0.5j * (be ** 2 - bec ** 2),
        -0.5 * (alc * bec + al * be),
    ])
    gen_e = np.array([
        -0.5j * (be ** 2 - bec ** 2),
        0.5 * (be ** 2 + bec ** 2),
        -0.5j * (al * be - alc * bec),
    ])
    total = Z.u * gen_e + Z.v * gen_ie + Z.w * gen_h
    return Su2Vec.from_array(np.real(total))


def stabilizer_element(theta: float, d: float) -> BEl:
    """Element [[1, d(sin theta + i cos theta)], [0, 1]] fixing the leaf O_theta."""
    return BEl(a=1.0, b=d * math.sin(theta), c=d * math.cos(theta))


def b_exp(Z: BAlgVec, t: float = 1.0) -> BEl:
    """exp(tZ) in B: [[e^{tw}, sinh(tw)/w (u + iv)], [0, e^{-tw}]]."""
    w = Z.w
    factor = t if abs(w) < 1e-12 else math.sinh(t * w) / w
    return BEl(a=math.exp(t * w), b=factor * Z.u, c=factor * Z.v)

