"""
Lie algebra layer for the PL-duality lab.

Structure constants, bilinear forms and basis identifications of sl(2,C),
split as su(2) + b where b holds the upper-triangular, real-diagonal,
traceless matrices. Coordinates:

    su(2):  X1 = [[0, i], [i, 0]], X2 = [[0, 1], [-1, 0]], X3 = [[i, 0], [0, -i]]
    b:      E = [[0, 1], [0, 0]], iE, H = diag(1, -1)

The module-level array helpers (su2_matrix, su2_coords, b_matrix, split_coords)
work on plain numpy arrays and are what the integrators call in their inner loops.
"""

from typing import Sequence
import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from errors import InputError, TracelessError

Mat2C = npt.NDArray[np.complex128]

X1: Mat2C = np.array([[0, 1j], [1j, 0]], dtype=complex)
X2: Mat2C = np.array([[0, 1], [-1, 0]], dtype=complex)
X3: Mat2C = np.array([[1j, 0], [0, -1j]], dtype=complex)
E: Mat2C = np.array([[0, 1], [0, 0]], dtype=complex)
IE: Mat2C = 1j * E
H: Mat2C = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY: Mat2C = np.eye(2, dtype=complex)

SU2_BASIS = (X1, X2, X3)
B_BASIS = (E, IE, H)

_FROZEN = ConfigDict(frozen=True, allow_inf_nan=False)


# ===== Array helpers =====

def su2_matrix(a: Sequence[float]) -> Mat2C:
    """Matrix of a1*X1 + a2*X2 + a3*X3."""
    a1, a2, a3 = a
    return np.array(
        [[1j * a3, a2 + 1j * a1], [-a2 + 1j * a1, -1j * a3]], dtype=complex
    )


def su2_coords(Z: Mat2C) -> np.ndarray:
    """su(2) coordinates of the su(2)-part of a traceless matrix."""
    return np.array([Z[1, 0].imag, -Z[1, 0].real, Z[0, 0].imag])


def b_matrix(z: Sequence[float]) -> Mat2C:
    """Matrix of u*E + v*iE + w*H."""
    u, v, w = z
    return np.array([[w, u + 1j * v], [0, -w]], dtype=complex)


def split_coords(Z: Mat2C) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates (su(2) part, b part) of a traceless matrix."""
    upper = Z[0, 1] + np.conj(Z[1, 0])
    return su2_coords(Z), np.array([upper.real, upper.imag, Z[0, 0].real])


def as_mat2c(entries) -> Mat2C:
    """Coerce nested entries to a finite 2x2 complex matrix."""
    try:
        M = np.asarray(entries, dtype=complex)
    except (TypeError, ValueError) as e:
        raise InputError(f"Cannot read a 2x2 complex matrix: {str(e)}")
    if M.shape != (2, 2):
        raise InputError(f"Expected a 2x2 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("Matrix has non-finite entries")
    return M


def check_traceless(Z: Mat2C, name: str = "input") -> Mat2C:
    Z = as_mat2c(Z)
    trace = complex(np.trace(Z))
    if abs(trace) > settings.input_tolerance:
        raise TracelessError(f"{name} is not traceless: tr = {trace}")
    return Z


# ===== Coordinate types =====

class Su2Vec(BaseModel):
    """Element a1*X1 + a2*X2 + a3*X3 of su(2)."""
    model_config = _FROZEN

    a1: float = Field(0.0, description="X1 coefficient")
    a2: float = Field(0.0, description="X2 coefficient")
    a3: float = Field(0.0, description="X3 coefficient")

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "Su2Vec":
        return cls(a1=float(a[0]), a2=float(a[1]), a3=float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3])

    def matrix(self) -> Mat2C:
        return su2_matrix(self.as_array())

    def det(self) -> float:
        """Determinant of the matrix form, a1^2 + a2^2 + a3^2."""
        return self.a1 ** 2 + self.a2 ** 2 + self.a3 ** 2

    def __add__(self, other: "Su2Vec") -> "Su2Vec":
        return Su2Vec.from_array(self.as_array() + other.as_array())

    def __sub__(self, other: "Su2Vec") -> "Su2Vec":
        return Su2Vec.from_array(self.as_array() - other.as_array())

    def scaled(self, k: float) -> "Su2Vec":
        return Su2Vec.from_array(k * self.as_array())


class BAlgVec(BaseModel):
    """Element u*E + v*iE + w*H of b."""
    model_config = _FROZEN

    u: float = Field(0.0, description="E coefficient")
    v: float = Field(0.0, description="iE coefficient")
    w: float = Field(0.0, description="H coefficient")

    @classmethod
    def from_array(cls, z: Sequence[float]) -> "BAlgVec":
        return cls(u=float(z[0]), v=float(z[1]), w=float(z[2]))

    @classmethod
    def from_matrix(cls, Z: Mat2C) -> "BAlgVec":
        """Read coordinates of a matrix that must already lie in b."""
        Z = check_traceless(Z)
        tol = settings.input_tolerance
        if abs(Z[1, 0]) > tol or abs(Z[0, 0].imag) > tol:
            raise InputError(f"Matrix is not in b: {Z.tolist()}")
        return cls(u=Z[0, 1].real, v=Z[0, 1].imag, w=Z[0, 0].real)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w])

    def matrix(self) -> Mat2C:
        return b_matrix(self.as_array())

    def scaled(self, k: float) -> "BAlgVec":
        return BAlgVec.from_array(k * self.as_array())


class Su2Cov(BaseModel):
    """Covector c1*x1 + c2*x2 + c3*x3 in the dual basis of su(2)."""
    model_config = _FROZEN

    c1: float = Field(0.0, description="x1 component")
    c2: float = Field(0.0, description="x2 component")
    c3: float = Field(0.0, description="x3 component")

    @classmethod
    def from_array(cls, c: Sequence[float]) -> "Su2Cov":
        return cls(c1=float(c[0]), c2=float(c[1]), c3=float(c[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def pair(self, X: Su2Vec) -> float:
        return float(self.as_array() @ X.as_array())

    @property
    def plus(self) -> complex:
        """eta_+ = c1 + i c2."""
        return complex(self.c1, self.c2)


class BCov(BaseModel):
    """Covector ce*e + cet*et + ch*h in the dual basis of b."""
    model_config = _FROZEN

    ce: float = Field(0.0, description="e component, dual to E")
    cet: float = Field(0.0, description="et component, dual to iE")
    ch: float = Field(0.0, description="h component, dual to H")

    @classmethod
    def from_array(cls, c: Sequence[float]) -> "BCov":
        return cls(ce=float(c[0]), cet=float(c[1]), ch=float(c[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.ce, self.cet, self.ch])

    def pair(self, Z: BAlgVec) -> float:
        return float(self.as_array() @ Z.as_array())


# ===== Bilinear forms =====

def killing(X: Mat2C, Y: Mat2C) -> complex:
    """Killing form 4 tr(XY) of sl(2,C)."""
    X = check_traceless(X, "first argument")
    Y = check_traceless(Y, "second argument")
    return complex(4.0 * np.trace(X @ Y))


def pair_sl2(X: Mat2C, Y: Mat2C) -> float:
    """Invariant pairing (X, Y) = -Im(kappa(X, Y)) / 4; su(2) and b are isotropic."""
    return -0.25 * killing(X, Y).imag


def bracket(X: Mat2C, Y: Mat2C) -> Mat2C:
    return X @ Y - Y @ X


def gram_matrix() -> np.ndarray:
    """6x6 pairing matrix on the combined basis {X1, X2, X3, E, iE, H}."""
    basis = SU2_BASIS + B_BASIS
    return np.array([[pair_sl2(P, Q) for Q in basis] for P in basis])


# ===== Identifications =====

def psi_map(X: Su2Vec) -> BCov:
    """su(2) -> b*: psi(X1) = -e, psi(X2) = et, psi(X3) = -2h."""
    return BCov(ce=-X.a1, cet=X.a2, ch=-2.0 * X.a3)


def psi_inv(eta: BCov) -> Su2Vec:
    return Su2Vec(a1=-eta.ce, a2=eta.cet, a3=-0.5 * eta.ch)


def psi_star(eta: Su2Cov) -> BAlgVec:
    """su(2)* -> b: x1 -> -E, x2 -> iE, x3 -> -H/2."""
    return BAlgVec(u=-eta.c1, v=eta.c2, w=-0.5 * eta.c3)


def psi_adjoint(Z: BAlgVec) -> Su2Cov:
    """b -> su(2)*, inverse of psi_star: E -> -x1, iE -> x2, H -> -2x3."""
    return Su2Cov(c1=-Z.u, c2=Z.v, c3=-2.0 * Z.w)


def project_sl2(Z: Mat2C) -> tuple[Su2Vec, BAlgVec]:
    """
    Split a traceless matrix as Z = K + B with K in su(2), B in b.

    Args:
        Z: traceless 2x2 complex matrix

    Returns:
        Tuple of (K coordinates, B coordinates)
    """
    Z = check_traceless(Z)
    a, z = split_coords(Z)
    return Su2Vec.from_array(a), BAlgVec.from_array(z)


def kappa_hat_su2(X: Su2Vec) -> Su2Cov:
    """Metric lowering by the Killing form; kappa(Xi, Xj) = -8 delta_ij."""
    return Su2Cov.from_array(-8.0 * X.as_array())


def kappa_hat_su2_inv(eta: Su2Cov) -> Su2Vec:
    return Su2Vec.from_array(eta.as_array() / -8.0)


def k_operator(Z: BAlgVec) -> Su2Vec:
    """Top-like operator b -> su(2): E -> X1/8, iE -> -X2/8, H -> X3/4."""
    return kappa_hat_su2_inv(psi_adjoint(Z))


def lie_poisson_field(X: Su2Vec, grad: Sequence[float]) -> Su2Vec:
    """
    Hamiltonian vector field on su(2) ~ b* of a function with Euclidean gradient grad at X.

    The bracket is {x1, x3} = x1, {x2, x3} = x2, {x1, x2} = 0.
    """
    x1, x2, _ = X.as_array()
    g1, g2, g3 = grad
    return Su2Vec(a1=x1 * g3, a2=x2 * g3, a3=-(x1 * g1 + x2 * g2))


def collective_f(X: Su2Vec) -> float:
    """f(X) = -Re kappa(X, X) / 16, which equals det(X) / 2 on su(2)."""
    M = X.matrix()
    return -killing(M, M).real / 16.0
