"""Dense 3x3 kernels and the Lie groups SO(3), SOT(3) and their product.

The symmetry group used throughout the package is G = SO(3) x SOT(3),
where SOT(3) (scaled orthogonal transformations) is the direct product of
SO(3) with the multiplicative positive reals.  Rotations are stored as
plain 3x3 numpy arrays; group elements and algebra elements are small
frozen dataclasses.  All operations are pure functions over values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Taylor fallback threshold for sin(t)/t style ratios.
SMALL_ANGLE = 1e-6

# log_so3 is rejected when trace(R) <= -1 + this (angle within ~3e-5 of pi).
LOG_TRACE_TOL = 1e-9


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ChartBoundaryError(DomainError):
    """Input outside the invertible neighbourhood of a chart or logarithm."""


E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def skew(a) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector: skew(a) @ b == cross(a, b)."""
    a = np.asarray(a, dtype=float)
    return np.array([
        [0.0, -a[2], a[1]],
        [a[2], 0.0, -a[0]],
        [-a[1], a[0], 0.0],
    ])


def unskew(m) -> np.ndarray:
    """Inverse of skew for skew-symmetric matrices (reads the off-diagonal)."""
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def projector(u) -> np.ndarray:
    """Orthogonal projector onto the plane normal to u: I - u u^T / |u|^2."""
    u = np.asarray(u, dtype=float)
    n2 = float(u @ u)
    if n2 <= 0.0:
        raise DomainError("projector requires a nonzero vector")
    return np.eye(3) - np.outer(u, u) / n2


def exp_so3(a) -> np.ndarray:
    """Rotation matrix from a rotation vector (Rodrigues formula)."""
    a = np.asarray(a, dtype=float)
    theta2 = float(a @ a)
    ax = skew(a)
    if theta2 < SMALL_ANGLE**2:
        # sin(t)/t and (1-cos t)/t^2 expanded to avoid cancellation
        c1 = 1.0 - theta2 / 6.0
        c2 = 0.5 - theta2 / 24.0
    else:
        theta = math.sqrt(theta2)
        c1 = math.sin(theta) / theta
        c2 = (1.0 - math.cos(theta)) / theta2
    return np.eye(3) + c1 * ax + c2 * (ax @ ax)


def log_so3(rot) -> np.ndarray:
    """Rotation vector of a rotation matrix.

    Defined away from the angle-pi boundary; raises ChartBoundaryError there.
    """
    rot = np.asarray(rot, dtype=float)
    tr = float(np.trace(rot))
    if tr <= -1.0 + LOG_TRACE_TOL:
        raise ChartBoundaryError("log_so3 undefined near rotation angle pi")
    cos_theta = min(1.0, max(-1.0, 0.5 * (tr - 1.0)))
    theta = math.acos(cos_theta)
    w = unskew(0.5 * (rot - rot.T))
    if theta < SMALL_ANGLE:
        return (1.0 + theta * theta / 6.0) * w
    return (theta / math.sin(theta)) * w


@dataclass(frozen=True)
class ScaledRotation:
    """Element r*Q of SOT(3): rotation Q scaled by r > 0."""

    Q: np.ndarray
    r: float

    def as_matrix(self) -> np.ndarray:
        return self.r * self.Q


def exp_sot3(a, b: float) -> ScaledRotation:
    """Exponential of (a, b) in sot(3): (a, b)^ = skew(a) + b*I."""
    return ScaledRotation(exp_so3(a), math.exp(b))


def log_sot3(qr: ScaledRotation) -> tuple[np.ndarray, float]:
    """Componentwise inverse of exp_sot3."""
    if qr.r <= 0.0:
        raise DomainError("SOT(3) scale must be positive")
    return log_so3(qr.Q), math.log(qr.r)


@dataclass(frozen=True)
class AlgebraElement:
    """Element of the Lie algebra of G, as (a_s, a_q, b) coordinates.

    a_s is the so(3) part of the first factor, (a_q, b) the sot(3) part.
    """

    a_s: np.ndarray
    a_q: np.ndarray
    b: float

    @staticmethod
    def zero() -> "AlgebraElement":
        return AlgebraElement(np.zeros(3), np.zeros(3), 0.0)

    @staticmethod
    def from_vector(w) -> "AlgebraElement":
        w = np.asarray(w, dtype=float)
        return AlgebraElement(w[0:3].copy(), w[3:6].copy(), float(w[6]))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.a_s, self.a_q, [self.b]])

    def as_matrix(self) -> np.ndarray:
        """6x6 block-diagonal matrix realization (skew(a_s), skew(a_q)+b*I)."""
        out = np.zeros((6, 6))
        out[0:3, 0:3] = skew(self.a_s)
        out[3:6, 3:6] = skew(self.a_q) + self.b * np.eye(3)
        return out

    def scaled(self, c: float) -> "AlgebraElement":
        return AlgebraElement(c * self.a_s, c * self.a_q, c * self.b)


@dataclass(frozen=True)
class GroupElement:
    """Element X = (S, Q, r) of G = SO(3) x SOT(3)."""

    S: np.ndarray
    Q: np.ndarray
    r: float

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(np.eye(3), np.eye(3), 1.0)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.S @ other.S, self.Q @ other.Q, self.r * other.r)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.S.T, self.Q.T, 1.0 / self.r)

    def as_matrix(self) -> np.ndarray:
        """6x6 block-diagonal realization (S, r*Q), matching AlgebraElement."""
        out = np.zeros((6, 6))
        out[0:3, 0:3] = self.S
        out[3:6, 3:6] = self.r * self.Q
        return out

    def adjoint(self, u: AlgebraElement) -> AlgebraElement:
        """Ad_X(u).  Componentwise on the direct product; the scale part is
        central, so b is unchanged."""
        return AlgebraElement(self.S @ u.a_s, self.Q @ u.a_q, u.b)


def exp_group(u: AlgebraElement, scale: float = 1.0) -> GroupElement:
    """Group exponential of scale*u, componentwise on the factors."""
    return GroupElement(
        exp_so3(scale * u.a_s),
        exp_so3(scale * u.a_q),
        math.exp(scale * u.b),
    )


def project_rotation(m) -> np.ndarray:
    """Nearest rotation matrix (polar projection via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    rot = u @ vt
    if np.linalg.det(rot) < 0.0:
        u = u.copy()
        u[:, -1] = -u[:, -1]
        rot = u @ vt
    return rot


def rotation_error(m) -> float:
    """Frobenius distance of m^T m from the identity (orthonormality drift)."""
    m = np.asarray(m, dtype=float)
    return float(np.linalg.norm(m.T @ m - np.eye(3)))


def rotation_between(a, b) -> np.ndarray:
    """Minimal rotation mapping unit vector a onto unit vector b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(a @ b)
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # antiparallel: rotate by pi about any axis orthogonal to a
        helper = E1 if abs(a[0]) < 0.9 else E2
        perp = np.cross(a, helper)
        perp /= np.linalg.norm(perp)
        return exp_so3(math.pi * perp)
    angle = math.atan2(s, c)
    return exp_so3(angle * axis / s)


def random_rotation(rng: np.random.Generator, max_angle: float = math.pi * 0.9) -> np.ndarray:
    """Random rotation with angle uniform in (0, max_angle)."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return exp_so3(rng.uniform(0.0, max_angle) * axis)


def random_group_element(rng: np.random.Generator) -> GroupElement:
    """Random element of G with scale log-uniform in [1/e, e]."""
    return GroupElement(
        random_rotation(rng),
        random_rotation(rng),
        math.exp(rng.uniform(-1.0, 1.0)),
    )
