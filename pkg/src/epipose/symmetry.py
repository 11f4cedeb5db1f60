"""State space, group actions and the equivariant lift.

The camera pose lives on M = SO(3)-torsor x (R^3 \\ {0}); the symmetry
group G = SO(3) x SOT(3) acts on states, body velocities and bearing
pairs through the right actions defined here.  The lift maps a state and
velocity into the Lie algebra so that the system kinematics can be
integrated on the group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liegroup import (
    E3,
    AlgebraElement,
    DomainError,
    GroupElement,
    rotation_between,
    skew,
)


@dataclass(frozen=True)
class State:
    """Camera pose: attitude R and translation x (reference frame, meters).

    The translation must not vanish; the bearing/range decomposition of x
    is undefined at the origin.
    """

    R: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class Velocity:
    """Body-frame angular velocity (rad/s) and linear velocity (m/s)."""

    omega: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class BearingPair:
    """Unit bearings of one landmark in the reference and current frames."""

    p_ref: np.ndarray
    p_cur: np.ndarray


# Chart/observer origin: identity attitude, unit translation along e3.
ORIGIN = State(np.eye(3), E3.copy())


def phi(X: GroupElement, xi: State) -> State:
    """Right action of G on states: (Q^T R S, Q^T x / r)."""
    return State(X.Q.T @ xi.R @ X.S, (X.Q.T @ xi.x) / X.r)


def psi(X: GroupElement, u: Velocity) -> Velocity:
    """Right action of G on velocities: (S^T omega, S^T v / r)."""
    return Velocity(X.S.T @ u.omega, (X.S.T @ u.v) / X.r)


def theta(X: GroupElement, bp: BearingPair) -> BearingPair:
    """Right action of G on bearing pairs: (Q^T p_ref, S^T p_cur)."""
    return BearingPair(X.Q.T @ bp.p_ref, X.S.T @ bp.p_cur)


def dynamics(xi: State, u: Velocity) -> tuple[np.ndarray, np.ndarray]:
    """Kinematics tangent (R skew(omega), R v)."""
    return xi.R @ skew(u.omega), xi.R @ u.v


def lift(xi: State, u: Velocity) -> AlgebraElement:
    """Equivariant lift of (state, velocity) into the Lie algebra.

    Projects back onto the kinematics through the action phi and commutes
    with the actions via the Adjoint.
    """
    n2 = float(xi.x @ xi.x)
    if n2 <= 0.0:
        raise DomainError("lift requires a nonzero translation")
    rv = xi.R @ u.v
    a_s = u.omega - np.cross(xi.R.T @ xi.x, u.v) / n2
    a_q = -np.cross(xi.x, rv) / n2
    b = -float(xi.x @ rv) / n2
    return AlgebraElement(a_s, a_q, b)


def lifted_vector_field(X: GroupElement, u: Velocity, origin: State = ORIGIN) -> AlgebraElement:
    """Algebra element driving the group-level system at X.

    The group state evolves as X <- X * exp(dt * result); projecting with
    phi(., origin) recovers the state kinematics.
    """
    return lift(phi(X, origin), u)


def solve_action(xi_from: State, xi_to: State) -> GroupElement:
    """Group element X with phi(X, xi_from) == xi_to (transitivity).

    Uses the minimal rotation aligning the translation directions; the
    stabilizer of the bearing direction makes the solution non-unique.
    """
    n_from = np.linalg.norm(xi_from.x)
    n_to = np.linalg.norm(xi_to.x)
    if n_from <= 0.0 or n_to <= 0.0:
        raise DomainError("solve_action requires nonzero translations")
    r = float(n_from / n_to)
    Q = rotation_between(xi_to.x / n_to, xi_from.x / n_from)
    S = xi_from.R.T @ Q @ xi_to.R
    return GroupElement(S, Q, r)
