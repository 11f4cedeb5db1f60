"""Equivariant observer on G: chart, linearization, Riccati gain, step.

The observer state is a group element X = (S, Q, r) whose projection
through the action phi at the fixed origin (I, e3) is the pose estimate.
Local coordinates split the error into attitude (3), translation bearing
(2) and log-range (1); the correction is a Riccati gain acting on the
epipolar residual in those coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import symmetry
from .liegroup import (
    E3,
    AlgebraElement,
    ChartBoundaryError,
    GroupElement,
    exp_group,
    exp_so3,
    exp_sot3,
    log_so3,
    project_rotation,
    projector,
    skew,
)
from .symmetry import ORIGIN, BearingPair, State, Velocity

# Angular margin kept from the chart boundary at pi.
CHART_MARGIN = 1e-3

# Below this bearing angle the series limit of the chart at e3 is used.
ALIGNED_SMALL = 1e-6

# Riccati gain is declared lost when its smallest eigenvalue drops below this.
SIGMA_MIN_EIG = 1e-12

# Floor for the adaptive process-noise scale entry.
ADAPTIVE_FLOOR = 1e-12


class NumericalFailure(RuntimeError):
    """Loss of positive definiteness or similar numerical breakdown."""


def zeta(q) -> np.ndarray:
    """Polar chart for R^3 \\ {0} about e3: bearing pair plus -log range."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n <= 0.0:
        raise ChartBoundaryError("zeta undefined at the origin")
    s = math.hypot(q[0], q[1])  # |e3 x q| = n sin(angle)
    angle = math.acos(min(1.0, max(-1.0, q[2] / n)))
    if angle >= math.pi - CHART_MARGIN:
        raise ChartBoundaryError("bearing too close to -e3 for the chart")
    if angle < ALIGNED_SMALL:
        # angle/s = (angle/sin angle)/n, expanded to avoid 0/0 at e3
        factor = (1.0 + angle * angle / 6.0) / n
    else:
        factor = angle / s
    return np.array([factor * q[1], -factor * q[0], -math.log(n)])


def zeta_inv(z) -> np.ndarray:
    """Inverse polar chart: exp_sot3((z1, z2, 0), z3)^-1 applied to e3."""
    z = np.asarray(z, dtype=float)
    qr = exp_sot3(np.array([z[0], z[1], 0.0]), z[2])
    return (qr.Q.T @ E3) / qr.r


def chart(e: State) -> np.ndarray:
    """Local coordinates about the origin: (log of attitude, zeta of x)."""
    return np.concatenate([log_so3(e.R), zeta(e.x)])


def chart_inv(eps) -> State:
    eps = np.asarray(eps, dtype=float)
    return State(exp_so3(eps[0:3]), zeta_inv(eps[3:6]))


def equivariant_error(X_hat: GroupElement, xi: State) -> State:
    """Global error phi(X_hat^-1, xi); equals the origin at zero error."""
    return symmetry.phi(X_hat.inverse(), xi)


def estimate(fs: "FilterState") -> State:
    """Pose estimate phi(X_hat, origin) = (Q^T S, Q^T e3 / r)."""
    X = fs.X
    return State(X.Q.T @ X.S, (X.Q.T @ E3) / X.r)


def coord_state_matrix(v_ring) -> np.ndarray:
    """Error-state matrix in chart coordinates for a transformed velocity.

    v_ring is the linear velocity seen through the group state (r S v).
    Exact Jacobian of the coordinate error dynamics at zero error; the
    angular velocity drops out in these coordinates.  Radial motion
    (v_ring along e3) contracts the bearing and range coordinates and
    leaves the range coordinate decoupled from the rest, which is the
    scale-unobservability mechanism.
    """
    v = np.asarray(v_ring, dtype=float)
    a = np.zeros((6, 6))
    a[0:3, 0:3] = -skew(np.cross(E3, v))
    a[3, 0] = -v[2]
    a[3, 2] = v[0]
    a[4, 1] = -v[2]
    a[4, 2] = v[1]
    a[5, 0] = -v[1]
    a[5, 1] = v[0]
    a[3:5, 3:5] = -v[2] * np.eye(2)
    a[3, 5] = v[1]
    a[4, 5] = -v[0]
    a[5, 3] = -v[1]
    a[5, 4] = v[0]
    a[5, 5] = -v[2]
    return a


def state_matrix(X_hat: GroupElement, u: Velocity) -> np.ndarray:
    """Linearized error dynamics about the origin for the observer state."""
    return coord_state_matrix(X_hat.r * (X_hat.S @ u.v))


def transformed_bearings(X_hat: GroupElement, bearings) -> list[BearingPair]:
    """Bearings pulled back by the inverse observer state: (Q p_ref, S p_cur)."""
    return [BearingPair(X_hat.Q @ bp.p_ref, X_hat.S @ bp.p_cur) for bp in bearings]


def output_matrix(X_hat: GroupElement, bearings) -> np.ndarray:
    """Linearized output matrix; the range column is structurally zero."""
    m = len(bearings)
    c = np.zeros((m, 6))
    for i, bp in enumerate(transformed_bearings(X_hat, bearings)):
        c[i, 0:3] = (skew(bp.p_ref) @ skew(bp.p_cur))[2]
        cross = np.cross(bp.p_ref, bp.p_cur)
        c[i, 3] = -cross[1]
        c[i, 4] = cross[0]
    return c


def residual(X_hat: GroupElement, bearings) -> np.ndarray:
    """Output residual: pseudo-measurement zero minus the predicted output."""
    return np.array([
        -float(bp.p_ref @ np.cross(E3, bp.p_cur))
        for bp in transformed_bearings(X_hat, bearings)
    ])


def inject(delta) -> AlgebraElement:
    """Embed a 6-vector of chart-coordinate rates into the 7-dim algebra.

    The sot(3) rotation part uses the (z1, z2, 0) pattern of the inverse
    polar chart.  The so(3) part carries the same two components in
    addition to the attitude rates: the attitude coordinate of the error
    chart responds to the difference of the two rotation factors, so the
    compensation makes the embedded correction act diagonally on the
    chart coordinates (the chart rate of inject(d) is exactly -d).
    """
    delta = np.asarray(delta, dtype=float)
    bearing = np.array([delta[3], delta[4], 0.0])
    return AlgebraElement(delta[0:3] + bearing, bearing, float(delta[5]))


def correction(sigma, c_mat, n_mat, y_tilde) -> AlgebraElement:
    """Correction term (Sigma C^T N^-1 y)^wedge."""
    n_mat = np.asarray(n_mat, dtype=float)
    if not np.all(np.isfinite(n_mat)) or np.min(np.linalg.eigvalsh(0.5 * (n_mat + n_mat.T))) <= 0.0:
        raise ValueError("output gain N must be symmetric positive definite")
    delta = sigma @ c_mat.T @ np.linalg.solve(n_mat, y_tilde)
    return inject(delta)


def _riccati_rate(sigma, a_mat, cnc, m_mat) -> np.ndarray:
    return a_mat @ sigma + sigma @ a_mat.T + m_mat - sigma @ cnc @ sigma


def riccati_step(sigma, a_mat, c_mat, m_mat, n_mat, dt: float) -> np.ndarray:
    """One RK4 step of the Riccati flow, symmetrized, with an SPD check."""
    cnc = c_mat.T @ np.linalg.solve(n_mat, c_mat)
    k1 = _riccati_rate(sigma, a_mat, cnc, m_mat)
    k2 = _riccati_rate(sigma + 0.5 * dt * k1, a_mat, cnc, m_mat)
    k3 = _riccati_rate(sigma + 0.5 * dt * k2, a_mat, cnc, m_mat)
    k4 = _riccati_rate(sigma + dt * k3, a_mat, cnc, m_mat)
    out = sigma + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = 0.5 * (out + out.T)
    min_eig = float(np.min(np.linalg.eigvalsh(out)))
    if min_eig < SIGMA_MIN_EIG:
        raise NumericalFailure(
            f"Riccati gain lost positive definiteness (min eig {min_eig:.3e})"
        )
    return out


@dataclass(frozen=True)
class FilterState:
    """Observer group state and its 6x6 Riccati gain."""

    X: GroupElement
    sigma: np.ndarray


@dataclass(frozen=True)
class GainConfig:
    """Riccati tuning: initial gain, output gain, process-noise policy.

    m_mode "adaptive" scales the range entry of M by the component of the
    estimated velocity transverse to the estimated translation, which
    keeps the gain well conditioned when the motion is not exciting.
    """

    sigma0: np.ndarray
    n_mat: np.ndarray
    m_mode: str = "adaptive"
    m_fixed: np.ndarray | None = None
    m_scale: float = 0.01

    def __post_init__(self):
        for name, mat in (("sigma0", self.sigma0), ("n", self.n_mat)):
            mat = np.asarray(mat, dtype=float)
            if np.linalg.norm(mat - mat.T) > 1e-10 or np.min(np.linalg.eigvalsh(mat)) <= 0.0:
                raise ValueError(f"gain matrix {name} must be symmetric positive definite")
        if self.m_mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown process-noise mode {self.m_mode!r}")
        if self.m_mode == "fixed":
            if self.m_fixed is None:
                raise ValueError("fixed process-noise mode needs m_fixed")
            m = np.asarray(self.m_fixed, dtype=float)
            if np.linalg.norm(m - m.T) > 1e-10 or np.min(np.linalg.eigvalsh(m)) <= 0.0:
                raise ValueError("gain matrix m_fixed must be symmetric positive definite")

    @staticmethod
    def default(num_landmarks: int = 5) -> "GainConfig":
        """Benchmark tuning: Sigma0 = diag(I5, 5), N = 0.01 I, adaptive M."""
        return GainConfig(
            sigma0=np.diag([1.0, 1.0, 1.0, 1.0, 1.0, 5.0]),
            n_mat=0.01 * np.eye(num_landmarks),
        )

    def m_matrix(self, est: State, v) -> np.ndarray:
        if self.m_mode == "fixed":
            return np.asarray(self.m_fixed, dtype=float)
        rv = est.R @ np.asarray(v, dtype=float)
        alpha = float(rv @ projector(est.x) @ rv)
        diag = np.full(6, self.m_scale)
        diag[5] = self.m_scale * max(alpha, ADAPTIVE_FLOOR)
        return np.diag(diag)


def observer_step(
    fs: FilterState,
    u: Velocity,
    bearings,
    cfg: GainConfig,
    dt: float,
    y_noise=None,
) -> FilterState:
    """Advance the observer by one step of length dt.

    The group state uses a split exponential: the correction is applied on
    the left and the lifted dynamics on the right, matching their
    placement in the continuous-time observer.  The gain advances by one
    RK4 step of the Riccati flow.  y_noise, if given, is added to the
    residual (robustness experiments).
    """
    a_mat = state_matrix(fs.X, u)
    c_mat = output_matrix(fs.X, bearings)
    y_tilde = residual(fs.X, bearings)
    if y_noise is not None:
        y_tilde = y_tilde + y_noise
    delta = correction(fs.sigma, c_mat, cfg.n_mat, y_tilde)
    lam = symmetry.lift(estimate(fs), u)
    x_next = exp_group(delta, dt) * fs.X * exp_group(lam, dt)
    x_next = GroupElement(
        project_rotation(x_next.S), project_rotation(x_next.Q), x_next.r
    )
    m_mat = cfg.m_matrix(estimate(fs), u.v)
    sigma_next = riccati_step(fs.sigma, a_mat, c_mat, m_mat, cfg.n_mat, dt)
    return FilterState(x_next, sigma_next)


def initial_filter_state(X0: GroupElement, cfg: GainConfig) -> FilterState:
    return FilterState(X0, np.asarray(cfg.sigma0, dtype=float).copy())
