"""Uniform-observability diagnostics for the linearized error system.

The Gramian of the true-trajectory pair (A, C) decides whether the full
pose, including range, is recoverable on a time window.  The closed-form
determinant bound and the excitation integral give cheap sufficient
checks: the range direction is excited exactly when the velocity has a
component transverse to the translation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eqf import coord_state_matrix, output_matrix
from .liegroup import E3, projector, skew
from .symmetry import ORIGIN, State, solve_action

# Verdict thresholds: excitation level for "observable", bearing-geometry
# eigenvalue floor below which the window is "degenerate".
PE_OBSERVABLE = 1e-3
CBAR_DEGENERATE = 1e-4

# L selects the five chart coordinates with direct output sensitivity.
L_SELECT = np.hstack([np.eye(5), np.zeros((5, 1))])


@dataclass(frozen=True)
class ObservabilityReport:
    """Diagnostics for one analysis window."""

    window_start: float
    window_length: float
    gramian_min_eig: float
    pe_integral: float
    det_bound_min: float
    cbar_min_eig: float
    verdict: str


def _rk4_phi_step(a_fn, s: float, h: float, phi: np.ndarray) -> np.ndarray:
    k1 = a_fn(s) @ phi
    k2 = a_fn(s + 0.5 * h) @ (phi + 0.5 * h * k1)
    k3 = a_fn(s + 0.5 * h) @ (phi + 0.5 * h * k2)
    k4 = a_fn(s + h) @ (phi + h * k3)
    return phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def transition_matrix(a_fn, t0: float, t1: float, dt: float) -> np.ndarray:
    """Transition matrix of xdot = A(t) x from t0 to t1, by RK4."""
    if t1 < t0:
        raise ValueError("transition_matrix requires t1 >= t0")
    span = t1 - t0
    if span == 0.0:
        return np.eye(6)
    n_steps = max(1, int(math.ceil(span / dt - 1e-9)))
    h = span / n_steps
    phi = np.eye(6)
    for i in range(n_steps):
        phi = _rk4_phi_step(a_fn, t0 + i * h, h, phi)
    return phi


def gramian(a_fn, c_fn, t: float, delta: float, dt: float) -> np.ndarray:
    """Observability Gramian over [t, t+delta], trapezoidal in s.

    Integrates (1/delta) * Phi(s,t)^T C(s)^T C(s) Phi(s,t) with the
    transition matrix propagated alongside the quadrature.
    """
    n_steps = max(1, int(round(delta / dt)))
    h = delta / n_steps
    phi = np.eye(6)
    c0 = c_fn(t)
    acc = 0.5 * (c0.T @ c0)
    for i in range(n_steps):
        phi = _rk4_phi_step(a_fn, t + i * h, h, phi)
        cs = c_fn(t + (i + 1) * h) @ phi
        w = 0.5 if i == n_steps - 1 else 1.0
        acc = acc + w * (cs.T @ cs)
    out = acc * (h / delta)
    return 0.5 * (out + out.T)


def morin_matrix(v_ring) -> np.ndarray:
    """Stacked derivative-test matrix (L; L A) for a transformed velocity."""
    v = np.asarray(v_ring, dtype=float)
    out = np.zeros((10, 6))
    out[0:5, 0:5] = np.eye(5)
    out[5:8, 0:3] = skew(np.cross(E3, v))
    out[8:10, 3:5] = v[2] * np.eye(2)
    out[8, 5] = v[1]
    out[9, 5] = -v[0]
    return out


def det_bound(v_ring) -> tuple[float, float]:
    """Closed-form det(M^T M) and its lower bound |e3 x v|^2.

    The determinant vanishes exactly when the transformed velocity aligns
    with e3, i.e. when the camera moves along its own translation ray.
    """
    v = np.asarray(v_ring, dtype=float)
    c2 = float(v[0] ** 2 + v[1] ** 2)  # |e3 x v|^2
    det = (1.0 + c2) ** 2 * (1.0 + v[2] ** 2) * c2
    return det, c2


def pe_integrand(xi: State, v) -> float:
    """Normalized transverse-velocity power (Rv)^T Pi_x (Rv) / |x|^2."""
    rv = xi.R @ np.asarray(v, dtype=float)
    return float(rv @ projector(xi.x) @ rv) / float(xi.x @ xi.x)


def pe_integral(samples, t: float, delta: float) -> float:
    """Windowed average of the excitation integrand over [t, t+delta).

    Trapezoidal over the sample grid.  The window is right-open because
    the recorded inputs are step functions: a sample sitting exactly on a
    program discontinuity carries the input of the interval it opens, not
    the one it closes.
    """
    ts = np.array([s.t for s in samples])
    mask = (ts >= t - 1e-12) & (ts < t + delta - 1e-12)
    idx = np.nonzero(mask)[0]
    if len(idx) < 2:
        raise ValueError("trajectory does not cover the requested window")
    vals = np.array([pe_integrand(samples[i].xi, samples[i].u.v) for i in idx])
    return float(np.trapezoid(vals, ts[idx]) / delta)


def cbar_matrix(S, Q, bearings) -> np.ndarray:
    """Reduced output matrix (m x 5): the full matrix without its zero column."""
    m = len(bearings)
    out = np.zeros((m, 5))
    for i, bp in enumerate(bearings):
        pr = Q @ bp.p_ref
        pc = S @ bp.p_cur
        out[i, 0:3] = (skew(pr) @ skew(pc))[2]
        cross = np.cross(pr, pc)
        out[i, 3] = -cross[1]
        out[i, 4] = cross[0]
    return out


def cbar_conditioning(xi: State, bearings) -> tuple[float, float, float]:
    """Spectrum bounds and condition number of Cbar^T Cbar at a state.

    Uses the canonical lift of xi (minimal rotation aligning x with e3) to
    transform the bearings; the eigenvalue floor is a numeric surrogate for
    the landmark non-degeneracy assumption.
    """
    X = solve_action(ORIGIN, xi)
    cbar = cbar_matrix(X.S, X.Q, bearings)
    eigs = np.linalg.eigvalsh(cbar.T @ cbar)
    lo, hi = float(eigs[0]), float(eigs[-1])
    cond = hi / lo if lo > 0.0 else np.inf
    return lo, hi, cond


def _series_interp(ts, mats):
    """Piecewise-linear matrix interpolant over a sample grid."""
    ts = np.asarray(ts, dtype=float)
    mats = np.asarray(mats, dtype=float)

    def fn(t: float) -> np.ndarray:
        if t <= ts[0]:
            return mats[0]
        if t >= ts[-1]:
            return mats[-1]
        j = int(np.searchsorted(ts, t, side="right")) - 1
        w = (t - ts[j]) / (ts[j + 1] - ts[j])
        return (1.0 - w) * mats[j] + w * mats[j + 1]

    return fn


def analyze_windows(
    samples,
    delta: float = 1.0,
    mu: float = PE_OBSERVABLE,
    degenerate_eig: float = CBAR_DEGENERATE,
    scan_stride: int = 10,
) -> list[ObservabilityReport]:
    """Per-window diagnostics along a recorded true trajectory.

    Windows tile the trajectory duration in steps of delta.  The verdict
    is "degenerate" when the bearing geometry loses rank, "observable"
    when the excitation integral clears mu, else "scale_unobservable".
    The determinant-bound and geometry scans subsample every scan_stride
    samples; both quantities vary slowly on the integration grid.
    """
    ts = np.array([s.t for s in samples])
    dt = float(ts[1] - ts[0])
    a_series = [coord_state_matrix(s.X.r * (s.X.S @ s.u.v)) for s in samples]
    c_series = [output_matrix(s.X, s.bearings) for s in samples]
    a_fn = _series_interp(ts, a_series)
    c_fn = _series_interp(ts, c_series)

    duration = float(ts[-1] - ts[0])
    n_windows = max(1, int(round(duration / delta)))
    reports = []
    for k in range(n_windows):
        t0 = float(ts[0]) + k * delta
        w = gramian(a_fn, c_fn, t0, delta, dt)
        gram_min = float(np.min(np.linalg.eigvalsh(w)))
        pe = pe_integral(samples, t0, delta)
        in_window = np.nonzero((ts >= t0 - 1e-12) & (ts <= t0 + delta + 1e-12))[0]
        scan = list(in_window[::scan_stride])
        if in_window[-1] not in scan:
            scan.append(in_window[-1])
        det_min = np.inf
        cbar_min = np.inf
        for i in scan:
            s = samples[i]
            det_val, _ = det_bound(s.X.r * (s.X.S @ s.u.v))
            det_min = min(det_min, det_val)
            lo, _, _ = cbar_conditioning(s.xi, s.bearings)
            cbar_min = min(cbar_min, lo)
        if cbar_min < degenerate_eig:
            verdict = "degenerate"
        elif pe >= mu:
            verdict = "observable"
        else:
            verdict = "scale_unobservable"
        reports.append(
            ObservabilityReport(
                window_start=t0,
                window_length=delta,
                gramian_min_eig=max(gram_min, 0.0),
                pe_integral=pe,
                det_bound_min=float(det_min),
                cbar_min_eig=float(cbar_min),
                verdict=verdict,
            )
        )
    return reports
