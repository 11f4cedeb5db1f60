"""Landmark geometry and the epipolar pseudo-measurement.

Bearings of a static landmark seen from the reference pose and the
current pose satisfy the epipolar constraint p_ref^T (x/|x|)^x R p_cur = 0.
The constraint value is used as a pseudo-measurement with known output
zero; it is invariant under the symmetry actions and under scaling of the
translation, which is why the range component needs motion to become
observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .liegroup import DomainError, skew
from .symmetry import BearingPair, State

# Minimum distance (m) of a landmark from either camera centre.
MIN_LANDMARK_RANGE = 1e-9

# Non-collinearity threshold for the bearing triplet test.
TRIPLET_THRESHOLD = 0.05


@dataclass(frozen=True)
class LandmarkSet:
    """Static landmarks in the reference frame, one row per point (meters)."""

    positions: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise DomainError("landmarks must be an (m, 3) array")
        if pts.shape[0] < 5:
            raise DomainError(f"need at least 5 landmarks, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("landmark coordinates must be finite")
        object.__setattr__(self, "positions", pts)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @staticmethod
    def from_text(path) -> "LandmarkSet":
        """Load from a plain-text table with three real columns per row."""
        return LandmarkSet(np.loadtxt(Path(path), ndmin=2))

    def reference_bearings(self) -> np.ndarray:
        norms = np.linalg.norm(self.positions, axis=1)
        if np.any(norms <= MIN_LANDMARK_RANGE):
            raise DomainError("landmark at the reference camera centre")
        return self.positions / norms[:, None]

    def triplet_score(self) -> float:
        """Largest |(p_i x p_j) . p_k| over bearing triplets.

        A score below TRIPLET_THRESHOLD flags a (nearly) collinear set.
        """
        p = self.reference_bearings()
        m = len(self)
        best = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                cij = np.cross(p[i], p[j])
                for k in range(j + 1, m):
                    best = max(best, abs(float(cij @ p[k])))
        return best


def bearings_from_landmark(xi: State, point) -> BearingPair:
    """Unit bearings of a landmark from the reference and current poses."""
    point = np.asarray(point, dtype=float)
    n_ref = np.linalg.norm(point)
    rel = xi.R.T @ (point - xi.x)
    n_cur = np.linalg.norm(rel)
    if n_ref <= MIN_LANDMARK_RANGE or n_cur <= MIN_LANDMARK_RANGE:
        raise DomainError("landmark coincides with a camera centre")
    return BearingPair(point / n_ref, rel / n_cur)


def bearings_from_set(xi: State, landmarks: LandmarkSet) -> list[BearingPair]:
    return [bearings_from_landmark(xi, p) for p in landmarks.positions]


def essential_matrix(xi: State) -> np.ndarray:
    """Essential matrix (x/|x|)^x R of the pose; rank 2 by construction."""
    n = np.linalg.norm(xi.x)
    if n <= 0.0:
        raise DomainError("essential matrix undefined for zero translation")
    return skew(xi.x / n) @ xi.R


def measure(xi: State, bearings, noise_std: float = 0.0, rng=None) -> np.ndarray:
    """Epipolar constraint values, one per bearing pair.

    Zero (up to rounding) when the bearings were generated from xi.  The
    optional additive noise hook is for robustness experiments only.
    """
    ess = essential_matrix(xi)
    out = np.array([float(bp.p_ref @ ess @ bp.p_cur) for bp in bearings])
    if noise_std > 0.0:
        gen = rng if rng is not None else np.random.default_rng()
        out = out + gen.normal(0.0, noise_std, size=out.shape)
    return out
