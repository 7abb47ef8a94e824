"""Distances between unitary channels and pure states.

All channel distances are projective (global phase is irrelevant) and depend
on ``U`` and ``V`` only through the eigenvalues of ``V^dagger U``:

* projective Hilbert-Schmidt: ``sqrt(2d - 2|tr V^dagger U|)``
* projective operator norm: ``2 sin(Delta/4)`` where ``Delta`` is the length
  of the shortest arc of the unit circle containing every eigenphase
* diamond: ``2 sqrt(1 - nu^2)`` where ``nu`` is the distance from the origin
  to the convex hull of the eigenvalues
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelDistanceReport",
    "channel_distances",
    "covering_arc",
    "diamond_distance_unitary",
    "diamond_from_arc",
    "dist_to_diagonal_torus",
    "dist_to_state_torus",
    "hs_proj_distance",
    "hull_origin_distance",
    "opnorm_from_arc",
    "opnorm_proj_distance",
    "trace_distance_states",
]

TWO_PI = 2.0 * np.pi


def _pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u, v


def _relative_phases(u, v) -> np.ndarray:
    u, v = _pair(u, v)
    return np.angle(np.linalg.eigvals(v.conj().T @ u))


def covering_arc(phases) -> np.ndarray:
    """Length of the shortest arc containing all phases (along the last axis).

    Sort, take the largest circular gap ``g``; the answer is ``2 pi - g``.
    Works on stacked inputs of shape ``(..., d)``.
    """
    p = np.sort(np.mod(np.asarray(phases, dtype=float), TWO_PI), axis=-1)
    if p.shape[-1] == 1:
        return np.zeros(p.shape[:-1])
    gaps = np.diff(p, axis=-1)
    wrap = TWO_PI - (p[..., -1] - p[..., 0])
    largest = np.maximum(gaps.max(axis=-1), wrap)
    return np.clip(TWO_PI - largest, 0.0, TWO_PI)


def opnorm_from_arc(arc):
    # minimax centre is the arc midpoint; worst point is arc/2 away in angle
    return 2.0 * np.sin(np.asarray(arc) / 4.0)


def diamond_from_arc(arc):
    """Diamond distance for eigenvalues on the unit circle with covering arc ``arc``.

    Equals the chord ``2 sin(arc/2)`` while the arc is below ``pi`` and 2 once
    the hull contains the origin.
    """
    arc = np.asarray(arc, dtype=float)
    return np.where(arc < np.pi, 2.0 * np.sin(arc / 2.0), 2.0)


def hs_proj_distance(u, v) -> float:
    u, v = _pair(u, v)
    d = u.shape[0]
    overlap = abs(np.vdot(v, u))  # tr(V^dag U)
    return math.sqrt(max(0.0, 2.0 * d - 2.0 * overlap))


def opnorm_proj_distance(u, v) -> float:
    """``inf_phi ||U - e^{i phi} V||_op``, exact via the covering arc."""
    return float(opnorm_from_arc(covering_arc(_relative_phases(u, v))))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_origin_distance(a, b) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    denom = dx * dx + dy * dy
    s = 0.0 if denom == 0 else min(1.0, max(0.0, -(ax * dx + ay * dy) / denom))
    return math.hypot(ax + s * dx, ay + s * dy)


def hull_origin_distance(z) -> float:
    """Euclidean distance from 0 to the convex hull of complex points ``z``.

    Monotone-chain hull; collinear or two-point hulls fall back to segment
    distance. Returns 0 when the origin lies inside (or on) the hull.
    """
    pts = [(float(c.real), float(c.imag)) for c in np.asarray(z, dtype=complex).ravel()]
    hull = _convex_hull(pts)
    if len(hull) == 1:
        return math.hypot(*hull[0])
    if len(hull) == 2:
        return _segment_origin_distance(hull[0], hull[1])
    origin = (0.0, 0.0)
    inside = all(_cross(hull[i], hull[(i + 1) % len(hull)], origin) >= 0 for i in range(len(hull)))
    if inside:
        return 0.0
    return min(_segment_origin_distance(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull)))


def diamond_distance_unitary(u, v) -> float:
    u, v = _pair(u, v)
    z = np.linalg.eigvals(v.conj().T @ u)
    z = z / np.abs(z)
    nu = min(1.0, hull_origin_distance(z))
    return 2.0 * math.sqrt(max(0.0, 1.0 - nu * nu))


def trace_distance_states(psi, phi) -> float:
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    return math.sqrt(max(0.0, 1.0 - abs(np.vdot(psi, phi)) ** 2))


def dist_to_diagonal_torus(x) -> tuple[float, np.ndarray]:
    """HS distance from ``X`` to the diagonal unitaries, and the minimiser.

    ``dist^2 = 2d - 2 sum_i |X_ii|``, attained at ``D_ii = X_ii/|X_ii|``
    (``D_ii = 1`` when ``X_ii = 0``).
    """
    x = np.asarray(x, dtype=complex)
    diag = np.diagonal(x)
    mags = np.abs(diag)
    d = x.shape[0]
    dist = math.sqrt(max(0.0, 2.0 * d - 2.0 * float(mags.sum())))
    phases = np.where(mags > 0, diag / np.where(mags > 0, mags, 1.0), 1.0)
    return dist, np.diag(phases)


def dist_to_state_torus(psi, phi) -> float:
    """Trace distance from ``psi`` to the set of states with the same basis
    moduli as ``phi``: ``sqrt(1 - (sum_k |psi_k||phi_k|)^2)``."""
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if psi.shape != phi.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {phi.shape}")
    s = float(np.sum(np.abs(psi) * np.abs(phi)))
    return math.sqrt(max(0.0, 1.0 - s * s))


@dataclass(frozen=True)
class ChannelDistanceReport:
    hs_proj: float
    opnorm_proj: float
    diamond: float

    def sandwich_holds(self, d: int, slack: float = 1e-9) -> bool:
        return (
            self.opnorm_proj <= self.diamond + slack
            and self.diamond <= 2 * self.opnorm_proj + slack
            and self.opnorm_proj <= self.hs_proj + slack
            and self.hs_proj <= math.sqrt(d) * self.diamond + slack
        )


def channel_distances(u, v) -> ChannelDistanceReport:
    return ChannelDistanceReport(
        hs_proj=hs_proj_distance(u, v),
        opnorm_proj=opnorm_proj_distance(u, v),
        diamond=diamond_distance_unitary(u, v),
    )
