"""Planar (fixed-axis) version of the observer, plus angle filtering.

Plant and observer::

    dR/dt = omega S R,                 domega/dt = u / J
    dRhat/dt = omega_hat S R + gamma (R - Rhat)
    domega_hat/dt = kappa trace((R - Rhat)^T S R)

with S = [[0, -1], [1, 0]]. The observer has no torque feed-through, so a
nonzero ``u`` leaves a bias in ``omega_hat``.

Wrapped angles in (-pi, pi] map to SO(2) through ``rot2``; the reverse map is
atan2 with the half-turn sent to +pi. The nearest rotation to a 2x2 matrix H
has the closed form [[c, s], [-s, c]] with (c, s) proportional to
(h11 + h22, h12 - h21); it is not unique when H is symmetric and traceless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import DegenerateProjection, InvalidField, OutOfRange
from .linalg import TOL_ORTH, as_rotation, rot2

S = np.array([[0.0, -1.0], [1.0, 0.0]])
S.setflags(write=False)

TOL_DEGENERATE = 1e-12


class PlantStateSO2(NamedTuple):
    R: np.ndarray
    omega: float  # rad/s


class ObserverStateSO2(NamedTuple):
    Rhat: np.ndarray  # unconstrained 2x2
    omega_hat: float


def plant_state(R, omega: float, tol: float = TOL_ORTH) -> PlantStateSO2:
    try:
        R = as_rotation(R, 2, tol)
    except ValueError as exc:
        raise InvalidField("R", str(exc)) from None
    omega = float(omega)
    if not math.isfinite(omega):
        raise InvalidField("omega", "must be finite")
    return PlantStateSO2(R, omega)


def observer_state(Rhat, omega_hat: float) -> ObserverStateSO2:
    Rhat = np.array(Rhat, dtype=float)
    if Rhat.shape != (2, 2) or not np.all(np.isfinite(Rhat)):
        raise InvalidField("Rhat", "must be a finite 2x2 matrix")
    omega_hat = float(omega_hat)
    if not math.isfinite(omega_hat):
        raise InvalidField("omega_hat", "must be finite")
    return ObserverStateSO2(Rhat, omega_hat)


@dataclass(frozen=True)
class GainsSO2:
    gamma: float = 40.0
    kappa: float = 200.0

    def __post_init__(self):
        for name in ("gamma", "kappa"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise InvalidField(name, "must be a positive finite number")
            object.__setattr__(self, name, v)


def check_inertia(J: float) -> float:
    J = float(J)
    if not (math.isfinite(J) and J > 0.0):
        raise InvalidField("J", "must be a positive finite number")
    return J


def so2_plant_rhs(s: PlantStateSO2, u: float, J: float) -> tuple[np.ndarray, float]:
    return s.omega * (S @ s.R), u / J


def so2_observer_rhs(o: ObserverStateSO2, R_meas, gains: GainsSO2) -> tuple[np.ndarray, float]:
    SR = S @ R_meas
    Rtilde = R_meas - o.Rhat
    return o.omega_hat * SR + gains.gamma * Rtilde, gains.kappa * float(np.vdot(Rtilde, SR))


def lyapunov_V(Rtilde, omega_tilde: float, kappa: float) -> float:
    return 0.5 * float(np.vdot(Rtilde, Rtilde)) + 0.5 * omega_tilde * omega_tilde / kappa


def lyapunov_Vdot(Rtilde, gains: GainsSO2) -> float:
    return -gains.gamma * float(np.vdot(Rtilde, Rtilde))


# -- wrapped angles --------------------------------------------------------


def wrap_angle(theta: float) -> float:
    """Reduce any real angle to (-pi, pi]."""
    w = math.remainder(theta, 2.0 * math.pi)
    return math.pi if w <= -math.pi else w


def wrap_angle_to_so2(theta: float) -> np.ndarray:
    if not (-math.pi < theta <= math.pi):
        raise OutOfRange(f"angle {theta!r} is outside (-pi, pi]; wrap it first")
    return rot2(theta)


def so2_to_wrapped_angle(R, tol: float = TOL_ORTH) -> float:
    R = as_rotation(R, 2, tol)
    return angle_of(R)


def angle_of(R) -> float:
    """atan2(R21, R11) in (-pi, pi], without validating R."""
    theta = math.atan2(R[1, 0], R[0, 0])
    # atan2 returns -pi for a negative-zero sine; the half turn reads as +pi
    return math.pi if theta == -math.pi else theta


# -- projection onto SO(2) -------------------------------------------------


class Unique(NamedTuple):
    R: np.ndarray


class Degenerate(NamedTuple):
    """Every element of SO(2) is a nearest rotation."""


ProjectionResult = Union[Unique, Degenerate]


def project_so2(H, tol: float = TOL_DEGENERATE) -> ProjectionResult:
    """Nearest rotation to ``H`` in Frobenius distance.

    The degenerate set (H symmetric with zero trace) is detected with the
    relative tolerance ``tol * max(1, |H|_F)``.
    """
    H = np.asarray(H, dtype=float)
    a = H[0, 0] + H[1, 1]
    b = H[0, 1] - H[1, 0]
    scale = tol * max(1.0, float(np.linalg.norm(H)))
    if abs(a) <= scale and abs(b) <= scale:
        return Degenerate()
    rho = math.hypot(a, b)
    c, s = a / rho, b / rho
    return Unique(np.array([[c, s], [-s, c]]))


def filtered_angle(Rhat, tol: float = TOL_DEGENERATE) -> float:
    """Wrapped angle of the rotation nearest to ``Rhat``."""
    result = project_so2(Rhat, tol)
    if isinstance(result, Degenerate):
        raise DegenerateProjection("observer matrix is symmetric and traceless")
    return angle_of(result.R)
