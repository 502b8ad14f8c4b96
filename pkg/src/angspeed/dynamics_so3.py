"""Rigid-body plant on SO(3) and the unconstrained angular-speed observer.

Plant (inertial frame)::

    dR/dt = [R J0^-1 R^T q]_x R,    dq/dt = u,    omega = R J0^-1 R^T q

Observer, with Rtilde = R - Rhat::

    dRhat/dt = [R J0^-1 R^T qhat]_x R + Gamma(Rtilde)
    dqhat/dt = u + K R J0^-1 R^T vee(Rtilde R^T - R Rtilde^T)
    omega_hat = R J0^-1 R^T qhat

``Rhat`` is an arbitrary 3x3 matrix; it is never projected back onto SO(3).
Along error trajectories the function
V = 1/2 |Rtilde|_F^2 + 1/2 qtilde^T K^-1 qtilde satisfies
dV/dt = -<Rtilde, Gamma(Rtilde)>_F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidField
from .linalg import TOL_ORTH, as_rotation, frobenius_inner, skew


def _finite_array(name: str, value, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape != shape:
        raise InvalidField(name, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidField(name, "entries must be finite")
    arr.setflags(write=False)
    return arr


def _spd(name: str, value, n: int) -> np.ndarray:
    M = _finite_array(name, value, (n, n))
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(M).max()))):
        raise InvalidField(name, "must be symmetric")
    if np.linalg.eigvalsh(M).min() <= 0.0:
        raise InvalidField(name, "must be positive definite")
    return M


class PlantStateSO3(NamedTuple):
    R: np.ndarray  # attitude, inertial frame
    q: np.ndarray  # angular momentum, inertial frame [N m s]


class ObserverStateSO3(NamedTuple):
    Rhat: np.ndarray  # unconstrained 3x3
    qhat: np.ndarray


def plant_state(R, q, tol: float = TOL_ORTH) -> PlantStateSO3:
    """Build a validated plant state; R must be a rotation within ``tol``."""
    try:
        R = as_rotation(R, 3, tol)
    except ValueError as exc:
        raise InvalidField("R", str(exc)) from None
    return PlantStateSO3(R, _finite_array("q", q, (3,)))


def observer_state(Rhat, qhat) -> ObserverStateSO3:
    return ObserverStateSO3(_finite_array("Rhat", Rhat, (3, 3)), _finite_array("qhat", qhat, (3,)))


@dataclass(frozen=True, eq=False)
class InertiaSO3:
    """Body-frame inertia J0 [kg m^2] with its inverse cached."""

    J0: np.ndarray
    J0inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        J0 = _spd("J0", self.J0, 3)
        inv = np.linalg.inv(J0)
        inv.setflags(write=False)
        if np.linalg.norm(J0 @ inv - np.eye(3)) > 1e-10:
            raise InvalidField("J0", "inverse is inaccurate (ill-conditioned inertia)")
        object.__setattr__(self, "J0", J0)
        object.__setattr__(self, "J0inv", inv)

    def inertial_inverse(self, R) -> np.ndarray:
        """R J0^-1 R^T, the map from inertial momentum to angular speed."""
        return R @ self.J0inv @ R.T


@dataclass(frozen=True, eq=False)
class GainsSO3:
    """Observer gains.

    ``K`` must be symmetric positive definite. The correction map is
    Gamma(X) = gamma * X, or Gamma(X) = X @ diag(weights) when ``weights`` is
    given (then ``gamma`` must be None).
    """

    K: np.ndarray
    gamma: float | None = 20.0
    weights: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "K", _spd("K", self.K, 3))
        if self.weights is None:
            if self.gamma is None:
                raise InvalidField("gamma", "one of gamma or weights is required")
            g = float(self.gamma)
            if not (math.isfinite(g) and g > 0.0):
                raise InvalidField("gamma", "must be a positive finite number")
            object.__setattr__(self, "gamma", g)
        else:
            if self.gamma is not None:
                raise InvalidField("weights", "gamma and weights are mutually exclusive")
            w = _finite_array("weights", self.weights, (3,))
            if np.any(w <= 0.0):
                raise InvalidField("weights", "all weights must be positive")
            object.__setattr__(self, "weights", w)

    def correction(self, Rtilde) -> np.ndarray:
        """Gamma(Rtilde)."""
        if self.weights is None:
            return self.gamma * Rtilde
        return Rtilde * self.weights


@dataclass(frozen=True, eq=False)
class TorqueProfile:
    """Deterministic input torque with declared bounds.

    ``kind`` is ``"zero"``, ``"constant"`` (u = value) or ``"sinusoid"``
    (u = amplitude * sin(frequency * t + phase)). ``bound`` limits |u(t)| and
    ``rate_bound`` limits |du/dt|; when omitted they default to the tightest
    values for the chosen signal. ``dim`` is 3 for SO(3) and 1 for SO(2),
    where the torque is returned as a float.
    """

    kind: str = "zero"
    value: np.ndarray | float | None = None
    amplitude: np.ndarray | float | None = None
    frequency: float = 0.0
    phase: float = 0.0
    bound: float | None = None
    rate_bound: float | None = None
    dim: int = 3

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise InvalidField("dim", "must be 1 or 3")
        shape = (self.dim,)
        if self.kind == "zero":
            peak, rate = 0.0, 0.0
        elif self.kind == "constant":
            if self.value is None:
                raise InvalidField("value", "required for a constant torque")
            v = _finite_array("value", np.reshape(self.value, -1), shape)
            object.__setattr__(self, "value", v)
            peak, rate = float(np.linalg.norm(v)), 0.0
        elif self.kind == "sinusoid":
            if self.amplitude is None:
                raise InvalidField("amplitude", "required for a sinusoidal torque")
            a = _finite_array("amplitude", np.reshape(self.amplitude, -1), shape)
            object.__setattr__(self, "amplitude", a)
            for name in ("frequency", "phase"):
                if not math.isfinite(getattr(self, name)):
                    raise InvalidField(name, "must be finite")
            peak = float(np.linalg.norm(a))
            rate = peak * abs(self.frequency)
        else:
            raise InvalidField("kind", f"unknown torque kind {self.kind!r}")

        for name, needed in (("bound", peak), ("rate_bound", rate)):
            declared = getattr(self, name)
            if declared is None:
                object.__setattr__(self, name, needed)
            elif not declared >= needed * (1.0 - 1e-12):
                raise InvalidField(name, f"declared {declared:g} but the signal reaches {needed:g}")

    def __call__(self, t: float):
        if self.kind == "zero":
            u = np.zeros(self.dim)
        elif self.kind == "constant":
            u = self.value.copy()
        else:
            u = self.amplitude * math.sin(self.frequency * t + self.phase)
        return float(u[0]) if self.dim == 1 else u

    def derivative(self, t: float):
        if self.kind == "sinusoid":
            du = self.amplitude * (self.frequency * math.cos(self.frequency * t + self.phase))
        else:
            du = np.zeros(self.dim)
        return float(du[0]) if self.dim == 1 else du


def omega_true(s: PlantStateSO3, inertia: InertiaSO3) -> np.ndarray:
    return inertia.inertial_inverse(s.R) @ s.q


def plant_rhs(s: PlantStateSO3, u, inertia: InertiaSO3) -> tuple[np.ndarray, np.ndarray]:
    w = inertia.inertial_inverse(s.R) @ s.q
    return skew(w) @ s.R, np.array(u, dtype=float)


def innovation(R, Rhat) -> np.ndarray:
    """vee(M - M^T) with M = (R - Rhat) R^T."""
    M = (R - Rhat) @ R.T
    A = M - M.T
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def observer_rhs(
    o: ObserverStateSO3, R_meas, u, gains: GainsSO3, inertia: InertiaSO3
) -> tuple[np.ndarray, np.ndarray]:
    # R_meas may be noisy and off SO(3); it is used as-is.
    W = inertia.inertial_inverse(R_meas)
    dRhat = skew(W @ o.qhat) @ R_meas + gains.correction(R_meas - o.Rhat)
    dqhat = u + gains.K @ (W @ innovation(R_meas, o.Rhat))
    return dRhat, dqhat


def omega_hat(R_meas, qhat, inertia: InertiaSO3) -> np.ndarray:
    return inertia.inertial_inverse(R_meas) @ qhat


def lyapunov_V(Rtilde, qtilde, K) -> float:
    qtilde = np.asarray(qtilde, dtype=float)
    return 0.5 * frobenius_inner(Rtilde, Rtilde) + 0.5 * float(qtilde @ np.linalg.solve(K, qtilde))


def lyapunov_Vdot(Rtilde, gains: GainsSO3) -> float:
    return -frobenius_inner(Rtilde, gains.correction(Rtilde))


def distance_to_attractor(Rtilde, qtilde) -> float:
    return math.sqrt(frobenius_inner(Rtilde, Rtilde) + float(np.dot(qtilde, qtilde)))


def kinetic_energy(s: PlantStateSO3, inertia: InertiaSO3) -> float:
    return 0.5 * float(s.q @ omega_true(s, inertia))
