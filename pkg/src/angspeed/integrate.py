"""Fixed-step integration of the plant/observer interconnection.

The plant rotation is advanced with an exponential-map midpoint rule so it
stays on the group by construction. The observer state is a flat vector in
ambient space and is advanced with classical RK4 (or Euler); its stage
evaluations see the plant rotation at the matching stage times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import dynamics_so2, dynamics_so3
from .errors import InvalidField, NonFinite
from .linalg import rot2, so3_exp

PLANT_METHODS = ("lie_midpoint", "ambient_rk4_with_monitor")
OBSERVER_METHODS = ("rk4", "euler")
MAX_DT = 0.1


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    plant_method: str = "lie_midpoint"
    observer_method: str = "rk4"

    def __post_init__(self):
        dt = float(self.dt)
        if not (math.isfinite(dt) and 0.0 < dt <= MAX_DT):
            raise InvalidField("dt", f"must satisfy 0 < dt <= {MAX_DT}, got {self.dt!r}")
        object.__setattr__(self, "dt", dt)
        if self.plant_method not in PLANT_METHODS:
            raise InvalidField("plant_method", f"must be one of {PLANT_METHODS}")
        if self.observer_method not in OBSERVER_METHODS:
            raise InvalidField("observer_method", f"must be one of {OBSERVER_METHODS}")


def rk4_step(rhs: Callable, x: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    """One classical Runge-Kutta step of dx/dt = rhs(t, x).

    Raises NonFinite if any stage produced NaN or Inf. A non-finite stage
    always leaves a non-finite entry in the combined update, so one check on
    the result covers all four stages.
    """
    h = 0.5 * dt
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = rhs(t, x)
        k2 = rhs(t + h, x + h * k1)
        k3 = rhs(t + h, x + h * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _finite(x_next, t)


def euler_step(rhs: Callable, x: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        x_next = x + dt * _finite(rhs(t, x), t)
    return _finite(x_next, t)


def _finite(v, t: float):
    if not np.isfinite(v).all():
        raise NonFinite("non-finite value during integration", t)
    return v


# -- plant steppers ----------------------------------------------------------


def lie_midpoint_step_so3(
    s: dynamics_so3.PlantStateSO3,
    torque: Callable[[float], np.ndarray],
    inertia: dynamics_so3.InertiaSO3,
    dt: float,
    t: float = 0.0,
) -> dynamics_so3.PlantStateSO3:
    R, q = s
    h = 0.5 * dt
    R_half = so3_exp(h * (inertia.inertial_inverse(R) @ q)) @ R
    q_half = q + h * torque(t)
    w_mid = inertia.inertial_inverse(R_half) @ q_half
    return dynamics_so3.PlantStateSO3(so3_exp(dt * w_mid) @ R, q + dt * torque(t + h))


def lie_midpoint_step_so2(
    s: dynamics_so2.PlantStateSO2,
    torque: Callable[[float], float],
    J: float,
    dt: float,
    t: float = 0.0,
) -> dynamics_so2.PlantStateSO2:
    h = 0.5 * dt
    w_mid = s.omega + h * torque(t) / J
    return dynamics_so2.PlantStateSO2(rot2(dt * w_mid) @ s.R, s.omega + dt * torque(t + h) / J)


def ambient_rk4_step_so3(s, torque, inertia, dt, t=0.0):
    """RK4 on the 12 ambient coordinates; R drifts off SO(3) (see the monitor)."""

    def rhs(tt, x):
        dR, dq = dynamics_so3.plant_rhs(
            dynamics_so3.PlantStateSO3(x[:9].reshape(3, 3), x[9:]), torque(tt), inertia
        )
        return np.concatenate([dR.ravel(), dq])

    x = rk4_step(rhs, np.concatenate([s.R.ravel(), s.q]), dt, t)
    return dynamics_so3.PlantStateSO3(x[:9].reshape(3, 3), x[9:])


def ambient_rk4_step_so2(s, torque, J, dt, t=0.0):
    def rhs(tt, x):
        dR, dw = dynamics_so2.so2_plant_rhs(
            dynamics_so2.PlantStateSO2(x[:4].reshape(2, 2), x[4]), torque(tt), J
        )
        return np.concatenate([dR.ravel(), [dw]])

    x = rk4_step(rhs, np.concatenate([s.R.ravel(), [s.omega]]), dt, t)
    return dynamics_so2.PlantStateSO2(x[:4].reshape(2, 2), float(x[4]))


# -- interconnection ---------------------------------------------------------


class Samples(NamedTuple):
    """Raw lockstep record: one entry per sample time ``t[k] = k * dt``.

    ``measured`` holds the (possibly noisy) matrix the observer saw at each
    sample; ``observer`` rows are the flat observer states.
    """

    t: np.ndarray
    plant: list
    observer: np.ndarray
    measured: np.ndarray


def co_simulate(
    plant_step: Callable,
    observer_rhs: Callable,
    measure: Callable,
    noise: Callable[[int, float], np.ndarray | float],
    plant0,
    observer0: np.ndarray,
    config: IntegratorConfig,
    horizon: float,
) -> Samples:
    """Run plant and observer in lockstep over ``[0, horizon]``.

    ``plant_step(state, t, dt)`` advances the plant. ``measure(state)`` returns
    the clean measured matrix and ``noise(k, t)`` the additive noise held over
    step ``k``. ``observer_rhs(t, x, R_meas)`` is the flat observer vector
    field. The observer's RK4 stages at ``t``, ``t + dt/2`` and ``t + dt`` see
    the plant at those times, each plus the held noise sample.
    """
    dt = config.dt
    n = int(round(horizon / dt))
    step = rk4_step if config.observer_method == "rk4" else euler_step

    t = np.arange(n + 1) * dt
    plants = [plant0]
    xs = np.empty((n + 1, observer0.size))
    xs[0] = observer0
    Y0 = measure(plant0)
    measured = np.empty((n + 1,) + np.shape(Y0))

    s, x = plant0, np.array(observer0, dtype=float)
    for k in range(n):
        tk = float(t[k])
        eta = noise(k, tk)
        s_half = plant_step(s, tk, 0.5 * dt)
        s_next = plant_step(s, tk, dt)
        Y = (measure(s) + eta, measure(s_half) + eta, measure(s_next) + eta)
        measured[k] = Y[0]

        def rhs(tau, xx, Y=Y, tk=tk):
            frac = (tau - tk) / dt
            Ym = Y[0] if frac < 0.25 else (Y[1] if frac < 0.75 else Y[2])
            return observer_rhs(tau, xx, Ym)

        try:
            x = step(rhs, x, dt, tk)
            _finite(s_next.R, tk)
        except NonFinite as exc:
            raise NonFinite("numerical blow-up", tk) from exc
        s = s_next
        plants.append(s)
        xs[k + 1] = x
    measured[n] = measure(s) + noise(n, t[n])
    return Samples(t, plants, xs, measured)
