"""Run scenarios, derive error signals and metrics, write CSV output."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import dynamics_so2, dynamics_so3, integrate
from .dynamics_so2 import ObserverStateSO2, PlantStateSO2
from .dynamics_so3 import ObserverStateSO3, PlantStateSO3
from .errors import DegenerateProjection
from .linalg import rot2
from .scenario import Scenario

CONVERGENCE_FRACTION = 0.02
CONVERGENCE_FLOOR = 1e-6  # absolute; keeps an attractor start from reading as never converged
RMS_WINDOW = 2.0


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TrajectorySO3:
    t: np.ndarray
    R: np.ndarray  # (n, 3, 3)
    q: np.ndarray  # (n, 3)
    Rhat: np.ndarray
    qhat: np.ndarray
    omega: np.ndarray
    omega_hat: np.ndarray
    V: np.ndarray
    Vdot: np.ndarray
    dist: np.ndarray

    mode = "so3"

    @property
    def speed_error(self) -> np.ndarray:
        return np.linalg.norm(self.omega - self.omega_hat, axis=1)

    @property
    def max_orthonormality_error(self) -> float:
        """Largest |R^T R - I|_F of the recorded plant attitudes."""
        E = np.einsum("kji,kjl->kil", self.R, self.R) - np.eye(3)
        return float(np.sqrt((E**2).sum(axis=(1, 2))).max())

    def csv_header(self) -> list[str]:
        ij = [f"{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
        return (
            ["t"]
            + [f"R{x}" for x in ij]
            + [f"q{i}" for i in (1, 2, 3)]
            + [f"Rhat{x}" for x in ij]
            + [f"qhat{i}" for i in (1, 2, 3)]
            + [f"w{i}" for i in (1, 2, 3)]
            + [f"what{i}" for i in (1, 2, 3)]
            + [f"err_w{i}" for i in (1, 2, 3)]
            + ["V", "Vdot", "dist_A"]
        )

    def csv_rows(self):
        n = len(self.t)
        err = self.omega - self.omega_hat
        cols = np.column_stack(
            [
                self.t, self.R.reshape(n, 9), self.q, self.Rhat.reshape(n, 9), self.qhat,
                self.omega, self.omega_hat, err, self.V, self.Vdot, self.dist,
            ]
        )
        for row in cols:
            yield [_fmt(v) for v in row]


@dataclass(frozen=True, eq=False)
class TrajectorySO2:
    t: np.ndarray
    R: np.ndarray  # (n, 2, 2)
    Rhat: np.ndarray
    theta: np.ndarray  # wrapped plant angle
    omega: np.ndarray
    omega_hat: np.ndarray
    theta_hat: np.ndarray  # NaN where the projection is degenerate
    degenerate: np.ndarray
    V: np.ndarray
    Vdot: np.ndarray
    dist: np.ndarray

    mode = "so2"

    @property
    def speed_error(self) -> np.ndarray:
        return np.abs(self.omega - self.omega_hat)

    @property
    def angle_error(self) -> np.ndarray:
        """Wrapped theta - theta_hat."""
        d = np.remainder(self.theta - self.theta_hat + np.pi, 2.0 * np.pi) - np.pi
        return np.abs(d)

    @property
    def max_orthonormality_error(self) -> float:
        E = np.einsum("kji,kjl->kil", self.R, self.R) - np.eye(2)
        return float(np.sqrt((E**2).sum(axis=(1, 2))).max())

    def csv_header(self) -> list[str]:
        return ["t", "theta", "omega", "omega_hat", "err_omega", "theta_hat", "V", "Vdot", "dist_W", "degenerate_flag"]

    def csv_rows(self):
        for k in range(len(self.t)):
            yield [
                _fmt(self.t[k]), _fmt(self.theta[k]), _fmt(self.omega[k]), _fmt(self.omega_hat[k]),
                _fmt(self.omega[k] - self.omega_hat[k]), _fmt(self.theta_hat[k]),
                _fmt(self.V[k]), _fmt(self.Vdot[k]), _fmt(self.dist[k]), str(int(self.degenerate[k])),
            ]


Trajectory = Union[TrajectorySO3, TrajectorySO2]


@dataclass(frozen=True)
class Metrics:
    """Summary numbers of one run.

    ``convergence_time`` is the first sample time after which the speed
    error stays at or below ``convergence_threshold`` (by default 2% of the
    initial error, but at least ``CONVERGENCE_FLOOR``); None means it never
    settled within the horizon. ``steady_state_rms`` and ``steady_state_max``
    cover the final ``rms_window`` seconds.
    """

    convergence_time: float | None
    convergence_threshold: float
    steady_state_rms: float
    steady_state_max: float
    rms_window: float
    max_V_increase: float
    final_d: float

    def to_dict(self) -> dict:
        return asdict(self)


def convergence_time(t: np.ndarray, err: np.ndarray, threshold: float) -> float | None:
    above = np.flatnonzero(err > threshold)
    if above.size == 0:
        return 0.0
    last = above[-1]
    if last + 1 >= len(t):
        return None
    return float(t[last + 1])


def compute_metrics(traj: Trajectory, threshold: float | None = None, window: float = RMS_WINDOW) -> Metrics:
    err = traj.speed_error
    if threshold is None:
        threshold = max(CONVERGENCE_FRACTION * float(err[0]), CONVERGENCE_FLOOR)
    t = traj.t
    tail = err[t >= t[-1] - window - 1e-9 * max(1.0, t[-1])]
    dV = np.diff(traj.V)
    return Metrics(
        convergence_time=convergence_time(t, err, threshold),
        convergence_threshold=float(threshold),
        steady_state_rms=float(np.sqrt(np.mean(tail**2))),
        steady_state_max=float(tail.max()),
        rms_window=float(window),
        max_V_increase=float(max(0.0, dV.max())) if dV.size else 0.0,
        final_d=float(traj.dist[-1]),
    )


# -- per-mode wiring ---------------------------------------------------------


def _simulate_so3(s: Scenario) -> TrajectorySO3:
    inertia, gains, torque = s.inertia, s.gains, s.torque
    if s.integrator.plant_method == "lie_midpoint":
        stepper = integrate.lie_midpoint_step_so3
    else:
        stepper = integrate.ambient_rk4_step_so3

    def plant_step(p, t, dt):
        return stepper(p, torque, inertia, dt, t)

    def observer_rhs(t, x, R_meas):
        dRhat, dqhat = dynamics_so3.observer_rhs(
            ObserverStateSO3(x[:9].reshape(3, 3), x[9:]), R_meas, torque(t), gains, inertia
        )
        return np.concatenate([dRhat.ravel(), dqhat])

    x0 = np.concatenate([s.observer.Rhat.ravel(), s.observer.qhat])
    noise = s.noise.source((3, 3), s.integrator.dt, s.seed)
    raw = integrate.co_simulate(
        plant_step, observer_rhs, lambda p: p.R, noise, s.plant, x0, s.integrator, s.horizon
    )

    R = np.array([p.R for p in raw.plant])
    q = np.array([p.q for p in raw.plant])
    Rhat = raw.observer[:, :9].reshape(-1, 3, 3)
    qhat = raw.observer[:, 9:]
    Jinv = inertia.J0inv
    # Both speeds go through the plant attitude, so omega - omega_hat is
    # R J0^-1 R^T (q - qhat): noise enters the record only via the observer
    # state, never through the output map.
    W = np.einsum("kij,jl,kml->kim", R, Jinv, R)
    omega = np.einsum("kij,kj->ki", W, q)
    omega_hat = np.einsum("kij,kj->ki", W, qhat)
    Rt = R - Rhat
    qt = q - qhat
    Kinv = np.linalg.inv(gains.K)
    V = 0.5 * (Rt**2).sum(axis=(1, 2)) + 0.5 * np.einsum("ki,ij,kj->k", qt, Kinv, qt)
    if gains.weights is None:
        Vdot = -gains.gamma * (Rt**2).sum(axis=(1, 2))
    else:
        Vdot = -np.einsum("kij,j->k", Rt**2, gains.weights)
    dist = np.sqrt((Rt**2).sum(axis=(1, 2)) + (qt**2).sum(axis=1))
    return TrajectorySO3(raw.t, R, q, Rhat, qhat, omega, omega_hat, V, Vdot, dist)


def _wrapped_measurement(p: PlantStateSO2) -> np.ndarray:
    # the sensor reports an angle in (-pi, pi]; the observer sees its rotation
    return rot2(dynamics_so2.angle_of(p.R))


def _simulate_so2(s: Scenario, measure=_wrapped_measurement) -> TrajectorySO2:
    J, gains, torque = s.inertia, s.gains, s.torque
    if s.integrator.plant_method == "lie_midpoint":
        stepper = integrate.lie_midpoint_step_so2
    else:
        stepper = integrate.ambient_rk4_step_so2

    def plant_step(p, t, dt):
        return stepper(p, torque, J, dt, t)

    def observer_rhs(t, x, R_meas):
        dRhat, dw = dynamics_so2.so2_observer_rhs(
            ObserverStateSO2(x[:4].reshape(2, 2), x[4]), R_meas, gains
        )
        out = np.empty(5)
        out[:4] = dRhat.ravel()
        out[4] = dw
        return out

    x0 = np.concatenate([s.observer.Rhat.ravel(), [s.observer.omega_hat]])
    noise = s.noise.source((2, 2), s.integrator.dt, s.seed)
    raw = integrate.co_simulate(plant_step, observer_rhs, measure, noise, s.plant, x0, s.integrator, s.horizon)

    R = np.array([p.R for p in raw.plant])
    omega = np.array([p.omega for p in raw.plant])
    Rhat = raw.observer[:, :4].reshape(-1, 2, 2)
    omega_hat = raw.observer[:, 4].copy()
    theta = np.array([dynamics_so2.angle_of(r) for r in R])
    theta_hat = np.empty(len(raw.t))
    degenerate = np.zeros(len(raw.t), dtype=bool)
    for k, H in enumerate(Rhat):
        try:
            theta_hat[k] = dynamics_so2.filtered_angle(H)
        except DegenerateProjection:
            theta_hat[k] = math.nan
            degenerate[k] = True
    Rt = R - Rhat
    wt = omega - omega_hat
    sq = (Rt**2).sum(axis=(1, 2))
    V = 0.5 * sq + 0.5 * wt**2 / gains.kappa
    Vdot = -gains.gamma * sq
    dist = np.sqrt(sq + wt**2)
    return TrajectorySO2(raw.t, R, Rhat, theta, omega, omega_hat, theta_hat, degenerate, V, Vdot, dist)


def simulate(s: Scenario) -> Trajectory:
    return _simulate_so3(s) if s.mode == "so3" else _simulate_so2(s)


def run(s: Scenario) -> tuple[Trajectory, Metrics]:
    traj = simulate(s)
    return traj, compute_metrics(traj)


def _run_metrics(s: Scenario) -> Metrics:
    return run(s)[1]


def sweep(base: Scenario, parameter: str, values: Sequence, workers: int | None = None) -> list[Metrics]:
    """Metrics for ``base`` with ``parameter`` set to each value in turn.

    All rows share the base seed. With ``workers > 1`` rows run in separate
    processes; results keep input order.
    """
    scenarios = [base.replace(parameter, v) for v in values]
    if workers and workers > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_metrics, scenarios))
    return [_run_metrics(s) for s in scenarios]


def write_csv(traj: Trajectory, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(traj.csv_header())
        w.writerows(traj.csv_rows())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(header))
    return header, data
