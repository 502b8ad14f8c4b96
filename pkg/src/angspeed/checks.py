"""Randomized invariant suites, runnable from the CLI ``check`` command.

Each check returns a :class:`CheckResult`; a failing result carries a
counterexample in ``detail``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics_so3
from .dynamics_so2 import Degenerate, project_so2
from .dynamics_so3 import GainsSO3, InertiaSO3, TorqueProfile
from .harness import simulate
from .integrate import IntegratorConfig
from .linalg import frobenius_norm, skew, so3_exp, vee, vee_general
from .scenario import NoiseSpec, Scenario

SUITES = ("linalg", "lyapunov", "projection")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


# -- linalg ---------------------------------------------------------------------


def trace_identity(rng: np.random.Generator, trials: int = 10_000, tol: float = 1e-10) -> CheckResult:
    """trace([w]_x Theta) == w . vee(Theta^T - Theta)."""
    worst, example = 0.0, None
    for _ in range(trials):
        w = rng.normal(size=3)
        Th = rng.normal(size=(3, 3))
        err = abs(np.trace(skew(w) @ Th) - w @ vee_general(Th.T - Th))
        if err > worst:
            worst, example = err, (w, Th)
    ok = worst <= tol
    detail = f"{trials} trials, max error {worst:.3g} (tol {tol:g})"
    if not ok:
        detail += f"; counterexample w={example[0].tolist()} Theta={example[1].tolist()}"
    return CheckResult("trace_identity", ok, detail)


def skew_kernel(rng: np.random.Generator, trials: int = 10_000, tol: float = 1e-10) -> CheckResult:
    """[w]_x Theta == 0 iff w == 0, for nonsingular Theta."""
    done = 0
    while done < trials:
        Th = rng.normal(size=(3, 3))
        if abs(np.linalg.det(Th)) <= 1e-6:
            continue
        w = rng.normal(size=3)
        if np.linalg.norm(w) < 1e-6:
            continue
        done += 1
        if not frobenius_norm(skew(w) @ Th) > 0.0:
            return CheckResult("skew_kernel", False, f"zero product for w={w.tolist()} Theta={Th.tolist()}")
        if frobenius_norm(skew(np.zeros(3)) @ Th) > tol:
            return CheckResult("skew_kernel", False, "[0]_x Theta is nonzero")
    return CheckResult("skew_kernel", True, f"{trials} nonsingular trials")


def skew_vee_roundtrip(rng: np.random.Generator, trials: int = 1000) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        v = rng.normal(size=3) * 10.0
        worst = max(worst, float(np.abs(vee(skew(v)) - v).max()))
        A = rng.normal(size=(3, 3))
        A = A - A.T
        worst = max(worst, float(np.abs(skew(vee(A)) - A).max()))
    return CheckResult("skew_vee_roundtrip", worst == 0.0, f"{trials} trials, max error {worst:.3g}")


def exp_determinant(rng: np.random.Generator, trials: int = 1000, tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        R = so3_exp(rng.normal(size=3) * rng.choice([1e-9, 1e-3, 1.0, 10.0]))
        worst = max(worst, abs(np.linalg.det(R) - 1.0), float(np.abs(R @ R.T - np.eye(3)).max()))
    return CheckResult("exp_determinant", worst <= tol, f"{trials} trials, max deviation {worst:.3g}")


# -- projection -------------------------------------------------------------------


def grid_objective_min(H: np.ndarray, points: int = 3600) -> np.ndarray:
    """Brute-force min over ``points`` angles of |rot2(theta) - H|_F^2 for a stack of H."""
    theta = np.linspace(-math.pi, math.pi, points, endpoint=False)
    c, s = np.cos(theta), np.sin(theta)
    h = H.reshape(-1, 4)[:, :, None]
    obj = (c - h[:, 0]) ** 2 + (-s - h[:, 1]) ** 2 + (s - h[:, 2]) ** 2 + (c - h[:, 3]) ** 2
    return obj.min(axis=1)


def projection_optimality(
    rng: np.random.Generator, trials: int = 10_000, points: int = 3600, tol: float = 1e-9
) -> CheckResult:
    Hs = rng.normal(size=(trials, 2, 2)) * rng.choice([0.1, 1.0, 10.0], size=(trials, 1, 1))
    closed = np.empty(trials)
    for k, H in enumerate(Hs):
        res = project_so2(H)
        if isinstance(res, Degenerate):
            return CheckResult("projection_optimality", False, f"random H={H.tolist()} reported degenerate")
        closed[k] = float(((res.R - H) ** 2).sum())
    grid = np.concatenate([grid_objective_min(Hs[i : i + 500], points) for i in range(0, trials, 500)])
    gap = closed - grid
    k = int(gap.argmax())
    ok = gap[k] <= tol
    detail = f"{trials} matrices x {points} angles, worst excess {gap[k]:.3g} (tol {tol:g})"
    if not ok:
        detail += f"; counterexample H={Hs[k].tolist()}"
    return CheckResult("projection_optimality", ok, detail)


def projection_degenerate(rng: np.random.Generator, trials: int = 1000) -> CheckResult:
    for _ in range(trials):
        a, b = rng.normal(size=2) * rng.choice([1e-3, 1.0, 1e3])
        H = np.array([[a, b], [b, -a]])
        if not isinstance(project_so2(H), Degenerate):
            return CheckResult("projection_degenerate", False, f"symmetric traceless H={H.tolist()} not flagged")
    return CheckResult("projection_degenerate", True, f"{trials} symmetric traceless inputs flagged")


def projection_scaling(rng: np.random.Generator, trials: int = 1000, tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        H = rng.normal(size=(2, 2))
        c = math.exp(rng.uniform(-5, 5))
        worst = max(worst, float(np.abs(project_so2(c * H).R - project_so2(H).R).max()))
    return CheckResult("projection_scaling", worst <= tol, f"{trials} trials, max deviation {worst:.3g}")


# -- lyapunov ---------------------------------------------------------------------


def _random_spd(rng: np.random.Generator, lo: float, hi: float) -> np.ndarray:
    Q = so3_exp(rng.normal(size=3) * 2.0)
    M = Q @ np.diag(rng.uniform(lo, hi, 3)) @ Q.T
    return 0.5 * (M + M.T)


def random_so3_scenario(rng: np.random.Generator, dt: float = 1e-4, horizon: float = 0.2) -> Scenario:
    """Noise-free scenario with random inertia, gains and initial conditions.

    The observer matrix starts as an arbitrary 3x3 matrix. Every second draw
    uses the diagonal-weights correction map.
    """
    weighted = rng.random() < 0.5
    gains = GainsSO3(
        _random_spd(rng, 1.0, 100.0),
        gamma=None if weighted else float(rng.uniform(1.0, 30.0)),
        weights=rng.uniform(0.5, 20.0, 3) if weighted else None,
    )
    return Scenario(
        mode="so3",
        inertia=InertiaSO3(_random_spd(rng, 0.5, 5.0)),
        plant=dynamics_so3.plant_state(so3_exp(rng.normal(size=3) * 2.0), rng.normal(size=3) * 2.0),
        observer=dynamics_so3.observer_state(rng.normal(size=(3, 3)), rng.normal(size=3) * 2.0),
        gains=gains,
        torque=TorqueProfile("zero"),
        noise=NoiseSpec(),
        integrator=IntegratorConfig(dt=dt),
        horizon=horizon,
        seed=0,
    )


def lyapunov_suite(
    rng: np.random.Generator,
    scenarios: int = 20,
    dt: float = 1e-4,
    horizon: float = 0.2,
    monotone_tol: float = 1e-9,
    slope_tol: float = 0.01,
) -> list[CheckResult]:
    """V nonincreasing per step, and (V[k+1] - V[k]) / dt matching Vdot[k].

    The slope mismatch is measured relative to max |Vdot| on each trajectory,
    since Vdot vanishes wherever Rtilde does.
    """
    worst_inc, worst_slope = -math.inf, 0.0
    bad_inc = bad_slope = None
    for i in range(scenarios):
        traj = simulate(random_so3_scenario(rng, dt, horizon))
        V = traj.V
        inc = float((np.diff(V) / (1.0 + V[:-1])).max())
        slope = np.diff(V) / dt
        rel = float(np.abs(slope - traj.Vdot[:-1]).max() / np.abs(traj.Vdot).max())
        if inc > worst_inc:
            worst_inc = inc
            if inc > monotone_tol:
                bad_inc = i
        if rel > worst_slope:
            worst_slope = rel
            if rel > slope_tol:
                bad_slope = i
    return [
        CheckResult(
            "lyapunov_monotone",
            bad_inc is None,
            f"{scenarios} scenarios, max relative step increase {worst_inc:.3g} (tol {monotone_tol:g})"
            + ("" if bad_inc is None else f"; violated in scenario #{bad_inc}"),
        ),
        CheckResult(
            "lyapunov_slope",
            bad_slope is None,
            f"{scenarios} scenarios at dt={dt:g}, max relative mismatch {worst_slope:.3g} (tol {slope_tol:g})"
            + ("" if bad_slope is None else f"; violated in scenario #{bad_slope}"),
        ),
    ]


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        return [r for suite in SUITES for r in run_suite(suite, seed)]
    rng = np.random.default_rng(seed)
    if name == "linalg":
        return [trace_identity(rng), skew_kernel(rng), skew_vee_roundtrip(rng), exp_determinant(rng)]
    if name == "projection":
        return [projection_optimality(rng), projection_degenerate(rng), projection_scaling(rng)]
    if name == "lyapunov":
        return lyapunov_suite(rng)
    raise KeyError(name)
