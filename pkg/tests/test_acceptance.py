"""One test per acceptance criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary by ``conftest.py``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from angspeed import checks, dynamics_so3
from angspeed.dynamics_so2 import Degenerate, project_so2
from angspeed.harness import run, simulate, sweep, write_csv
from angspeed.integrate import lie_midpoint_step_so3
from angspeed.scenario import J0_WU, PRESETS, preset, with_overrides

from conftest import ACCEPTANCE


def report(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
    print(ACCEPTANCE[n])
    assert ok, detail


def _ct(m):
    return math.inf if m.convergence_time is None else m.convergence_time


def test_01_rigid_body_convergence_time():
    t0 = time.perf_counter()
    traj, m = run(preset("wu-so3-K1"))
    elapsed = time.perf_counter() - t0
    err = traj.speed_error
    stays = bool(np.all(err[traj.t >= 1.5] <= 0.02 * err[0]))
    ok = m.convergence_time is not None and m.convergence_time <= 1.5 and stays and elapsed <= 5.0
    report(1, ok, f"wu-so3-K1 convergence_time={m.convergence_time} s (<= 1.5), stays below after: {stays}, runtime {elapsed:.2f} s (<= 5)")


def test_02_tuning_ordering():
    # 20 s horizon so the slow K2 tuning settles inside the run
    names = ["wu-so3-K1", "wu-so3-K3", "wu-so3-K2", "wu-so3-K4b"]
    with ProcessPoolExecutor(max_workers=4) as pool:
        metrics = list(pool.map(_run_metrics_20s, names))
    ct = dict(zip(names, map(_ct, metrics)))
    ok = ct["wu-so3-K1"] < ct["wu-so3-K3"] < ct["wu-so3-K2"] and ct["wu-so3-K4b"] > ct["wu-so3-K1"]
    report(2, ok, "convergence_time " + ", ".join(f"{k}={v:.3f}" for k, v in ct.items()) + " (K1 < K3 < K2, K4b > K1)")


def _run_metrics_20s(name):
    return run(with_overrides(preset(name), horizon=20.0))[1]


def test_03_noise_sensitivity_ordering():
    base = preset("wu-so3-noisy")
    Ks = [(10.0 * J0_WU).tolist(), (30.0 * J0_WU).tolist(), (100.0 * J0_WU).tolist()]
    rms = [m.steady_state_rms for m in sweep(base, "gains.K", Ks, workers=3)]
    ok = rms[0] < rms[1] < rms[2]
    report(3, ok, f"steady_state_rms over final 2 s for K=10J0,30J0,100J0: {rms[0]:.4g} < {rms[1]:.4g} < {rms[2]:.4g} (seed {base.seed})")


def test_04_lyapunov_suite():
    mono, slope = checks.lyapunov_suite(np.random.default_rng(0))
    report(4, mono.passed and slope.passed, f"{mono.detail}; {slope.detail}")


def test_05_conservation():
    s = with_overrides(preset("wu-so3-K1"), horizon=10.0)
    traj = simulate(s)
    q_exact = bool(np.all(traj.q == traj.q[0]))
    W = np.einsum("kij,jl,kml->kim", traj.R, s.inertia.J0inv, traj.R)
    E = 0.5 * np.einsum("ki,kij,kj->k", traj.q, W, traj.q)
    drift = float(np.abs(E / E[0] - 1.0).max())

    p = s.plant
    zero = dynamics_so3.TorqueProfile()
    dt = 1e-3
    worst = 0.0
    for k in range(1_000_000):
        p = lie_midpoint_step_so3(p, zero, s.inertia, dt, k * dt)
        if k % 1000 == 999:
            worst = max(worst, float(np.linalg.norm(p.R.T @ p.R - np.eye(3))))
    ok = q_exact and drift <= 1e-6 and worst <= 1e-9
    report(5, ok, f"q exactly constant: {q_exact}; energy drift {drift:.3g} over 10 s (<= 1e-6); |R^T R - I|_F {worst:.3g} over 1e6 steps (<= 1e-9)")


def test_06_projection_oracle():
    r = np.random.default_rng(0)
    opt = checks.projection_optimality(r, trials=10_000, points=3600, tol=1e-9)
    deg_inputs = [np.diag([1.0, -1.0]), np.zeros((2, 2)), np.array([[2.0, 3.0], [3.0, -2.0]])]
    deg = all(isinstance(project_so2(H), Degenerate) for H in deg_inputs)
    deg_rand = checks.projection_degenerate(r)
    report(6, opt.passed and deg and deg_rand.passed, f"{opt.detail}; degenerate inputs flagged: {deg and deg_rand.passed}")


def test_07_planar_convergence():
    traj, m = run(preset("so2-demo"))
    after = traj.t >= 2.0
    speed = float(traj.speed_error[after].max())
    angle = float(traj.angle_error[-1])
    angle_tail = float(np.nanmax(traj.angle_error[after]))
    ok = speed <= 0.05 and angle <= 0.01 and angle_tail <= 0.01
    report(7, ok, f"so2-demo max |w - w_hat| for t >= 2 s = {speed:.3g} (<= 0.05); angle error for t >= 2 s <= {angle_tail:.3g} (<= 0.01)")


def test_08_planar_noise_bound_shrinks():
    base = preset("so2-noisy")
    amps = [0.1, 0.01, 0.001]
    with ProcessPoolExecutor(max_workers=3) as pool:
        sups = list(pool.map(_last_second_sup, [with_overrides(base, **{"noise.amplitude": a}) for a in amps]))
    ok = all(math.isfinite(x) for x in sups) and sups[0] > sups[1] > sups[2]
    report(8, ok, "sup |w - w_hat| over last second: " + ", ".join(f"amp {a:g} -> {x:.3g}" for a, x in zip(amps, sups)))


def _last_second_sup(s):
    traj = simulate(s)
    return float(traj.speed_error[traj.t >= traj.t[-1] - 1.0].max())


def test_09_property_oracles():
    r = np.random.default_rng(0)
    p1 = checks.trace_identity(r, trials=10_000, tol=1e-10)
    p2 = checks.skew_kernel(r, trials=10_000, tol=1e-10)
    report(9, p1.passed and p2.passed, f"trace identity: {p1.detail}; skew kernel: {p2.detail}")


def _csv_bytes(args):
    name, path = args
    write_csv(simulate(preset(name)), path)
    with open(path, "rb") as fh:
        return fh.read()


def test_10_determinism(tmp_path):
    jobs = [(n, str(tmp_path / f"{n}-{i}.csv")) for n in PRESETS for i in (0, 1)]
    with ProcessPoolExecutor(max_workers=4) as pool:
        blobs = list(pool.map(_csv_bytes, jobs))
    same = [blobs[2 * i] == blobs[2 * i + 1] for i in range(len(PRESETS))]
    report(10, all(same), f"byte-identical CSV across two runs for {sum(same)}/{len(PRESETS)} presets")
