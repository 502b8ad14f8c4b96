"""Scenario description, noise models, presets and the JSON config document."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np

from . import dynamics_so2, dynamics_so3
from .dynamics_so2 import GainsSO2, ObserverStateSO2, PlantStateSO2
from .dynamics_so3 import GainsSO3, InertiaSO3, ObserverStateSO3, PlantStateSO3, TorqueProfile
from .errors import ConfigError, InvalidField, UnknownParameter, UnknownPreset
from .integrate import IntegratorConfig
from .linalg import rot2, so3_exp

MODES = ("so3", "so2")
NOISE_KINDS = ("none", "gaussian_per_step", "sinusoid")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive measurement noise on every entry of the measured matrix.

    ``gaussian_per_step`` draws i.i.d. entries with variance ``power / dt``,
    held over one step (sampled band-limited white noise of spectral density
    ``power``). ``sinusoid`` adds ``amplitude * sin(frequency * t)`` to each
    entry.
    """

    kind: str = "none"
    power: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidField("kind", f"must be one of {NOISE_KINDS}")
        for name in ("power", "amplitude", "frequency"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidField(name, "must be finite")
            object.__setattr__(self, name, v)
        if self.power < 0.0:
            raise InvalidField("power", "must be nonnegative")
        if self.amplitude < 0.0:
            raise InvalidField("amplitude", "must be nonnegative")

    def source(self, shape: tuple[int, ...], dt: float, seed: int):
        """Return ``noise(k, t)`` producing the sample held over step ``k``.

        Gaussian samples come from numpy's PCG64 generator seeded with
        ``seed`` and must be requested in step order.
        """
        if self.kind == "none":
            zero = np.zeros(shape)
            return lambda k, t: zero
        if self.kind == "sinusoid":
            a, f = self.amplitude, self.frequency
            return lambda k, t: a * math.sin(f * t)
        rng = np.random.Generator(np.random.PCG64(seed))
        sigma = math.sqrt(self.power / dt)
        return lambda k, t: sigma * rng.standard_normal(shape)


@dataclass(frozen=True, eq=False)
class Scenario:
    mode: str
    inertia: Union[InertiaSO3, float]
    plant: Union[PlantStateSO3, PlantStateSO2]
    observer: Union[ObserverStateSO3, ObserverStateSO2]
    gains: Union[GainsSO3, GainsSO2]
    torque: TorqueProfile
    noise: NoiseSpec
    integrator: IntegratorConfig
    horizon: float
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        h = float(self.horizon)
        if not (math.isfinite(h) and h > 0.0):
            raise ConfigError("horizon", "must be positive and finite")
        object.__setattr__(self, "horizon", h)
        seed = self.seed
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        object.__setattr__(self, "seed", int(seed))
        so3 = self.mode == "so3"
        expected = {
            "inertia": InertiaSO3 if so3 else float,
            "plant": PlantStateSO3 if so3 else PlantStateSO2,
            "observer": ObserverStateSO3 if so3 else ObserverStateSO2,
            "gains": GainsSO3 if so3 else GainsSO2,
        }
        for name, cls in expected.items():
            if not isinstance(getattr(self, name), cls):
                raise ConfigError(name, f"expected {cls.__name__} for mode {self.mode}")
        if self.torque.dim != (3 if so3 else 1):
            raise ConfigError("torque", f"dimension {self.torque.dim} does not match mode {self.mode}")

    def to_dict(self) -> dict:
        return scenario_to_dict(self)

    def replace(self, path: str, value) -> "Scenario":
        """Copy with the config entry at dotted ``path`` set to ``value``."""
        doc = scenario_to_dict(self)
        node = doc
        keys = path.split(".")
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise UnknownParameter(path)
            node = node[key]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise UnknownParameter(path)
        node[keys[-1]] = value
        return scenario_from_dict(doc)


# -- config document ----------------------------------------------------------


def _list(a):
    return np.asarray(a, dtype=float).tolist()


def scenario_to_dict(s: Scenario) -> dict:
    so3 = s.mode == "so3"
    if so3:
        inertia: Any = _list(s.inertia.J0)
        plant = {"R": _list(s.plant.R), "q": _list(s.plant.q)}
        observer = {"Rhat": _list(s.observer.Rhat), "qhat": _list(s.observer.qhat)}
        gains: dict = {"K": _list(s.gains.K)}
        if s.gains.weights is None:
            gains["gamma"] = s.gains.gamma
        else:
            gains["weights"] = _list(s.gains.weights)
    else:
        inertia = s.inertia
        plant = {"R": _list(s.plant.R), "omega": s.plant.omega}
        observer = {"Rhat": _list(s.observer.Rhat), "omega_hat": s.observer.omega_hat}
        gains = {"gamma": s.gains.gamma, "kappa": s.gains.kappa}

    tq = s.torque
    torque: dict = {"kind": tq.kind}
    if tq.kind == "constant":
        torque["value"] = _list(tq.value)
    elif tq.kind == "sinusoid":
        torque.update(amplitude=_list(tq.amplitude), frequency=tq.frequency, phase=tq.phase)
    torque.update(bound=tq.bound, rate_bound=tq.rate_bound)

    nz = s.noise
    noise: dict = {"kind": nz.kind}
    if nz.kind == "gaussian_per_step":
        noise["power"] = nz.power
    elif nz.kind == "sinusoid":
        noise.update(amplitude=nz.amplitude, frequency=nz.frequency)

    return {
        "mode": s.mode,
        "inertia": inertia,
        "plant": plant,
        "observer": observer,
        "gains": gains,
        "torque": torque,
        "noise": noise,
        "integrator": {
            "dt": s.integrator.dt,
            "plant_method": s.integrator.plant_method,
            "observer_method": s.integrator.observer_method,
        },
        "horizon": s.horizon,
        "seed": s.seed,
    }


_TOP_KEYS = {"mode", "inertia", "plant", "observer", "gains", "torque", "noise", "integrator", "horizon", "seed"}


def _section(doc: dict, name: str, allowed: set, required: set = frozenset()) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown key")
    for key in required:
        if key not in sec:
            raise ConfigError(f"{name}.{key}", "missing required key")
    return sec


def _build(path: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InvalidField as exc:
        raise ConfigError(f"{path}.{exc.field}" if path else exc.field, exc.message) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def scenario_from_dict(doc: dict) -> Scenario:
    """Parse and validate a config document; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
    for key in ("mode", "inertia", "plant", "observer", "gains", "horizon"):
        if key not in doc:
            raise ConfigError(key, "missing required key")
    mode = doc["mode"]
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")
    so3 = mode == "so3"

    if so3:
        inertia = _build("inertia", lambda J: InertiaSO3(J), doc["inertia"])
        p = _section(doc, "plant", {"R", "q"}, {"R", "q"})
        plant = _build("plant", dynamics_so3.plant_state, p["R"], p["q"])
        o = _section(doc, "observer", {"Rhat", "qhat"}, {"Rhat", "qhat"})
        observer = _build("observer", dynamics_so3.observer_state, o["Rhat"], o["qhat"])
        g = _section(doc, "gains", {"K", "gamma", "weights"}, {"K"})
        gains = _build(
            "gains", GainsSO3, g["K"],
            gamma=g.get("gamma", None if "weights" in g else 20.0), weights=g.get("weights"),
        )
    else:
        inertia = _build("inertia", dynamics_so2.check_inertia, doc["inertia"])
        p = _section(doc, "plant", {"R", "omega"}, {"R", "omega"})
        plant = _build("plant", dynamics_so2.plant_state, p["R"], p["omega"])
        o = _section(doc, "observer", {"Rhat", "omega_hat"}, {"Rhat", "omega_hat"})
        observer = _build("observer", dynamics_so2.observer_state, o["Rhat"], o["omega_hat"])
        g = _section(doc, "gains", {"gamma", "kappa"}, {"gamma", "kappa"})
        gains = _build("gains", GainsSO2, g["gamma"], g["kappa"])

    tq = _section(doc, "torque", {"kind", "value", "amplitude", "frequency", "phase", "bound", "rate_bound"})
    torque = _build("torque", TorqueProfile, dim=3 if so3 else 1, **tq)
    nz = _section(doc, "noise", {"kind", "power", "amplitude", "frequency"})
    noise = _build("noise", NoiseSpec, **nz)
    it = _section(doc, "integrator", {"dt", "plant_method", "observer_method"})
    integrator = _build("integrator", IntegratorConfig, **it)

    return Scenario(
        mode=mode,
        inertia=inertia,
        plant=plant,
        observer=observer,
        gains=gains,
        torque=torque,
        noise=noise,
        integrator=integrator,
        horizon=_build("horizon", float, doc["horizon"]),
        seed=doc.get("seed", 0),
    )


def load_config(path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)


def dump_config(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


# -- presets ------------------------------------------------------------------

J0_WU = np.diag([5.0, 1.0, 2.0])
OMEGA0_WU = np.array([1.0, -1.5, 2.5])

# (K, gamma) per tuning of the rigid-body example
_SO3_TUNINGS = {
    "wu-so3-K1": (100.0 * J0_WU, 20.0),
    "wu-so3-K2": (10.0 * J0_WU, 20.0),
    "wu-so3-K3": (30.0 * J0_WU, 20.0),
    "wu-so3-K4a": (5.0 * np.eye(3), 20.0),
    "wu-so3-K4b": (100.0 * J0_WU, 1e3),
}

PRESETS = tuple(_SO3_TUNINGS) + ("wu-so3-noisy", "so2-demo", "so2-noisy")


def _so3_preset(K, gamma, noise: NoiseSpec, horizon: float) -> Scenario:
    R0 = so3_exp(np.array([math.pi / 4.0, 0.0, 0.0]))
    q0 = R0 @ J0_WU @ R0.T @ OMEGA0_WU
    return Scenario(
        mode="so3",
        inertia=InertiaSO3(J0_WU),
        plant=dynamics_so3.plant_state(R0, q0),
        observer=dynamics_so3.observer_state(R0, np.zeros(3)),
        gains=GainsSO3(K, gamma=gamma),
        torque=TorqueProfile("zero", dim=3),
        noise=noise,
        integrator=IntegratorConfig(dt=1e-3),
        horizon=horizon,
        seed=0,
    )


def _so2_preset(noise: NoiseSpec, dt: float) -> Scenario:
    return Scenario(
        mode="so2",
        inertia=1.0,
        plant=dynamics_so2.plant_state(rot2(math.pi / 2.0), 10.0),
        observer=dynamics_so2.observer_state(np.eye(2), 0.0),
        gains=GainsSO2(gamma=40.0, kappa=200.0),
        torque=TorqueProfile("zero", dim=1),
        noise=noise,
        integrator=IntegratorConfig(dt=dt),
        horizon=5.0,
        seed=0,
    )


def preset(name: str) -> Scenario:
    """Named scenario from the numerical examples.

    The ``wu-so3-*`` tunings run 5 s noise-free; ``wu-so3-noisy`` uses
    K = 100 J0 with Gaussian noise of power 1e-5 over 30 s so that the last
    seconds are past every transient. ``so2-noisy`` runs at dt = 1e-4 to
    sample the 1e4 rad/s noise tone.
    """
    if name in _SO3_TUNINGS:
        K, gamma = _SO3_TUNINGS[name]
        return _so3_preset(K, gamma, NoiseSpec(), 5.0)
    if name == "wu-so3-noisy":
        return _so3_preset(100.0 * J0_WU, 20.0, NoiseSpec("gaussian_per_step", power=1e-5), 30.0)
    if name == "so2-demo":
        return _so2_preset(NoiseSpec(), 1e-3)
    if name == "so2-noisy":
        return _so2_preset(NoiseSpec("sinusoid", amplitude=0.1, frequency=1e4), 1e-4)
    raise UnknownPreset(name)


def with_overrides(s: Scenario, **paths) -> Scenario:
    """``with_overrides(s, **{"gains.gamma": 1e3})`` applied in order."""
    for path, value in paths.items():
        s = s.replace(path, copy.deepcopy(value))
    return s
