"""Manifold-free angular-speed observers for rigid bodies on SO(3) and SO(2)."""

from .harness import Metrics, compute_metrics, run, simulate, sweep
from .scenario import Scenario, load_config, preset

__all__ = ["Metrics", "Scenario", "compute_metrics", "load_config", "preset", "run", "simulate", "sweep"]
__version__ = "0.1.0"
