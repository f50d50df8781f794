"""Python bindings for the wcps simulator core.

Configs, commands and results cross the boundary as plain dicts.
"""

import csv
import io
import json

from . import _core
from ._core import (
    CertificationError,
    ConfigError,
    Error,
    NoSolutionError,
    NumericalError,
    ParameterError,
    cartpole_model,
    dare_residual,
    line_flood_reception,
    lqr_gain,
    solve_dare,
    solve_discrete_lyapunov,
    spectral_radius,
)

__all__ = [
    "CertificationError",
    "ConfigError",
    "Error",
    "NoSolutionError",
    "NumericalError",
    "ParameterError",
    "Simulator",
    "cartpole_model",
    "certify",
    "dare_residual",
    "default_config",
    "line_flood_reception",
    "lqr_gain",
    "run",
    "solve_dare",
    "solve_discrete_lyapunov",
    "spectral_radius",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def certify(config=None):
    """Mode catalog with certificates and tau_min."""
    return json.loads(_core.certify(_dump(config)))


def run(config=None):
    """Batch run. Returns (metrics, manifest, rows) with rows parsed from the CSV."""
    metrics, manifest, text = _core.run(_dump(config))
    rows = list(csv.DictReader(io.StringIO(text)))
    return json.loads(metrics), json.loads(manifest), rows


class Simulator:
    """Round-by-round access to the engine, speaking the gateway wire format."""

    def __init__(self, config=None):
        self._sim = _core.Simulator(_dump(config))

    @property
    def round(self):
        return self._sim.round

    def step(self):
        return json.loads(self._sim.step())

    def events(self):
        return json.loads(self._sim.events())

    def submit(self, command):
        self._sim.submit(json.dumps(command))

    def state(self):
        return json.loads(self._sim.state())

    def modes(self):
        return json.loads(self._sim.modes())
