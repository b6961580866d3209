"""Floquet decompositions, periodic dynamical invariants, and non-Abelian
geometric phases for periodically driven finite-dimensional quantum systems.
"""

import json as _json

from ._core import (
    BranchBoundaryError,
    LevelCrossingError,
    ToleranceError,
    ValidationError,
    __version__,
    commutator_norm,
    default_config_json,
    herm_eig,
    polar_unitary,
    precessing_connection,
    run_scenario_json,
    self_check_json,
    spin_generators,
    unitary_exp,
    unitary_log,
)

__all__ = [
    "BranchBoundaryError",
    "LevelCrossingError",
    "ToleranceError",
    "ValidationError",
    "__version__",
    "commutator_norm",
    "default_config",
    "herm_eig",
    "polar_unitary",
    "precessing_connection",
    "run_scenario",
    "self_check",
    "spin_generators",
    "unitary_exp",
    "unitary_log",
]


def default_config():
    """The built-in spin1-precessing scenario config as a dict."""
    return _json.loads(default_config_json())


def run_scenario(config=None):
    """Run a scenario (dict config, or None for the built-in default) and
    return the report as a dict."""
    if config is None:
        config = default_config()
    return _json.loads(run_scenario_json(_json.dumps(config)))


def self_check(steps=512):
    """Run the acceptance self-check and return the report as a dict."""
    return _json.loads(self_check_json(steps))
