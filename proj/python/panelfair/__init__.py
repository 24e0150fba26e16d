"""Simulator for individually fair online classification under one-sided feedback."""

import json
from pathlib import Path

from . import _panelfair
from ._panelfair import ConfigError, InputError, IoError, gap_example, scenario_names

__all__ = [
    "ConfigError",
    "InputError",
    "IoError",
    "gap_example",
    "load_config",
    "run",
    "scenario",
    "scenario_names",
    "verify",
    "version",
]


def version():
    return _panelfair.version()


def scenario(name):
    """Blocks of a built-in scenario as a dict."""
    return json.loads(_panelfair.scenario_json(name))


def load_config(path):
    """Reads a .json or .toml config and expands its scenario."""
    return json.loads(_panelfair.load_config_json(str(path)))


def run(config, out_dir=None, timing=False):
    """Runs one protocol.

    `config` is a dict or a path to a .json/.toml file. Returns the summary
    dict with the per-round ledger under "ledger". With `out_dir`, the run is
    also exported there.
    """
    if isinstance(config, (str, Path)):
        config = load_config(config)
    out = "" if out_dir is None else str(out_dir)
    return json.loads(_panelfair.run_json(json.dumps(config), out, timing))


def verify(seed=1, quick=True):
    """List of check results, one dict per check."""
    return json.loads(_panelfair.verify_json(seed, quick))
