"""Python front end for the uni-task training engine."""

import json
import os

from ._unitask import (
    UnitaskError,
    generate_synthetic,
    microtask_hetero_time,
    microtask_time,
    read_metrics,
    unitask_time,
)
from ._unitask import run_config as _run_config

__all__ = [
    "UnitaskError",
    "generate_synthetic",
    "microtask_hetero_time",
    "microtask_time",
    "read_metrics",
    "train",
    "unitask_time",
]


def train(config, base_dir=None, write_csv=False):
    """Run one experiment. `config` is a dict in the JSON config format or a path to a config file."""
    if isinstance(config, (str, os.PathLike)):
        path = os.fspath(config)
        with open(path, encoding="utf-8") as handle:
            config = json.load(handle)
        if base_dir is None:
            base_dir = os.path.dirname(os.path.abspath(path))
    return _run_config(json.dumps(config), base_dir or "", write_csv)
