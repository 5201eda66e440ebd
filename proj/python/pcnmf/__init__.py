# Copyright 2026 The pcnmf Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Piecewise-constant weighted NMF for spectrum sensing.

Configs are plain dicts; missing keys keep their defaults.
"""

import json

import numpy as np

from . import _pcnmf
from ._pcnmf import (
    ConfigError,
    DegenerateFactorError,
    Error,
    IoError,
    NumericFailure,
    ShapeError,
    UndefinedMetricError,
    penalty_smoothed,
    rmse_missing,
    transition_count,
)

__all__ = [
    "ConfigError", "DegenerateFactorError", "Error", "IoError", "NumericFailure",
    "ShapeError", "UndefinedMetricError", "default_experiment_config",
    "default_solver_config", "generate_scenario", "infer_activations",
    "penalty_smoothed", "rmse_missing", "run_sweep", "solve", "transition_count",
    "weighted_fit",
]


def _text(config):
    return "" if config is None else json.dumps(config)


def _mask(values, mask):
    return None if mask is None else np.asarray(mask, dtype=float)


def default_solver_config():
    return json.loads(_pcnmf.default_solver_config())


def default_experiment_config():
    return json.loads(_pcnmf.default_experiment_config())


def solve(values, mask=None, config=None):
    """Factorize values ~ gains @ activations over the observed entries.

    Missing entries are the zeros of `mask` (all observed when omitted).
    Returns a dict with gains, activations and trace.
    """
    return _pcnmf.solve(np.asarray(values, dtype=float), _mask(values, mask), _text(config))


def infer_activations(values, mask, gains, config=None):
    """Activations for frozen gains."""
    return _pcnmf.infer_activations(np.asarray(values, dtype=float), _mask(values, mask),
                                    np.asarray(gains, dtype=float), _text(config))


def weighted_fit(values, mask, gains, activations):
    return _pcnmf.weighted_fit(np.asarray(values, dtype=float), _mask(values, mask),
                               np.asarray(gains, dtype=float),
                               np.asarray(activations, dtype=float))


def generate_scenario(config=None):
    """One synthetic scenario; observed entries are zero where mask is 0."""
    return _pcnmf.generate_scenario(_text(config))


def run_sweep(config=None):
    """Monte Carlo comparison; dict with `summary` and `trials` row lists."""
    return _pcnmf.run_sweep(_text(config))
