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

import numpy as np
import pytest

import pcnmf


def test_solve_recovers_low_rank_product():
    rng = np.random.default_rng(0)
    s = rng.uniform(0.1, 1.0, (8, 2)) @ rng.uniform(0.1, 1.0, (2, 30))
    out = pcnmf.solve(s, config={"rank": 2, "beta": 0.0, "max_iters": 3000, "rel_tol": 0.0})
    assert out["gains"].shape == (8, 2)
    assert out["activations"].shape == (2, 30)
    assert np.linalg.norm(out["gains"] @ out["activations"] - s) < 1e-6 * np.linalg.norm(s)
    np.testing.assert_allclose(np.linalg.norm(out["gains"], axis=0), 1.0)
    assert len(out["trace"]["objective"]) == 3000


def test_weighted_fit_matches_numpy():
    rng = np.random.default_rng(1)
    s = rng.uniform(size=(5, 7))
    w = (rng.uniform(size=(5, 7)) < 0.6).astype(float)
    g = rng.uniform(size=(5, 2))
    p = rng.uniform(size=(2, 7))
    expect = 0.5 * np.sum(w * (s - g @ p) ** 2)
    assert pcnmf.weighted_fit(s, w, g, p) == pytest.approx(expect, rel=1e-13)


def test_infer_with_frozen_gains():
    rng = np.random.default_rng(2)
    g = rng.uniform(0.2, 1.0, (6, 2))
    p = np.repeat([[1.0, 3.0], [2.0, 2.0]], 10, axis=1)
    out = pcnmf.infer_activations(g @ p, np.ones((6, 20)), g,
                                  config={"beta": 0.0, "max_iters": 2000})
    np.testing.assert_allclose(out["activations"], p, rtol=1e-4)


def test_scenario_and_metrics():
    sc = pcnmf.generate_scenario({"n_su": 5, "n_pu": 2, "t_slots": 40, "seed": 3})
    assert sc["observed"].shape == (5, 40)
    assert sc["p_true"].shape == (2, 40)
    assert set(np.unique(sc["mask"])) <= {0.0, 1.0}
    assert pcnmf.rmse_missing(sc["s_clean"], sc["s_clean"], sc["mask"]) == 0.0
    assert pcnmf.transition_count(np.array([[0.0, 0.0, 2.0, 2.0]]), 1.0) == [1]
    with pytest.raises(pcnmf.UndefinedMetricError):
        pcnmf.rmse_missing(sc["s_clean"], sc["s_clean"], np.ones((5, 40)))


def test_sweep_rows_and_errors():
    cfg = {
        "scenario": {"n_su": 5, "n_pu": 2, "t_slots": 40},
        "gamma_window": 20,
        "solver": {"rank": 2, "max_iters": 30},
        "trials": 2,
        "sweep": [{"param": "p_obs", "values": [0.6, 1.0]}],
        "record_timing": False,
    }
    out = pcnmf.run_sweep(cfg)
    assert len(out["summary"]) == 4
    full = [r for r in out["summary"] if r["sweep_value"] == 1.0]
    assert all(r["mean_rmse"] is None for r in full)
    assert len(out["trials"]) == 8
    with pytest.raises(pcnmf.ConfigError):
        pcnmf.run_sweep({"trials": 0})
    with pytest.raises(pcnmf.ShapeError):
        pcnmf.solve(np.ones((3, 4)), np.ones((3, 5)))
    assert pcnmf.default_solver_config()["beta"] == 0.005
