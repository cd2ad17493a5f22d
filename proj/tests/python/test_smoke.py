# SPDX-FileCopyrightText: Copyright (c) 2026 molflow contributors. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import molflow


def test_two_phase_grid_has_100_steps():
    grid = molflow.TimeGrid.two_phase()
    assert grid.num_steps == 100
    assert grid.points[0] == 0.0 and grid.points[-1] == 1.0
    assert grid.points[60] == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        molflow.TimeGrid.parse("uniform:abc")


def test_marginal_matches_mixture_of_corruptions():
    p = [0.5, 0.2, 0.3]
    t = 0.4
    mixture = np.zeros(3)
    for v1, w in enumerate(p):
        mixture += w * np.array(molflow.corruption_dist(v1, t, 3))
    closed = [(1 - t) / 3 + t * pj for pj in p]
    np.testing.assert_allclose(molflow.marginal_type_dist(p, t), mixture, atol=1e-12)
    np.testing.assert_allclose(mixture, closed, atol=1e-12)


def test_train_time_mean():
    times = np.array(molflow.sample_train_times(200_000, seed=3))
    assert times.min() >= 0.0 and times.max() <= 1.0
    assert times.mean() == pytest.approx(0.02 * 0.5 + 0.98 * 1.9 / 2.9, abs=0.003)


def test_losses_by_hand():
    a = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    b = np.array([[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    assert molflow.pos_loss(a, b) == pytest.approx(4.0 / 6.0)
    assert molflow.chamfer(a, a) == 0.0
    assert molflow.type_loss(np.zeros((2, 4)), [0, 3]) == pytest.approx(math.log(4.0))
    assert molflow.dpo_distance_term(1.0, 1.0, 2.0, 2.0, 5.0) == pytest.approx(math.log(2.0))


def test_model_forward_and_generate():
    data = molflow.generate_dataset(5, seed=1)
    rec = data[0]
    assert rec["positions"].shape == (len(rec["types"]), 3)
    model = molflow.Model.init(hidden=8, layers=2, seed=4)
    x1_hat, logits = model.forward(rec["positions"], rec["types"], 0.3, rec["feature"], rec["anchors"])
    assert x1_hat.shape == rec["positions"].shape
    assert logits.shape == (len(rec["types"]), 6)
    np.testing.assert_allclose(x1_hat.mean(axis=0), 0.0, atol=1e-12)

    out = model.generate(rec["feature"], rec["anchors"], 7, grid="two-phase", seed=9)
    assert out["evaluations"] == 100
    assert out["positions"].shape == (7, 3)
    again = model.generate(rec["feature"], rec["anchors"], 7, grid="two-phase", seed=9)
    np.testing.assert_array_equal(out["positions"], again["positions"])
    assert math.isfinite(molflow.synthetic_reward(out["positions"], out["types"], rec["anchors"]))


def test_cli_round_trip(tmp_path):
    data = tmp_path / "d.jsonl"
    assert molflow.run_cli(["gen-data", "--count", "12", "--seed", "2", "--out", str(data)]) == 0
    assert len(molflow.load_dataset(str(data))) == 12
    assert molflow.run_cli(["gen-data", "--out", str(data), "--set", "data.cuont=3"]) == 1

    ckpt = tmp_path / "m.ckpt"
    args = ["train", "--data", str(data), "--out", str(ckpt), "--steps", "3",
            "--set", "model.hidden=8", "--set", "model.layers=2"]
    assert molflow.run_cli(args) == 0
    model = molflow.Model.load(str(ckpt))
    assert len(model.checkpoint_id) == 16
