import json
import math

import pytest

import froglab


def test_closed_forms():
    assert froglab.hyperplane_hit_exact(1 / 3, 2) == pytest.approx(0.25)
    assert froglab.left_hit_probability("death", 0.8) == pytest.approx(0.5)
    assert froglab.reference_brw_boundary(1.0) == 0.5
    assert froglab.mu_exact_1d(0.0, 0.0, 3.0) == pytest.approx(3.0)
    assert froglab.k0_threshold(0.0) == 1


def test_exact_and_mc_agree():
    args = dict(d=2, w=0.6, alpha=0.4, hold=0.0, start=[0, 0], targets=[[-3, 1]], radius=8)
    exact = froglab.exact_hit_probability(**args)
    est, se = froglab.mc_hit_probability(**args, trials=20000, seed=2)
    assert 0 < exact < 1
    assert abs(est - exact) < 4 * math.sqrt(exact * (1 - exact) / 20000)


def test_certificate_dict():
    cert = froglab.certify_transience(2, 0.95, 0.95, budget=400, seed=1)
    assert cert["verdict"] == "certified-evidence"
    assert cert["ci_high"] < 1
    with pytest.raises(ValueError):
        froglab.certify_transience(2, 0.9, 0.9, strategy="nope")


def test_xi_and_blocks():
    assert froglab.sample_xi(1.0) == 2
    p = froglab.block_open_probability(2, 2, 0.5, 0.0, trials=20)
    assert p["mean"] == 1.0


def test_sweep_and_config_errors(tmp_path):
    cfg = {"alpha": [0.2], "w": [0.9], "arena_radius": 10, "n_boxes": 2, "trials": 3, "cert_budget": 50,
           "out_dir": str(tmp_path)}
    doc = froglab.run_sweep(json.dumps(cfg))
    assert len(doc["points"]) == 1
    with pytest.raises(froglab.ConfigError):
        froglab.run_sweep(json.dumps({"alpha": [3]}))
