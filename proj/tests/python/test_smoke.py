import math
import os

import numpy as np
import pytest

import mfstmcmc as mf

CONFIG_DIR = os.environ.get("MFST_CONFIG_DIR", "configs")


@pytest.fixture(scope="module")
def birth_death():
    return mf.load_model(os.path.join(CONFIG_DIR, "models", "birth_death.json"))


def test_model_introspection(birth_death):
    assert birth_death.species == ["X"]
    assert birth_death.parameters == ["k", "gamma"]
    th = birth_death.theta_log10({"k": 10.0, "gamma": 1.0})
    assert th == pytest.approx([1.0, 0.0])
    with pytest.raises(ValueError):
        birth_death.theta_log10({"k": 10.0})  # gamma missing


def test_solve_matches_poisson(birth_death):
    th = birth_death.theta_log10({"k": 10.0, "gamma": 1.0})
    sol = mf.solve_cme(birth_death, th, [30], [0.5, 2.0], fsp_tol=1e-8)
    assert sol.error_bound(1) <= 1e-8
    for k, t in enumerate(sol.times):
        lam = 10.0 * (1.0 - math.exp(-t))
        states = sol.states[:, 0]
        pois = np.exp(states * math.log(lam) - lam
                      - np.vectorize(math.lgamma)(states + 1.0))
        assert np.abs(sol.dist[k] - pois).sum() < 1e-6


def test_simulate_shapes_and_determinism(birth_death):
    th = birth_death.theta_log10({"k": 10.0, "gamma": 1.0})
    a = mf.simulate(birth_death, th, [1.0, 2.0], 25, ["X"], seed=42)
    b = mf.simulate(birth_death, th, [1.0, 2.0], 25, ["X"], seed=42)
    c = mf.simulate(birth_death, th, [1.0, 2.0], 25, ["X"], seed=43)
    assert a.times == [1.0, 2.0]
    assert a.total_cells == 50
    assert a.cells == b.cells
    assert a.cells != c.cells


def test_infer_runs_and_is_deterministic(birth_death, tmp_path):
    th = birth_death.theta_log10({"k": 10.0, "gamma": 1.0})
    data = mf.simulate(birth_death, th, [1.0, 2.0], 30, ["X"], seed=7)

    records = []
    out = mf.infer(birth_death, data, [[24], [48]], strategy="tuned-it",
                   num_particles=32, seed=11, on_level=records.append)
    res = out["result"]
    assert res.samples.shape == (32, 2)
    assert np.isfinite(res.log_evidence)
    assert res.log_evidence_sigma > 0.0
    assert len(records) == len(res.levels)
    assert res.levels[-1]["beta"] == 1.0
    assert res.levels[-1]["fidelity"] == 2
    assert out["solve_counts"][1] == out["full_model_solves"] > 0

    again = mf.infer(birth_death, data, [[24], [48]], strategy="tuned-it",
                     num_particles=32, seed=11)
    assert np.array_equal(res.samples, again["result"].samples)

    # round trip through the CSV format
    data.save(str(tmp_path / "d.csv"))
    back = mf.load_dataset(str(tmp_path / "d.csv"))
    assert back.times == data.times
    assert back.cells == data.cells


def test_schedule_numerics():
    # two-point populations with closed-form answers
    assert mf.tune_delta_beta([0.0, math.log(100.0)], 0.0, 0.9) == pytest.approx(
        math.log(19.0) / math.log(100.0), abs=1e-4)
    assert mf.it_criterion([math.log(50.0), 0.0], [0.0, math.log(100.0)],
                           0.3, 0.2) == pytest.approx(-0.5612075066739544)
    assert mf.it_criterion([1.0, 2.0], [1.0, 2.0], 0.2, 0.4) >= -1e-12
    b, cov = mf.tune_beta_cross_fidelity([0.5, 0.5], [0.5, 0.5], 0.25, 1.0)
    assert b == pytest.approx(1.0)
    assert cov == pytest.approx(0.0)
    assert mf.cross_weight_cov([-1.0, -2.0], [-3.0, -1.0], 0.5, 0.8) == \
        pytest.approx(0.7818063576087741)


def test_infer_validates_input(birth_death):
    th = birth_death.theta_log10({"k": 10.0, "gamma": 1.0})
    data = mf.simulate(birth_death, th, [1.0], 10, ["X"], seed=1)
    with pytest.raises(RuntimeError):
        mf.infer(birth_death, data, [[24]], num_particles=2, seed=1)
    with pytest.raises(ValueError):
        mf.infer(birth_death, data, [[24]], strategy="bogus", seed=1)
