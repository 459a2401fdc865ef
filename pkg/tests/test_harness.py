import json

import numpy as np
import pytest

from cmabpta import (ExperimentConfig, InvalidParameterError, read_results, run_experiment,
                     run_replication, write_results)
from cmabpta.environments import InstanceSpecError
from cmabpta.harness import ReplicationError, metadata_path

BLB4 = {"type": "blb", "R": 4, "K": 2, "p": 0.2, "delta": 0.15}
BLB16 = {"type": "blb", "R": 16, "K": 2, "p": 0.2, "delta": 0.15}
TAB = {"type": "tabular", "means": [0.3, 0.6, 0.5], "feasible": [[0], [1]],
       "trigger": [[1.0, 0.0, 0.5], [0.0, 1.0, 0.25]], "weights": [1.0, 1.0, 2.0]}


def cfg(**kw):
    return ExperimentConfig(**({"instance": BLB4, "learner": "cts", "T": 300} | kw))


@pytest.mark.parametrize("learner", ["cts", "cucb"])
def test_single_feasible_arm_has_zero_regret(learner):
    one = {"type": "tabular", "means": [0.4, 0.5], "feasible": [[0]], "trigger": [[1.0, 0.5]]}
    agg = run_experiment(cfg(instance=one, learner=learner, T=200, n_runs=3))
    assert np.all(agg.mean == 0) and np.all(agg.std == 0)


@pytest.mark.parametrize("learner", ["cts", "cucb"])
def test_replication_is_deterministic(learner):
    a = run_replication(cfg(learner=learner, master_seed=7), 3)
    b = run_replication(cfg(learner=learner, master_seed=7), 3)
    assert a.seed == b.seed and np.array_equal(a.cum_regret, b.cum_regret)


def test_replications_differ():
    a, b = run_replication(cfg(), 0), run_replication(cfg(), 1)
    assert a.seed != b.seed and not np.array_equal(a.cum_regret, b.cum_regret)


@pytest.mark.parametrize("learner", ["cts", "cucb"])
@pytest.mark.parametrize("instance", [BLB4, {"type": "needle", "R": 6, "K": 3, "bad_page": 2},
                                      {"type": "uniform", "L": 2, "R": 5, "K": 2, "seed": 4}])
def test_kernel_matches_reference(learner, instance):
    c = cfg(learner=learner, instance=instance, T=400, record_every=7)
    for k in range(3):
        fast = run_replication(c, k, engine="kernel").cum_regret
        slow = run_replication(c, k, engine="python").cum_regret
        assert np.array_equal(fast, slow)


def test_kernel_rejects_tabular():
    with pytest.raises(InvalidParameterError):
        run_replication(cfg(instance=TAB), 0, engine="kernel")


def test_tabular_runs_on_reference_engine():
    agg = run_experiment(cfg(instance=TAB, T=500, n_runs=2))
    assert np.all(np.diff(agg.mean) >= 0) and agg.final_mean > 0


def test_single_run_std_is_zero():
    agg = run_experiment(cfg(n_runs=1))
    assert np.all(agg.std == 0)


def test_aggregate_is_mean_and_sample_std():
    c = cfg(n_runs=4)
    runs = np.vstack([run_replication(c, k).cum_regret for k in range(4)])
    agg = run_experiment(c)
    assert np.array_equal(agg.mean, runs.mean(axis=0))
    assert np.array_equal(agg.std, runs.std(axis=0, ddof=1))


@pytest.mark.parametrize("learner", ["cts", "cucb"])
def test_parallelism_invariance(learner):
    a = run_experiment(cfg(learner=learner, n_runs=6, parallelism=1))
    b = run_experiment(cfg(learner=learner, n_runs=6, parallelism=4))
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.std, b.std)


def test_record_stride():
    c = cfg(T=1600, record_every=100)
    agg = run_experiment(c)
    assert len(agg.mean) == 16 and agg.rounds.tolist() == list(range(100, 1601, 100))


def test_record_stride_keeps_last_round():
    c = cfg(T=250, record_every=100)
    assert c.recorded_rounds().tolist() == [100, 200, 250]
    assert len(run_replication(c, 0).cum_regret) == 3


def test_cumulative_regret_nondecreasing():
    for learner in ("cts", "cucb"):
        assert np.all(np.diff(run_replication(cfg(learner=learner, T=2000), 0).cum_regret) >= 0)


def test_metadata(tmp_path):
    agg = run_experiment(cfg(learner="cucb", master_seed=99))
    meta = agg.metadata
    assert meta["config"]["master_seed"] == 99
    assert meta["learner"]["exploration"] == 1.5
    assert meta["rng"]["generator"] == "numpy.random.Philox"
    assert meta["opt_value"] == pytest.approx(0.36)


def test_round_trip(tmp_path):
    agg = run_experiment(cfg(n_runs=3, record_every=10))
    path = write_results(agg, tmp_path / "out" / "r.csv")
    back = read_results(path)
    assert np.array_equal(back.rounds, agg.rounds)
    assert np.array_equal(back.mean, agg.mean) and np.array_equal(back.std, agg.std)
    assert back.n_runs == 3 and back.metadata == json.loads(json.dumps(agg.metadata))
    assert path.read_text().splitlines()[0] == "round,mean_cum_regret,std_cum_regret"
    assert metadata_path(path).exists()


class TestConfig:
    @pytest.mark.parametrize("kw", [{"T": 0}, {"n_runs": 0}, {"record_every": 0}, {"learner": "ucb"},
                                    {"master_seed": -1}, {"master_seed": 2 ** 64}])
    def test_rejects(self, kw):
        with pytest.raises(InvalidParameterError):
            cfg(**kw)

    def test_unknown_field(self):
        with pytest.raises(InstanceSpecError, match="horizon"):
            ExperimentConfig.from_dict({"instance": BLB4, "learner": "cts", "T": 10, "horizon": 5})

    def test_load(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg().to_dict()))
        assert ExperimentConfig.load(path) == cfg()


def test_failure_reports_seed(monkeypatch):
    import cmabpta.harness as h

    def boom(*a, **k):
        raise RuntimeError("boom")
    monkeypatch.setattr(h, "_run_kernel", boom)
    c = cfg(master_seed=5)
    with pytest.raises(ReplicationError, match=str(h.replication_seed(5, 0))):
        run_experiment(c)


@pytest.mark.slow
def test_sublinear_growth():
    agg = run_experiment(ExperimentConfig(BLB16, "cts", 100_000, n_runs=20, record_every=1000))
    half = agg.mean[agg.rounds == 50_000][0]
    assert (agg.final_mean - half) / half < 1


@pytest.mark.slow
def test_final_regret_range():
    c = ExperimentConfig(BLB16, "cts", 100_000, record_every=100_000)
    finals = [run_replication(c, k).cum_regret[-1] for k in range(40)]
    inside = np.mean([(50 <= f <= 400) for f in finals])
    assert inside >= 0.95, finals
