import json

import numpy as np
import pytest

from classifier.network import build_model
from dynamics.warp import AugmentConfig
from harness.config import ExperimentConfig
from harness.experiments import (BoundaryMap, ExperimentRunner, correlation_report, derived_seed,
                                 fixed_point_spread, repressilator_axes, run_accuracy_table, run_subhopf_probe)
from harness.result_store import NullStore, ResultStore, cell_key
from models.arch import ArchConfig, TrainOpts
from utils.config import Config
from utils.errors import ConfigError, ProfileNotFound


@pytest.fixture
def tiny_experiment(tiny_arch, tmp_path):
    return ExperimentConfig(systems=("simple_oscillator",), methods=("model", "critical_points", "parameters"),
                            test_size=10, n_train=30, grid_size=16, arch=tiny_arch,
                            train=TrainOpts(lr=5e-3, epochs=1, batch_size=16, runs=2), mc_evals=2,
                            output_dir=str(tmp_path))


class TestConfig:
    def test_profile_layering(self):
        config = Config("desk")
        assert config.get("profile") == "desk"
        assert config.get("train/epochs") == 20
        assert config.get("augment/bound") == 4.0
        assert config.get("missing/key", 7) == 7

    def test_learning_rate(self):
        assert Config("paper").get_default("train/lr") == 1e-4
        assert Config("paper").get("train/lr") == 1e-4
        assert Config("desk").get("train/lr") == 5e-4
        assert TrainOpts().lr == 1e-4

    def test_set_and_reset(self):
        config = Config()
        config.set("train/epochs", 3)
        config.set("new/section/value", "x")
        assert config.get("train/epochs") == 3
        assert config.get("new/section/value") == "x"
        config.reset_to_defaults()
        assert config.get("train/epochs") == 20

    def test_overrides_file(self, tmp_path):
        path = tmp_path / "override.json"
        path.write_text(json.dumps({"train": {"epochs": 2}, "seed": 9}), encoding="utf-8")
        config = Config("desk", path)
        assert config.get("train/epochs") == 2
        assert config.get("train/batch_size") == 64
        assert config.get("seed") == 9

    def test_bad_overrides(self, tmp_path):
        path = tmp_path / "override.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError):
            Config("desk", path)
        with pytest.raises(ConfigError):
            Config("desk", tmp_path / "missing.json")

    def test_unknown_profile(self):
        with pytest.raises(ProfileNotFound, match="available: desk, paper"):
            Config("laptop")

    def test_export_round_trip(self, tmp_path):
        config = Config("paper")
        path = tmp_path / "config.json"
        config.export_to_json(path)
        assert json.loads(path.read_text(encoding="utf-8")) == config.as_dict()


class TestExperimentConfig:
    def test_from_config(self):
        experiment = ExperimentConfig.from_config(Config("desk"), "out")
        assert experiment.profile == "desk"
        assert experiment.arch.input_size == 64
        assert experiment.augment.bound == 4.0
        assert experiment.runs == 5
        assert experiment.output_dir == "out"

    def test_hash_is_stable_and_ignores_placement(self):
        experiment = ExperimentConfig()
        digest = experiment.config_hash()
        assert len(digest) == 64
        assert ExperimentConfig().config_hash() == digest
        assert experiment.with_changes(threads=8, output_dir="elsewhere").config_hash() == digest
        assert experiment.with_changes(seed=1).config_hash() != digest
        assert experiment.with_changes(arch=ArchConfig(dropout=0.5)).config_hash() != digest


class TestResultStore:
    def test_cell_key(self):
        assert cell_key("accuracy", "augmented_so", "model", 100) == "accuracy__augmented_so__model__100"
        assert "/" not in cell_key("a/b", "c d")

    def test_get_or_compute_runs_once(self, tmp_path):
        store = ResultStore(tmp_path, "a" * 64)
        calls = []

        def compute():
            calls.append(1)
            return [0.5, 0.75]

        assert store.get_or_compute("cell", compute) == [0.5, 0.75]
        assert store.get_or_compute("cell", compute) == [0.5, 0.75]
        assert len(calls) == 1
        reopened = ResultStore(tmp_path, "a" * 64)
        assert reopened.cells() == ["cell"]
        assert reopened.load("cell") == [0.5, 0.75]

    def test_configurations_do_not_mix(self, tmp_path):
        ResultStore(tmp_path, "a" * 64).save("cell", 1)
        other = ResultStore(tmp_path, "b" * 64)
        assert other.load("cell") is None
        assert other.cells() == []

    def test_unreadable_cell_is_recomputed(self, tmp_path):
        store = ResultStore(tmp_path, "c" * 64)
        store.save("cell", 1)
        (store.base_dir / "cell.json").write_text("{broken", encoding="utf-8")
        assert store.load("cell") is None
        assert store.get_or_compute("cell", lambda: 2) == 2

    def test_null_store(self):
        assert NullStore().get_or_compute("x", lambda: 3) == 3


class TestBoundaryMap:
    def _map(self):
        return BoundaryMap("simple_oscillator", ("a", "omega"), np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0]),
                           np.array([[0.0, 1.0, 1.0], [0.2, 0.3, 0.4]]), 3,
                           [np.array([[1.0, 0.0], [1.0, 1.0]])], np.array([[0, 1, 1], [0, 0, 1]]))

    def test_accuracy_and_flips(self):
        boundary = self._map()
        assert boundary.accuracy() == pytest.approx(5 / 6)
        assert boundary.flip_positions() == [pytest.approx(0.5), None]

    def test_dict_round_trip(self):
        boundary = self._map()
        again = BoundaryMap.from_dict(json.loads(json.dumps(boundary.to_dict())))
        np.testing.assert_array_equal(again.values, boundary.values)
        np.testing.assert_array_equal(again.truth, boundary.truth)
        assert again.axis_names == ("a", "omega")
        assert len(again.overlay) == 1

    def test_frame(self):
        frame = self._map().to_frame()
        assert list(frame.columns) == ["system", "a", "omega", "mean_cycle_prediction", "true_label"]
        assert len(frame) == 6


class TestCorrelation:
    def test_monotone(self):
        distances = np.linspace(-1, 1, 40)
        labels = (distances > 0).astype(int)
        report = correlation_report(1 / (1 + np.exp(-5 * distances)), distances, labels, "so")
        assert report.applicable
        assert report.rho == pytest.approx(1.0)
        assert set(report.curves["label"]) == {"point", "cycle"}

    def test_constant_predictions(self):
        report = correlation_report(np.full(5, 0.5), np.arange(5.0), np.array([0, 0, 1, 1, 1]))
        assert report.status == "not_applicable"
        assert report.rho is None


def test_derived_seed():
    assert derived_seed(1, 2, 3) == derived_seed(1, 2, 3)
    assert derived_seed(1, 2, 3) != derived_seed(1, 2, 4)


def test_repressilator_axes():
    alphas, betas = repressilator_axes(10)
    assert alphas[0] == pytest.approx(1.5) and alphas[-1] == pytest.approx(28.5)
    assert betas[0] == pytest.approx(0.5)


def test_fixed_point_spread():
    narrow = fixed_point_spread(AugmentConfig(bound=1.0, frame=1.0), 40, 0)
    assert 0.0 < narrow
    assert np.isfinite(fixed_point_spread(AugmentConfig(), 40, 0))


def test_subhopf_probe(tiny_experiment, tiny_arch):
    table = run_subhopf_probe(tiny_experiment, models=[build_model(tiny_arch, 0)], count=4)
    assert table["mu"].tolist() == [-0.4, -0.1, 0.3]
    assert (table["runs"] == 1).all()
    assert np.all(np.isfinite(table["point_logit_mean"]))


def test_unknown_method(tiny_experiment):
    runner = ExperimentRunner(tiny_experiment.with_changes(output_dir=None))
    with pytest.raises(ConfigError):
        runner.method_accuracies("oracle", runner.clean_test_set("simple_oscillator"))


def test_accuracy_table_resumes(tiny_experiment, tmp_path):
    table = run_accuracy_table(tiny_experiment)
    assert table["method"].tolist() == ["model", "critical_points", "parameters"]
    assert table["runs"].tolist() == [2, 1, 1]
    assert table["accuracy_mean"].between(0.0, 1.0).all()
    assert (table["config_hash"] == tiny_experiment.config_hash()).all()
    assert len(list((tmp_path / "models").rglob("*.twck"))) == 2

    resumed = ExperimentRunner(tiny_experiment)
    assert len(resumed.store.cells()) == 3
    again = run_accuracy_table(tiny_experiment, runner=resumed)
    assert again.equals(table)
