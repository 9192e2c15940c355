import io

import numpy as np
import pandas as pd
import pytest

from classifier import build_model, save
from main import main
from utils.dataset_io import read_dataset
from utils.logging_utils import TopoHopfLogger


@pytest.fixture(autouse=True)
def fresh_logger():
    yield
    TopoHopfLogger.reset()


@pytest.fixture
def cells_csv(tmp_path, rng):
    points = rng.uniform(-1, 1, size=(30, 2))
    velocities = np.stack([-points[:, 1], points[:, 0]], axis=1)
    frame = pd.DataFrame({"x": points[:, 0], "y": points[:, 1], "vx": velocities[:, 0], "vy": velocities[:, 1]})
    path = tmp_path / "cells.csv"
    frame.to_csv(path, index=False)
    return path


def _run(tmp_path, *args):
    return main(["--out", str(tmp_path), "--log-level", "WARNING", *args])


def test_generate(tmp_path):
    assert _run(tmp_path, "generate", "--system", "simple_oscillator", "--count", "4", "--sigma", "0.1") == 0
    dataset = read_dataset(tmp_path / "simple_oscillator-test.twaf")
    assert len(dataset) == 4
    assert dataset.manifest["noise_sigma"] == 0.1
    assert (tmp_path / "config.json").exists()


@pytest.mark.parametrize("args, code", [
    (["generate", "--system", "lorenz"], 2),
    (["--profile", "laptop", "report"], 2),
    (["predict", "--model", "missing.twck", "--input", "missing.twaf"], 3),
])
def test_exit_codes(tmp_path, args, code):
    assert _run(tmp_path, *args) == code


def test_interp_and_predict(tmp_path, tiny_arch, cells_csv, capsys):
    assert _run(tmp_path, "interp", "--input", str(cells_csv), "--size", "16") == 0
    dataset = read_dataset(tmp_path / "cells.twaf")
    assert dataset.manifest["kind"] == "scattered"
    assert dataset.samples[0].label is None
    assert dataset.has_raw
    capsys.readouterr()

    model_path = save(build_model(tiny_arch, 1), tmp_path / "tiny")
    assert _run(tmp_path, "predict", "--model", str(model_path), "--input", str(cells_csv), "--mc-evals", "2") == 0
    table = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(table.columns) == ["index", "point_logit", "cycle_logit", "point_prob", "cycle_prob", "prediction"]
    assert table["prediction"].iloc[0] in ("point", "cycle")

    assert _run(tmp_path, "predict", "--model", str(model_path), "--input", str(tmp_path / "cells.twaf")) == 0
    table = pd.read_csv(io.StringIO(capsys.readouterr().out), keep_default_na=False)
    assert table["true_label"].tolist() == [""]


def test_report_on_empty_directory(tmp_path):
    assert _run(tmp_path, "report") == 0
