import numpy as np
import pytest

from dynamics.rasterize import make_zoo_dataset
from metadata import DATASET_MAGIC
from models.dataset import Dataset, LabeledSample
from utils.dataset_io import (DatasetArchive, canonical_json, read_dataset, read_scattered_csv, seal,
                              unseal, write_dataset)
from utils.errors import BadMagic, CorruptPayload, DataError, IoError, VersionMismatch


@pytest.fixture
def dataset():
    return make_zoo_dataset("simple_oscillator", 8, seed=3, sigma=0.1, size=16)


def test_round_trip(dataset, tmp_path):
    path = write_dataset(dataset, tmp_path / "so")
    assert path.name == "so.twaf"
    assert read_dataset(path) == dataset


def test_round_trip_without_raw(tmp_path):
    dataset = make_zoo_dataset("bzreaction", 5, seed=1, size=16, keep_raw=False)
    assert read_dataset(write_dataset(dataset, tmp_path / "bz.twaf")) == dataset


def test_unlabeled_sample(tmp_path):
    sample = LabeledSample(np.zeros((4, 4)), None, [], 0.0, np.ones((2, 4, 4)))
    loaded = read_dataset(write_dataset(Dataset([sample], {"kind": "scattered"}), tmp_path / "u"))
    assert loaded.samples[0].label is None
    assert loaded.labels().tolist() == [-1]


def test_encoding_is_deterministic(dataset):
    assert DatasetArchive.encode(dataset) == DatasetArchive.encode(dataset)


def test_truncated(dataset):
    data = DatasetArchive.encode(dataset)
    with pytest.raises(CorruptPayload):
        DatasetArchive.decode(data[:len(data) // 2])


def test_flipped_byte(dataset):
    data = bytearray(DatasetArchive.encode(dataset))
    data[40] ^= 0xFF
    with pytest.raises(CorruptPayload):
        DatasetArchive.decode(bytes(data))


def test_bad_magic(dataset):
    data = DatasetArchive.encode(dataset)
    with pytest.raises(BadMagic):
        DatasetArchive.decode(b"XXXX" + data[4:])


def test_version_mismatch():
    with pytest.raises(VersionMismatch):
        unseal(seal(DATASET_MAGIC, 99, b"body"), DATASET_MAGIC, 1)


def test_seal_round_trip():
    assert unseal(seal(b"ABCD", 3, b"payload"), b"ABCD", 3) == b"payload"


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        read_dataset(tmp_path / "missing.twaf")


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": [1.5, None]}) == b'{"a":[1.5,null],"b":1}'


class TestScatteredCsv:
    def test_reads_columns(self, tmp_path):
        path = tmp_path / "cells.csv"
        path.write_text("x,y,vx,vy\n0,0,1,0\n1,2,0.5,-1\n", encoding="utf-8")
        scattered = read_scattered_csv(path)
        assert len(scattered) == 2
        np.testing.assert_array_equal(scattered.velocities[1], (0.5, -1.0))

    def test_missing_column(self, tmp_path):
        path = tmp_path / "cells.csv"
        path.write_text("x,y,vx\n0,0,1\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_scattered_csv(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "cells.csv"
        path.write_text("x,y,vx,vy\n0,0,fast,0\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_scattered_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            read_scattered_csv(tmp_path / "nope.csv")
