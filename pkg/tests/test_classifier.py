from dataclasses import replace

import numpy as np
import pytest

from classifier.checkpoint import build_manifest, decode, decode_parts, encode, encode_parts, load, save
from classifier.inference import (attention_summary, deterministic_logits, field_input, mc_logits, mc_samples,
                                  predict, predict_dataset, predicted_labels)
from classifier.network import build_model
from classifier.training import check_labels, one_hot, train
from dynamics.rasterize import default_grid, make_zoo_dataset, rasterize, to_angles
from models.arch import ArchConfig, ClassProbs
from models.system import DynClass
from utils.dataset_io import write_dataset
from utils.errors import (BadMagic, ConfigError, DegenerateLabels, EmptyDataset, ShapeManifestMismatch,
                          ShapeMismatch)
from gradcheck import assert_grad_close, relative_error


@pytest.fixture(scope="module")
def so_data():
    return make_zoo_dataset("simple_oscillator", 40, seed=6, size=16)


def _inputs(rng, n=2, channels=1, size=16):
    return rng.uniform(-np.pi, np.pi, size=(n, channels, size, size))


class TestBuildModel:
    def test_same_seed_same_parameters(self, tiny_arch):
        first, second = build_model(tiny_arch, seed=4), build_model(tiny_arch, seed=4)
        assert encode(first) == encode(second)
        assert encode(first) != encode(build_model(tiny_arch, seed=5))

    def test_input_channels(self, tiny_arch):
        assert build_model(tiny_arch)["conv0.weight"].shape[1] == 1
        vectors = build_model(replace(tiny_arch, input_mode="vectors"))
        assert vectors["conv0.weight"].shape[1] == 2

    def test_attention_layout(self, tiny_arch):
        model = build_model(tiny_arch)
        assert model["attn0.query"].shape == (1, 4)
        assert model["attn0.value"].shape == (2, 4)
        assert model["attn1.out"].shape == (8, 4)
        assert model["attn1.gamma"].shape == ()
        assert model["attn1.gamma"] == 0.0
        assert model["fc1.weight"].shape == (8, 8 * 4 * 4)
        assert model["out.weight"].shape == (2, 4)

    def test_without_attention(self, tiny_arch):
        model = build_model(replace(tiny_arch, attention=False))
        assert not any(name.startswith("attn") for name in model.params)
        assert model.parameter_count < build_model(tiny_arch).parameter_count

    def test_attention_only_on_last_two_blocks(self):
        arch = ArchConfig(channels=(2, 4, 8, 16), input_size=16)
        assert arch.attention_blocks == (2, 3)
        assert arch.final_size == 1

    def test_initial_logits_near_zero(self, tiny_arch, rng):
        logits, _ = build_model(tiny_arch).forward(_inputs(rng))
        assert np.max(np.abs(logits)) < 0.5

    def test_spectral_warm_up(self, tiny_arch):
        model = build_model(tiny_arch)
        assert all(state.iterations == 5 for state in model.spectral.values())
        assert set(model.spectral) >= {"conv0.weight", "conv1.weight", "attn1.query"}

    def test_wrong_input_shape(self, tiny_arch, rng):
        with pytest.raises(ShapeMismatch):
            build_model(tiny_arch).forward(_inputs(rng, size=8))

    @pytest.mark.parametrize("kwargs", [{"input_size": 18}, {"dropout": 1.0}, {"input_mode": "phase"}])
    def test_invalid_arch(self, kwargs):
        with pytest.raises(ValueError):
            ArchConfig(channels=(4, 8), **kwargs)


class TestModelGradients:
    def test_backward_matches_finite_differences(self, tiny_arch, rng):
        model = build_model(tiny_arch, seed=2, dtype="float64")
        model.params["attn0.gamma"].data[...] = 0.5
        model.params["attn1.gamma"].data[...] = -0.4
        x = _inputs(rng)
        logits, cache = model.forward(x)
        upstream = rng.normal(size=logits.shape)
        model.zero_grad()
        dx = model.backward(upstream, cache)

        def loss():
            return float(np.sum(model.forward(x)[0] * upstream))

        assert_grad_close(dx, loss, x, tol=1e-4)
        for name in ("conv0.weight", "conv1.bias", "attn0.value", "attn1.query", "attn1.gamma",
                     "fc2.weight", "out.bias"):
            tensor = model.params[name]
            assert_grad_close(tensor.grad, loss, tensor.data, tol=1e-4)

    def test_desk_width_sampled_parameters(self):
        arch = ArchConfig(channels=(16, 32, 64), input_size=8)
        model = build_model(arch, seed=5, dtype="float64")
        for block in arch.attention_blocks:
            model.params[f"attn{block}.gamma"].data[...] = 0.3
        rng = np.random.default_rng(0)
        x = rng.uniform(-np.pi, np.pi, size=(1, 1, 8, 8))
        logits, cache = model.forward(x)
        upstream = rng.normal(size=logits.shape)
        model.zero_grad()
        model.backward(upstream, cache)

        def loss():
            return float(np.sum(model.forward(x)[0] * upstream))

        eps = 1e-6
        analytic, numeric = [], []
        for tensor in model.params.values():
            flat = tensor.data.reshape(-1)
            for i in rng.choice(flat.size, size=max(1, flat.size // 100), replace=False):
                original = flat[i]
                flat[i] = original + eps
                plus = loss()
                flat[i] = original - eps
                minus = loss()
                flat[i] = original
                numeric.append((plus - minus) / (2 * eps))
                analytic.append(tensor.grad.reshape(-1)[i])
        assert relative_error(np.array(analytic), np.array(numeric)) < 1e-3


class TestTraining:
    def test_one_hot(self):
        np.testing.assert_array_equal(one_hot(np.array([0, 1, 1])), [[1, 0], [0, 1], [0, 1]])

    def test_label_checks(self):
        with pytest.raises(EmptyDataset):
            check_labels(np.array([], dtype=np.int64))
        with pytest.raises(DegenerateLabels):
            check_labels(np.zeros(10, dtype=np.int64))
        with pytest.raises(DegenerateLabels):
            check_labels(np.array([0, 1, -1]))

    def test_report_shape(self, tiny_arch, tiny_opts, so_data):
        report = train(build_model(tiny_arch, seed=1), so_data, tiny_opts)
        assert report.steps == len(report.loss_curve) == 9
        assert len(report.epoch_losses) == 3
        assert np.all(np.isfinite(report.loss_curve))
        assert 0.0 <= report.train_accuracy <= 1.0
        assert 0.0 <= report.val_accuracy <= 1.0

    def test_same_seed_same_weights(self, tiny_arch, tiny_opts, so_data):
        first, second = build_model(tiny_arch, seed=1), build_model(tiny_arch, seed=1)
        train(first, so_data, tiny_opts)
        train(second, so_data, tiny_opts)
        assert encode(first) == encode(second)

    def test_weights_move(self, tiny_arch, tiny_opts, so_data):
        model = build_model(tiny_arch, seed=1)
        before = model["conv0.weight"].copy()
        train(model, so_data, tiny_opts)
        assert not np.array_equal(before, model["conv0.weight"])
        assert model.spectral["conv0.weight"].iterations == 5 + 9

    def test_empty_dataset(self, tiny_arch, tiny_opts, so_data):
        with pytest.raises(EmptyDataset):
            train(build_model(tiny_arch), so_data.subset([]), tiny_opts)


class TestInference:
    def test_mc_shapes_and_seeding(self, tiny_arch, rng):
        model = build_model(tiny_arch)
        x = _inputs(rng, n=5)
        assert mc_samples(model, x, mc_evals=3).shape == (3, 5, 2)
        np.testing.assert_array_equal(mc_logits(model, x, 4, seed=8), mc_logits(model, x, 4, seed=8))

    def test_passes_differ_under_dropout(self, tiny_arch, rng):
        samples = mc_samples(build_model(tiny_arch), _inputs(rng, n=3), mc_evals=4)
        assert not np.array_equal(samples[0], samples[1])

    def test_no_dropout_matches_deterministic(self, tiny_arch, rng):
        model = build_model(replace(tiny_arch, dropout=0.0))
        x = _inputs(rng, n=3)
        np.testing.assert_allclose(mc_logits(model, x, 3), deterministic_logits(model, x), rtol=1e-6)

    def test_batching_does_not_change_logits(self, tiny_arch, rng):
        model = build_model(tiny_arch)
        x = _inputs(rng, n=5)
        np.testing.assert_allclose(deterministic_logits(model, x, batch_size=2),
                                   deterministic_logits(model, x), rtol=1e-5, atol=1e-7)

    def test_mc_evals_positive(self, tiny_arch, rng):
        with pytest.raises(ValueError):
            mc_samples(build_model(tiny_arch), _inputs(rng), mc_evals=0)

    def test_predict_field(self, tiny_arch, so_cycle):
        model = build_model(tiny_arch)
        field = rasterize(so_cycle, default_grid(so_cycle, 16))
        probs = predict(model, field, mc_evals=3)
        assert 0.0 < probs.point_prob < 1.0 and 0.0 < probs.cycle_prob < 1.0
        assert probs.label is (DynClass.CYCLE if probs.cycle_logit > probs.point_logit else DynClass.POINT)
        assert predict(model, to_angles(field), mc_evals=3) == probs

    def test_angle_raster_into_vectors_model(self, tiny_arch, so_cycle):
        model = build_model(replace(tiny_arch, input_mode="vectors"))
        field = rasterize(so_cycle, default_grid(so_cycle, 16))
        assert field_input(model, field).shape == (1, 2, 16, 16)
        with pytest.raises(ShapeMismatch):
            field_input(model, to_angles(field))

    def test_predict_dataset(self, tiny_arch, so_data):
        logits = predict_dataset(build_model(tiny_arch), so_data, mc_evals=2)
        assert logits.shape == (len(so_data), 2)
        assert set(predicted_labels(logits)) <= {0, 1}

    def test_predicted_labels(self):
        np.testing.assert_array_equal(predicted_labels(np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])), [0, 1, 0])

    def test_class_probs(self):
        probs = ClassProbs.from_logits([0.0, 2.0])
        assert probs.point_prob == pytest.approx(0.5)
        assert probs.label is DynClass.CYCLE

    def test_attention_maps(self, tiny_arch, rng):
        maps = build_model(tiny_arch).attention_maps(_inputs(rng))
        assert [m.shape for m in maps] == [(2, 64, 64), (2, 16, 16)]
        for attn in maps:
            np.testing.assert_allclose(attn.sum(axis=-1), 1.0, rtol=1e-5)

    def test_attention_summary(self, tiny_arch, so_cycle):
        field = rasterize(so_cycle, default_grid(so_cycle, 16))
        summary = attention_summary(build_model(tiny_arch), field)
        assert summary.shape == (16, 16)
        assert summary.sum() == pytest.approx(64 * 4, rel=1e-4)
        with pytest.raises(ConfigError):
            attention_summary(build_model(replace(tiny_arch, attention=False)), field)


class TestCheckpoint:
    def test_save_load_save(self, tiny_arch, tiny_opts, so_data, tmp_path):
        model = build_model(tiny_arch, seed=3)
        train(model, so_data, replace(tiny_opts, epochs=1))
        path = save(model, tmp_path / "model")
        assert path.name == "model.twck"
        loaded = load(path)
        assert encode(loaded) == path.read_bytes()
        np.testing.assert_array_equal(mc_logits(loaded, so_data.angles(), 3), mc_logits(model, so_data.angles(), 3))

    def test_manifest(self, tiny_arch):
        manifest = build_manifest(build_model(tiny_arch))
        names = [entry["name"] for entry in manifest["tensors"]]
        assert names[0] == "conv0.weight"
        assert "conv0.weight#u" in names
        assert manifest["arch"]["channels"] == [4, 8]
        assert manifest["spectral_iterations"]["conv0.weight"] == 5

    def test_edited_shape(self, tiny_arch):
        manifest, payload = decode_parts(encode(build_model(tiny_arch)))
        manifest["tensors"][0]["shape"] = [99]
        with pytest.raises(ShapeManifestMismatch):
            decode(encode_parts(manifest, payload))

    def test_short_payload(self, tiny_arch):
        manifest, payload = decode_parts(encode(build_model(tiny_arch)))
        with pytest.raises(ShapeManifestMismatch):
            decode(encode_parts(manifest, payload[:-8]))

    def test_dataset_file_is_not_a_checkpoint(self, so_data, tmp_path):
        path = write_dataset(so_data, tmp_path / "data")
        with pytest.raises(BadMagic):
            load(path)
