"""
classifier/inference.py

Monte Carlo dropout inference: the convolutional trunk runs once per batch,
the dropout head runs `mc_evals` times and the logits are averaged.
"""

from typing import Union

import numpy as np

from classifier.network import Model
from dynamics.rasterize import to_angles
from models.arch import ClassProbs
from models.dataset import Dataset
from models.field import AngleField, VectorField
from utils.errors import ConfigError, ShapeMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

DEFAULT_BATCH = 128

FieldLike = Union[AngleField, VectorField, np.ndarray]


def dataset_inputs(dataset: Dataset, input_mode: str) -> np.ndarray:
    """(N, C, H, W) model inputs for the given input mode."""
    return dataset.angles() if input_mode == "angles" else dataset.vectors()


def field_input(model: Model, field: FieldLike) -> np.ndarray:
    """Turn one raster into a (1, C, H, W) batch for the model's input mode."""
    mode = model.arch.input_mode
    if isinstance(field, VectorField):
        array = to_angles(field).phi[None] if mode == "angles" else field.stacked()
    elif isinstance(field, AngleField):
        if mode != "angles":
            raise ShapeMismatch("A vectors-mode model cannot consume an angle raster")
        array = field.phi[None]
    else:
        array = np.asarray(field)
        if array.ndim == 2:
            array = array[None]
    batch = array[None].astype(model.dtype, copy=False)
    model.check_input(batch)
    return batch


def mc_samples(model: Model, inputs: np.ndarray, mc_evals: int = 10, seed: int = 0,
               batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """
    Logits of every stochastic pass.

    Returns:
        (mc_evals, N, 2) array; pass j of sample i uses draw j of the seeded stream
    """
    if mc_evals < 1:
        raise ValueError(f"mc_evals must be >= 1, got {mc_evals}")
    model.check_input(inputs)
    rng = np.random.default_rng(seed)
    out = np.empty((mc_evals, len(inputs), 2), dtype=np.float64)
    for start in range(0, len(inputs), batch_size):
        features, _ = model.trunk_forward(inputs[start:start + batch_size], update_sn=False)
        for j in range(mc_evals):
            logits, _ = model.head_forward(features, rng, dropout_active=True)
            out[j, start:start + len(features)] = logits
    return out


def mc_logits(model: Model, inputs: np.ndarray, mc_evals: int = 10, seed: int = 0,
              batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """(N, 2) logits averaged over `mc_evals` dropout passes."""
    return mc_samples(model, inputs, mc_evals, seed, batch_size).mean(axis=0)


def deterministic_logits(model: Model, inputs: np.ndarray, batch_size: int = DEFAULT_BATCH) -> np.ndarray:
    """(N, 2) logits with dropout off."""
    model.check_input(inputs)
    out = np.empty((len(inputs), 2), dtype=np.float64)
    for start in range(0, len(inputs), batch_size):
        logits, _ = model.forward(inputs[start:start + batch_size])
        out[start:start + len(logits)] = logits
    return out


def predict(model: Model, field: FieldLike, mc_evals: int = 10, seed: int = 0) -> ClassProbs:
    """
    Classify one raster.

    Args:
        model: Trained classifier
        field: VectorField, AngleField or raw array matching the model input
        mc_evals: Number of dropout passes to average
        seed: Dropout seed

    Returns:
        ClassProbs from the averaged logits
    """
    logits = mc_logits(model, field_input(model, field), mc_evals, seed)[0]
    return ClassProbs.from_logits(logits)


def predict_dataset(model: Model, dataset: Dataset, mc_evals: int = 10, seed: int = 0) -> np.ndarray:
    """(N, 2) averaged logits for every sample of a dataset."""
    inputs = dataset_inputs(dataset, model.arch.input_mode).astype(model.dtype, copy=False)
    logits = mc_logits(model, inputs, mc_evals, seed)
    log.debug(f"Predicted {len(dataset)} samples ({mc_evals} MC passes)")
    return logits


def predicted_labels(logits: np.ndarray) -> np.ndarray:
    """Argmax decision: 1 (cycle) when the cycle logit is larger."""
    return (logits[:, 1] > logits[:, 0]).astype(np.int64)


def attention_summary(model: Model, field: FieldLike) -> np.ndarray:
    """
    Where the first attention block looks, on the input lattice.

    The first attention map is summed over query positions and each key
    cell is repeated up to the input resolution.

    Returns:
        (H, W) array
    """
    if not model.arch.attention:
        raise ConfigError("Model has no attention blocks")
    batch = field_input(model, field)
    first = model.attention_maps(batch)[0][0]
    side = int(round(np.sqrt(first.shape[0])))
    weights = first.sum(axis=0).reshape(side, side)
    factor = model.arch.input_size // side
    return np.kron(weights, np.ones((factor, factor)))
