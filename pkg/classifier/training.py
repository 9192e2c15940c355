"""
classifier/training.py

Mini-batch Adam training of the classifier with two independent sigmoid
heads (point, cycle) and one-hot targets.
"""

import time

import numpy as np
from sklearn.metrics import accuracy_score

from classifier.inference import dataset_inputs, deterministic_logits, predicted_labels
from classifier.network import Model
from models.arch import TrainOpts, TrainReport
from models.dataset import Dataset
from tensorcore.ops import bce_with_logits
from tensorcore.optim import Adam
from utils.errors import DegenerateLabels, EmptyDataset
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

HEADS = 2


def one_hot(labels: np.ndarray) -> np.ndarray:
    """(N, 2) targets: column 0 is 'point', column 1 is 'cycle'."""
    targets = np.zeros((len(labels), HEADS))
    targets[np.arange(len(labels)), labels] = 1.0
    return targets


def check_labels(labels: np.ndarray) -> None:
    if len(labels) == 0:
        error_msg = "Cannot train on an empty dataset"
        log.error(error_msg)
        raise EmptyDataset(error_msg)
    if np.any(labels < 0):
        error_msg = f"{int(np.sum(labels < 0))} training samples carry no label"
        log.error(error_msg)
        raise DegenerateLabels(error_msg)
    share = labels.mean()
    if share in (0.0, 1.0):
        error_msg = f"Training labels contain a single class ({'cycle' if share else 'point'})"
        log.error(error_msg)
        raise DegenerateLabels(error_msg)
    if not 0.4 <= share <= 0.6:
        log.warning(f"Training labels are imbalanced: {share:.1%} cycle")


def loss_and_grad(logits: np.ndarray, targets: np.ndarray):
    """Sum over the two heads of the batch-mean BCE, and its logit gradient."""
    loss, grad = bce_with_logits(logits, targets.astype(logits.dtype))
    return HEADS * loss, HEADS * grad


def train(model: Model, dataset: Dataset, opts: TrainOpts) -> TrainReport:
    """
    Train in place and report the loss curve and accuracies.

    A fixed `val_fraction` of the samples is held out for reporting only.
    Shuffling and dropout both draw from generators seeded by `opts.seed`.

    Args:
        model: Freshly built or partially trained classifier
        dataset: Labeled training data
        opts: Optimizer and schedule settings

    Returns:
        TrainReport with per-step losses and final train/validation accuracy
    """
    labels = dataset.labels()
    check_labels(labels)
    inputs = dataset_inputs(dataset, model.arch.input_mode).astype(model.dtype, copy=False)
    targets = one_hot(labels)

    rng = np.random.default_rng(opts.seed)
    dropout_rng = np.random.default_rng([opts.seed, 1])
    order = rng.permutation(len(labels))
    n_val = int(round(opts.val_fraction * len(labels))) if len(labels) >= 10 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]

    optimizer = Adam(lr=opts.lr)
    report = TrainReport(seed=opts.seed)
    log.info(f"Training on {len(train_idx)} samples ({n_val} held out), "
             f"{opts.epochs} epochs, batch {opts.batch_size}, lr {opts.lr}")

    for epoch in range(opts.epochs):
        started = time.perf_counter()
        epoch_order = rng.permutation(train_idx)
        batch_losses = []
        for start in range(0, len(epoch_order), opts.batch_size):
            batch = epoch_order[start:start + opts.batch_size]
            model.zero_grad()
            logits, cache = model.forward(inputs[batch], dropout_rng, dropout_active=True, update_sn=True)
            loss, grad = loss_and_grad(logits, targets[batch])
            model.backward(grad, cache)
            optimizer.step(model.params.values())
            batch_losses.append(loss)
            report.loss_curve.append(loss)
            report.steps += 1
        report.epoch_losses.append(float(np.mean(batch_losses)))
        log.info(f"Epoch {epoch + 1}/{opts.epochs}: loss {report.epoch_losses[-1]:.4f} "
                 f"({time.perf_counter() - started:.1f}s)")

    report.train_accuracy = accuracy(model, inputs[train_idx], labels[train_idx])
    if n_val:
        report.val_accuracy = accuracy(model, inputs[val_idx], labels[val_idx])
    log.info(f"Finished training: train accuracy {report.train_accuracy:.3f}, "
             f"validation accuracy {report.val_accuracy:.3f}")
    return report


def accuracy(model: Model, inputs: np.ndarray, labels: np.ndarray) -> float:
    """Dropout-free accuracy of the argmax decision."""
    return float(accuracy_score(labels, predicted_labels(deterministic_logits(model, inputs))))
