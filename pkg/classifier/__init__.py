"""
Classifier package for TopoHopf: the conv-attention point/cycle network,
its training loop, MC-dropout inference and checkpoint files.
"""

from classifier.checkpoint import load, save
from classifier.inference import attention_summary, mc_logits, predict, predict_dataset, predicted_labels
from classifier.network import Model, build_model
from classifier.training import train

__all__ = [
    'load', 'save',
    'attention_summary', 'mc_logits', 'predict', 'predict_dataset', 'predicted_labels',
    'Model', 'build_model', 'train',
]
