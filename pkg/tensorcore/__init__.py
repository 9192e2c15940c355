"""
Minimal differentiable tensor engine for the classifier.
"""

from tensorcore.optim import Adam, AdamState, adam_step
from tensorcore.tensor import SpectralState, Tensor, set_debug

__all__ = ['Adam', 'AdamState', 'adam_step', 'SpectralState', 'Tensor', 'set_debug']
