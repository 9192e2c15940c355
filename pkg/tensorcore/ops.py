"""
tensorcore/ops.py

Differentiable operations for the conv-attention classifier. Every forward
function returns (output, cache) and its backward twin consumes the cache.
Inputs are batched NCHW arrays; the dtype of the inputs is kept.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from tensorcore.tensor import SpectralState, check_finite
from utils.errors import ShapeMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()


def _shape_error(message: str) -> ShapeMismatch:
    log.error(message)
    return ShapeMismatch(message)


# Convolution

def conv2d_forward(x: np.ndarray, weight: np.ndarray, bias: Optional[np.ndarray] = None,
                   stride: int = 2, pad: Optional[int] = None):
    """
    Cross-correlation of an (N, C_in, H, W) batch with a (C_out, C_in, k, k) kernel.

    Args:
        x: Input batch
        weight: Kernel
        bias: Optional (C_out,) bias
        stride: Spatial stride
        pad: Zero padding; k // 2 when omitted

    Returns:
        (output of shape (N, C_out, H_out, W_out), cache)
    """
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise _shape_error(f"conv2d: input {x.shape} incompatible with kernel {weight.shape}")
    k = weight.shape[2]
    pad = k // 2 if pad is None else pad
    padded = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.einsum("nchwij,ocij->nohw", windows, weight, optimize=True)
    if bias is not None:
        out = out + bias[None, :, None, None]
    cache = (x.shape, windows, weight, stride, pad, bias is not None)
    return check_finite(out, "conv2d"), cache


def conv2d_backward(dout: np.ndarray, cache):
    """Gradients (dx, dweight, dbias) of conv2d_forward; dbias is None without bias."""
    x_shape, windows, weight, stride, pad, has_bias = cache
    n, c, h, w = x_shape
    k = weight.shape[2]
    h_out, w_out = dout.shape[2], dout.shape[3]

    dweight = np.einsum("nohw,nchwij->ocij", dout, windows, optimize=True)
    dbias = dout.sum(axis=(0, 2, 3)) if has_bias else None

    dpadded = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            contribution = np.einsum("nohw,oc->nchw", dout, weight[:, :, i, j], optimize=True)
            dpadded[:, :, i:i + stride * h_out:stride, j:j + stride * w_out:stride] += contribution
    dx = dpadded[:, :, pad:pad + h, pad:pad + w]
    return dx, dweight, dbias


# Pointwise non-linearities

def leaky_relu_forward(x: np.ndarray, slope: float = 0.01):
    out = np.where(x > 0, x, slope * x)
    return out, (x > 0, slope)


def leaky_relu_backward(dout: np.ndarray, cache) -> np.ndarray:
    positive, slope = cache
    return np.where(positive, dout, slope * dout)


def relu_forward(x: np.ndarray):
    return leaky_relu_forward(x, 0.0)


def relu_backward(dout: np.ndarray, cache) -> np.ndarray:
    return leaky_relu_backward(dout, cache)


# Dense layers

def linear_forward(x: np.ndarray, weight: np.ndarray, bias: Optional[np.ndarray] = None):
    """x (N, in) times weight (out, in) transposed, plus bias."""
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise _shape_error(f"linear: input {x.shape} incompatible with weight {weight.shape}")
    out = x @ weight.T
    if bias is not None:
        out = out + bias
    return check_finite(out, "linear"), (x, weight, bias is not None)


def linear_backward(dout: np.ndarray, cache):
    x, weight, has_bias = cache
    dx = dout @ weight
    dweight = dout.T @ x
    dbias = dout.sum(axis=0) if has_bias else None
    return dx, dweight, dbias


def dropout_forward(x: np.ndarray, rate: float, rng: Optional[np.random.Generator], active: bool):
    """
    Inverted dropout.

    Active during training and during MC inference; otherwise, or with
    rate 0, the input passes through unchanged.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"Dropout rate must lie in [0, 1), got {rate}")
    if not active or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / np.asarray(1.0 - rate, dtype=x.dtype)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, mask) -> np.ndarray:
    return dout if mask is None else dout * mask


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


# Self-attention

def attention_forward(x: np.ndarray, wq: np.ndarray, wk: np.ndarray, wv: np.ndarray,
                      wo: np.ndarray, gamma: np.ndarray):
    """
    Non-local self-attention with a learned residual gain.

    With X the (N, C, HW) flattened input: Q = wq X, K = wk X, V = wv X,
    A = softmax over keys of Q^T K, O = V A^T and out = x + gamma * wo O.
    Row i of A holds the weights query position i puts on every key position.

    Args:
        x: (N, C, H, W) feature map
        wq, wk: (C_qk, C) query and key projections
        wv: (C_v, C) value projection
        wo: (C, C_v) output projection
        gamma: scalar residual gain (array of shape ())

    Returns:
        (output of the input's shape, cache); cache[-1] is the (N, HW, HW) attention map
    """
    n, c, h, w = x.shape
    if wq.shape[1] != c or wk.shape != wq.shape or wv.shape[1] != c or wo.shape != (c, wv.shape[0]):
        raise _shape_error(f"attention: projections {wq.shape}, {wk.shape}, {wv.shape}, {wo.shape} "
                           f"incompatible with input {x.shape}")
    flat = x.reshape(n, c, h * w)
    q = np.einsum("dc,ncp->ndp", wq, flat)
    k = np.einsum("dc,ncp->ndp", wk, flat)
    v = np.einsum("dc,ncp->ndp", wv, flat)
    scores = np.einsum("ndi,ndj->nij", q, k)
    attn = softmax(scores, axis=-1)
    o = np.einsum("ndj,nij->ndi", v, attn)
    y = np.einsum("cd,ndp->ncp", wo, o)
    out = x + gamma * y.reshape(x.shape)
    cache = (x, flat, q, k, v, o, y, wq, wk, wv, wo, gamma, attn)
    return check_finite(out, "attention"), cache


def attention_backward(dout: np.ndarray, cache):
    """Gradients (dx, dwq, dwk, dwv, dwo, dgamma) of attention_forward."""
    x, flat, q, k, v, o, y, wq, wk, wv, wo, gamma, attn = cache
    n, c, h, w = x.shape
    dflat_out = dout.reshape(n, c, h * w)

    dgamma = np.asarray(np.sum(dflat_out * y), dtype=gamma.dtype)
    dy = gamma * dflat_out
    dwo = np.einsum("ncp,ndp->cd", dy, o)
    do = np.einsum("cd,ncp->ndp", wo, dy)

    dv = np.einsum("ndi,nij->ndj", do, attn)
    dattn = np.einsum("ndi,ndj->nij", do, v)
    dscores = attn * (dattn - np.sum(dattn * attn, axis=-1, keepdims=True))
    dq = np.einsum("ndj,nij->ndi", k, dscores)
    dk = np.einsum("ndi,nij->ndj", q, dscores)

    dwq = np.einsum("ndp,ncp->dc", dq, flat)
    dwk = np.einsum("ndp,ncp->dc", dk, flat)
    dwv = np.einsum("ndp,ncp->dc", dv, flat)
    dflat = (dflat_out
             + np.einsum("dc,ndp->ncp", wq, dq)
             + np.einsum("dc,ndp->ncp", wk, dk)
             + np.einsum("dc,ndp->ncp", wv, dv))
    return dflat.reshape(x.shape), dwq, dwk, dwv, dwo, dgamma


# Spectral normalization

def spectral_normalize(weight: np.ndarray, state: SpectralState, n_iter: int = 1,
                       update: bool = True) -> Tuple[np.ndarray, float]:
    """
    Divide a weight by the power-iteration estimate of its top singular value.

    The weight is viewed as a (C_out, rest) matrix. With `update` the state
    advances by `n_iter` iterations first; without it the stored vectors are used as-is.

    Returns:
        (normalized weight, sigma)
    """
    matrix = weight.reshape(weight.shape[0], -1)
    if update and n_iter > 0:
        sigma = state.iterate(matrix, n_iter)
    else:
        sigma = float(state.u @ matrix.astype(np.float64) @ state.v)
    normalized = (weight / np.asarray(sigma, dtype=weight.dtype)).astype(weight.dtype, copy=False)
    return normalized, sigma


def spectral_backward(grad_normalized: np.ndarray, weight: np.ndarray, state: SpectralState,
                      sigma: float) -> np.ndarray:
    """
    Gradient with respect to the raw weight, treating u and v as constants:
    G / sigma - (<G, W> / sigma^2) u v^T.
    """
    g = grad_normalized.reshape(weight.shape[0], -1)
    matrix = weight.reshape(weight.shape[0], -1)
    inner = float(np.sum(g.astype(np.float64) * matrix))
    outer = np.outer(state.u, state.v)
    grad = g / sigma - (inner / sigma ** 2) * outer
    return grad.reshape(weight.shape).astype(weight.dtype, copy=False)


# Loss

def bce_with_logits(logits: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean binary cross-entropy over all elements, in the overflow-free form
    max(z, 0) - z t + log(1 + exp(-|z|)).

    Returns:
        (loss, gradient with respect to the logits)
    """
    if logits.shape != targets.shape:
        raise _shape_error(f"bce: logits {logits.shape} and targets {targets.shape} differ")
    z = logits.astype(np.float64)
    t = targets.astype(np.float64)
    losses = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
    grad = (expit(z) - t) / z.size
    return float(losses.mean()), grad.astype(logits.dtype, copy=False)


# Initialization

def kaiming_uniform(shape, fan_in: int, slope: float, rng: np.random.Generator,
                    dtype=np.float32) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6 / ((1 + slope^2) * fan_in))."""
    bound = np.sqrt(6.0 / ((1.0 + slope ** 2) * fan_in))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)
