"""
classifier/network.py

The conv-attention point/cycle classifier: parameter store, forward and
backward passes, spectral-normalization bookkeeping.

Layout: `len(channels)` blocks of spectrally normalized stride-2 convolution
and leaky ReLU, self-attention after the last two blocks, then an MLP head
flatten -> hidden (ReLU, dropout) -> latent -> two logits (point, cycle).
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from models.arch import ArchConfig
from tensorcore import ops
from tensorcore.tensor import SpectralState, Tensor
from utils.errors import ShapeMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

WARMUP_ITERATIONS = 5
ATTENTION_PROJECTIONS = ("query", "key", "value", "out")


class Model:
    """Parameters, spectral states and configuration of one classifier."""

    def __init__(self, arch: ArchConfig, seed: int = 0, dtype: str = "float32"):
        self.arch = arch
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        self.params: Dict[str, Tensor] = {}
        self.spectral: Dict[str, SpectralState] = {}

    # Parameter store

    def add(self, name: str, data: np.ndarray, spectral_rng: Optional[np.random.Generator] = None) -> Tensor:
        tensor = Tensor(name, np.ascontiguousarray(data, dtype=self.dtype))
        self.params[name] = tensor
        if spectral_rng is not None:
            self.spectral[name] = SpectralState.create(tensor.data, spectral_rng)
        return tensor

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name].data

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self.params.values())

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.zero_grad()

    def warm_spectral(self, n_iter: int = WARMUP_ITERATIONS) -> None:
        for name, state in self.spectral.items():
            weight = self.params[name].data
            state.iterate(weight.reshape(weight.shape[0], -1), n_iter)

    def _normalized(self, name: str, update: bool) -> Tuple[np.ndarray, float]:
        return ops.spectral_normalize(self.params[name].data, self.spectral[name], 1, update)

    def _grad_spectral(self, name: str, grad_normalized: np.ndarray, sigma: float) -> None:
        raw = ops.spectral_backward(grad_normalized, self.params[name].data, self.spectral[name], sigma)
        self.params[name].accumulate(raw)

    def check_input(self, x: np.ndarray) -> None:
        expected = (self.arch.in_channels, self.arch.input_size, self.arch.input_size)
        if x.ndim != 4 or tuple(x.shape[1:]) != expected:
            error_msg = f"Model expects inputs of shape (N, {', '.join(map(str, expected))}), got {x.shape}"
            log.error(error_msg)
            raise ShapeMismatch(error_msg)

    # Trunk

    def trunk_forward(self, x: np.ndarray, update_sn: bool = False):
        """Convolution and attention blocks; returns (feature map, caches)."""
        self.check_input(x)
        h = x.astype(self.dtype, copy=False)
        caches = []
        for block in range(len(self.arch.channels)):
            name = f"conv{block}.weight"
            weight, sigma = self._normalized(name, update_sn)
            h, conv_cache = ops.conv2d_forward(h, weight, self[f"conv{block}.bias"], stride=2)
            h, act_cache = ops.leaky_relu_forward(h, self.arch.leaky_slope)
            attn = None
            if block in self.arch.attention_blocks:
                projections = [self._normalized(f"attn{block}.{p}", update_sn) for p in ATTENTION_PROJECTIONS]
                h, attn_cache = ops.attention_forward(h, *(w for w, _ in projections),
                                                      self[f"attn{block}.gamma"])
                attn = (attn_cache, [s for _, s in projections])
            caches.append((sigma, conv_cache, act_cache, attn))
        return h, caches

    def trunk_backward(self, dfeatures: np.ndarray, caches) -> np.ndarray:
        dh = dfeatures
        for block in reversed(range(len(self.arch.channels))):
            sigma, conv_cache, act_cache, attn = caches[block]
            if attn is not None:
                attn_cache, sigmas = attn
                dh, *dprojections, dgamma = ops.attention_backward(dh, attn_cache)
                for proj, grad, proj_sigma in zip(ATTENTION_PROJECTIONS, dprojections, sigmas):
                    self._grad_spectral(f"attn{block}.{proj}", grad, proj_sigma)
                self.params[f"attn{block}.gamma"].accumulate(np.asarray(dgamma))
            dh = ops.leaky_relu_backward(dh, act_cache)
            dh, dweight, dbias = ops.conv2d_backward(dh, conv_cache)
            self._grad_spectral(f"conv{block}.weight", dweight, sigma)
            self.params[f"conv{block}.bias"].accumulate(dbias)
        return dh

    # Head

    def head_forward(self, features: np.ndarray, rng: Optional[np.random.Generator] = None,
                     dropout_active: bool = False):
        """MLP head; returns ((N, 2) logits, cache)."""
        flat = features.reshape(features.shape[0], -1)
        h, fc1 = ops.linear_forward(flat, self["fc1.weight"], self["fc1.bias"])
        h, act = ops.relu_forward(h)
        h, mask = ops.dropout_forward(h, self.arch.dropout, rng, dropout_active)
        h, fc2 = ops.linear_forward(h, self["fc2.weight"], self["fc2.bias"])
        logits, out = ops.linear_forward(h, self["out.weight"], self["out.bias"])
        return logits, (features.shape, fc1, act, mask, fc2, out)

    def head_backward(self, dlogits: np.ndarray, cache) -> np.ndarray:
        shape, fc1, act, mask, fc2, out = cache
        dh, dw, db = ops.linear_backward(dlogits, out)
        self.params["out.weight"].accumulate(dw)
        self.params["out.bias"].accumulate(db)
        dh, dw, db = ops.linear_backward(dh, fc2)
        self.params["fc2.weight"].accumulate(dw)
        self.params["fc2.bias"].accumulate(db)
        dh = ops.dropout_backward(dh, mask)
        dh = ops.relu_backward(dh, act)
        dh, dw, db = ops.linear_backward(dh, fc1)
        self.params["fc1.weight"].accumulate(dw)
        self.params["fc1.bias"].accumulate(db)
        return dh.reshape(shape)

    # Whole network

    def forward(self, x: np.ndarray, rng: Optional[np.random.Generator] = None,
                dropout_active: bool = False, update_sn: bool = False):
        features, trunk = self.trunk_forward(x, update_sn)
        logits, head = self.head_forward(features, rng, dropout_active)
        return logits, (trunk, head)

    def backward(self, dlogits: np.ndarray, cache) -> np.ndarray:
        trunk, head = cache
        dfeatures = self.head_backward(dlogits, head)
        return self.trunk_backward(dfeatures, trunk)

    def attention_maps(self, x: np.ndarray) -> List[np.ndarray]:
        """(N, HW, HW) attention maps of every attention block, first block first."""
        _, caches = self.trunk_forward(x, update_sn=False)
        return [attn[0][-1] for *_, attn in caches if attn is not None]

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Every array needed to reproduce the model, in a fixed order."""
        arrays = {name: t.data for name, t in self.params.items()}
        for name, state in self.spectral.items():
            arrays[f"{name}#u"] = state.u
            arrays[f"{name}#v"] = state.v
        return arrays


def build_model(arch: ArchConfig, seed: int = 0, dtype: str = "float32") -> Model:
    """
    Initialize a classifier.

    Convolution and dense weights are Kaiming-uniform, biases zero, attention
    gains zero and the logit layer is scaled down so both logits start near
    zero. Spectral states get their warm-up iterations.

    Args:
        arch: Architecture configuration
        seed: Initialization seed
        dtype: Storage dtype; float64 is used for gradient checks

    Returns:
        The Model
    """
    rng = np.random.default_rng(seed)
    sn_rng = np.random.default_rng([seed, 1])
    model = Model(arch, seed, dtype)
    k = arch.kernel_size
    slope = arch.leaky_slope

    c_in = arch.in_channels
    for block, c_out in enumerate(arch.channels):
        fan_in = c_in * k * k
        model.add(f"conv{block}.weight", ops.kaiming_uniform((c_out, c_in, k, k), fan_in, slope, rng), sn_rng)
        model.add(f"conv{block}.bias", np.zeros(c_out))
        if block in arch.attention_blocks:
            c_qk = max(1, c_out // arch.attention_reduction)
            c_v = max(1, c_out // 2)
            shapes = {"query": (c_qk, c_out), "key": (c_qk, c_out), "value": (c_v, c_out), "out": (c_out, c_v)}
            for proj in ATTENTION_PROJECTIONS:
                shape = shapes[proj]
                model.add(f"attn{block}.{proj}", ops.kaiming_uniform(shape, shape[1], 1.0, rng), sn_rng)
            model.add(f"attn{block}.gamma", np.zeros(()))
        c_in = c_out

    flat = arch.channels[-1] * arch.final_size ** 2
    model.add("fc1.weight", ops.kaiming_uniform((arch.mlp_hidden, flat), flat, 0.0, rng))
    model.add("fc1.bias", np.zeros(arch.mlp_hidden))
    model.add("fc2.weight", ops.kaiming_uniform((arch.latent_dim, arch.mlp_hidden), arch.mlp_hidden, 1.0, rng))
    model.add("fc2.bias", np.zeros(arch.latent_dim))
    out = ops.kaiming_uniform((2, arch.latent_dim), arch.latent_dim, 1.0, rng) * arch.head_init_scale
    model.add("out.weight", out)
    model.add("out.bias", np.zeros(2))

    model.warm_spectral(WARMUP_ITERATIONS)
    log.info(f"Built model: channels={list(arch.channels)}, attention={arch.attention}, "
             f"input={arch.input_mode}, {model.parameter_count} parameters")
    return model
