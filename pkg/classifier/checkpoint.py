"""
classifier/checkpoint.py

TWCK checkpoint files: a JSON manifest (architecture, seed, tensor names,
shapes and dtypes, spectral iteration counts) followed by the tensors in
manifest order as little-endian bytes, sealed with a CRC32.
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from classifier.network import Model, build_model
from metadata import CHECKPOINT_EXTENSION, CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from models.arch import ArchConfig
from utils.dataset_io import canonical_json, read_bytes, seal, unseal, write_bytes
from utils.errors import CorruptPayload, ShapeManifestMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

PathLike = Union[str, Path]


def _storage_dtype(array: np.ndarray) -> str:
    return "<f8" if array.dtype == np.float64 else "<f4"


def build_manifest(model: Model) -> Dict[str, Any]:
    arrays = model.state_arrays()
    return {
        "arch": model.arch.to_dict(),
        "seed": model.seed,
        "dtype": model.dtype.name,
        "tensors": [{"name": name, "shape": list(array.shape), "dtype": _storage_dtype(array)}
                    for name, array in arrays.items()],
        "spectral_iterations": {name: state.iterations for name, state in model.spectral.items()},
    }


def encode_parts(manifest: Dict[str, Any], payload: bytes) -> bytes:
    """Seal a manifest and raw payload into checkpoint bytes."""
    manifest_bytes = canonical_json(manifest)
    body = struct.pack("<I", len(manifest_bytes)) + manifest_bytes + payload
    return seal(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, body)


def decode_parts(data: bytes, source: str = "<bytes>") -> Tuple[Dict[str, Any], bytes]:
    """Validate checkpoint bytes and split them into (manifest, payload)."""
    body = unseal(data, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, source)
    try:
        (length,) = struct.unpack_from("<I", body, 0)
        manifest = json.loads(body[4:4 + length].decode("utf-8"))
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        error_msg = f"{source}: malformed checkpoint manifest: {e}"
        log.error(error_msg)
        raise CorruptPayload(error_msg) from e
    return manifest, body[4 + length:]


def encode(model: Model) -> bytes:
    arrays = model.state_arrays()
    payload = b"".join(np.ascontiguousarray(a, dtype=_storage_dtype(a)).tobytes() for a in arrays.values())
    return encode_parts(build_manifest(model), payload)


def decode(data: bytes, source: str = "<bytes>") -> Model:
    manifest, payload = decode_parts(data, source)
    arch = ArchConfig.from_dict(manifest["arch"])
    model = build_model(arch, manifest["seed"], manifest["dtype"])

    expected = [(name, list(array.shape)) for name, array in model.state_arrays().items()]
    stored = [(entry["name"], list(entry["shape"])) for entry in manifest["tensors"]]
    if stored != expected:
        mismatched = [s for s, e in zip(stored, expected) if s != e] or stored[len(expected):] or expected[len(stored):]
        error_msg = f"{source}: tensor manifest does not match the architecture (first difference {mismatched[0]})"
        log.error(error_msg)
        raise ShapeManifestMismatch(error_msg)

    sizes = [int(np.prod(entry["shape"])) * np.dtype(entry["dtype"]).itemsize for entry in manifest["tensors"]]
    if sum(sizes) != len(payload):
        error_msg = f"{source}: payload holds {len(payload)} bytes, manifest describes {sum(sizes)}"
        log.error(error_msg)
        raise ShapeManifestMismatch(error_msg)

    offset = 0
    for entry, size in zip(manifest["tensors"], sizes):
        values = np.frombuffer(payload, dtype=entry["dtype"], count=size // np.dtype(entry["dtype"]).itemsize,
                               offset=offset).reshape(entry["shape"])
        offset += size
        name = entry["name"]
        if name.endswith("#u") or name.endswith("#v"):
            owner, part = name.rsplit("#", 1)
            setattr(model.spectral[owner], part, values.astype(np.float64))
        else:
            model.params[name].data = values.astype(model.dtype)

    for name, iterations in manifest.get("spectral_iterations", {}).items():
        model.spectral[name].iterations = int(iterations)
    return model


def save(model: Model, path: PathLike) -> Path:
    """
    Write a model checkpoint.

    Args:
        model: Model to save
        path: Destination; the .twck extension is appended when missing

    Returns:
        The path actually written
    """
    path = Path(path)
    if path.suffix != CHECKPOINT_EXTENSION:
        path = path.with_name(path.name + CHECKPOINT_EXTENSION)
    write_bytes(path, encode(model))
    log.info(f"Saved checkpoint ({model.parameter_count} parameters) to {path}")
    return path


def load(path: PathLike) -> Model:
    """Read a checkpoint written by save."""
    model = decode(read_bytes(path), str(path))
    log.info(f"Loaded checkpoint from {path}")
    return model
