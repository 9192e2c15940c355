"""
utils/dataset_io.py

Binary container formats for TopoHopf.
This module reads and writes TWAF dataset files, provides the CRC-sealed
framing shared with model checkpoints and ingests scattered-velocity CSVs.
"""

import io
import json
import struct
import traceback
import zlib
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from metadata import DATASET_EXTENSION, DATASET_MAGIC, DATASET_VERSION
from models.dataset import Dataset, LabeledSample
from models.field import ScatteredVelocities
from models.system import DynClass
from utils.errors import BadMagic, CorruptPayload, DataError, IoError, VersionMismatch
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

PathLike = Union[str, Path]

UNLABELED = 255
FLAG_RAW = 0x01
CSV_COLUMNS = ("x", "y", "vx", "vy")


def canonical_json(data: Dict[str, Any]) -> bytes:
    """Deterministic UTF-8 JSON used for manifests."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def seal(magic: bytes, version: int, body: bytes) -> bytes:
    """Frame a body as magic + u32 version + body + CRC32 of everything before it."""
    head = magic + struct.pack("<I", version)
    crc = zlib.crc32(head + body) & 0xFFFFFFFF
    return head + body + struct.pack("<I", crc)


def unseal(data: bytes, magic: bytes, version: int, source: str = "<bytes>") -> bytes:
    """
    Validate a sealed frame and return its body.

    Raises:
        BadMagic: first four bytes are not `magic`
        VersionMismatch: the stored version differs from `version`
        CorruptPayload: truncated frame or checksum mismatch
    """
    if data[:4] != magic:
        error_msg = f"{source}: expected magic {magic!r}, found {bytes(data[:4])!r}"
        log.error(error_msg)
        raise BadMagic(error_msg)
    if len(data) < 12:
        error_msg = f"{source}: file is truncated ({len(data)} bytes)"
        log.error(error_msg)
        raise CorruptPayload(error_msg)
    (stored_version,) = struct.unpack_from("<I", data, 4)
    if stored_version != version:
        error_msg = f"{source}: format version {stored_version} is not supported (expected {version})"
        log.error(error_msg)
        raise VersionMismatch(error_msg)
    (stored_crc,) = struct.unpack_from("<I", data, len(data) - 4)
    crc = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if crc != stored_crc:
        error_msg = f"{source}: checksum mismatch (stored {stored_crc:08x}, computed {crc:08x})"
        log.error(error_msg)
        raise CorruptPayload(error_msg)
    return bytes(data[8:-4])


def read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        error_msg = f"Could not read {path}: {e}"
        log.error(error_msg)
        raise IoError(error_msg) from e


def write_bytes(path: PathLike, data: bytes) -> None:
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        error_msg = f"Could not write {path}: {e}"
        log.error(error_msg)
        log.debug(traceback.format_exc())
        raise IoError(error_msg) from e


class DatasetArchive:
    """Encoder and decoder for TWAF dataset files."""

    # Current file format version
    CURRENT_FORMAT_VERSION = DATASET_VERSION

    # File extension for dataset files
    FILE_EXTENSION = DATASET_EXTENSION

    @classmethod
    def encode(cls, dataset: Dataset) -> bytes:
        """
        Serialize a dataset to TWAF bytes.

        Args:
            dataset: Dataset to encode; all samples must share one raster shape

        Returns:
            The sealed file contents
        """
        height, width = dataset.shape
        has_raw = dataset.has_raw
        manifest = canonical_json(dataset.manifest)

        buffer = io.BytesIO()
        buffer.write(struct.pack("<IIIB", len(dataset), height, width, FLAG_RAW if has_raw else 0))
        buffer.write(struct.pack("<I", len(manifest)))
        buffer.write(manifest)

        for index, sample in enumerate(dataset):
            if sample.angles.shape != (height, width):
                raise ValueError(f"Sample {index} has shape {sample.angles.shape}, expected {(height, width)}")
            label = UNLABELED if sample.label is None else int(sample.label)
            buffer.write(struct.pack("<BI", label, sample.params.size))
            buffer.write(sample.params.astype("<f8").tobytes())
            buffer.write(struct.pack("<d", sample.distance))
            buffer.write(sample.angles.astype("<f4").tobytes())
            if has_raw:
                buffer.write(sample.raw.astype("<f4").tobytes())

        return seal(DATASET_MAGIC, cls.CURRENT_FORMAT_VERSION, buffer.getvalue())

    @classmethod
    def decode(cls, data: bytes, source: str = "<bytes>") -> Dataset:
        """Parse TWAF bytes back into a Dataset."""
        body = unseal(data, DATASET_MAGIC, cls.CURRENT_FORMAT_VERSION, source)
        try:
            count, height, width, flags = struct.unpack_from("<IIIB", body, 0)
            offset = 13
            (manifest_len,) = struct.unpack_from("<I", body, offset)
            offset += 4
            manifest = json.loads(body[offset:offset + manifest_len].decode("utf-8"))
            offset += manifest_len

            cells = height * width
            samples = []
            for _ in range(count):
                label_byte, n_params = struct.unpack_from("<BI", body, offset)
                offset += 5
                params = np.frombuffer(body, dtype="<f8", count=n_params, offset=offset).astype(np.float64)
                offset += 8 * n_params
                (distance,) = struct.unpack_from("<d", body, offset)
                offset += 8
                angles = np.frombuffer(body, dtype="<f4", count=cells, offset=offset)
                offset += 4 * cells
                raw = None
                if flags & FLAG_RAW:
                    raw = np.frombuffer(body, dtype="<f4", count=2 * cells, offset=offset).reshape(2, height, width)
                    offset += 8 * cells
                label = None if label_byte == UNLABELED else DynClass(label_byte)
                samples.append(LabeledSample(angles.reshape(height, width).astype(np.float32), label,
                                             params, distance, None if raw is None else raw.astype(np.float32)))
        except (struct.error, ValueError, UnicodeDecodeError) as e:
            error_msg = f"{source}: malformed dataset body: {e}"
            log.error(error_msg)
            raise CorruptPayload(error_msg) from e

        if offset != len(body):
            error_msg = f"{source}: {len(body) - offset} trailing bytes after {count} records"
            log.error(error_msg)
            raise CorruptPayload(error_msg)
        return Dataset(samples, manifest)


def write_dataset(dataset: Dataset, path: PathLike) -> Path:
    """
    Write a dataset to a TWAF file.

    Args:
        dataset: Dataset to write
        path: Destination; the .twaf extension is appended when missing

    Returns:
        The path actually written
    """
    path = Path(path)
    if path.suffix != DatasetArchive.FILE_EXTENSION:
        path = path.with_name(path.name + DatasetArchive.FILE_EXTENSION)
        log.debug(f"Added extension to dataset path: {path}")
    write_bytes(path, DatasetArchive.encode(dataset))
    log.info(f"Wrote {len(dataset)} samples to {path}")
    return path


def read_dataset(path: PathLike) -> Dataset:
    """Read a TWAF file written by write_dataset."""
    log.debug(f"Reading dataset: {path}")
    dataset = DatasetArchive.decode(read_bytes(path), str(path))
    log.info(f"Read {len(dataset)} samples from {path}")
    return dataset


def read_scattered_csv(path: PathLike) -> ScatteredVelocities:
    """
    Load scattered 2-D velocity samples from a CSV with header x,y,vx,vy.

    Raises:
        IoError: the file cannot be read
        DataError: columns are missing, values are non-numeric or the file has no rows
    """
    try:
        frame = pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError as e:
        error_msg = f"Scattered-velocity file not found: {path}"
        log.error(error_msg)
        raise IoError(error_msg) from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        error_msg = f"Could not parse {path}: {e}"
        log.error(error_msg)
        raise DataError(error_msg) from e

    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        error_msg = f"{path}: missing columns {missing}; expected header {','.join(CSV_COLUMNS)}"
        log.error(error_msg)
        raise DataError(error_msg)
    try:
        values = frame[list(CSV_COLUMNS)].to_numpy(dtype=np.float64)
    except ValueError as e:
        error_msg = f"{path}: non-numeric velocity entries: {e}"
        log.error(error_msg)
        raise DataError(error_msg) from e
    if len(values) == 0 or not np.all(np.isfinite(values)):
        error_msg = f"{path}: expected at least one finite row, got {len(values)} rows"
        log.error(error_msg)
        raise DataError(error_msg)

    log.info(f"Loaded {len(values)} scattered velocity samples from {path}")
    return ScatteredVelocities(values[:, :2], values[:, 2:], {"source": str(path)})

