"""
harness/result_store.py

Repository of per-cell experiment results under an output directory, so an
interrupted sweep resumes from the cells it already finished.
"""

import json
import os
import re
import traceback
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from utils.errors import IoError
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

_UNSAFE = re.compile(r"[^A-Za-z0-9_.=+-]+")


def cell_key(*parts: Any) -> str:
    """File-system-safe key from experiment coordinates, e.g. ('noise', 'model', 0.3)."""
    return "__".join(_UNSAFE.sub("-", str(p)) for p in parts)


class ResultStore:
    """Manages the storage and retrieval of finished result cells."""

    def __init__(self, root, config_hash: str):
        """
        Initialize the result store.

        Args:
            root: Output directory
            config_hash: Hash of the experiment configuration; cells of
                different configurations never mix
        """
        log.debug("Initializing ResultStore")
        self.config_hash = config_hash
        self.base_dir = Path(root) / "cells" / config_hash[:16]
        self.metadata_file = self.base_dir / "metadata.json"
        os.makedirs(self.base_dir, exist_ok=True)
        self.metadata = self._load_metadata()
        log.info(f"Result store at {self.base_dir} ({len(self.metadata['cells'])} finished cells)")

    def _load_metadata(self) -> Dict[str, Any]:
        if self.metadata_file.exists():
            try:
                log.debug(f"Loading metadata from {self.metadata_file}")
                with open(self.metadata_file, "r", encoding="utf-8") as f:
                    metadata = json.load(f)
                if metadata.get("config_hash") == self.config_hash:
                    return metadata
                log.warning("Ignoring store metadata written for another configuration")
            except (OSError, json.JSONDecodeError) as e:
                log.error(f"Error loading metadata: {e}")
                log.debug(traceback.format_exc())
        return {"config_hash": self.config_hash, "cells": [], "last_updated": None}

    def _save_metadata(self) -> None:
        self.metadata["last_updated"] = datetime.now().isoformat()
        self._write_json(self.metadata_file, self.metadata)

    @staticmethod
    def _write_json(path: Path, payload: Any) -> None:
        tmp = path.with_name(path.name + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
            os.replace(tmp, path)
        except OSError as e:
            error_msg = f"Cannot write {path}: {e}"
            log.error(error_msg)
            raise IoError(error_msg) from e

    def _cell_path(self, key: str) -> Path:
        return self.base_dir / f"{key}.json"

    def has(self, key: str) -> bool:
        return self._cell_path(key).exists()

    def load(self, key: str) -> Optional[Any]:
        """Stored payload of a cell, or None when it is missing or unreadable."""
        path = self._cell_path(key)
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)["result"]
        except (OSError, json.JSONDecodeError, KeyError) as e:
            log.warning(f"Discarding unreadable cell {key}: {e}")
            return None

    def save(self, key: str, result: Any) -> None:
        self._write_json(self._cell_path(key), {"key": key, "config_hash": self.config_hash, "result": result})
        if key not in self.metadata["cells"]:
            self.metadata["cells"].append(key)
        self._save_metadata()
        log.debug(f"Stored cell {key}")

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        """Return the stored cell or compute, store and return it."""
        cached = self.load(key)
        if cached is not None:
            log.debug(f"Reusing cell {key}")
            return cached
        result = compute()
        self.save(key, result)
        return result

    def cells(self) -> List[str]:
        return list(self.metadata["cells"])


class NullStore:
    """Store stand-in when no output directory is configured: always computes."""

    config_hash = ""

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        return compute()

    def cells(self) -> List[str]:
        return []
