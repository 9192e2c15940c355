"""
reports/tables.py

CSV emission of result tables and rendering of stored boundary maps.
"""

import csv
import json
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from harness.experiments import BoundaryMap
from reports.heatmap import render_heatmap, write_svg
from utils.errors import DataError, IoError
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()

PathLike = Union[str, Path]
MAP_SUFFIX = ".map.json"


def emit_csv(table: pd.DataFrame, path: PathLike, config_hash: Optional[str] = None) -> Path:
    """
    Write a table as RFC-4180 CSV (header row, CRLF line ends, minimal quoting).

    Args:
        table: Result rows
        path: Destination file
        config_hash: Added as a column when the table does not carry one
    """
    path = Path(path)
    if config_hash is not None and "config_hash" not in table.columns:
        table = table.assign(config_hash=config_hash)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path, index=False, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    except OSError as e:
        error_msg = f"Cannot write table {path}: {e}"
        log.error(error_msg)
        raise IoError(error_msg) from e
    log.info(f"Wrote {len(table)} rows to {path}")
    return path


def save_boundary_map(boundary: BoundaryMap, path: PathLike, config_hash: str = "") -> Path:
    """Store a boundary map as JSON next to its rendered forms."""
    path = Path(path)
    if not path.name.endswith(MAP_SUFFIX):
        path = path.with_name(path.name + MAP_SUFFIX)
    payload = boundary.to_dict()
    payload["config_hash"] = config_hash
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    except OSError as e:
        error_msg = f"Cannot write boundary map {path}: {e}"
        log.error(error_msg)
        raise IoError(error_msg) from e
    return path


def load_boundary_map(path: PathLike):
    """Read a stored boundary map; returns (BoundaryMap, config hash)."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return BoundaryMap.from_dict(payload), payload.get("config_hash", "")
    except OSError as e:
        raise IoError(f"Cannot read boundary map {path}: {e}") from e
    except (ValueError, KeyError) as e:
        raise DataError(f"Malformed boundary map {path}: {e}") from e


def render_boundary_map(boundary: BoundaryMap, config_hash: str = "", seed: Optional[int] = None) -> str:
    metadata = {"system": boundary.system, "runs": str(boundary.runs), "config_hash": config_hash}
    if seed is not None:
        metadata["seed"] = str(seed)
    return render_heatmap(boundary.values, boundary.xs, boundary.ys, boundary.overlay,
                          title=f"{boundary.system}: mean cycle prediction", axis_labels=boundary.axis_names,
                          metadata=metadata)


def emit_boundary_map(boundary: BoundaryMap, out_dir: PathLike, stem: str, config_hash: str = "",
                      seed: Optional[int] = None) -> List[Path]:
    """Write the JSON, CSV and SVG forms of a boundary map."""
    out_dir = Path(out_dir)
    return [
        save_boundary_map(boundary, out_dir / stem, config_hash),
        emit_csv(boundary.to_frame(), out_dir / f"{stem}.csv", config_hash),
        write_svg(render_boundary_map(boundary, config_hash, seed), out_dir / f"{stem}.svg"),
    ]


def build_report(result_dir: PathLike) -> List[Path]:
    """
    Re-render every stored boundary map and summarize every result table.

    The summary lists mean accuracy per (experiment, system, method or variant)
    over all CSV tables in the directory.
    """
    result_dir = Path(result_dir)
    written = []
    for map_path in sorted(result_dir.glob(f"*{MAP_SUFFIX}")):
        boundary, config_hash = load_boundary_map(map_path)
        stem = map_path.name[:-len(MAP_SUFFIX)]
        written.append(write_svg(render_boundary_map(boundary, config_hash), result_dir / f"{stem}.svg"))

    tables = []
    for csv_path in sorted(result_dir.glob("*.csv")):
        if csv_path.name == "summary.csv":
            continue
        table = pd.read_csv(csv_path)
        if "accuracy_mean" in table.columns:
            tables.append(table.assign(source=csv_path.name))
    if tables:
        combined = pd.concat(tables, ignore_index=True)
        keys = [c for c in ("source", "experiment", "system", "method", "variant", "sigma") if c in combined.columns]
        summary = combined.groupby(keys, dropna=False)["accuracy_mean"].mean().reset_index()
        written.append(emit_csv(summary, result_dir / "summary.csv"))
    log.info(f"Report: {len(written)} artifacts in {result_dir}")
    return written
