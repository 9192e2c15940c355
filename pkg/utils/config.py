"""
Configuration utilities for TopoHopf.

Settings come in three layers: built-in defaults, a named profile preset
(`desk` or `paper`, shipped under resources/profiles) and an optional user
JSON file. Keys are addressed with '/'-separated paths, e.g. 'train/epochs'.
"""

import copy
import json
import traceback
from pathlib import Path
from typing import Any, Dict, Optional, Union

from metadata import DEFAULT_PROFILE, PROFILE_DIR
from resources import get_resource_path, list_profiles, resource_exists
from utils.errors import ConfigError, ProfileNotFound
from utils.logging_utils import get_module_logger

# Get module logger
log = get_module_logger()


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)
    return base


class Config:
    """
    Configuration manager for TopoHopf.

    This class provides an interface for reading and writing experiment
    configuration.
    """

    def __init__(self, profile: str = DEFAULT_PROFILE, overrides: Optional[Union[str, Path]] = None):
        """
        Initialize the configuration manager.

        Args:
            profile: Name of the profile preset to start from
            overrides: Optional path to a JSON file whose keys override the profile
        """
        log.debug(f"Initializing Config with profile '{profile}'")

        # Default configuration values
        self.defaults = {
            "profile": profile,
            "seed": 0,
            "threads": 1,
            "grid": {
                "size": 64
            },
            "augment": {
                "bound": 4.0,
                "bins": 5,
                "frame": 1.0,
                "min_bin_width": 1e-3,
                "min_bin_height": 1e-3,
                "min_derivative": 1e-3
            },
            "data": {
                "n_train": 2000,
                "n_test": 200,
                "noise_sigma": 0.1,
                "keep_raw": True
            },
            "model": {
                "channels": [16, 32, 64, 128],
                "attention": True,
                "input_mode": "angles",
                "latent_dim": 10,
                "mlp_hidden": 64,
                "dropout": 0.9,
                "kernel_size": 3,
                "leaky_slope": 0.01,
                "attention_reduction": 8,
                "head_init_scale": 0.01
            },
            "train": {
                "lr": 1e-4,
                "epochs": 20,
                "batch_size": 64,
                "runs": 5,
                "val_fraction": 0.1
            },
            "inference": {
                "mc_evals": 10
            },
            "experiment": {
                "systems": ["simple_oscillator", "augmented_so", "suphopf", "lienard_poly",
                            "lienard_sigmoid", "vanderpol", "bzreaction", "selkov"],
                "methods": ["model", "critical_points", "lyapunov", "parameters"],
                "noise_sigma": 0.1,
                "test_size": 200,
                "noise_sigmas": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
                "boundary_resolution": 21,
                "repressilator_grid": 10
            },
            "baselines": {
                "lyapunov": {
                    "dt": 0.1,
                    "horizon": 100.0,
                    "emb_dim": 4,
                    "calibration_size": 200
                },
                "linear": {
                    "lr": 0.01,
                    "epochs": 200
                }
            },
            "repressilator": {
                "n_cells": 100,
                "noise_sigma": 0.5,
                "horizon": 50.0,
                "dt": 0.1,
                "neighbors": 8,
                "power": 2.0
            }
        }
        self.settings: Dict[str, Any] = copy.deepcopy(self.defaults)
        self.load_profile(profile)
        if overrides is not None:
            self.import_from_json(overrides)
        log.debug("Configuration ready")

    def load_profile(self, profile: str) -> None:
        """
        Apply a profile preset on top of the defaults.

        Args:
            profile: Profile name ('desk' or 'paper')
        """
        relative = f"{PROFILE_DIR}/{profile}.json"
        if not resource_exists(relative):
            error_msg = f"Unknown profile '{profile}'; available: {', '.join(list_profiles(PROFILE_DIR))}"
            log.error(error_msg)
            raise ProfileNotFound(error_msg)

        path = get_resource_path(relative)
        log.debug(f"Loading profile from {path}")
        with open(path, "r", encoding="utf-8") as f:
            preset = json.load(f)
        _merge(self.settings, preset)
        self.settings["profile"] = profile
        log.info(f"Profile '{profile}' loaded")

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: The configuration key (can be nested using '/' separator)
            default: The default value to return if the key doesn't exist

        Returns:
            The configuration value, or the default if not found
        """
        current: Any = self.settings
        for part in key.split('/'):
            if isinstance(current, dict) and part in current:
                current = current[part]
            else:
                return default
        log.debug(f"Config get: {key} = {current}")
        return copy.deepcopy(current)

    def set(self, key: str, value: Any) -> None:
        """
        Set a configuration value.

        Args:
            key: The configuration key (can be nested using '/' separator)
            value: The value to set
        """
        log.debug(f"Config set: {key} = {value}")
        parts = key.split('/')
        current = self.settings
        for part in parts[:-1]:
            if not isinstance(current.get(part), dict):
                current[part] = {}
            current = current[part]
        current[parts[-1]] = value

    def get_default(self, key_path: str) -> Any:
        """
        Get the default value for a configuration key.

        Args:
            key_path: The path to the configuration key (e.g., 'train/epochs')

        Returns:
            The default value, or None if the path doesn't exist
        """
        current: Any = self.defaults
        for part in key_path.split('/'):
            if isinstance(current, dict) and part in current:
                current = current[part]
            else:
                log.warning(f"No default value for config key: {key_path}")
                return None
        return copy.deepcopy(current)

    def as_dict(self) -> Dict[str, Any]:
        """Return a deep copy of the effective settings."""
        return copy.deepcopy(self.settings)

    def export_to_json(self, filepath: Union[str, Path]) -> None:
        """
        Export the effective configuration to a JSON file.

        Args:
            filepath: Path to save the JSON file
        """
        log.info(f"Exporting configuration to {filepath}")
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(self.settings, f, indent=2, sort_keys=True)

    def import_from_json(self, filepath: Union[str, Path]) -> None:
        """
        Merge configuration values from a JSON file.

        Args:
            filepath: Path to the JSON file
        """
        log.info(f"Importing configuration from {filepath}")
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                overrides = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            error_msg = f"Cannot read configuration file {filepath}: {e}"
            log.error(error_msg)
            log.debug(traceback.format_exc())
            raise ConfigError(error_msg) from e

        if not isinstance(overrides, dict):
            error_msg = f"Configuration file {filepath} must hold a JSON object"
            log.error(error_msg)
            raise ConfigError(error_msg)

        _merge(self.settings, overrides)
        log.info(f"Imported {len(overrides)} top-level configuration sections")

    def reset_to_defaults(self) -> None:
        """Reset all settings to the built-in defaults plus the current profile."""
        log.info("Resetting configuration to defaults")
        profile = self.settings.get("profile", DEFAULT_PROFILE)
        self.settings = copy.deepcopy(self.defaults)
        self.load_profile(profile)
