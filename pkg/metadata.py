"""
Application metadata for TopoHopf
"""

# Application info
APP_NAME = "TopoHopf"
APP_VERSION = "0.1.0"
APP_DESCRIPTION = "Hopf bifurcation detection from topologically augmented vector fields"
APP_ID = "topohopf"

# Dataset container
DATASET_MAGIC = b"TWAF"
DATASET_VERSION = 1
DATASET_EXTENSION = ".twaf"

# Model checkpoint container
CHECKPOINT_MAGIC = b"TWCK"
CHECKPOINT_VERSION = 1
CHECKPOINT_EXTENSION = ".twck"

# Profile presets, relative to the resources directory
PROFILE_DIR = "profiles"
DEFAULT_PROFILE = "desk"
