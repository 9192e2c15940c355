"""
Static assets shipped with TopoHopf: the experiment profile presets.
"""

from pathlib import Path
from typing import List

RESOURCE_ROOT = Path(__file__).parent


def get_resource_path(relative_path: str) -> str:
    """Absolute path of a file under the resources directory."""
    return str(RESOURCE_ROOT / relative_path)


def resource_exists(relative_path: str) -> bool:
    return (RESOURCE_ROOT / relative_path).is_file()


def list_profiles(profile_dir: str = "profiles") -> List[str]:
    """Names of the bundled profile presets, sorted."""
    return sorted(p.stem for p in (RESOURCE_ROOT / profile_dir).glob("*.json"))
