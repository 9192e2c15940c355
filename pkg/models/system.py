"""
Parametric dynamical system data model
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np


class SystemName(str, Enum):
    """Stable identifiers of the systems in the zoo."""

    SO = "simple_oscillator"
    SUPERCRITICAL_HOPF = "suphopf"
    LIENARD_POLY = "lienard_poly"
    LIENARD_SIGMOID = "lienard_sigmoid"
    VAN_DER_POL = "vanderpol"
    BZ_REACTION = "bzreaction"
    SELKOV = "selkov"
    SUBCRITICAL_HOPF = "subhopf"
    REPRESSILATOR = "repressilator"


class DynClass(int, Enum):
    """Attractor class of a system; the value is the on-disk label byte."""

    POINT = 0
    CYCLE = 1

    @property
    def short(self) -> str:
        return "point" if self is DynClass.POINT else "cycle"


class Regime(str, Enum):
    """Attractor regimes of the subcritical Hopf probe."""

    POINT = "point"
    BISTABLE = "bistable"
    PERIODIC = "periodic"


Interval = Tuple[float, float]


@dataclass(frozen=True)
class SystemSpec:
    """A named parametric ODE with its phase-space window."""

    name: SystemName
    params: np.ndarray = field(compare=False)
    extent: Tuple[Interval, ...]
    dim: int = 2

    def __post_init__(self):
        params = np.asarray(self.params, dtype=np.float64).copy()
        params.setflags(write=False)
        object.__setattr__(self, "params", params)

    def param(self, index: int) -> float:
        return float(self.params[index])

    def __str__(self) -> str:
        values = ", ".join(f"{p:.4g}" for p in self.params)
        return f"{self.name.value}({values})"

    def __repr__(self) -> str:
        return (f"SystemSpec(name='{self.name.value}', params={self.params.tolist()}, "
                f"extent={self.extent}, dim={self.dim})")
