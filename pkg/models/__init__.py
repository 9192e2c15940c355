"""
Models package for TopoHopf: plain domain types shared by every layer.
"""

from models.arch import ArchConfig, ClassProbs, TrainOpts, TrainReport
from models.dataset import Dataset, LabeledSample
from models.diffeo import Diffeo
from models.field import AngleField, GridSpec, ScatteredVelocities, Trajectory, VectorField
from models.system import DynClass, Regime, SystemName, SystemSpec

__all__ = [
    'ArchConfig', 'ClassProbs', 'TrainOpts', 'TrainReport',
    'Dataset', 'LabeledSample', 'Diffeo',
    'AngleField', 'GridSpec', 'ScatteredVelocities', 'Trajectory', 'VectorField',
    'DynClass', 'Regime', 'SystemName', 'SystemSpec',
]
