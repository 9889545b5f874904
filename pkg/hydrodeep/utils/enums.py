"""
Enumerations used throughout the HydroDeep package.

This module defines the architecture names, activations, execution modes,
layer groups, freeze policies and synthetic shift modes.
"""
from enum import Enum, unique
from typing import FrozenSet


@unique
class Arch(str, Enum):
    """Enumeration of supported network architectures."""
    HYDRODEEP = "hydrodeep"
    CNN = "cnn"
    LSTM = "lstm"
    GRU = "gru"
    BILSTM = "bilstm"
    DL_ABLATION = "dl_ablation"


@unique
class Activation(str, Enum):
    """Enumeration of layer activations."""
    TANH = "tanh"
    RELU = "relu"
    IDENTITY = "identity"


@unique
class Mode(str, Enum):
    """Execution mode of a forward pass."""
    TRAIN = "train"
    EVAL = "eval"


@unique
class LayerGroup(str, Enum):
    """Parameter groups; the unit of freezing during transfer."""
    INPUT_ADAPTER = "input_adapter"
    SPATIAL = "spatial"
    TEMPORAL = "temporal"
    HEAD = "head"


@unique
class PolicyName(str, Enum):
    """Enumeration of the layer-freezing transfer approaches."""
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"

    @property
    def trainable_groups(self) -> FrozenSet[LayerGroup]:
        """Groups left trainable by this policy."""
        return _POLICY_GROUPS[self]


_POLICY_GROUPS = {
    PolicyName.T1: frozenset({LayerGroup.INPUT_ADAPTER, LayerGroup.HEAD}),
    PolicyName.T2: frozenset(LayerGroup),
    PolicyName.T3: frozenset({LayerGroup.INPUT_ADAPTER, LayerGroup.TEMPORAL, LayerGroup.HEAD}),
    PolicyName.T4: frozenset({LayerGroup.INPUT_ADAPTER, LayerGroup.SPATIAL, LayerGroup.HEAD}),
}


@unique
class ShiftMode(str, Enum):
    """Axis along which a synthetic transfer target differs from its source."""
    SPATIAL = "spatial_shift"
    TEMPORAL = "temporal_shift"
    BOTH = "both"
