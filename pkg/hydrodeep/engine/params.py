"""
Named parameter storage with gradient and Adam moment buffers.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from hydrodeep.utils.enums import LayerGroup
from hydrodeep.utils.exceptions import DimensionError, ParameterError


@dataclass
class ParamEntry:
    """
    One named parameter tensor.

    ``grad``, ``m`` and ``v`` always share the shape of ``value``; ``m`` and
    ``v`` are zero while ``step_count`` is 0.
    """
    value: np.ndarray
    group: LayerGroup
    trainable: bool = True
    step_count: int = 0
    grad: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.value = np.ascontiguousarray(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)

    def reset_moments(self) -> None:
        """Zero the Adam moments and the step counter."""
        self.m[...] = 0.0
        self.v[...] = 0.0
        self.step_count = 0


class ParamStore:
    """
    Ordered map from layer-qualified names (``"lstm_1.W_f"``) to parameters.

    Insertion order is the canonical order used for checkpoints and for
    every reduction over parameters.
    """

    def __init__(self) -> None:
        self._entries: Dict[str, ParamEntry] = {}

    def add(self, name: str, value: np.ndarray, group: LayerGroup) -> ParamEntry:
        """
        Register a parameter.

        Raises:
            ParameterError: If the name is already taken.
        """
        if name in self._entries:
            raise ParameterError(f"parameter {name} registered twice")
        entry = ParamEntry(value=value, group=LayerGroup(group))
        self._entries[name] = entry
        return entry

    def __getitem__(self, name: str) -> ParamEntry:
        return self._entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def items(self) -> Iterable[Tuple[str, ParamEntry]]:
        return self._entries.items()

    def names(self, group: Optional[LayerGroup] = None) -> List[str]:
        """Parameter names in canonical order, optionally restricted to one group."""
        return [n for n, e in self._entries.items() if group is None or e.group == group]

    def layer_slice(self, layer: str) -> Dict[str, np.ndarray]:
        """Values owned by ``layer``, keyed by their short name (``"W_f"``)."""
        prefix = layer + "."
        return {n[len(prefix):]: e.value for n, e in self._entries.items() if n.startswith(prefix)}

    def accumulate(self, layer: str, grads: Dict[str, np.ndarray]) -> None:
        """Add per-layer gradients into the stored ``grad`` buffers."""
        for short, g in grads.items():
            entry = self._entries[f"{layer}.{short}"]
            if g.shape != entry.grad.shape:
                raise DimensionError(f"gradient for {layer}.{short} has shape {g.shape}, expected {entry.grad.shape}")
            entry.grad += g

    def zero_grad(self) -> None:
        for entry in self._entries.values():
            entry.grad[...] = 0.0

    def set_trainable(self, groups: Iterable[LayerGroup]) -> None:
        """Mark exactly the parameters of ``groups`` trainable."""
        keep = {LayerGroup(g) for g in groups}
        for entry in self._entries.values():
            entry.trainable = entry.group in keep

    def group_map(self) -> Dict[str, str]:
        return {n: e.group.value for n, e in self._entries.items()}

    def count(self, group: Optional[LayerGroup] = None) -> int:
        """Number of scalar parameters, optionally restricted to one group."""
        return int(sum(e.value.size for e in self._entries.values() if group is None or e.group == group))

    def snapshot(self, groups: Optional[Iterable[LayerGroup]] = None) -> Dict[str, np.ndarray]:
        """Copies of the current values, optionally restricted to ``groups``."""
        wanted = None if groups is None else {LayerGroup(g) for g in groups}
        return {n: e.value.copy() for n, e in self._entries.items() if wanted is None or e.group in wanted}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        """Write values from :meth:`snapshot` back in place."""
        for name, value in snapshot.items():
            self._entries[name].value[...] = value
