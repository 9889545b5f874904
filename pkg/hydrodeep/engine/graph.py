"""
Two-input layer graph with recorded forward passes and reverse-mode backward.

The graph has a sequence branch fed by Input 1, an optional auxiliary branch
fed by Input 2, and a head applied to the concatenation of both branch
outputs. The head must end in a single linear unit.
"""
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from hydrodeep.engine.layers import Layer, Shape, build_stack
from hydrodeep.engine.params import ParamStore
from hydrodeep.utils.enums import Mode
from hydrodeep.utils.exceptions import BuildError, DimensionError, StateError
from hydrodeep.utils.helpers import make_rng

INIT_STREAM = 101
DROPOUT_STREAM = 102


@dataclass
class Tape:
    """Execution record of one forward pass, consumed by :func:`backward`."""
    graph: "ModelGraph"
    sequence: List[Tuple[Layer, Any]] = field(default_factory=list)
    aux: List[Tuple[Layer, Any]] = field(default_factory=list)
    head: List[Tuple[Layer, Any]] = field(default_factory=list)
    split: int = 0
    batch: int = 0


class ModelGraph:
    """
    Layer stack with its parameter store.

    Attributes:
        sequence_layers (List[Layer]): Layers applied to Input 1.
        aux_layers (List[Layer]): Layers applied to Input 2 (may be empty).
        head_layers (List[Layer]): Layers applied to the concatenated branches.
        store (ParamStore): All parameters, in build order.
        input1_shape (Shape): Per-sample shape of Input 1, (lag, width).
        input2_width (Optional[int]): Width of Input 2, None if unused.
        config: ModelConfig the graph was built from, if any.
        scaler: Scaler attached after training, if any.
        seed (int): Initialisation seed.
        rng (np.random.Generator): Dropout mask generator.
    """

    def __init__(self, sequence_layers: List[Layer], aux_layers: List[Layer], head_layers: List[Layer],
                 input1_shape: Shape, input2_width: Optional[int], seed: int = 0, config=None) -> None:
        self.sequence_layers = sequence_layers
        self.aux_layers = aux_layers
        self.head_layers = head_layers
        self.input1_shape = tuple(input1_shape)
        self.input2_width = input2_width
        self.config = config
        self.scaler = None
        self.seed = seed
        self.store = ParamStore()
        self.rng = make_rng(seed, DROPOUT_STREAM)
        self._last_tape: Optional[Tape] = None
        self._build()

    def _build(self) -> None:
        init = make_rng(self.seed, INIT_STREAM)
        seq_shape = build_stack(self.sequence_layers, self.store, self.input1_shape, init)
        if len(seq_shape) != 1:
            raise BuildError(f"sequence branch must end in a vector, got shape {seq_shape}")
        width = seq_shape[0]
        if self.input2_width is not None:
            aux_shape = build_stack(self.aux_layers, self.store, (self.input2_width,), init)
            width += aux_shape[0]
        out_shape = build_stack(self.head_layers, self.store, (width,), init)
        if out_shape != (1,):
            raise BuildError(f"head must produce one output, got shape {out_shape}")

    @property
    def layers(self) -> List[Layer]:
        return self.sequence_layers + self.aux_layers + self.head_layers

    def parameter_count(self, group=None) -> int:
        return self.store.count(group)

    def _check_inputs(self, input1: np.ndarray, input2: Optional[np.ndarray]) -> None:
        if input1.ndim != 3 or input1.shape[1:] != self.input1_shape:
            raise DimensionError(f"input1 shape {input1.shape} does not match (N,) + {self.input1_shape}")
        if self.input2_width is not None:
            if input2 is None or input2.shape != (input1.shape[0], self.input2_width):
                shape = None if input2 is None else input2.shape
                raise DimensionError(f"input2 shape {shape} does not match ({input1.shape[0]}, {self.input2_width})")

    def forward(self, input1: np.ndarray, input2: Optional[np.ndarray] = None,
                mode: Mode = Mode.EVAL) -> Tuple[np.ndarray, Tape]:
        """
        Run the graph on a batch.

        Args:
            input1 (np.ndarray): (N, lag, width) sequences.
            input2 (Optional[np.ndarray]): (N, input2_width) day-t vectors.
            mode (Mode): Train enables dropout.

        Returns:
            Tuple[np.ndarray, Tape]: (N,) predictions and the execution record.
        """
        input1 = np.asarray(input1, dtype=np.float64)
        input2 = None if input2 is None else np.asarray(input2, dtype=np.float64)
        self._check_inputs(input1, input2)
        mode = Mode(mode)
        tape = Tape(graph=self, batch=input1.shape[0])
        x = input1
        for layer in self.sequence_layers:
            x, cache = layer.forward(x, self.store, mode, self.rng)
            tape.sequence.append((layer, cache))
        tape.split = x.shape[1]
        if self.input2_width is not None:
            a = input2
            for layer in self.aux_layers:
                a, cache = layer.forward(a, self.store, mode, self.rng)
                tape.aux.append((layer, cache))
            x = np.concatenate([x, a], axis=1)
        for layer in self.head_layers:
            x, cache = layer.forward(x, self.store, mode, self.rng)
            tape.head.append((layer, cache))
        self._last_tape = tape
        return x[:, 0], tape

    def predict(self, input1: np.ndarray, input2: Optional[np.ndarray] = None, batch_size: int = 256) -> np.ndarray:
        """Eval-mode predictions, computed in fixed-order batches."""
        n = len(input1)
        out = np.empty(n)
        for start in range(0, n, batch_size):
            stop = start + batch_size
            aux = None if input2 is None else input2[start:stop]
            out[start:stop], _ = self.forward(input1[start:stop], aux, Mode.EVAL)
        self._last_tape = None
        return out

    def backward(self, seed: np.ndarray) -> None:
        """Backward through the most recent recorded forward pass."""
        backward(self._last_tape, seed)


def backward(tape: Optional[Tape], seed: np.ndarray) -> None:
    """
    Reverse-mode accumulation of d(loss)/d(parameter) into ``ParamStore.grad``.

    Frozen parameters receive gradients too; the optimizer skips them.

    Args:
        tape (Optional[Tape]): Record of the forward pass.
        seed (np.ndarray): (N,) gradient of the loss with respect to the predictions.

    Raises:
        StateError: If no forward pass was recorded.
        DimensionError: If the seed does not match the recorded batch.
    """
    if tape is None:
        raise StateError("backward called before forward")
    seed = np.asarray(seed, dtype=np.float64)
    if seed.shape != (tape.batch,):
        raise DimensionError(f"loss seed shape {seed.shape} does not match batch of {tape.batch}")
    store = tape.graph.store
    d = seed[:, None]
    for layer, cache in reversed(tape.head):
        d = layer.backward(d, cache, store)
    d_seq, d_aux = d[:, :tape.split], d[:, tape.split:]
    for layer, cache in reversed(tape.aux):
        d_aux = layer.backward(d_aux, cache, store)
    for layer, cache in reversed(tape.sequence):
        d_seq = layer.backward(d_seq, cache, store)
