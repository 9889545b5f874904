"""
Layers binding the functional kernels to a :class:`ParamStore`.

A layer is built once against the per-sample shape of its input (without
the batch axis); building registers its parameters under
``"<layer name>.<parameter>"`` and returns the per-sample output shape.
"""
import math
from typing import Any, List, Tuple

import numpy as np

from hydrodeep.engine import functional as F
from hydrodeep.engine.params import ParamStore
from hydrodeep.utils.enums import Activation, LayerGroup, Mode
from hydrodeep.utils.exceptions import BuildError

Shape = Tuple[int, ...]


def glorot_uniform(rng: np.random.Generator, shape: Shape, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform draw in +-sqrt(6 / (fan_in + fan_out))."""
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """
    Base class of all layers.

    Attributes:
        name (str): Unique layer name, prefix of its parameter names.
        group (LayerGroup): Freeze unit the layer's parameters belong to.
    """

    kind = "layer"

    def __init__(self, name: str, group: LayerGroup) -> None:
        self.name = name
        self.group = LayerGroup(group)

    def build(self, store: ParamStore, in_shape: Shape, rng: np.random.Generator) -> Shape:
        return in_shape

    def forward(self, x: np.ndarray, store: ParamStore, mode: Mode, rng: np.random.Generator) -> Tuple[np.ndarray, Any]:
        raise NotImplementedError

    def backward(self, dout: np.ndarray, cache: Any, store: ParamStore) -> np.ndarray:
        raise NotImplementedError

    def _add(self, store: ParamStore, short: str, value: np.ndarray) -> None:
        store.add(f"{self.name}.{short}", value, self.group)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, {self.group.value})"


class Dense(Layer):
    """Fully connected layer over the last axis; also applied per day to sequences."""

    kind = "dense"

    def __init__(self, name: str, group: LayerGroup, units: int, activation: Activation = Activation.IDENTITY) -> None:
        super().__init__(name, group)
        self.units = units
        self.activation = Activation(activation)

    def build(self, store, in_shape, rng):
        n_in = in_shape[-1]
        self._add(store, "W", glorot_uniform(rng, (self.units, n_in), n_in, self.units))
        self._add(store, "b", np.zeros(self.units))
        return in_shape[:-1] + (self.units,)

    def forward(self, x, store, mode, rng):
        p = store.layer_slice(self.name)
        return F._dense_forward(x, p["W"], p["b"], self.activation)

    def backward(self, dout, cache, store):
        W = store.layer_slice(self.name)["W"]
        dx, dW, db = F.dense_backward(dout, cache, W)
        store.accumulate(self.name, {"W": dW, "b": db})
        return dx


class Conv1D(Layer):
    """Valid 1D convolution over time."""

    kind = "conv1d"

    def __init__(self, name: str, group: LayerGroup, filters: int, kernel_width: int,
                 activation: Activation = Activation.TANH) -> None:
        super().__init__(name, group)
        self.filters = filters
        self.kernel_width = kernel_width
        self.activation = Activation(activation)

    def build(self, store, in_shape, rng):
        steps, channels = in_shape
        if steps < self.kernel_width:
            raise BuildError(f"{self.name}: input length {steps} shorter than kernel width {self.kernel_width}")
        shape = (self.filters, channels, self.kernel_width)
        self._add(store, "kernels", glorot_uniform(rng, shape, channels * self.kernel_width,
                                                   self.filters * self.kernel_width))
        self._add(store, "bias", np.zeros(self.filters))
        return (steps - self.kernel_width + 1, self.filters)

    def forward(self, x, store, mode, rng):
        p = store.layer_slice(self.name)
        return F._conv1d_forward(x, p["kernels"], p["bias"], self.activation)

    def backward(self, dout, cache, store):
        dx, dk, db = F.conv1d_backward(dout, cache)
        store.accumulate(self.name, {"kernels": dk, "bias": db})
        return dx


class MaxPool1D(Layer):
    """Non-overlapping max pooling over time."""

    kind = "maxpool1d"

    def __init__(self, name: str, group: LayerGroup, pool: int) -> None:
        super().__init__(name, group)
        self.pool = pool

    def build(self, store, in_shape, rng):
        steps, channels = in_shape
        if steps // self.pool == 0:
            raise BuildError(f"{self.name}: pooled length 0 (input length {steps}, pool {self.pool})")
        return (steps // self.pool, channels)

    def forward(self, x, store, mode, rng):
        return F._maxpool1d_forward(x, self.pool)

    def backward(self, dout, cache, store):
        return F.maxpool1d_backward(dout, cache)


class _Recurrent(Layer):
    gates: Tuple[str, ...] = ()

    def __init__(self, name: str, group: LayerGroup, units: int, return_sequence: bool = False) -> None:
        super().__init__(name, group)
        self.units = units
        self.return_sequence = return_sequence

    def _build_cell(self, store, prefix: str, n_in: int, rng) -> None:
        n_h = self.units
        for gate in self.gates:
            store.add(f"{self.name}.{prefix}W_{gate}", glorot_uniform(rng, (n_h, n_h + n_in), n_h + n_in, n_h), self.group)
            store.add(f"{self.name}.{prefix}b_{gate}", np.zeros(n_h), self.group)

    def _check_input(self, in_shape: Shape) -> Tuple[int, int]:
        if len(in_shape) != 2:
            raise BuildError(f"{self.name}: recurrent layers need a sequence input, got shape {in_shape}")
        if in_shape[0] == 0:
            raise BuildError(f"{self.name}: empty input sequence")
        return in_shape

    def _out_shape(self, steps: int, width: int) -> Shape:
        return (steps, width) if self.return_sequence else (width,)


class LSTM(_Recurrent):
    """LSTM layer from zero initial state."""

    kind = "lstm"
    gates = F.LSTM_GATES

    def build(self, store, in_shape, rng):
        steps, n_in = self._check_input(in_shape)
        self._build_cell(store, "", n_in, rng)
        return self._out_shape(steps, self.units)

    def forward(self, x, store, mode, rng):
        return F._lstm_layer_forward(x, store.layer_slice(self.name), self.return_sequence)

    def backward(self, dout, cache, store):
        dx, grads = F.lstm_layer_backward(dout, cache, store.layer_slice(self.name))
        store.accumulate(self.name, grads)
        return dx


class GRU(_Recurrent):
    """GRU layer from zero initial state."""

    kind = "gru"
    gates = F.GRU_GATES

    def build(self, store, in_shape, rng):
        steps, n_in = self._check_input(in_shape)
        self._build_cell(store, "", n_in, rng)
        return self._out_shape(steps, self.units)

    def forward(self, x, store, mode, rng):
        return F._gru_layer_forward(x, store.layer_slice(self.name), self.return_sequence)

    def backward(self, dout, cache, store):
        dx, grads = F.gru_layer_backward(dout, cache, store.layer_slice(self.name))
        store.accumulate(self.name, grads)
        return dx


class BiLSTM(_Recurrent):
    """Bidirectional LSTM with independent forward (``fwd_``) and backward (``bwd_``) weights."""

    kind = "bilstm"
    gates = F.LSTM_GATES

    def build(self, store, in_shape, rng):
        steps, n_in = self._check_input(in_shape)
        self._build_cell(store, "fwd_", n_in, rng)
        self._build_cell(store, "bwd_", n_in, rng)
        return self._out_shape(steps, 2 * self.units)

    def _split(self, store):
        p = store.layer_slice(self.name)
        fwd = {k[4:]: v for k, v in p.items() if k.startswith("fwd_")}
        bwd = {k[4:]: v for k, v in p.items() if k.startswith("bwd_")}
        return fwd, bwd

    def forward(self, x, store, mode, rng):
        fwd, bwd = self._split(store)
        return F._bilstm_forward(x, fwd, bwd, self.return_sequence)

    def backward(self, dout, cache, store):
        fwd, bwd = self._split(store)
        dx, grads_f, grads_b = F.bilstm_backward(dout, cache, fwd, bwd)
        grads = {f"fwd_{k}": g for k, g in grads_f.items()}
        grads.update({f"bwd_{k}": g for k, g in grads_b.items()})
        store.accumulate(self.name, grads)
        return dx


class Dropout(Layer):
    """Inverted dropout; identity in eval mode."""

    kind = "dropout"

    def __init__(self, name: str, group: LayerGroup, rate: float) -> None:
        super().__init__(name, group)
        self.rate = rate

    def forward(self, x, store, mode, rng):
        return F._dropout_forward(x, self.rate, mode, rng)

    def backward(self, dout, cache, store):
        return F.dropout_backward(dout, cache)


class Flatten(Layer):
    """Collapse (time, channels) into one feature axis."""

    kind = "flatten"

    def build(self, store, in_shape, rng):
        return (int(np.prod(in_shape)),)

    def forward(self, x, store, mode, rng):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dout, cache, store):
        return dout.reshape(cache)


def build_stack(layers: List[Layer], store: ParamStore, in_shape: Shape, rng: np.random.Generator) -> Shape:
    """Build ``layers`` in order and return the final per-sample shape."""
    shape = in_shape
    for layer in layers:
        shape = layer.build(store, shape, rng)
    return shape
