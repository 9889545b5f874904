"""
Dense-tensor layer kernels with hand-written reverse passes.

Every kernel comes as a pair: ``_<op>_forward`` returns ``(output, cache)``
and ``<op>_backward`` consumes that cache. The public ``<op>_forward``
wrappers validate their arguments and accept unbatched inputs; the private
ones assume validated, batched float64 arrays. Sequences are laid out as
(batch, time, channels).
"""
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from hydrodeep.utils.enums import Activation, Mode
from hydrodeep.utils.exceptions import DimensionError, EmptySequenceError, ParameterError, WindowError
from hydrodeep.utils.helpers import as_float_array

Params = Dict[str, np.ndarray]

LSTM_GATES = ("f", "i", "o", "C")
GRU_GATES = ("z", "r", "h")


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, written through tanh so it never overflows."""
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def activate(pre: np.ndarray, activation: Activation) -> np.ndarray:
    """Apply ``activation`` to a pre-activation array."""
    if activation is Activation.TANH:
        return np.tanh(pre)
    if activation is Activation.RELU:
        return np.maximum(pre, 0.0)
    return pre


def activation_grad(out: np.ndarray, activation: Activation) -> np.ndarray:
    """Derivative of ``activation`` expressed through its output."""
    if activation is Activation.TANH:
        return 1.0 - out * out
    if activation is Activation.RELU:
        return (out > 0.0).astype(np.float64)
    return np.ones_like(out)


def _activation(value) -> Activation:
    try:
        return Activation(value)
    except ValueError:
        raise ParameterError(f"Unsupported activation: {value}")


def _batched(x: np.ndarray, ndim: int) -> Tuple[np.ndarray, bool]:
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise DimensionError(f"expected a {ndim - 1}-d or {ndim}-d array, got shape {x.shape}")
    return x, False


# ---------------------------------------------------------------------------
# 1D convolution (valid, stride 1)
# ---------------------------------------------------------------------------

def _conv1d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray, activation: Activation):
    windows = sliding_window_view(x, kernels.shape[2], axis=1)  # (B, T', C, W)
    pre = np.tensordot(windows, kernels, axes=([2, 3], [1, 2])) + bias
    out = activate(pre, activation)
    return out, (x.shape, kernels, windows, out, activation)


def conv1d_backward(dout: np.ndarray, cache) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Reverse pass of the 1D convolution.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (d_input, d_kernels, d_bias).
    """
    x_shape, kernels, windows, out, activation = cache
    dpre = dout * activation_grad(out, activation)
    dkernels = np.tensordot(dpre, windows, axes=([0, 1], [0, 1]))
    dbias = dpre.sum(axis=(0, 1))
    dx = np.zeros(x_shape)
    t_out = dpre.shape[1]
    for w in range(kernels.shape[2]):
        dx[:, w:w + t_out, :] += dpre @ kernels[:, :, w]
    return dx, dkernels, dbias


def conv1d_forward(input, kernels, bias, activation="identity") -> np.ndarray:
    """
    Valid 1D convolution with stride 1.

    ``out[t, k] = act(bias[k] + sum_{c,w} input[t+w, c] * kernels[k, c, w])``

    Args:
        input: Array of shape (T, C) or (B, T, C).
        kernels: Array of shape (K, C, W).
        bias: Array of shape (K,).
        activation: One of tanh, relu, identity.

    Returns:
        np.ndarray: Array of shape (T-W+1, K), batched if the input was.

    Raises:
        DimensionError: If channel counts or bias length disagree.
        WindowError: If the sequence is shorter than the kernel.
    """
    x, squeeze = _batched(as_float_array(input, "input"), 3)
    kernels = as_float_array(kernels, "kernels")
    bias = as_float_array(bias, "bias")
    if kernels.ndim != 3 or kernels.shape[1] != x.shape[2]:
        raise DimensionError(f"kernels shape {kernels.shape} does not match {x.shape[2]} input channels")
    if bias.shape != (kernels.shape[0],):
        raise DimensionError(f"bias shape {bias.shape} does not match {kernels.shape[0]} kernels")
    if kernels.shape[2] < 1:
        raise WindowError("kernel width must be at least 1")
    if x.shape[1] < kernels.shape[2]:
        raise WindowError(f"sequence length {x.shape[1]} shorter than kernel width {kernels.shape[2]}")
    out, _ = _conv1d_forward(x, kernels, bias, _activation(activation))
    return out[0] if squeeze else out


# ---------------------------------------------------------------------------
# 1D max pooling (non-overlapping, remainder dropped)
# ---------------------------------------------------------------------------

def _maxpool1d_forward(x: np.ndarray, pool: int):
    batch, steps, channels = x.shape
    t_out = steps // pool
    blocks = x[:, :t_out * pool].reshape(batch, t_out, pool, channels)
    idx = blocks.argmax(axis=2)
    out = np.take_along_axis(blocks, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return out, (x.shape, idx, pool)


def maxpool1d_backward(dout: np.ndarray, cache) -> np.ndarray:
    """Route each output gradient back to the position that won its window."""
    x_shape, idx, pool = cache
    batch, _, channels = x_shape
    t_out = idx.shape[1]
    dblocks = np.zeros((batch, t_out, pool, channels))
    np.put_along_axis(dblocks, idx[:, :, None, :], dout[:, :, None, :], axis=2)
    dx = np.zeros(x_shape)
    dx[:, :t_out * pool] = dblocks.reshape(batch, t_out * pool, channels)
    return dx


def maxpool1d_forward(input, pool: int) -> np.ndarray:
    """
    Non-overlapping max pooling over time; trailing rows that do not fill a
    window are dropped.

    Args:
        input: Array of shape (T, K) or (B, T, K).
        pool (int): Window length, at least 1.

    Returns:
        np.ndarray: Array of shape (floor(T / pool), K).

    Raises:
        ParameterError: If ``pool`` is not positive.
    """
    if int(pool) != pool or pool <= 0:
        raise ParameterError(f"pool must be a positive integer, got {pool}")
    x, squeeze = _batched(as_float_array(input, "input"), 3)
    out, _ = _maxpool1d_forward(x, int(pool))
    return out[0] if squeeze else out


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def _lstm_cell_forward(x, h_prev, c_prev, params: Params):
    z = np.concatenate([h_prev, x], axis=-1)
    f = sigmoid(z @ params["W_f"].T + params["b_f"])
    i = sigmoid(z @ params["W_i"].T + params["b_i"])
    o = sigmoid(z @ params["W_o"].T + params["b_o"])
    g = np.tanh(z @ params["W_C"].T + params["b_C"])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (z, f, i, o, g, c_prev, tc)


def lstm_cell_backward(dh, dc, cache, params: Params, grads: Params):
    """
    Reverse pass of one LSTM step; parameter gradients are added to ``grads``.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (dx, dh_prev, dc_prev).
    """
    z, f, i, o, g, c_prev, tc = cache
    n_h = dh.shape[-1]
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc * tc)
    dpre = {
        "f": dc * c_prev * f * (1.0 - f),
        "i": dc * g * i * (1.0 - i),
        "o": do * o * (1.0 - o),
        "C": dc * i * (1.0 - g * g),
    }
    dz = np.zeros_like(z)
    for gate in LSTM_GATES:
        grads[f"W_{gate}"] += dpre[gate].T @ z
        grads[f"b_{gate}"] += dpre[gate].sum(axis=0)
        dz += dpre[gate] @ params[f"W_{gate}"]
    return dz[:, n_h:], dz[:, :n_h], dc * f


def _check_recurrent_params(params: Params, gates, n_in: int) -> int:
    try:
        n_h = params[f"b_{gates[0]}"].shape[0]
        for gate in gates:
            if params[f"W_{gate}"].shape != (n_h, n_h + n_in) or params[f"b_{gate}"].shape != (n_h,):
                raise DimensionError(
                    f"W_{gate}/b_{gate} shapes {params[f'W_{gate}'].shape}/{params[f'b_{gate}'].shape} "
                    f"do not match n_h={n_h}, n_in={n_in}"
                )
    except KeyError as e:
        raise DimensionError(f"missing recurrent parameter {e}")
    return n_h


def lstm_cell_step(x, h_prev, c_prev, params: Params) -> Tuple[np.ndarray, np.ndarray]:
    """
    One LSTM step over the concatenated ``[h_prev, x]``.

    Args:
        x: Input vector (n_in,).
        h_prev: Previous hidden state (n_h,).
        c_prev: Previous cell state (n_h,).
        params (Params): W_f, W_i, W_o, W_C of shape (n_h, n_h + n_in) and
            b_f, b_i, b_o, b_C of shape (n_h,).

    Returns:
        Tuple[np.ndarray, np.ndarray]: (h, c).
    """
    x = as_float_array(x, "x")
    h_prev = as_float_array(h_prev, "h_prev")
    c_prev = as_float_array(c_prev, "c_prev")
    params = {k: as_float_array(v, k) for k, v in params.items()}
    n_h = _check_recurrent_params(params, LSTM_GATES, x.shape[-1])
    if h_prev.shape != (n_h,) or c_prev.shape != (n_h,) or x.ndim != 1:
        raise DimensionError(f"state shapes {h_prev.shape}/{c_prev.shape} do not match n_h={n_h}")
    h, c, _ = _lstm_cell_forward(x[None], h_prev[None], c_prev[None], params)
    return h[0], c[0]


def _lstm_layer_forward(seq: np.ndarray, params: Params, return_sequence: bool):
    batch, steps, _ = seq.shape
    if steps == 0:
        raise EmptySequenceError("LSTM received an empty sequence")
    n_h = params["b_f"].shape[0]
    h = np.zeros((batch, n_h))
    c = np.zeros((batch, n_h))
    hs = np.empty((batch, steps, n_h))
    caches = []
    for t in range(steps):
        h, c, step_cache = _lstm_cell_forward(seq[:, t], h, c, params)
        hs[:, t] = h
        caches.append(step_cache)
    out = hs if return_sequence else hs[:, -1]
    return out, (caches, seq.shape, return_sequence)


def lstm_layer_backward(dout: np.ndarray, cache, params: Params) -> Tuple[np.ndarray, Params]:
    """
    Backpropagation through time for one LSTM layer.

    Returns:
        Tuple[np.ndarray, Params]: (d_sequence, parameter gradients).
    """
    caches, shape, return_sequence = cache
    batch, steps, _ = shape
    n_h = params["b_f"].shape[0]
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    if return_sequence:
        dhs = dout
    else:
        dhs = np.zeros((batch, steps, n_h))
        dhs[:, -1] = dout
    dx = np.zeros(shape)
    dh_next = np.zeros((batch, n_h))
    dc_next = np.zeros((batch, n_h))
    for t in reversed(range(steps)):
        dx[:, t], dh_next, dc_next = lstm_cell_backward(dhs[:, t] + dh_next, dc_next, caches[t], params, grads)
    return dx, grads


def lstm_layer_forward(seq, params: Params, return_sequence: bool = False) -> np.ndarray:
    """
    Run an LSTM from zero state over a sequence.

    Args:
        seq: Array of shape (T, n_in) or (B, T, n_in).
        params (Params): LSTM weights, see :func:`lstm_cell_step`.
        return_sequence (bool): Return every hidden state instead of the last.

    Returns:
        np.ndarray: (T, n_h) when ``return_sequence`` else (n_h,).

    Raises:
        EmptySequenceError: If T is 0.
    """
    x, squeeze = _batched(as_float_array(seq, "seq"), 3)
    params = {k: as_float_array(v, k) for k, v in params.items()}
    _check_recurrent_params(params, LSTM_GATES, x.shape[2])
    out, _ = _lstm_layer_forward(x, params, return_sequence)
    return out[0] if squeeze else out


# ---------------------------------------------------------------------------
# GRU
# ---------------------------------------------------------------------------

def _gru_cell_forward(x, h_prev, params: Params):
    zin = np.concatenate([h_prev, x], axis=-1)
    z = sigmoid(zin @ params["W_z"].T + params["b_z"])
    r = sigmoid(zin @ params["W_r"].T + params["b_r"])
    rin = np.concatenate([r * h_prev, x], axis=-1)
    h_tilde = np.tanh(rin @ params["W_h"].T + params["b_h"])
    h = (1.0 - z) * h_prev + z * h_tilde
    return h, (zin, rin, h_prev, z, r, h_tilde)


def gru_cell_backward(dh, cache, params: Params, grads: Params):
    """
    Reverse pass of one GRU step; parameter gradients are added to ``grads``.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (dx, dh_prev).
    """
    zin, rin, h_prev, z, r, h_tilde = cache
    n_h = dh.shape[-1]
    dh_prev = dh * (1.0 - z)
    da_h = dh * z * (1.0 - h_tilde * h_tilde)
    grads["W_h"] += da_h.T @ rin
    grads["b_h"] += da_h.sum(axis=0)
    drin = da_h @ params["W_h"]
    dx = drin[:, n_h:].copy()
    dh_prev += drin[:, :n_h] * r
    da_z = dh * (h_tilde - h_prev) * z * (1.0 - z)
    da_r = drin[:, :n_h] * h_prev * r * (1.0 - r)
    grads["W_z"] += da_z.T @ zin
    grads["b_z"] += da_z.sum(axis=0)
    grads["W_r"] += da_r.T @ zin
    grads["b_r"] += da_r.sum(axis=0)
    dzin = da_z @ params["W_z"] + da_r @ params["W_r"]
    return dx + dzin[:, n_h:], dh_prev + dzin[:, :n_h]


def gru_cell_step(x, h_prev, params: Params) -> np.ndarray:
    """
    One GRU step: update gate z, reset gate r, candidate over ``[r*h, x]``,
    and ``h' = (1 - z) * h + z * candidate``.

    Args:
        x: Input vector (n_in,).
        h_prev: Previous hidden state (n_h,).
        params (Params): W_z, W_r, W_h of shape (n_h, n_h + n_in) and b_z, b_r, b_h.

    Returns:
        np.ndarray: New hidden state (n_h,).
    """
    x = as_float_array(x, "x")
    h_prev = as_float_array(h_prev, "h_prev")
    params = {k: as_float_array(v, k) for k, v in params.items()}
    n_h = _check_recurrent_params(params, GRU_GATES, x.shape[-1])
    if h_prev.shape != (n_h,) or x.ndim != 1:
        raise DimensionError(f"state shape {h_prev.shape} does not match n_h={n_h}")
    h, _ = _gru_cell_forward(x[None], h_prev[None], params)
    return h[0]


def _gru_layer_forward(seq: np.ndarray, params: Params, return_sequence: bool):
    batch, steps, _ = seq.shape
    if steps == 0:
        raise EmptySequenceError("GRU received an empty sequence")
    n_h = params["b_z"].shape[0]
    h = np.zeros((batch, n_h))
    hs = np.empty((batch, steps, n_h))
    caches = []
    for t in range(steps):
        h, step_cache = _gru_cell_forward(seq[:, t], h, params)
        hs[:, t] = h
        caches.append(step_cache)
    out = hs if return_sequence else hs[:, -1]
    return out, (caches, seq.shape, return_sequence)


def gru_layer_backward(dout: np.ndarray, cache, params: Params) -> Tuple[np.ndarray, Params]:
    """Backpropagation through time for one GRU layer."""
    caches, shape, return_sequence = cache
    batch, steps, _ = shape
    n_h = params["b_z"].shape[0]
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    if return_sequence:
        dhs = dout
    else:
        dhs = np.zeros((batch, steps, n_h))
        dhs[:, -1] = dout
    dx = np.zeros(shape)
    dh_next = np.zeros((batch, n_h))
    for t in reversed(range(steps)):
        dx[:, t], dh_next = gru_cell_backward(dhs[:, t] + dh_next, caches[t], params, grads)
    return dx, grads


# ---------------------------------------------------------------------------
# Bidirectional LSTM
# ---------------------------------------------------------------------------

def _bilstm_forward(seq: np.ndarray, params_fwd: Params, params_bwd: Params, return_sequence: bool):
    out_f, cache_f = _lstm_layer_forward(seq, params_fwd, return_sequence)
    out_b, cache_b = _lstm_layer_forward(seq[:, ::-1], params_bwd, return_sequence)
    if return_sequence:
        out_b = out_b[:, ::-1]
    return np.concatenate([out_f, out_b], axis=-1), (cache_f, cache_b, return_sequence)


def bilstm_backward(dout: np.ndarray, cache, params_fwd: Params, params_bwd: Params):
    """
    Reverse pass of the bidirectional LSTM.

    Returns:
        Tuple[np.ndarray, Params, Params]: (d_sequence, forward grads, backward grads).
    """
    cache_f, cache_b, return_sequence = cache
    n_h = params_fwd["b_f"].shape[0]
    d_f = dout[..., :n_h]
    d_b = dout[..., n_h:]
    if return_sequence:
        d_b = d_b[:, ::-1]
    dx_f, grads_f = lstm_layer_backward(d_f, cache_f, params_fwd)
    dx_b, grads_b = lstm_layer_backward(d_b, cache_b, params_bwd)
    return dx_f + dx_b[:, ::-1], grads_f, grads_b


def bidirectional_lstm_forward(seq, params_fwd: Params, params_bwd: Params) -> np.ndarray:
    """
    Final forward state concatenated with the final state of a second LSTM
    run over the reversed sequence.

    Returns:
        np.ndarray: Array of shape (2 * n_h,).
    """
    x, squeeze = _batched(as_float_array(seq, "seq"), 3)
    params_fwd = {k: as_float_array(v, k) for k, v in params_fwd.items()}
    params_bwd = {k: as_float_array(v, k) for k, v in params_bwd.items()}
    _check_recurrent_params(params_fwd, LSTM_GATES, x.shape[2])
    _check_recurrent_params(params_bwd, LSTM_GATES, x.shape[2])
    out, _ = _bilstm_forward(x, params_fwd, params_bwd, return_sequence=False)
    return out[0] if squeeze else out


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------

def _dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray, activation: Activation):
    out = activate(x @ W.T + b, activation)
    return out, (x, out, activation)


def dense_backward(dout: np.ndarray, cache, W: np.ndarray):
    """
    Reverse pass of a dense layer applied over the last axis.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (dx, dW, db).
    """
    x, out, activation = cache
    dpre = dout * activation_grad(out, activation)
    flat = dpre.reshape(-1, dpre.shape[-1])
    dW = flat.T @ x.reshape(-1, x.shape[-1])
    return dpre @ W, dW, flat.sum(axis=0)


def dense_forward(x, W, b, activation="identity") -> np.ndarray:
    """
    Fully connected layer ``act(W @ x + b)`` applied over the last axis of ``x``.

    Raises:
        DimensionError: If ``W`` or ``b`` do not match ``x``.
    """
    x = as_float_array(x, "x")
    W = as_float_array(W, "W")
    b = as_float_array(b, "b")
    if W.ndim != 2 or W.shape[1] != x.shape[-1] or b.shape != (W.shape[0],):
        raise DimensionError(f"dense shapes W={W.shape}, b={b.shape} do not match input width {x.shape[-1]}")
    out, _ = _dense_forward(x, W, b, _activation(activation))
    return out


# ---------------------------------------------------------------------------
# Dropout
# ---------------------------------------------------------------------------

def _dropout_forward(x: np.ndarray, rate: float, mode: Mode, rng: Optional[np.random.Generator]):
    if mode is Mode.EVAL or rate == 0.0:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    """Reverse pass of inverted dropout."""
    return dout if mask is None else dout * mask


def dropout_forward(x, rate: float, mode="train", rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Inverted dropout: in train mode each entry is zeroed with probability
    ``rate`` and survivors are scaled by ``1 / (1 - rate)``; eval mode is the
    identity.

    Raises:
        ParameterError: If ``rate`` is outside [0, 1) or no generator is given in train mode.
    """
    if not 0.0 <= rate < 1.0:
        raise ParameterError(f"dropout rate must be in [0, 1), got {rate}")
    mode = Mode(mode)
    if mode is Mode.TRAIN and rate > 0.0 and rng is None:
        raise ParameterError("train-mode dropout needs a random generator")
    out, _ = _dropout_forward(as_float_array(x, "x"), rate, mode, rng)
    return out


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

def mse_loss(pred, target) -> float:
    """
    Mean squared error.

    Raises:
        DimensionError: If the shapes differ or are empty.
        NonFiniteError: If either array holds NaN or Inf.
    """
    pred = as_float_array(pred, "pred")
    target = as_float_array(target, "target")
    if pred.shape != target.shape or pred.size == 0:
        raise DimensionError(f"prediction shape {pred.shape} does not match target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of :func:`mse_loss` with respect to ``pred``."""
    return 2.0 * (pred - target) / pred.size
