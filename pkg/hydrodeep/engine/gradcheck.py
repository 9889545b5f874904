"""
Finite-difference verification of the analytic gradients.
"""
from typing import Dict, Optional, Tuple

import numpy as np

from hydrodeep.engine.functional import mse_grad, mse_loss
from hydrodeep.engine.graph import ModelGraph, backward
from hydrodeep.engine.params import ParamStore
from hydrodeep.utils.enums import Mode

Sample = Tuple[np.ndarray, Optional[np.ndarray], np.ndarray]


def randomize_parameters(store: ParamStore, rng: np.random.Generator, scale: float = 1.0) -> None:
    """Overwrite every parameter, biases included, with U(-scale, scale) draws."""
    for _, entry in store.items():
        entry.value[...] = rng.uniform(-scale, scale, size=entry.value.shape)


def _loss(model: ModelGraph, sample: Sample) -> float:
    input1, input2, target = sample
    pred, _ = model.forward(input1, input2, Mode.EVAL)
    return mse_loss(pred, target)


def relative_errors(model: ModelGraph, sample: Sample, eps: float = 1e-6) -> Dict[str, float]:
    """
    Relative gradient error of every named parameter tensor.

    The analytic gradient ``a`` of the eval-mode MSE loss is compared with the
    central difference ``n = (f(theta + eps) - f(theta - eps)) / (2 eps)``
    taken element by element; the error of a tensor is
    ``||a - n|| / max(||a||, ||n||, 1e-8)``.

    Returns:
        Dict[str, float]: Error per parameter name, in canonical order.
    """
    input1, input2, target = sample
    store = model.store
    store.zero_grad()
    pred, tape = model.forward(input1, input2, Mode.EVAL)
    backward(tape, mse_grad(pred, np.asarray(target, dtype=np.float64)))
    errors = {}
    for name, entry in store.items():
        analytic = entry.grad.copy()
        numeric = np.empty_like(analytic)
        flat = entry.value.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + eps
            plus = _loss(model, sample)
            flat[k] = original - eps
            minus = _loss(model, sample)
            flat[k] = original
            numeric.flat[k] = (plus - minus) / (2.0 * eps)
        scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-8)
        errors[name] = float(np.linalg.norm(analytic - numeric) / scale)
    return errors


def grad_check(model: ModelGraph, sample: Sample, eps: float = 1e-6) -> float:
    """
    Largest relative gradient error over all parameters of ``model``.

    Args:
        model (ModelGraph): Graph evaluated at its current parameters.
        sample (Sample): (input1, input2, target) batch.
        eps (float): Finite-difference step.

    Returns:
        float: Maximum of :func:`relative_errors`.
    """
    errors = relative_errors(model, sample, eps)
    return max(errors.values()) if errors else 0.0
