"""
Adam optimizer over a :class:`ParamStore`.
"""
import numpy as np

from hydrodeep.engine.params import ParamStore
from hydrodeep.schemas.model import AdamConfig


def adam_step(store: ParamStore, cfg: AdamConfig) -> None:
    """
    Apply one bias-corrected Adam update to every trainable entry.

    Non-trainable entries keep their value, moments and step count untouched.

    Args:
        store (ParamStore): Parameters with populated ``grad`` buffers.
        cfg (AdamConfig): Learning rate, decay rates and epsilon.
    """
    b1, b2 = cfg.beta1, cfg.beta2
    for _, entry in store.items():
        if not entry.trainable:
            continue
        entry.step_count += 1
        g = entry.grad
        entry.m *= b1
        entry.m += (1.0 - b1) * g
        entry.v *= b2
        entry.v += (1.0 - b2) * g * g
        m_hat = entry.m / (1.0 - b1 ** entry.step_count)
        v_hat = entry.v / (1.0 - b2 ** entry.step_count)
        entry.value -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
