"""
Helper functions for the HydroDeep package.

This module contains seeding, digest and small array utilities shared by the
services.
"""
import hashlib
from typing import Sequence, Union

import numpy as np

from hydrodeep.utils.exceptions import NonFiniteError

SeedLike = Union[int, Sequence[int]]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Build a PCG64 generator for a named sub-stream of a seed.

    Args:
        seed (int): Base seed.
        *stream (int): Integers identifying the sub-stream, so that
            independent components never share draws.

    Returns:
        np.random.Generator: Deterministic generator.
    """
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def as_float_array(values, name: str = "array") -> np.ndarray:
    """
    Convert ``values`` to a float64 array and reject NaN/Inf.

    Args:
        values: Array-like input.
        name (str): Name used in the error message.

    Returns:
        np.ndarray: A float64 array.

    Raises:
        NonFiniteError: If any entry is NaN or infinite.
    """
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


def sha256_digest(payload: bytes) -> bytes:
    """
    Compute the SHA256 digest of a byte string.

    Args:
        payload (bytes): Data to hash.

    Returns:
        bytes: 32-byte digest.
    """
    return hashlib.sha256(payload).digest()


def chronological_split_sizes(n: int, train_frac: float, val_frac_of_train: float):
    """
    Sizes of the train/validation/test blocks of a chronological split.

    Train and test sizes are floored from their fractions of ``n`` (train:
    ``train_frac * (1 - val_frac_of_train)``, test: ``1 - train_frac``) and
    validation takes the remainder, so n=10 splits as (5, 2, 3).

    Returns:
        Tuple[int, int, int]: (n_train, n_val, n_test).
    """
    n_train = int(np.floor(n * train_frac * (1.0 - val_frac_of_train) + 1e-9))
    n_test = int(np.floor(n * (1.0 - train_frac) + 1e-9))
    return n_train, n - n_train - n_test, n_test
