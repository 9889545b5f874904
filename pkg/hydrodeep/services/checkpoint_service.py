"""
Service for saving and loading model checkpoints.

File layout: the magic ``HDKP``, a little-endian ``uint32`` format version and
``uint64`` header length, a canonical JSON header, the parameter payload
(value, first moment and second moment of every entry as little-endian
float64, in header order) and a SHA256 digest of everything before it.
"""
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict

import numpy as np
from pydantic import ValidationError

from hydrodeep import __version__
from hydrodeep.config.settings import settings
from hydrodeep.engine.graph import ModelGraph
from hydrodeep.schemas.dataset import Scaler
from hydrodeep.schemas.model import ModelConfig
from hydrodeep.services.model_service import ModelService
from hydrodeep.utils.enums import LayerGroup
from hydrodeep.utils.exceptions import CheckpointError, StateError
from hydrodeep.utils.helpers import sha256_digest

logger = logging.getLogger(__name__)

MAGIC = b"HDKP"
PREAMBLE = struct.Struct("<IQ")
DIGEST_SIZE = 32
FLOAT = np.dtype("<f8")


def _canonical_json(payload: Dict[str, Any]) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


class CheckpointService:
    """
    Service class for checkpoint persistence.

    A roundtrip restores parameter values, Adam moments, step counts,
    trainable flags, the model config, the scaler and the dropout generator
    state bit for bit.
    """

    @staticmethod
    def header(model: ModelGraph) -> Dict[str, Any]:
        """
        Structured header describing ``model``.

        Raises:
            StateError: If the model was not built from a ModelConfig.
        """
        if model.config is None:
            raise StateError("only models built from a ModelConfig can be checkpointed")
        return {
            "tool": f"hydrodeep {__version__}",
            "config": json.loads(model.config.json()),
            "seed": model.seed,
            "rng_state": model.rng.bit_generator.state,
            "scaler": None if model.scaler is None else model.scaler.dict(),
            "groups": model.store.group_map(),
            "params": [
                {"name": name, "shape": list(e.value.shape), "trainable": e.trainable, "step_count": e.step_count}
                for name, e in model.store.items()
            ],
        }

    @staticmethod
    def to_bytes(model: ModelGraph) -> bytes:
        """Serialize ``model`` in the checkpoint format."""
        header = _canonical_json(CheckpointService.header(model))
        parts = [MAGIC, PREAMBLE.pack(settings.checkpoint_version, len(header)), header]
        for _, entry in model.store.items():
            for buffer in (entry.value, entry.m, entry.v):
                parts.append(np.ascontiguousarray(buffer, dtype=FLOAT).tobytes())
        body = b"".join(parts)
        return body + sha256_digest(body)

    @staticmethod
    def save(model: ModelGraph, path: Path) -> Path:
        """
        Write a checkpoint file.

        Args:
            model (ModelGraph): Model to persist.
            path (Path): Destination; parent directories are created.

        Returns:
            Path: ``path``.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(CheckpointService.to_bytes(model))
        logger.info("Saved checkpoint %s (%d parameters)", path, model.parameter_count())
        return path

    @staticmethod
    def from_bytes(data: bytes) -> ModelGraph:
        """
        Rebuild a model from checkpoint bytes.

        Raises:
            CheckpointError: On a bad magic, version or digest, or a header
                that does not describe the payload.
        """
        if len(data) < len(MAGIC) + PREAMBLE.size + DIGEST_SIZE or data[:len(MAGIC)] != MAGIC:
            raise CheckpointError("not a HydroDeep checkpoint")
        version, header_len = PREAMBLE.unpack_from(data, len(MAGIC))
        if version != settings.checkpoint_version:
            raise CheckpointError(f"checkpoint format version {version}, expected {settings.checkpoint_version}")
        body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
        if sha256_digest(body) != digest:
            raise CheckpointError("checkpoint digest mismatch")
        offset = len(MAGIC) + PREAMBLE.size
        if offset + header_len > len(body):
            raise CheckpointError("checkpoint header length exceeds the file")
        try:
            header = json.loads(body[offset:offset + header_len].decode("utf-8"))
            config = ModelConfig.parse_obj(header["config"])
            scaler = None if header["scaler"] is None else Scaler.parse_obj(header["scaler"])
        except (UnicodeDecodeError, ValueError, KeyError, ValidationError) as e:
            raise CheckpointError(f"unreadable checkpoint header: {e}")
        model = ModelService.build_model(config)
        declared = [p["name"] for p in header["params"]]
        if declared != list(model.store):
            raise CheckpointError("checkpoint parameters do not match the rebuilt architecture")
        if (len(body) - offset - header_len) % FLOAT.itemsize:
            raise CheckpointError("checkpoint payload is not a whole number of float64 values")
        payload = np.frombuffer(body, dtype=FLOAT, offset=offset + header_len)
        cursor = 0
        for spec in header["params"]:
            entry = model.store[spec["name"]]
            if list(entry.value.shape) != spec["shape"] or entry.group != LayerGroup(header["groups"][spec["name"]]):
                raise CheckpointError(f"parameter {spec['name']} does not match the rebuilt architecture")
            size = entry.value.size
            for buffer in (entry.value, entry.m, entry.v):
                chunk = payload[cursor:cursor + size]
                if chunk.size != size:
                    raise CheckpointError("checkpoint payload is truncated")
                buffer[...] = chunk.reshape(buffer.shape)
                cursor += size
            entry.trainable = bool(spec["trainable"])
            entry.step_count = int(spec["step_count"])
        if cursor != payload.size:
            raise CheckpointError("checkpoint payload has trailing data")
        model.scaler = scaler
        model.seed = int(header["seed"])
        model.rng.bit_generator.state = header["rng_state"]
        return model

    @staticmethod
    def load(path: Path) -> ModelGraph:
        """
        Read a checkpoint file.

        Args:
            path (Path): Checkpoint written by :meth:`save`.

        Returns:
            ModelGraph: The restored model.

        Raises:
            CheckpointError: If the file is missing or fails validation.
        """
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise CheckpointError(f"cannot read checkpoint {path}: {e}")
        model = CheckpointService.from_bytes(data)
        logger.info("Loaded checkpoint %s", path)
        return model
