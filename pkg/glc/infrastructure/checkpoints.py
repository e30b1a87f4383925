"""Binary model checkpoints; the byte layout is documented in docs/checkpoint-format.md."""

import logging
from pathlib import Path
import struct

import numpy as np

from glc.core.errors import DataError
from glc.core.logger import event_message
from glc.models.models import LAYER_NAMES, Layer, ModelParams
from glc.observability.events import LogEvent

logger = logging.getLogger(__name__)

MAGIC = b"GLCCKPT\x00"
FORMAT_VERSION = 1
TENSOR_NAMES: tuple[str, ...] = tuple(
    f"{layer}.{part}" for layer in LAYER_NAMES for part in ("weight", "bias")
)


def encode_checkpoint(params: ModelParams) -> bytes:
    chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(TENSOR_NAMES))]
    for name, tensor in params.tensors():
        encoded_name = name.encode("ascii")
        chunks.append(struct.pack("<H", len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(struct.pack("<B", tensor.ndim))
        chunks.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        chunks.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, payload: bytes, source: str) -> None:
        self._payload = payload
        self._offset = 0
        self._source = source

    def take(self, size: int) -> bytes:
        end = self._offset + size
        if end > len(self._payload):
            raise DataError(f"{self._source}: truncated checkpoint at byte {self._offset}.")
        chunk = self._payload[self._offset : end]
        self._offset = end
        return chunk

    def unpack(self, fmt: str) -> tuple[int, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def exhausted(self) -> bool:
        return self._offset == len(self._payload)


def decode_checkpoint(payload: bytes, source: str = "<bytes>") -> ModelParams:
    reader = _Reader(payload, source)
    if reader.take(len(MAGIC)) != MAGIC:
        raise DataError(f"{source}: not a glc checkpoint (bad magic).")
    version, count = reader.unpack("<II")
    if version != FORMAT_VERSION:
        raise DataError(f"{source}: unsupported checkpoint version {version}.")
    if count != len(TENSOR_NAMES):
        raise DataError(f"{source}: expected {len(TENSOR_NAMES)} tensors, found {count}.")

    tensors: dict[str, np.ndarray] = {}
    for expected in TENSOR_NAMES:
        (name_length,) = reader.unpack("<H")
        name = reader.take(name_length).decode("ascii", errors="replace")
        if name != expected:
            raise DataError(f"{source}: expected tensor {expected!r}, found {name!r}.")
        (ndim,) = reader.unpack("<B")
        if ndim != (2 if name.endswith(".weight") else 1):
            raise DataError(f"{source}: tensor {name} has rank {ndim}.")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape))
        values = np.frombuffer(reader.take(8 * size), dtype="<f8").astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise DataError(f"{source}: tensor {name} holds non-finite values.")
        tensors[name] = values.reshape(shape)
    if not reader.exhausted:
        raise DataError(f"{source}: trailing bytes after the last tensor.")

    layers: dict[str, Layer] = {}
    fan_in: int | None = None
    for layer_name in LAYER_NAMES:
        weight = tensors[f"{layer_name}.weight"]
        bias = tensors[f"{layer_name}.bias"]
        if bias.shape[0] != weight.shape[1] or (fan_in is not None and weight.shape[0] != fan_in):
            raise DataError(f"{source}: layer {layer_name} shapes do not chain.")
        fan_in = weight.shape[1]
        layers[layer_name] = Layer(weight=weight, bias=bias)
    return ModelParams(**layers)


def save_checkpoint(params: ModelParams, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(params))
    except OSError as exc:
        raise DataError(f"Failed to write checkpoint {path}: {exc}") from exc
    logger.info(
        event_message(
            LogEvent.CHECKPOINT_SAVED,
            path=path,
            input_dim=params.input_dim,
            classes=params.num_classes,
        )
    )


def load_checkpoint(path: Path) -> ModelParams:
    if not path.exists():
        raise DataError(f"Checkpoint not found: {path}")
    try:
        payload = path.read_bytes()
    except OSError as exc:
        raise DataError(f"Failed to read checkpoint {path}: {exc}") from exc
    params = decode_checkpoint(payload, source=str(path))
    logger.info(event_message(LogEvent.CHECKPOINT_LOADED, path=path, classes=params.num_classes))
    return params
