"""Checkpoint container: magic, version, JSON header, raw float64 payload.

Layout::

    b"MMDT" | u32 version (LE) | u32 header length (LE) | header JSON (UTF-8) | payload

The payload holds every parameter tensor as little-endian float64, in
canonical parameter order; the header's tensor directory records each
tensor's name, shape and byte offset within the payload.
"""
import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError

from src.corpus.vocab import Vocab
from src.errors import DataFormatError
from src.model.network import PARAM_ORDER, Params, param_shapes
from src.model.schemas import ModelConfig
from src.objective.schemas import TrainConfig


MAGIC = b"MMDT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


class CheckpointMeta(BaseModel):
    """Everything stored alongside the parameters."""

    model_config = ConfigDict(extra="forbid")

    model: ModelConfig
    train: TrainConfig
    vocab: Dict[str, Any]
    epoch: int = 0
    best_metric: Optional[float] = None

    def load_vocab(self) -> Vocab:
        return Vocab.from_dict(self.vocab)


def _payload_and_directory(params: Params) -> Tuple[bytes, list]:
    if tuple(params) != PARAM_ORDER:
        raise DataFormatError(f"parameters must be in canonical order {PARAM_ORDER}, got {tuple(params)}")

    chunks = []
    directory = []
    offset = 0
    for name in PARAM_ORDER:
        tensor = np.asarray(params[name], dtype="<f8")
        if not np.all(np.isfinite(tensor)):
            raise DataFormatError(f"refusing to save non-finite tensor {name}")
        raw = tensor.tobytes(order="C")
        directory.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    return b"".join(chunks), directory


def encode_checkpoint(params: Params, meta: CheckpointMeta) -> bytes:
    """Serialize to the checkpoint byte layout (deterministic)."""
    payload, directory = _payload_and_directory(params)
    header = meta.model_dump(mode="json")
    header["tensors"] = directory
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + payload


def save_checkpoint(params: Params, meta: CheckpointMeta, path: Union[str, Path]) -> None:
    """
    Atomically write a checkpoint (temp file in the same directory, then rename).

    Args:
        params: Parameters in canonical order
        meta: Configs, vocabulary, epoch and best metric
        path: Destination file; replaced if it exists
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_checkpoint(params, meta)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

    logger.debug(f"Checkpoint saved: {path} ({len(data)} bytes, epoch {meta.epoch})")


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Tuple[Params, CheckpointMeta]:
    """Parse checkpoint bytes; validates everything before building tensors."""
    if len(data) < _PREFIX.size:
        raise DataFormatError(f"{source}: file too short for a checkpoint header")

    magic, version, header_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise DataFormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{source}: unsupported format version {version}")

    header_end = _PREFIX.size + header_len
    if header_end > len(data):
        raise DataFormatError(f"{source}: header length {header_len} exceeds file size")
    try:
        header = json.loads(data[_PREFIX.size:header_end].decode("utf-8"))
        directory = header.pop("tensors")
        meta = CheckpointMeta.model_validate(header)
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, ValidationError) as e:
        raise DataFormatError(f"{source}: invalid header: {e}") from None

    try:
        vocab = meta.load_vocab()
    except (KeyError, TypeError) as e:
        raise DataFormatError(f"{source}: invalid vocabulary: {e}") from None
    if len(vocab) != meta.model.vocab_size:
        raise DataFormatError(
            f"{source}: vocabulary has {len(vocab)} entries but model expects {meta.model.vocab_size}"
        )

    expected_shapes = param_shapes(meta.model)
    if not isinstance(directory, list) or not all(isinstance(entry, dict) for entry in directory):
        raise DataFormatError(f"{source}: tensor directory must be a list of objects")
    names = [entry.get("name") for entry in directory]
    if names != list(PARAM_ORDER):
        raise DataFormatError(f"{source}: tensor directory {names} is not in canonical order")

    offset = 0
    for entry in directory:
        if "shape" not in entry or "offset" not in entry:
            raise DataFormatError(f"{source}: tensor {entry['name']} lacks shape or offset")
        shape = tuple(entry["shape"])
        if shape != expected_shapes[entry["name"]]:
            raise DataFormatError(
                f"{source}: tensor {entry['name']} has shape {shape}, config expects {expected_shapes[entry['name']]}"
            )
        if entry["offset"] != offset:
            raise DataFormatError(f"{source}: tensor {entry['name']} offset {entry['offset']} != {offset}")
        offset += int(np.prod(shape, dtype=np.int64)) * 8

    payload = data[header_end:]
    if len(payload) != offset:
        raise DataFormatError(f"{source}: payload length {len(payload)} != expected {offset}")

    params: Params = {}
    for entry in directory:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        flat = np.frombuffer(payload, dtype="<f8", count=count, offset=entry["offset"])
        params[entry["name"]] = flat.astype(np.float64).reshape(shape)
    return params, meta


def load_checkpoint(path: Union[str, Path]) -> Tuple[Params, CheckpointMeta]:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Returns:
        (parameters, metadata); parameters are bit-identical to those saved

    Raises:
        DataFormatError: Bad magic, unsupported version, payload length or
            shape mismatch
    """
    path = Path(path)
    params, meta = decode_checkpoint(path.read_bytes(), source=str(path))
    logger.debug(f"Checkpoint loaded: {path} (epoch {meta.epoch})")
    return params, meta
