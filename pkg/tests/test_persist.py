"""Tests for fixed-point JSON and the checkpoint container."""
import json
import struct

import numpy as np
import pytest

from src.corpus.vocab import Vocab
from src.errors import DataFormatError, NumericError
from src.model.network import PARAM_ORDER, init_params
from src.model.predict import predict_with_confidence
from src.objective.schemas import TrainConfig
from src.persist.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    CheckpointMeta,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from src.persist.jsonfmt import dumps_fixed, write_fixed


@pytest.fixture
def state(tiny_model_cfg):
    tokens = [f"w{i}" for i in range(tiny_model_cfg.vocab_size - 3)]
    vocab = Vocab(tokens, max_size=tiny_model_cfg.vocab_size)
    meta = CheckpointMeta(model=tiny_model_cfg, train=TrainConfig(), vocab=vocab.to_dict(), epoch=3, best_metric=0.75)
    return init_params(tiny_model_cfg, seed=5), meta


# ---------------------------------------------------------------- JSON

def test_dumps_fixed_layout():
    text = dumps_fixed({"b": 0.5, "a": [1, 2.25], "nested": {"x": None, "ok": True}, "rows": [[1, 0], [0, 1]]})
    assert text == (
        "{\n"
        '  "b": 0.500000,\n'
        '  "a": [1, 2.250000],\n'
        '  "nested": {\n'
        '    "x": null,\n'
        '    "ok": true\n'
        "  },\n"
        '  "rows": [\n'
        "    [1, 0],\n"
        "    [0, 1]\n"
        "  ]\n"
        "}"
    )
    assert json.loads(text)["a"] == [1, 2.25]


def test_dumps_fixed_numpy_and_errors():
    assert dumps_fixed(np.float64(1 / 3)) == "0.333333"
    assert dumps_fixed(np.int64(4)) == "4"
    with pytest.raises(NumericError):
        dumps_fixed({"loss": float("nan")})


def test_write_fixed_trailing_newline(tmp_path):
    path = tmp_path / "out" / "h.json"
    write_fixed([{"epoch": 1}], path)
    assert path.read_text(encoding="utf-8").endswith("}\n]\n")


# ---------------------------------------------------------------- checkpoints

def test_roundtrip_is_bitwise(tmp_path, state, tiny_batch):
    params, meta = state
    path = tmp_path / "model.ckpt"
    save_checkpoint(params, meta, path)
    loaded, loaded_meta = load_checkpoint(path)

    assert tuple(loaded) == PARAM_ORDER
    for name in PARAM_ORDER:
        assert loaded[name].tobytes() == params[name].tobytes()
    assert loaded_meta == meta
    assert loaded_meta.load_vocab() == Vocab.from_dict(meta.vocab)
    assert predict_with_confidence(loaded, tiny_batch) == predict_with_confidence(params, tiny_batch)


def test_encoding_is_deterministic(tmp_path, state):
    params, meta = state
    save_checkpoint(params, meta, tmp_path / "a.ckpt")
    save_checkpoint({k: v.copy() for k, v in params.items()}, meta.model_copy(), tmp_path / "b.ckpt")
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_layout_prefix(state):
    params, meta = state
    data = encode_checkpoint(params, meta)
    magic, version, header_len = struct.unpack_from("<4sII", data)
    assert magic == MAGIC == b"MMDT"
    assert version == FORMAT_VERSION
    header = json.loads(data[12:12 + header_len])
    assert [t["name"] for t in header["tensors"]] == list(PARAM_ORDER)
    assert len(data) == 12 + header_len + 8 * sum(p.size for p in params.values())


def test_overwrite_leaves_single_file(tmp_path, state):
    params, meta = state
    for epoch in range(1, 4):
        save_checkpoint(params, meta.model_copy(update={"epoch": epoch}), tmp_path / "last.ckpt")
    assert [p.name for p in tmp_path.iterdir()] == ["last.ckpt"]
    assert load_checkpoint(tmp_path / "last.ckpt")[1].epoch == 3


def test_bad_magic(state):
    data = bytearray(encode_checkpoint(*state))
    data[:4] = b"XXXX"
    with pytest.raises(DataFormatError, match="magic"):
        decode_checkpoint(bytes(data))


def test_unsupported_version(state):
    data = bytearray(encode_checkpoint(*state))
    data[4:8] = struct.pack("<I", FORMAT_VERSION + 1)
    with pytest.raises(DataFormatError, match="version"):
        decode_checkpoint(bytes(data))


@pytest.mark.parametrize("cut", [1, 8, 1000])
def test_truncated_payload(tmp_path, state, cut):
    data = encode_checkpoint(*state)
    path = tmp_path / "short.ckpt"
    path.write_bytes(data[:-cut])
    with pytest.raises(DataFormatError):
        load_checkpoint(path)


def test_trailing_bytes_rejected(state):
    with pytest.raises(DataFormatError, match="payload length"):
        decode_checkpoint(encode_checkpoint(*state) + b"\x00" * 8)


def test_header_too_short():
    with pytest.raises(DataFormatError):
        decode_checkpoint(b"MMDT")


def test_vocab_size_mismatch(state):
    params, meta = state
    small = Vocab(["only"], max_size=meta.model.vocab_size)
    with pytest.raises(DataFormatError, match="vocabulary"):
        decode_checkpoint(encode_checkpoint(params, meta.model_copy(update={"vocab": small.to_dict()})))


def test_refuses_non_finite_and_unordered(state):
    params, meta = state
    broken = dict(params)
    broken["b_f"] = np.full_like(params["b_f"], np.inf)
    with pytest.raises(DataFormatError):
        encode_checkpoint(broken, meta)

    reordered = {name: params[name] for name in reversed(PARAM_ORDER)}
    with pytest.raises(DataFormatError):
        encode_checkpoint(reordered, meta)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
