from .jsonfmt import dumps_fixed, write_fixed
from .checkpoint import CheckpointMeta, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "dumps_fixed", "write_fixed",
    "CheckpointMeta", "decode_checkpoint", "encode_checkpoint", "load_checkpoint", "save_checkpoint",
]
