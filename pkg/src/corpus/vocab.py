"""Caption vocabulary and tokenizer."""
import re
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from src.corpus.schemas import Sample
from src.errors import DataFormatError


PAD_ID = 0
UNK_ID = 1
CLS_ID = 2
RESERVED_TOKENS = ("[PAD]", "[UNK]", "[CLS]")

_SPLIT_RE = re.compile(r"[^0-9a-z]+")


def split_caption(caption: str) -> List[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [tok for tok in _SPLIT_RE.split(caption.lower()) if tok]


@dataclass
class TokenSeq:
    """Fixed-length token ids plus attention mask (1 = real token)."""

    ids: np.ndarray
    mask: np.ndarray


class Vocab:
    """Token to id map with reserved PAD/UNK/CLS ids."""

    def __init__(self, tokens: Iterable[str], max_size: int = 2048):
        """
        Initialize vocabulary from an ordered token list.

        Args:
            tokens: Non-reserved tokens in id order (ids start at 3)
            max_size: Capacity including the reserved ids
        """
        if max_size < len(RESERVED_TOKENS):
            raise DataFormatError(f"vocab max_size must be >= {len(RESERVED_TOKENS)}, got {max_size}")

        self.max_size = max_size
        self.tokens: List[str] = list(RESERVED_TOKENS) + list(tokens)
        if len(self.tokens) > max_size:
            raise DataFormatError(f"vocab has {len(self.tokens)} entries, above max_size {max_size}")

        self.token_to_id: Dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.token_to_id) != len(self.tokens):
            raise DataFormatError("vocab contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocab) and self.tokens == other.tokens and self.max_size == other.max_size

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def to_dict(self) -> dict:
        return {"max_size": self.max_size, "tokens": self.tokens[len(RESERVED_TOKENS):]}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        return cls(data["tokens"], max_size=data["max_size"])


def build_vocab(manifest: List[Sample], max_size: int = 2048) -> Vocab:
    """
    Build a frequency-capped vocabulary from manifest captions.

    Keeps the ``max_size - 3`` most frequent tokens ordered by
    (frequency desc, token asc).
    """
    if not manifest:
        raise DataFormatError("cannot build a vocabulary from an empty manifest")

    counts = Counter(tok for sample in manifest for tok in split_caption(sample.caption))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = max(max_size - len(RESERVED_TOKENS), 0)
    return Vocab([tok for tok, _ in ranked[:keep]], max_size=max_size)


def tokenize(caption: str, vocab: Vocab, seq_len: int = 16) -> TokenSeq:
    """Encode a caption as ``[CLS] + tokens``, truncated then PAD-filled to ``seq_len``."""
    if seq_len < 2:
        raise DataFormatError(f"seq_len must be >= 2, got {seq_len}")

    token_ids = [CLS_ID] + [vocab.lookup(tok) for tok in split_caption(caption)]
    token_ids = token_ids[:seq_len]

    ids = np.full(seq_len, PAD_ID, dtype=np.int64)
    ids[:len(token_ids)] = token_ids
    mask = np.zeros(seq_len, dtype=np.float64)
    mask[:len(token_ids)] = 1.0
    return TokenSeq(ids=ids, mask=mask)
