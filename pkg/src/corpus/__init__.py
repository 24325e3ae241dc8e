from .schemas import CLASS_NAMES, NUM_CLASSES, Sample, SynthConfig
from .manifest import MANIFEST_HEADER, read_manifest, require_labels, strip_labels, write_manifest
from .vocab import Vocab, build_vocab, tokenize
from .images import ImageTensor, load_image, preprocess_image, save_image
from .synth import synth_corpus
from .dataset import Batch, collate, encode_samples

__all__ = [
    "CLASS_NAMES", "NUM_CLASSES", "Sample", "SynthConfig",
    "MANIFEST_HEADER", "read_manifest", "require_labels", "strip_labels", "write_manifest",
    "Vocab", "build_vocab", "tokenize",
    "ImageTensor", "load_image", "preprocess_image", "save_image",
    "synth_corpus",
    "Batch", "collate", "encode_samples",
]
