from .schemas import AugmentedSplits, PseudoConfig, PseudoRecord, PseudoReport
from .labeler import build_report, filter_high_confidence, read_pseudo_records, score_manifest, write_pseudo_records
from .augment import merge_manifests, split_pseudo, write_augmented

__all__ = [
    "AugmentedSplits", "PseudoConfig", "PseudoRecord", "PseudoReport",
    "build_report", "filter_high_confidence", "read_pseudo_records", "score_manifest", "write_pseudo_records",
    "merge_manifests", "split_pseudo", "write_augmented",
]
