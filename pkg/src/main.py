"""Command-line entry point for the mmdt detector.

Subcommands: synth, train, eval, predict, pseudo-label, augment, gradcheck.
Exit codes: 0 success, 1 usage error, 2 config/data/IO error, 3 numeric failure.
"""
import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from dotenv import load_dotenv
from loguru import logger

from src.corpus.manifest import read_manifest, require_labels, strip_labels, write_manifest
from src.corpus.synth import synth_corpus
from src.errors import ConfigError, DataFormatError, NumericError, UsageError
from src.metrics.report import MetricsReport, metrics_report
from src.model.network import init_params
from src.model.predict import predict_all, read_predictions, write_predictions
from src.objective.gradcheck import grad_check, random_batch
from src.objective.trainer import encode_for_model, train
from src.persist.checkpoint import load_checkpoint
from src.persist.jsonfmt import write_fixed
from src.pseudo.augment import (
    count_duplicate_paths,
    merge_manifests,
    rebase_records,
    rebase_samples,
    split_pseudo,
    write_augmented,
)
from src.pseudo.labeler import build_report, filter_high_confidence, read_pseudo_records, score_manifest, write_pseudo_records
from src.pseudo.schemas import PseudoReport
from src.settings import RunConfig, load_run_config, load_settings, write_effective_config


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

UNLABELED_FILE = "unlabeled.csv"
PSEUDO_RECORDS_FILE = "pseudo_records.csv"
PSEUDO_REPORT_FILE = "pseudo_report.json"

DEFAULT_LOG_FORMAT = "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"

Handler = Callable[[argparse.Namespace, RunConfig, Dict[str, Any]], int]


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def configure_logging(settings: Dict[str, Any], level: Optional[str] = None) -> None:
    """Route loguru to stderr using the ``logging`` section of settings.yaml."""
    section = settings.get("logging", {}) or {}
    level = (level or os.getenv("MMDT_LOG_LEVEL") or section.get("level", "INFO")).upper()
    logger.remove()
    try:
        logger.add(sys.stderr, level=level, format=section.get("format", DEFAULT_LOG_FORMAT))
    except ValueError as e:
        logger.add(sys.stderr, level="INFO", format=DEFAULT_LOG_FORMAT)
        raise ConfigError(f"logging level: {e}") from None


def _overrides(section: str, **values: Any) -> Dict[str, Any]:
    """Nested override dict from the flags that were actually given."""
    given = {key: value for key, value in values.items() if value is not None}
    return {section: given} if given else {}


# ---------------------------------------------------------------- commands

def cmd_synth(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    out_dir = Path(args.out)
    samples = synth_corpus(cfg.synth, out_dir)
    if args.unlabeled:
        write_manifest(strip_labels(samples), out_dir / UNLABELED_FILE)
        logger.info(f"Unlabeled copy written: {out_dir / UNLABELED_FILE}")
    write_effective_config(cfg, out_dir)
    return EXIT_OK


def cmd_train(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    train_path, val_path = Path(args.train), Path(args.val)
    train_set = read_manifest(train_path)
    val_set = read_manifest(val_path)

    write_effective_config(cfg, args.out)
    result = train(
        train_set,
        val_set,
        cfg.model,
        cfg.train,
        args.out,
        train_root=train_path.parent,
        val_root=val_path.parent,
    )
    logger.info(f"Best epoch {result.best_epoch}: val Task-A weighted-F1 {result.best_metric:.6f}")
    return EXIT_OK


def _score_checkpoint(ckpt: str, manifest_path: Path, batch_size: int):
    params, meta = load_checkpoint(ckpt)
    samples = read_manifest(manifest_path)
    if not samples:
        raise DataFormatError(f"{manifest_path}: manifest has no rows")
    batch = encode_for_model(samples, manifest_path.parent, meta.load_vocab(), meta.model)
    return samples, predict_all(params, batch, batch_size)


def cmd_eval(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    manifest_path = Path(args.input)
    if args.ckpt is not None:
        gold, predictions = _score_checkpoint(args.ckpt, manifest_path, cfg.train.eval_batch_size)
    else:
        gold = read_manifest(manifest_path)
        predictions = read_predictions(args.predictions)
    require_labels(gold, str(manifest_path))

    report: MetricsReport = metrics_report(predictions, gold)
    if args.out is not None:
        out_path = Path(args.out)
        write_fixed(report.model_dump(), out_path)
        write_effective_config(cfg, out_path.parent)
    print(report.to_json())
    logger.info(
        f"Task-A weighted-F1 {report.task_a.weighted_f1:.4f}, Task-B weighted-F1 {report.task_b.f1_w:.4f} "
        f"({report.n} samples)"
    )
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    _, predictions = _score_checkpoint(args.ckpt, Path(args.input), cfg.train.eval_batch_size)
    out_path = Path(args.out)
    write_predictions(predictions, out_path)
    write_effective_config(cfg, out_path.parent)
    return EXIT_OK


def cmd_pseudo_label(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    input_path, out_dir = Path(args.input), Path(args.out)
    params, meta = load_checkpoint(args.ckpt)
    pool = read_manifest(input_path)

    scored = score_manifest(params, meta, pool, root=input_path.parent, batch_size=cfg.train.eval_batch_size)
    kept = filter_high_confidence(scored, cfg.pseudo.threshold)
    report = build_report(scored, kept, cfg.pseudo.threshold)

    write_pseudo_records(rebase_records(kept, input_path.parent, out_dir), out_dir / PSEUDO_RECORDS_FILE)
    write_fixed(report.model_dump(exclude_none=True), out_dir / PSEUDO_REPORT_FILE)
    write_effective_config(cfg, out_dir)

    logger.info(f"✅ Kept {report.kept}/{report.scored} rows at threshold {cfg.pseudo.threshold}")
    if report.kept > 1 and max(report.kept_per_class.values()) == report.kept:
        logger.warning("All kept pseudo labels fall in a single class")
    return EXIT_OK


def _load_pseudo_report(pseudo_path: Path, records, threshold: float) -> PseudoReport:
    """The report written next to the records by pseudo-label, or a fresh one."""
    report_path = pseudo_path.parent / PSEUDO_REPORT_FILE
    if report_path.exists():
        try:
            return PseudoReport.model_validate(json.loads(report_path.read_text(encoding="utf-8")))
        except ValueError as e:
            raise DataFormatError(f"{report_path}: invalid pseudo report: {e}") from None
    return build_report(records, records, threshold)


def cmd_augment(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    pseudo_path, train_path, val_path = Path(args.pseudo), Path(args.train), Path(args.val)
    out_dir = Path(args.out)

    records = read_pseudo_records(pseudo_path)
    train_set = read_manifest(train_path)
    val_set = read_manifest(val_path)
    require_labels(train_set, str(train_path))
    require_labels(val_set, str(val_path))

    pseudo_train, pseudo_val = split_pseudo(records, seed=cfg.pseudo.seed, val_ratio=cfg.pseudo.val_ratio)
    splits = merge_manifests(
        rebase_samples(train_set, train_path.parent, out_dir),
        rebase_samples(val_set, val_path.parent, out_dir),
        rebase_records(pseudo_train, pseudo_path.parent, out_dir),
        rebase_records(pseudo_val, pseudo_path.parent, out_dir),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_augmented(splits, out_dir)

    duplicates = count_duplicate_paths(
        [train_path.parent / s.image_path for s in train_set] + [val_path.parent / s.image_path for s in val_set],
        [pseudo_path.parent / r.image_path for r in records],
    )
    if duplicates:
        logger.warning(f"{duplicates} pseudo rows reuse an image already in the labeled splits")

    report = _load_pseudo_report(pseudo_path, records, cfg.pseudo.threshold).model_copy(update={
        "pseudo_train": len(pseudo_train),
        "pseudo_val": len(pseudo_val),
        "train_extended": len(splits.train_manifest),
        "val_extended": len(splits.val_manifest),
        "repairs": splits.repairs,
        "inconsistent": splits.inconsistent,
        "duplicate_paths": duplicates,
    })
    write_fixed(report.model_dump(exclude_none=True), out_dir / PSEUDO_REPORT_FILE)
    write_effective_config(cfg, out_dir)
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace, cfg: RunConfig, settings: Dict[str, Any]) -> int:
    defaults = settings.get("gradcheck", {}) or {}
    n_batches = args.batches if args.batches is not None else int(defaults.get("batches", 3))
    batch_size = args.batch_size if args.batch_size is not None else int(defaults.get("batch_size", 8))
    tolerance = args.tolerance if args.tolerance is not None else float(defaults.get("tolerance", 1e-5))
    n_encoder = int(defaults.get("encoder_coordinates", 256))
    if n_batches < 1 or batch_size < 1 or tolerance <= 0:
        raise UsageError("gradcheck: --batches and --batch-size must be >= 1 and --tolerance > 0")

    seed = cfg.train.seed
    params = init_params(cfg.model, seed=seed)
    reports = []
    for b in range(n_batches):
        batch = random_batch(cfg.model, batch_size, np.random.default_rng([seed, b]))
        reports.append(grad_check(params, batch, tolerance=tolerance, n_encoder=n_encoder, seed=seed + b))

    worst = max(reports, key=lambda r: r.max_rel_error)
    summary = {
        "batches": n_batches,
        "batch_size": batch_size,
        "tolerance": tolerance,
        "max_rel_error": worst.max_rel_error,
        "worst_param": worst.worst_param,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }
    print(json.dumps(summary, indent=2))
    if not summary["passed"]:
        raise NumericError(
            f"gradient check failed: max relative error {worst.max_rel_error:.3e} in {worst.worst_param} "
            f"exceeds {tolerance:.1e}"
        )
    logger.info(f"✅ Gradient check passed on {n_batches} batches")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subparser per command."""
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config deep-merged over settings.yaml")
    common.add_argument("--settings", help="Alternative settings.yaml")
    common.add_argument("--log-level", help="Override the logging level")

    parser = _ArgumentParser(prog="mmdt", description="Multimodal AI-generated image detector")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("synth", parents=[common], help="Generate a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--id-prefix")
    p.add_argument("--unlabeled", action="store_true", help="Also write unlabeled.csv")
    p.set_defaults(handler=cmd_synth, section=lambda a: _overrides(
        "synth", n_samples=a.n_samples, seed=a.seed, amplitude=a.amplitude,
        noise_sigma=a.noise_sigma, id_prefix=a.id_prefix,
    ))

    p = sub.add_parser("train", parents=[common], help="Train from scratch with per-epoch validation")
    p.add_argument("--train", required=True, help="Labeled training manifest")
    p.add_argument("--val", required=True, help="Labeled validation manifest")
    p.add_argument("--out", required=True, help="Output directory for checkpoints and history")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.set_defaults(handler=cmd_train, section=lambda a: _overrides(
        "train", seed=a.seed, epochs=a.epochs, lr=a.lr, batch_size=a.batch_size,
    ))

    p = sub.add_parser("eval", parents=[common], help="Score a labeled manifest")
    p.add_argument("--in", dest="input", required=True, help="Labeled manifest")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--ckpt", help="Checkpoint to score the manifest with")
    source.add_argument("--predictions", help="Existing predictions CSV")
    p.add_argument("--out", help="Also write the report JSON here")
    p.add_argument("--batch-size", type=int)
    p.set_defaults(handler=cmd_eval, section=lambda a: _overrides("train", eval_batch_size=a.batch_size))

    p = sub.add_parser("predict", parents=[common], help="Write predictions for any manifest")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="input", required=True, help="Manifest (labels optional)")
    p.add_argument("--out", required=True, help="Predictions CSV path")
    p.add_argument("--batch-size", type=int)
    p.set_defaults(handler=cmd_predict, section=lambda a: _overrides("train", eval_batch_size=a.batch_size))

    p = sub.add_parser("pseudo-label", parents=[common], help="Score and filter an unlabeled pool")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="input", required=True, help="Unlabeled manifest")
    p.add_argument("--threshold", type=float, help="Confidence threshold in (0, 1)")
    p.add_argument("--out", default=".", help="Output directory (default: current directory)")
    p.set_defaults(handler=cmd_pseudo_label, section=lambda a: _overrides("pseudo", threshold=a.threshold))

    p = sub.add_parser("augment", parents=[common], help="Split pseudo records and extend the splits")
    p.add_argument("--pseudo", required=True, help="pseudo_records.csv")
    p.add_argument("--train", required=True, help="Original training manifest")
    p.add_argument("--val", required=True, help="Original validation manifest")
    p.add_argument("--out", required=True, help="Output directory for the extended manifests")
    p.add_argument("--seed", type=int)
    p.add_argument("--val-ratio", type=float)
    p.set_defaults(handler=cmd_augment, section=lambda a: _overrides("pseudo", seed=a.seed, val_ratio=a.val_ratio))

    p = sub.add_parser("gradcheck", parents=[common], help="Finite-difference gradient check")
    p.add_argument("--batches", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_gradcheck, section=lambda a: _overrides("train", seed=a.seed))

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv``, run the selected command and map failures to exit codes.

    Args:
        argv: Arguments without the program name (defaults to ``sys.argv[1:]``)

    Returns:
        Process exit code
    """
    load_dotenv()
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        settings = load_settings(args.settings)
        configure_logging(settings, args.log_level)
        cfg = load_run_config(args.config, overrides=args.section(args), settings=settings)
        logger.debug(f"Running {args.command} with {cfg.model_dump(mode='json')}")
        handler: Handler = args.handler
        return handler(args, cfg, settings)
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0) if isinstance(e.code, int) else EXIT_USAGE
    except UsageError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (ConfigError, DataFormatError) as e:
        logger.error(str(e))
        return EXIT_DATA
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_DATA
    except NumericError as e:
        logger.error(str(e))
        return EXIT_NUMERIC


def main() -> None:
    """Console-script entry point."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
