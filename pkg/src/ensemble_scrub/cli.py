"""Command-line entry point: ``ensemble-scrub <subcommand> [flags]``.

Exit codes: 0 success, 2 input/schema error, 3 configuration error,
4 degenerate data or cleaning, 5 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import dataset_io, pipeline
from .config import SEED_ENV, build_config, read_config_file
from .errors import ConfigurationError, ScrubError

log = logging.getLogger("ensemble_scrub")

S = argparse.SUPPRESS


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--config", help="key = value config file; CLI flags override it")
    g.add_argument("--input", default=S, help="input CSV")
    g.add_argument("--text-col", dest="text_col", default=S)
    g.add_argument("--label-col", dest="label_col", default=S)
    g.add_argument("--min-class-count", dest="min_class_count", type=int, default=S)
    g.add_argument("--test-fraction", dest="test_fraction", type=float, default=S)
    g.add_argument("--stratified", action="store_true", default=S, help="stratified train/test split")
    g.add_argument("--seed", type=int, default=S, help=f"master seed (else ${SEED_ENV}, else 42)")
    g.add_argument("--out-dir", dest="out_dir", default=S)
    g.add_argument("--noise-rate", dest="noise_rate", type=float, default=S)
    g.add_argument("-v", "--verbose", action="store_true")

    e = p.add_argument_group("ensemble")
    e.add_argument("--bias", default=S, help="fixed:<w1,...,w6> | fixed | ranked")
    e.add_argument("--oof", action="store_true", default=S, help="out-of-fold voting")
    e.add_argument("--oof-folds", dest="oof_folds", type=int, default=S)

    f = p.add_argument_group("features")
    f.add_argument("--min-df", dest="min_df", type=int, default=S)
    f.add_argument("--max-features", dest="max_features", type=int, default=S)
    f.add_argument("--smote-k", dest="smote_k", type=int, default=S)
    f.add_argument("--no-stemming", dest="stemming", action="store_false", default=S)
    f.add_argument("--no-strip-markup", dest="strip_markup", action="store_false", default=S)

    m = p.add_argument_group("models")
    for flag, typ in [("nb-alpha", float), ("knn-k", int), ("svm-lambda", float),
                      ("svm-epochs", int), ("dt-max-depth", int), ("dt-min-split", int),
                      ("rf-trees", int), ("rf-feature-fraction", float), ("lr-lambda", float),
                      ("lr-epochs", int), ("lr-rate", float)]:
        m.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=typ, default=S)

    s = p.add_argument_group("synthetic corpus")
    for flag, typ in [("classes", int), ("docs-per-class", int), ("class-vocab", int),
                      ("shared-vocab", int), ("doc-len", int), ("noise-word-fraction", float)]:
        s.add_argument(f"--{flag}", dest="synth_" + flag.replace("-", "_"), type=typ, default=S)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-scrub",
        description="Clean labeled text datasets with a bias-weighted six-model vote.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "baseline": "train and evaluate the six baseline models (BE)",
        "clean": "baseline, then vote and write the improved dataset",
        "evaluate": "baseline -> clean -> re-baseline; BE/AE reports",
        "inject-noise": "flip a fraction of labels in a CSV, keeping the ground-truth mask",
        "synth": "write a synthetic corpus CSV",
        "full": "synth -> inject-noise -> evaluate study",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def resolve_values(args: argparse.Namespace, environ=os.environ) -> dict:
    """Merge precedence: CLI flag > config file > $ENSEMBLE_SCRUB_SEED (seed only) > default."""
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    values = {}
    if environ.get(SEED_ENV):
        try:
            values["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise ConfigurationError(f"${SEED_ENV} is not an integer") from None
    if args.config:
        values.update(read_config_file(args.config))
    values.update(cli)
    return values


def _cmd_baseline(cfg):
    res = pipeline.run_baseline(cfg)
    out = Path(cfg.out_dir)
    payload = {
        "config": cfg.to_dict(),
        "class_names": list(res.dataset.class_names),
        "ledger": res.ledger,
        "be": {k.name: rep.to_dict() for k, rep in res.metrics.items()},
    }
    pipeline._write_json(payload, out / "report.json")
    pipeline.write_phase_artifacts(res.metrics, res.dataset.class_names, "BE", out)
    res.tfidf.dump_csv(out / "tfidf.csv")
    for k, rep in res.metrics.items():
        print(f"{k.label:<20} accuracy {100 * rep.accuracy:5.1f}  macro F1 {100 * rep.macro_f1:5.1f}")


def _cmd_clean(cfg):
    res = pipeline.run_baseline(cfg)
    improved, report = pipeline.run_clean(cfg, res)
    out = Path(cfg.out_dir)
    payload = {
        "config": cfg.to_dict(),
        "class_names": list(res.dataset.class_names),
        "ledger": dict(res.ledger, improved=len(improved)),
        "be": {k.name: rep.to_dict() for k, rep in res.metrics.items()},
        "cleaning": report.to_dict(),
    }
    pipeline._write_json(payload, out / "report.json")
    pipeline.write_phase_artifacts(res.metrics, res.dataset.class_names, "BE", out)
    dataset_io.write_csv(improved, out / "improved.csv", cfg.text_col, cfg.label_col)
    report.write_removed_csv(out / "removed.csv")
    print(f"kept {len(report.kept_ids)} / {len(report.record_ids)} records; "
          f"removed {len(report.removed_ids)} -> {out / 'removed.csv'}")


def _cmd_evaluate(cfg):
    report = pipeline.run_evaluate(cfg)
    print(pipeline.summary_markdown(report))


def _cmd_inject_noise(cfg):
    if not cfg.input:
        raise ConfigurationError("inject-noise needs --input")
    data = dataset_io.encode_labels(dataset_io.load_csv(cfg.input, cfg.text_col, cfg.label_col))
    noisy, mask = pipeline.inject_noise(data, cfg.noise_rate, cfg.seed)
    out = Path(cfg.out_dir)
    dataset_io.write_csv(noisy, out / "noisy.csv", cfg.text_col, cfg.label_col)
    pipeline.write_noise_mask(mask, noisy, out / "noise_mask.csv")
    print(f"flipped {int(mask.flipped.sum())} of {len(noisy)} labels -> {out / 'noisy.csv'}")


def _cmd_synth(cfg):
    s = cfg.synth
    data = pipeline.generate_synthetic_corpus(s.classes, s.docs_per_class, s.class_vocab,
                                              s.shared_vocab, s.doc_len, s.noise_word_fraction,
                                              cfg.seed)
    path = Path(cfg.out_dir) / "synth.csv"
    dataset_io.write_csv(data, path, cfg.text_col, cfg.label_col)
    print(f"wrote {len(data)} records -> {path}")


def _cmd_full(cfg):
    report, summary = pipeline.run_noise_study(cfg)
    print(pipeline.summary_markdown(report))
    print(json.dumps(summary, indent=2, sort_keys=True))


COMMANDS = {
    "baseline": _cmd_baseline,
    "clean": _cmd_clean,
    "evaluate": _cmd_evaluate,
    "inject-noise": _cmd_inject_noise,
    "synth": _cmd_synth,
    "full": _cmd_full,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(resolve_values(args))
        COMMANDS[args.command](cfg)
    except ScrubError as exc:
        stage = getattr(exc, "stage", None)
        where = f" [stage: {stage}]" if stage else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
