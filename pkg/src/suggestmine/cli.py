"""Command-line entry point: ``suggestmine prepare|train|evaluate|analyze|predict``.

Settings come from built-in defaults, then the JSON config file (``--config``
or ``$SUGGESTMINE_CONFIG``), then command-line flags; later sources win.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace

from . import __version__
from .corpus import DUP_SUFFIX, Dataset, DatasetError, class_distribution, load_dataset, oversample, save_dataset
from .eval_report import (
    DEFAULT_KEYWORDS,
    PredictionError,
    evaluate,
    export_confusion,
    keyword_analysis,
    write_json,
)
from .features import load_vocabulary, save_vocabulary
from .linear_models import DivergenceError, Hyperparameters
from .neural import EmbeddingError, LSTMHyperparameters, load_embeddings
from .normalize import NORMALIZATIONS, LexiconError, NormalizerConfig, build_config, preprocess
from .persistence import FingerprintError, ModelFileError, load_model, save_model
from .pipeline import MODEL_KINDS, FeatureOptions, LSTMOptions, labels_of, normalize_dataset, score, train
from .reference import DISTRIBUTION, FP_KEYWORD_FRACTION, REFERENCE_F1

log = logging.getLogger("suggestmine")

CONFIG_ENV = "SUGGESTMINE_CONFIG"
CONFIG_VERSION = 1
EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    train: str | None = None
    trial: str | None = None
    test: str | None = None
    embeddings: str | None = None
    slang_lexicon: str | None = None
    emoticon_lexicon: str | None = None
    rules: str | None = None
    model_kind: str = "nb"
    seed: int = 42
    out_dir: str = "run"
    embedding_dim: int = 300
    hyperparameters: dict = field(default_factory=dict)
    lstm: dict = field(default_factory=dict)
    features: dict = field(default_factory=dict)
    normalizer: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.model_kind not in MODEL_KINDS:
            raise UsageError(f"unknown model kind {self.model_kind!r}; choose from {', '.join(MODEL_KINDS)}")
        for name in ("train", "trial", "test", "embeddings", "slang_lexicon", "emoticon_lexicon", "rules"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise UsageError(f"{name} path does not exist: {path}")

    def normalizer_config(self) -> NormalizerConfig:
        opts = dict(self.normalizer)
        if "enabled_rules" in opts:
            unknown = set(opts["enabled_rules"]) - NORMALIZATIONS
            if unknown:
                raise UsageError(f"unknown normalizer rules: {sorted(unknown)}")
            opts["enabled_rules"] = frozenset(opts["enabled_rules"])
        try:
            return build_config(self.slang_lexicon, self.emoticon_lexicon, self.rules, **opts)
        except TypeError as exc:
            raise UsageError(f"bad normalizer option: {exc}") from None

    def linear_hp(self) -> Hyperparameters:
        hp = {"seed": self.seed, **self.hyperparameters}
        try:
            return Hyperparameters(**hp)
        except TypeError as exc:
            raise UsageError(f"bad hyperparameter: {exc}") from None

    def lstm_options(self) -> LSTMOptions:
        opts = dict(self.lstm)
        try:
            hp = LSTMHyperparameters(**{"seed": self.seed, **opts.pop("hyperparameters", {})})
            return LSTMOptions(hp=hp, **opts)
        except TypeError as exc:
            raise UsageError(f"bad lstm option: {exc}") from None

    def feature_options(self) -> FeatureOptions:
        opts = dict(self.features)
        if "ngram_range" in opts:
            opts["ngram_range"] = tuple(opts["ngram_range"])
        try:
            return FeatureOptions(**opts)
        except TypeError as exc:
            raise UsageError(f"bad feature option: {exc}") from None


def read_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    if not os.path.isfile(path):
        raise UsageError(f"config file does not exist: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    version = raw.pop("version", None)
    if version != CONFIG_VERSION:
        raise UsageError(f"{path}: config version must be {CONFIG_VERSION}, got {version!r}")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    # relative paths in a config file are relative to the file
    base = os.path.dirname(os.path.abspath(path))
    for key in ("train", "trial", "test", "embeddings", "slang_lexicon", "emoticon_lexicon", "rules"):
        if raw.get(key):
            raw[key] = os.path.join(base, raw[key])
    return RunConfig(**raw)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = read_config(args.config or os.environ.get(CONFIG_ENV))
    overrides = {}
    for name in ("train", "trial", "test", "embeddings", "out_dir", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "kind", None):
        overrides["model_kind"] = args.kind
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _require_file(path: str | None, what: str) -> str:
    if not path:
        raise UsageError(f"no {what} given")
    if not os.path.isfile(path):
        raise UsageError(f"{what} does not exist: {path}")
    return path


def _distribution_dict(d: Dataset) -> dict:
    dist = class_distribution(d)
    return {label.value: n for label, n in dist.items()}


def _emit(args, text: str, obj) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text)


def cmd_prepare(args) -> int:
    cfg = resolve_config(args)
    _require_file(cfg.train, "train file")
    norm = cfg.normalizer_config()
    splits = {"train": load_dataset(cfg.train, split_tag="train")}
    for name in ("trial", "test"):
        path = getattr(cfg, name)
        if path:
            splits[name] = load_dataset(path, split_tag=name)
    normalized = {name: normalize_dataset(d, norm) for name, d in splits.items()}
    over = oversample(normalized["train"], seed=cfg.seed)

    report = {"seed": cfg.seed, "normalizer_fingerprint": norm.fingerprint(), "splits": {}}
    for name, d in splits.items():
        report["splits"][name] = _distribution_dict(d)
    report["splits"]["train_oversampled"] = _distribution_dict(over)
    lines = []
    for name, dist in report["splits"].items():
        lines.append(f"{name:<18} suggestion {dist['suggestion']:>6}  non_suggestion {dist['non_suggestion']:>6}")
    ref = DISTRIBUTION["train"]
    lines.append(f"{'reference train':<18} suggestion {ref['suggestion']:>6}  non_suggestion {ref['non_suggestion']:>6}")
    text = "\n".join(lines) + "\n"

    os.makedirs(cfg.out_dir, exist_ok=True)
    for name, d in normalized.items():
        save_dataset(d, os.path.join(cfg.out_dir, f"{name}.normalized.csv"))
    save_dataset(over, os.path.join(cfg.out_dir, "train.oversampled.csv"))
    write_json(report, os.path.join(cfg.out_dir, "distribution.json"))
    with open(os.path.join(cfg.out_dir, "distribution.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    _emit(args, text, report)
    return EXIT_OK


def _originals(d: Dataset) -> Dataset:
    keep = [r for r in d.records if not (r.id.endswith(DUP_SUFFIX) and r.id[: -len(DUP_SUFFIX)] in d)]
    return Dataset(keep, d.split_tag)


def _model_paths(out_dir: str, kind: str) -> dict[str, str]:
    stem = os.path.join(out_dir, f"model-{kind}")
    return {
        "model": stem + ".json",
        "vocabulary": stem + ".vocab.tsv",
        "log": os.path.join(out_dir, f"train-log-{kind}.tsv"),
        "report": os.path.join(out_dir, f"train-report-{kind}.json"),
        "summary": os.path.join(out_dir, f"train-report-{kind}.txt"),
    }


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    path = args.input or os.path.join(cfg.out_dir, "train.oversampled.csv")
    _require_file(path, "prepared training file")
    norm = cfg.normalizer_config()
    hp = cfg.linear_hp()
    feats = cfg.feature_options()
    lstm = cfg.lstm_options()
    embeddings = None
    if cfg.model_kind == "lstm":
        _require_file(cfg.embeddings, "embeddings file")
    data = load_dataset(path, split_tag="train")
    if cfg.model_kind == "lstm":
        embeddings = load_embeddings(cfg.embeddings, cfg.embedding_dim)

    bundle, vocab = train(cfg.model_kind, data, norm, hp, feats, embeddings, lstm)
    base = _originals(data)
    values = score(bundle, base.texts, vocab, embeddings)
    report = evaluate(base, zip(base.ids, labels_of(values)), dict(zip(base.ids, values.tolist())))

    paths = _model_paths(cfg.out_dir, cfg.model_kind)
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_model(bundle, paths["model"])
    if vocab is not None:
        save_vocabulary(vocab, paths["vocabulary"])
    history = getattr(bundle.model, "loss_history", ())
    with open(paths["log"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch\tloss\n")
        for epoch, loss in enumerate(history):
            fh.write(f"{epoch}\t{loss!r}\n")
    write_json(report.to_dict(), paths["report"])
    ref = {"train f1": REFERENCE_F1[cfg.model_kind]["train"]}
    summary = report.summary(ref)
    with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    _emit(args, f"model: {paths['model']}\n" + summary,
          {"model": paths["model"], "f1": report.f1, "precision": report.precision, "recall": report.recall})
    return EXIT_OK


def _load_for_scoring(args):
    """Model bundle plus whatever feature state it needs, verified by fingerprint."""
    model_path = _require_file(args.model, "model file")
    bundle = load_model(model_path)
    vocab = embeddings = None
    if bundle.kind == "lstm":
        cfg = resolve_config(args)
        _require_file(cfg.embeddings, "embeddings file")
        embeddings = load_embeddings(cfg.embeddings, bundle.model.input_dim)
        bundle.check_features(embeddings.fingerprint(), "embedding table")
    else:
        vocab_path = args.vocabulary or os.path.splitext(model_path)[0] + ".vocab.tsv"
        _require_file(vocab_path, "vocabulary file")
        vocab = load_vocabulary(vocab_path)
        bundle.check_features(vocab.fingerprint())
    return bundle, vocab, embeddings


def _scored_report(args):
    bundle, vocab, embeddings = _load_for_scoring(args)
    data = load_dataset(_require_file(args.input, "input dataset"))
    values = score(bundle, data.texts, vocab, embeddings)
    report = evaluate(data, zip(data.ids, labels_of(values)), dict(zip(data.ids, values.tolist())))
    return bundle, data, report


def _outputs_dir(args) -> str:
    out = args.out_dir or os.path.dirname(os.path.abspath(args.model))
    os.makedirs(out, exist_ok=True)
    return out


def cmd_evaluate(args) -> int:
    bundle, data, report = _scored_report(args)
    out = _outputs_dir(args)
    stem = f"{bundle.kind}-{os.path.splitext(os.path.basename(args.input))[0]}"
    write_json(report.to_dict(), os.path.join(out, f"eval-{stem}.json"))
    summary = report.summary({"test f1": REFERENCE_F1[bundle.kind]["test"]})
    with open(os.path.join(out, f"eval-{stem}.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    with open(os.path.join(out, f"predictions-{stem}.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "gold", "predicted", "decision_value"))
        for o in report.outcomes:
            w.writerow((o.id, o.gold.to_int(), o.predicted.to_int(), repr(o.decision_value)))
    _emit(args, summary, {"f1": report.f1, "precision": report.precision, "recall": report.recall,
                          "matrix": report.matrix.to_dict(), "degenerate": list(report.degenerate)})
    return EXIT_OK


def cmd_analyze(args) -> int:
    keywords = tuple(k for k in (args.keywords.split(",") if args.keywords is not None else DEFAULT_KEYWORDS) if k)
    bundle, data, report = _scored_report(args)
    kw = keyword_analysis(report, data, keywords, bundle.normalizer, args.max_exemplars)
    out = _outputs_dir(args)
    stem = f"{bundle.kind}-{os.path.splitext(os.path.basename(args.input))[0]}"
    payload = kw.to_dict()
    payload["reference_fraction_fp_with_any_keyword"] = FP_KEYWORD_FRACTION
    write_json(payload, os.path.join(out, f"keywords-{stem}.json"))
    summary = kw.summary(FP_KEYWORD_FRACTION)
    with open(os.path.join(out, f"keywords-{stem}.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    export_confusion(report.matrix, os.path.join(out, f"confusion-{stem}.csv"))
    _emit(args, summary, payload)
    return EXIT_OK


def cmd_predict(args) -> int:
    bundle, vocab, embeddings = _load_for_scoring(args)
    lines = [line.rstrip("\r\n") for line in sys.stdin]
    if not lines:
        return EXIT_OK
    values = score(bundle, lines, vocab, embeddings)
    for label, value in zip(labels_of(values), values):
        if args.format == "json":
            sys.stdout.write(json.dumps({"label": label.value, "decision_value": float(value)}) + "\n")
        else:
            sys.stdout.write(label.value + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suggestmine", description="Suggestion mining from forum sentences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, text_default="text"):
        p.add_argument("--config", help=f"JSON run config (default: ${CONFIG_ENV})")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=("text", "json"), default=text_default, help="stdout format")

    p = sub.add_parser("prepare", help="normalize datasets and oversample the training split")
    common(p)
    p.add_argument("--train")
    p.add_argument("--trial")
    p.add_argument("--test")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a model on a prepared training file")
    common(p)
    p.add_argument("--kind", choices=MODEL_KINDS)
    p.add_argument("--input", help="prepared training file (default: OUT_DIR/train.oversampled.csv)")
    p.add_argument("--embeddings")
    p.set_defaults(func=cmd_train)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "score a labeled dataset"),
        ("analyze", cmd_analyze, "false-positive keyword analysis and confusion export"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--model", required=True)
        p.add_argument("--input", required=True, help="labeled dataset file")
        p.add_argument("--vocabulary")
        p.add_argument("--embeddings")
        if name == "analyze":
            p.add_argument("--keywords", help="comma-separated keyword list")
            p.add_argument("--max-exemplars", dest="max_exemplars", type=int, default=10)
        p.set_defaults(func=func)

    p = sub.add_parser("predict", help="label sentences read from stdin, one per line")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--vocabulary")
    p.add_argument("--embeddings")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("normalize", help="normalize stdin line by line")
    common(p)
    p.add_argument("--slang-lexicon", dest="slang_lexicon")
    p.add_argument("--emoticon-lexicon", dest="emoticon_lexicon")
    p.add_argument("--rules")
    p.set_defaults(func=cmd_normalize)
    return parser


def cmd_normalize(args) -> int:
    cfg = resolve_config(args)
    overrides = {k: getattr(args, k) for k in ("slang_lexicon", "emoticon_lexicon", "rules") if getattr(args, k)}
    for path in overrides.values():
        _require_file(path, "lexicon file")
    norm = replace(cfg, **overrides).normalizer_config()
    for line in sys.stdin:
        sys.stdout.write(preprocess(line.rstrip("\r\n"), norm) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"suggestmine {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, LexiconError, EmbeddingError, ModelFileError, FingerprintError, PredictionError,
            DivergenceError, ValueError, OSError) as exc:
        print(f"suggestmine {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
