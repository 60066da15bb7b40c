"""Command-line front end: feature extraction, correlation ranking, model
training, evaluation and dataset reports on QATS-format data.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TsevalError
from . import qats_io
from .features import FeatureMatrix, compute_matrix, registry
from .qemodel import (
    DEFAULT_PCA_COMPONENTS,
    MODEL_KINDS,
    PipelineConfig,
    cross_validate,
    fit_pipeline,
    load_pipeline,
    predict,
    save_pipeline,
    select_lambda,
)
from .resources import (
    Resources,
    load_concreteness,
    load_frequency_table,
    load_vectors,
    train_lm,
)
from .stats import pearson, rank_features, weighted_f1

RESOURCE_ENV = "TSEVAL_RESOURCES"
DEFAULT_SEED = 42

# QATS 2016 shared-task leaderboard reference points (plus the linear-model
# entries added alongside them), printed by `evaluate` for context.
LEADERBOARD_PEARSON = {
    "G": (("OSVCML1", 0.482), ("METEOR", 0.384), ("Lasso", 0.327)),
    "M": (("IIT-Meteor", 0.588), ("Ridge", 0.575), ("Lasso", 0.555)),
    "S": (("Ridge", 0.487), ("LinearSVR", 0.456), ("OSVCML1", 0.382)),
    "Overall": (("Ridge", 0.423), ("LinearRegression", 0.423),
                ("OSVCML2", 0.343)),
}
LEADERBOARD_F1 = {
    "G": (("SMH-RandForest", 71.84), ("LogisticRegression", 70.43),
          ("Majority-class", 65.89)),
    "M": (("SVC", 70.14), ("SMH-Logistic", 68.07), ("Majority-class", 42.51)),
    "S": (("SVC", 61.60), ("AdaBoostClassifier", 56.95),
          ("Majority-class", 39.68)),
    "Overall": (("LogisticRegression", 49.61), ("SMH-RandForest-b", 48.57),
                ("Majority-class", 26.53)),
}


class UsageError(Exception):
    """Bad flag combination discovered after argument parsing."""


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for data
    errors, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


@dataclass
class RunConfig:
    """Effective settings of one command after merging flags and the
    optional key=value config file (flags win)."""

    command: str
    train: str | None = None
    test: str | None = None
    freq_table: str | None = None
    concreteness: str | None = None
    vectors: str | None = None
    lm_corpus: str | None = None
    features: list[str] | None = None
    dimension: str | None = None
    model: str = "ridge"
    lam: float | None = None
    pca_k: int = DEFAULT_PCA_COMPONENTS
    folds: int = 5
    seed: int = DEFAULT_SEED
    out: str = "."
    jobs: int = 1
    resources: Resources = field(default_factory=Resources)


_SETTING_KEYS = (
    "train", "test", "freq_table", "concreteness", "vectors", "lm_corpus",
    "features", "dimension", "model", "lam", "pca_k", "folds", "seed",
    "out", "jobs",
)
_HARD_DEFAULTS = {
    "model": "ridge", "pca_k": DEFAULT_PCA_COMPONENTS, "folds": 5,
    "seed": DEFAULT_SEED, "out": ".", "jobs": 1,
}


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="tseval",
        description="Reference-less quality estimation for text simplification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("features", "compute the elementary-metric matrix for each split"),
        ("rank", "rank features by correlation with human labels"),
        ("train", "fit a scale->PCA->linear pipeline on the training split"),
        ("evaluate", "score a trained pipeline on the test split"),
        ("report", "tabulate the label distribution of each split"),
    ):
        sub.add_parser(name, help=help_text, parents=[_shared_flags()])
    return parser


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("shared options")
    g.add_argument("--config", help="key=value settings file; flags win")
    g.add_argument("--train", help="training dataset TSV")
    g.add_argument("--test", help="test dataset TSV")
    g.add_argument("--freq-table", dest="freq_table",
                   help="word frequency table (one word per line)")
    g.add_argument("--concreteness", help="concreteness lexicon file")
    g.add_argument("--vectors", help="word vectors in text format")
    g.add_argument("--lm-corpus", dest="lm_corpus",
                   help="language-model training corpus (one sentence/line)")
    g.add_argument("--features",
                   help="comma-separated feature subset (default: all whose "
                        "resources are available)")
    g.add_argument("--dimension",
                   help="quality dimension: G, M, S or overall")
    g.add_argument("--model", choices=MODEL_KINDS)
    g.add_argument("--lam", type=float,
                   help="fixed regularization strength (default: pick from "
                        "the grid by cross-validation)")
    g.add_argument("--pca-k", dest="pca_k", type=int)
    g.add_argument("--folds", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output directory (default: .)")
    g.add_argument("--jobs", type=int)
    return shared


def _parse_config_file(path: str) -> dict[str, str]:
    settings: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TsevalError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise TsevalError(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _SETTING_KEYS:
            raise TsevalError(f"{path}:{lineno}: unknown setting {key!r}")
        settings[key] = value.strip().strip("\"'")
    return settings


def _merge_config(args: argparse.Namespace) -> RunConfig:
    file_settings: dict[str, str] = {}
    if args.config:
        file_settings = _parse_config_file(args.config)
    merged: dict = {}
    for key in _SETTING_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
        elif key in file_settings:
            raw = file_settings[key]
            if key in ("pca_k", "folds", "seed", "jobs"):
                merged[key] = int(raw)
            elif key == "lam":
                merged[key] = float(raw)
            else:
                merged[key] = raw
        elif key in _HARD_DEFAULTS:
            merged[key] = _HARD_DEFAULTS[key]
    if isinstance(merged.get("features"), str):
        merged["features"] = [f.strip() for f in merged["features"].split(",")
                              if f.strip()]
    if merged.get("dimension") is not None:
        merged["dimension"] = qats_io.normalize_dimension(merged["dimension"])
    return RunConfig(command=args.command, **merged)


def _resolve_resource(path: str | None) -> Path | None:
    """Resolve a resource path, falling back to $TSEVAL_RESOURCES for
    relative names that do not exist from the working directory."""
    if path is None:
        return None
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    base = os.environ.get(RESOURCE_ENV)
    if base and (Path(base) / p).exists():
        return Path(base) / p
    return p


def _load_resources(cfg: RunConfig) -> Resources:
    freq = conc = vec = lm = None
    if cfg.freq_table:
        freq = load_frequency_table(_resolve_resource(cfg.freq_table))
    if cfg.concreteness:
        conc = load_concreteness(_resolve_resource(cfg.concreteness))
    if cfg.vectors:
        vec = load_vectors(_resolve_resource(cfg.vectors))
    if cfg.lm_corpus:
        lm = train_lm(_resolve_resource(cfg.lm_corpus))
    return Resources(freq_table=freq, concreteness=conc, vectors=vec, lm=lm)


def _selected_features(cfg: RunConfig) -> list[str]:
    """Explicit subset if given (missing resources then fail later with a
    precise error), else every feature whose resources are loaded."""
    if cfg.features:
        return list(cfg.features)
    return [spec.name for spec in registry()
            if all(cfg.resources.has(kind) for kind in spec.requires)]


def _require(cfg: RunConfig, attribute: str) -> str:
    value = getattr(cfg, attribute)
    if value is None:
        raise UsageError(
            f"the {cfg.command} command requires --{attribute.replace('_', '-')}"
        )
    return value


def _features_path(out: Path, split: str) -> Path:
    return out / f"features_{split}.tsv"


def _model_path(out: Path, dimension: str, kind: str) -> Path:
    return out / f"model_{dimension}_{kind}.txt"


def _dimensions(cfg: RunConfig) -> list[str]:
    return [cfg.dimension] if cfg.dimension else list(qats_io.DIMENSIONS)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_features(cfg: RunConfig) -> int:
    datasets = []
    for split, path in (("train", _require(cfg, "train")), ("test", cfg.test)):
        if path:
            datasets.append((split, qats_io.load_dataset(path, split)))
    names = _selected_features(cfg)
    out_dir = Path(cfg.out)

    results = []
    timing_total: dict[str, float] = {}
    for split, dataset in datasets:
        pairs = qats_io.to_pairs(dataset)
        timings: dict[str, float] = {}
        start = time.perf_counter()
        if cfg.jobs > 1:
            matrix = compute_matrix(pairs, cfg.resources, names, jobs=cfg.jobs)
        else:
            matrix = compute_matrix(pairs, cfg.resources, names,
                                    timings=timings)
        elapsed = time.perf_counter() - start
        results.append((split, matrix))
        for name, seconds in timings.items():
            timing_total[name] = timing_total.get(name, 0.0) + seconds
        print(f"{split}: {len(pairs)} pairs x {len(names)} features "
              f"in {elapsed:.2f}s")

    out_dir.mkdir(parents=True, exist_ok=True)
    for split, matrix in results:
        path = _features_path(out_dir, split)
        matrix.to_tsv(path)
        print(f"wrote {path}")
    if timing_total:
        print("\nper-feature time (s):")
        for name, seconds in sorted(timing_total.items(),
                                    key=lambda kv: -kv[1]):
            print(f"  {name:28s} {seconds:8.3f}")
    return 0


def cmd_rank(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    train_ds = qats_io.load_dataset(_require(cfg, "train"), "train")
    if not train_ds.is_labeled:
        raise TsevalError("ranking requires a labeled training dataset")
    train_matrix = FeatureMatrix.from_tsv(_features_path(out_dir, "train"))

    test_ds = test_matrix = None
    if cfg.test:
        test_ds = qats_io.load_dataset(cfg.test, "test")
        test_path = _features_path(out_dir, "test")
        if test_ds.is_labeled and test_path.exists():
            test_matrix = FeatureMatrix.from_tsv(test_path)

    outputs = []
    for dim in _dimensions(cfg):
        table = rank_features(
            train_matrix, qats_io.encode_labels(train_ds, dim), dim,
            test_matrix=test_matrix,
            test_labels=(qats_io.encode_labels(test_ds, dim)
                         if test_matrix is not None else None),
        )
        outputs.append((dim, table))

    for dim, table in outputs:
        tsv_path = out_dir / f"rank_{dim}.tsv"
        md_path = out_dir / f"rank_{dim}.md"
        tsv_path.write_text(table.to_tsv(), encoding="utf-8")
        md_path.write_text(
            f"## Correlation ranking: dimension {dim}\n\n" + table.to_markdown(),
            encoding="utf-8")
        top = ", ".join(table.top(3))
        print(f"{dim}: wrote {tsv_path} and {md_path} (top: {top})")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    dimension = cfg.dimension or "Overall"
    train_ds = qats_io.load_dataset(_require(cfg, "train"), "train")
    if not train_ds.is_labeled:
        raise TsevalError("training requires a labeled training dataset")
    matrix = FeatureMatrix.from_tsv(_features_path(out_dir, "train"))

    encoded = qats_io.encode_labels(train_ds, dimension)
    y = encoded.astype(int) if cfg.model == "logistic" else encoded
    config = PipelineConfig(kind=cfg.model, pca_k=cfg.pca_k)
    if cfg.lam is not None:
        lam = 0.0 if cfg.model == "linreg" else cfg.lam
        cv_results = {lam: cross_validate(
            matrix, y, PipelineConfig(kind=cfg.model, lam=lam,
                                      pca_k=cfg.pca_k),
            folds=cfg.folds, seed=cfg.seed, jobs=cfg.jobs)}
    else:
        lam, cv_results = select_lambda(matrix, y, config, folds=cfg.folds,
                                        seed=cfg.seed, jobs=cfg.jobs)
    config = PipelineConfig(kind=cfg.model, lam=lam, pca_k=cfg.pca_k)

    print(f"cross-validation ({cfg.folds} folds, seed {cfg.seed}):")
    for grid_lam, result in cv_results.items():
        marker = " <- selected" if grid_lam == lam else ""
        folds_str = " ".join(f"{s:.3f}" for s in result.fold_scores)
        print(f"  lambda={grid_lam:<8g} mean {result.metric} "
              f"{result.mean:.4f}  [{folds_str}]{marker}")

    pipeline = fit_pipeline(matrix, y, dimension, config)
    if cfg.model == "lasso" and not np.any(pipeline.model.weights):
        print("warning: lasso selected no features (all weights zero)")
    path = _model_path(out_dir, dimension, cfg.model)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_pipeline(pipeline, path)
    print(f"wrote {path}")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    dimension = cfg.dimension or "Overall"
    test_ds = qats_io.load_dataset(_require(cfg, "test"), "test")
    if not test_ds.is_labeled:
        raise TsevalError("evaluation requires a labeled test dataset")
    matrix = FeatureMatrix.from_tsv(_features_path(out_dir, "test"))
    pipeline = load_pipeline(_model_path(out_dir, dimension, cfg.model))

    lines = []
    if pipeline.is_classifier:
        predicted = qats_io.decode_labels(predict(pipeline, matrix))
        gold = [r.labels[dimension] for r in test_ds.records]
        score = weighted_f1(predicted, gold) * 100.0
        lines.append(f"{dimension} {cfg.model}: weighted F1 = {score:.2f}")
        reference = LEADERBOARD_F1[dimension]
        metric = "weighted F1"
    else:
        scores = predict(pipeline, matrix)
        gold = qats_io.encode_labels(test_ds, dimension)
        score = pearson(scores, gold)
        lines.append(f"{dimension} {cfg.model}: Pearson r = {score:.4f}")
        reference = LEADERBOARD_PEARSON[dimension]
        metric = "Pearson r"
    lines.append(f"QATS 2016 leaderboard reference points ({metric}):")
    for system, value in reference:
        lines.append(f"  {value:<8g} {system}")

    report = "\n".join(lines) + "\n"
    print(report, end="")
    out_path = out_dir / f"evaluation_{dimension}_{cfg.model}.txt"
    out_path.write_text(report, encoding="utf-8")
    print(f"wrote {out_path}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    blocks_tsv = ["split\tdimension\tBad\tOK\tGood"]
    blocks_md = ["| split | dimension | Bad | OK | Good |",
                 "|:--|:--|--:|--:|--:|"]
    shown = False
    for split, path in (("train", cfg.train), ("test", cfg.test)):
        if not path:
            continue
        dataset = qats_io.load_dataset(path, split)
        if not dataset.is_labeled:
            raise TsevalError(f"{split} dataset carries no labels")
        for dim in _dimensions(cfg):
            counts = qats_io.label_distribution(dataset, dim)
            blocks_tsv.append(
                f"{split}\t{dim}\t{counts['Bad']}\t{counts['OK']}"
                f"\t{counts['Good']}")
            blocks_md.append(
                f"| {split} | {dim} | {counts['Bad']} | {counts['OK']} "
                f"| {counts['Good']} |")
        shown = True
    if not shown:
        raise UsageError("report requires --train and/or --test")

    tsv = "\n".join(blocks_tsv) + "\n"
    print(tsv, end="")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "label_distribution.tsv").write_text(tsv, encoding="utf-8")
    (out_dir / "label_distribution.md").write_text(
        "\n".join(blocks_md) + "\n", encoding="utf-8")
    print(f"wrote {out_dir / 'label_distribution.tsv'}")
    return 0


_COMMANDS = {
    "features": cmd_features,
    "rank": cmd_rank,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        cfg = _merge_config(args)
        cfg.resources = _load_resources(cfg)
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"tseval: error: {exc}", file=sys.stderr)
        return 1
    except TsevalError as exc:
        print(f"tseval: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal invariant failure
        print(f"tseval: internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
