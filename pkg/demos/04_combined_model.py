"""The combined quality-estimation pipeline, end to end.

Standardize the feature matrix, project onto principal components, fit
linear models (a ridge regressor for raw scores and a multinomial
logistic classifier for labels), cross-validate, persist and reload.

    python demos/04_combined_model.py
"""

import tempfile
from pathlib import Path

import numpy as np

from tseval import (
    PipelineConfig,
    SentencePair,
    compute_matrix,
    cross_validate,
    decode_labels,
    encode_labels,
    fit_pipeline,
    load_pipeline,
    pearson,
    predict,
    save_pipeline,
    select_lambda,
    weighted_f1,
)

from importlib import import_module

synthesize = import_module("03_ranking_and_intervals").synthesize

FEATURES = [
    "NBSourceWords", "NBOutputWords", "NBOutputWordsPerSent",
    "NBOutputChars", "NBOutputCharsPerSent", "NBOutputSyllables",
    "NBOutputSyllablesPerSent", "TypeTokenRatio", "BLEU_1gram",
    "BLEU_2gram", "BLEU_3gram", "BLEU_4gram", "BLEUSmoothed", "METEOR",
    "ROUGE", "TERp", "TERp_Del", "TERp_NumEr", "TERp_Sub", "WordsInCommon",
    "OutputFKGL", "OutputFRE", "NBSourcePunct", "NBOutputPunct",
]


def matrices():
    train = synthesize(300, seed=13)
    test = synthesize(80, seed=14)
    to_pairs = lambda ds: [
        SentencePair.from_text(r.source_text, r.output_text, r.id)
        for r in ds.records
    ]
    return (train, compute_matrix(to_pairs(train), which=FEATURES),
            test, compute_matrix(to_pairs(test), which=FEATURES))


def main() -> None:
    train, train_matrix, test, test_matrix = matrices()
    dim = "M"
    y_train = encode_labels(train, dim)
    y_test = encode_labels(test, dim)

    print("=== raw scoring: scale -> PCA -> ridge ===")
    base = PipelineConfig(kind="ridge", pca_k=20)
    lam, grid = select_lambda(train_matrix, y_train, base, folds=5, seed=42)
    for candidate, result in grid.items():
        marker = "  <-- selected" if candidate == lam else ""
        print(f"  lambda={candidate:<8g} CV pearson {result.mean:.3f}{marker}")
    pipeline = fit_pipeline(train_matrix, y_train, dim,
                            PipelineConfig(kind="ridge", lam=lam, pca_k=20))
    scores = predict(pipeline, test_matrix)
    print(f"  held-out Pearson vs gold: {pearson(scores, y_test):.3f}")

    explained = pipeline.pca.explained_variance
    share = explained[:5].sum() / explained.sum()
    print(f"  top-5 components carry {share:.0%} of the scaled variance")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.txt"
        save_pipeline(pipeline, path)
        reloaded = load_pipeline(path)
        identical = np.array_equal(predict(reloaded, test_matrix), scores)
        print(f"  persisted {path.stat().st_size} bytes; reload exact: "
              f"{identical}")

    print("\n=== label prediction: scale -> PCA -> logistic ===")
    y_cls = y_train.astype(int)
    cv = cross_validate(train_matrix, y_cls,
                        PipelineConfig(kind="logistic", lam=1.0, pca_k=20),
                        folds=5, seed=42)
    print(f"  CV weighted F1: {cv.mean:.3f} "
          f"(folds {' '.join(f'{s:.2f}' for s in cv.fold_scores)})")
    clf = fit_pipeline(train_matrix, y_cls, dim,
                       PipelineConfig(kind="logistic", lam=1.0, pca_k=20))
    predicted = decode_labels(predict(clf, test_matrix))
    gold = decode_labels(y_test.astype(int))
    print(f"  held-out weighted F1: {weighted_f1(predicted, gold):.3f}")
    print(f"  first predictions: {predicted[:6]}")


if __name__ == "__main__":
    main()
