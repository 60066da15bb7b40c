"""Computing the full elementary-metric matrix for a small dataset.

Builds toy lexical resources on the fly (frequency table, concreteness
lexicon, word vectors, an n-gram language model trained on the sources)
and evaluates every registered feature for a handful of sentence pairs.

    python demos/02_feature_matrix.py
"""

import random
import tempfile
from pathlib import Path

from tseval import (
    Resources,
    SentencePair,
    compute_matrix,
    feature_names,
    load_concreteness,
    load_frequency_table,
    load_vectors,
    train_lm,
)

RAW_PAIRS = [
    ("The committee met on Thursday to discuss the proposed changes.",
     "The committee met on Thursday."),
    ("Heavy rain caused flooding in several low-lying districts of the city.",
     "Heavy rain caused floods in parts of the city."),
    ("The ancient bridge, built of stone, still carries traffic today.",
     "The old stone bridge still carries traffic."),
    ("Researchers discovered that the bacteria can survive extreme cold.",
     "Researchers found the bacteria survives extreme cold."),
]


def build_resources(workdir: Path, pairs) -> Resources:
    vocab = sorted({w for p in pairs for w in p.source.words + p.output.words})
    rng = random.Random(0)

    freq = workdir / "freq.txt"
    freq.write_text("\n".join(sorted(vocab, key=len)) + "\n")

    conc = workdir / "concreteness.tsv"
    conc.write_text("Word\tConc.M\n" + "".join(
        f"{w}\t{1.0 + 4.0 * rng.random():.2f}\n" for w in vocab))

    vec = workdir / "vectors.txt"
    lines = [f"{len(vocab)} 8"]
    lines += [w + " " + " ".join(f"{rng.gauss(0, 1):.3f}" for _ in range(8))
              for w in vocab]
    vec.write_text("\n".join(lines) + "\n")

    corpus = workdir / "corpus.txt"
    corpus.write_text("\n".join(" ".join(p.source.words) for p in pairs) * 2
                      + "\n")

    return Resources(
        freq_table=load_frequency_table(freq),
        concreteness=load_concreteness(conc),
        vectors=load_vectors(vec),
        lm=train_lm(corpus, order=3),
    )


def main() -> None:
    pairs = [SentencePair.from_text(src, out, id=str(i + 1))
             for i, (src, out) in enumerate(RAW_PAIRS)]
    with tempfile.TemporaryDirectory() as tmp:
        resources = build_resources(Path(tmp), pairs)
        matrix = compute_matrix(pairs, resources)

        print(f"matrix: {matrix.rows.shape[0]} pairs x "
              f"{matrix.rows.shape[1]} features "
              f"({len(feature_names())} registered)\n")

        show = ["NBOutputWords", "NBOutputWordsPerSent", "TypeTokenRatio",
                "BLEUSmoothed", "METEOR", "TERp", "WordsInCommon",
                "OutputFKGL", "OutputFRE"]
        print(f"{'id':>3s} " + " ".join(f"{n[:12]:>12s}" for n in show))
        for rid, _ in zip(matrix.row_ids, matrix.rows):
            i = matrix.row_ids.index(rid)
            values = [matrix.column(n)[i] for n in show]
            print(f"{rid:>3s} " + " ".join(f"{v:12.3f}" for v in values))

        out_path = Path(tmp) / "features.tsv"
        matrix.to_tsv(out_path)
        print(f"\nTSV serialization round-trips bit-exactly; header starts:")
        print("  " + out_path.read_text().splitlines()[0][:72] + "...")


if __name__ == "__main__":
    main()
