"""End-to-end CLI workflow on synthetic data: features -> rank -> train ->
evaluate -> report, plus determinism, config files and exit codes."""

import pytest

from tseval.cli import main


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def workflow_dir(synthetic_dataset_dir, tmp_path_factory):
    """Runs the full pipeline once; tests inspect the artifacts."""
    out = tmp_path_factory.mktemp("workflow")
    base = synthetic_dataset_dir
    code = run(
        "features",
        "--train", str(base / "train.tsv"),
        "--test", str(base / "test.tsv"),
        "--freq-table", str(base / "freq.txt"),
        "--concreteness", str(base / "concreteness.tsv"),
        "--vectors", str(base / "vectors.txt"),
        "--lm-corpus", str(base / "lm_corpus.txt"),
        "--out", str(out),
    )
    assert code == 0
    return out


class TestFeaturesCommand:
    def test_writes_both_splits(self, workflow_dir):
        assert (workflow_dir / "features_train.tsv").exists()
        assert (workflow_dir / "features_test.tsv").exists()

    def test_full_registry_columns(self, workflow_dir):
        header = (workflow_dir / "features_train.tsv").read_text().splitlines()[0]
        columns = header.split("\t")
        assert columns[0] == "id"
        assert len(columns) == 1 + 29

    def test_row_counts_match_datasets(self, workflow_dir):
        train = (workflow_dir / "features_train.tsv").read_text().splitlines()
        test = (workflow_dir / "features_test.tsv").read_text().splitlines()
        assert len(train) == 1 + 52
        assert len(test) == 1 + 18

    def test_feature_subset(self, synthetic_dataset_dir, tmp_path):
        base = synthetic_dataset_dir
        code = run("features", "--train", str(base / "train.tsv"),
                   "--features", "NBOutputWords,ROUGE",
                   "--out", str(tmp_path))
        assert code == 0
        header = (tmp_path / "features_train.tsv").read_text().splitlines()[0]
        assert header == "id\tNBOutputWords\tROUGE"

    def test_missing_resource_for_explicit_feature(self, synthetic_dataset_dir,
                                                   tmp_path):
        base = synthetic_dataset_dir
        code = run("features", "--train", str(base / "train.tsv"),
                   "--features", "AvgCosineSim", "--out", str(tmp_path))
        assert code == 2
        assert not (tmp_path / "features_train.tsv").exists()

    def test_rerun_is_byte_identical(self, synthetic_dataset_dir, tmp_path,
                                     workflow_dir):
        base = synthetic_dataset_dir
        code = run(
            "features",
            "--train", str(base / "train.tsv"),
            "--test", str(base / "test.tsv"),
            "--freq-table", str(base / "freq.txt"),
            "--concreteness", str(base / "concreteness.tsv"),
            "--vectors", str(base / "vectors.txt"),
            "--lm-corpus", str(base / "lm_corpus.txt"),
            "--out", str(tmp_path),
        )
        assert code == 0
        for name in ("features_train.tsv", "features_test.tsv"):
            assert (tmp_path / name).read_bytes() == \
                (workflow_dir / name).read_bytes()


class TestRankCommand:
    def test_rank_all_dimensions(self, synthetic_dataset_dir, workflow_dir):
        base = synthetic_dataset_dir
        code = run("rank", "--train", str(base / "train.tsv"),
                   "--test", str(base / "test.tsv"),
                   "--out", str(workflow_dir))
        assert code == 0
        for dim in ("G", "M", "S", "Overall"):
            assert (workflow_dir / f"rank_{dim}.tsv").exists()
            assert (workflow_dir / f"rank_{dim}.md").exists()

    def test_simplicity_ranking_finds_length_signal(self, workflow_dir):
        lines = (workflow_dir / "rank_S.tsv").read_text().splitlines()[1:4]
        top = [line.split("\t")[1] for line in lines]
        assert any("NBOutput" in name for name in top)

    def test_test_column_attached(self, workflow_dir):
        first = (workflow_dir / "rank_M.tsv").read_text().splitlines()[1]
        assert first.split("\t")[5] != ""


class TestTrainEvaluateCommands:
    @pytest.mark.parametrize("model,dimension", [
        ("ridge", "M"), ("lasso", "S"), ("linreg", "M"), ("logistic", "G"),
    ])
    def test_train_then_evaluate(self, synthetic_dataset_dir, workflow_dir,
                                 model, dimension):
        base = synthetic_dataset_dir
        code = run("train", "--train", str(base / "train.tsv"),
                   "--dimension", dimension, "--model", model,
                   "--pca-k", "10", "--out", str(workflow_dir))
        assert code == 0
        model_file = workflow_dir / f"model_{dimension}_{model}.txt"
        assert model_file.exists()

        code = run("evaluate", "--test", str(base / "test.tsv"),
                   "--dimension", dimension, "--model", model,
                   "--out", str(workflow_dir))
        assert code == 0
        report = (workflow_dir
                  / f"evaluation_{dimension}_{model}.txt").read_text()
        assert "QATS 2016 leaderboard" in report

    def test_retrain_same_seed_identical_model(self, synthetic_dataset_dir,
                                               workflow_dir, tmp_path):
        base = synthetic_dataset_dir
        for out in (tmp_path / "a", tmp_path / "b"):
            out.mkdir()
            (out / "features_train.tsv").write_bytes(
                (workflow_dir / "features_train.tsv").read_bytes())
            code = run("train", "--train", str(base / "train.tsv"),
                       "--dimension", "M", "--model", "ridge",
                       "--pca-k", "10", "--seed", "7", "--out", str(out))
            assert code == 0
        assert (tmp_path / "a" / "model_M_ridge.txt").read_bytes() == \
            (tmp_path / "b" / "model_M_ridge.txt").read_bytes()

    def test_meaning_cv_score_is_sane(self, synthetic_dataset_dir,
                                      workflow_dir, capsys):
        base = synthetic_dataset_dir
        code = run("train", "--train", str(base / "train.tsv"),
                   "--dimension", "M", "--model", "ridge",
                   "--pca-k", "10", "--out", str(workflow_dir))
        assert code == 0
        printed = capsys.readouterr().out
        assert "mean pearson" in printed

    def test_lasso_with_huge_lambda_warns_all_zero(self, synthetic_dataset_dir,
                                                   workflow_dir, tmp_path,
                                                   capsys):
        base = synthetic_dataset_dir
        out = tmp_path / "lasso"
        out.mkdir()
        (out / "features_train.tsv").write_bytes(
            (workflow_dir / "features_train.tsv").read_bytes())
        code = run("train", "--train", str(base / "train.tsv"),
                   "--dimension", "M", "--model", "lasso",
                   "--lam", "1e9", "--pca-k", "10", "--out", str(out))
        assert code == 0
        printed = capsys.readouterr().out
        assert "no features" in printed


class TestReportCommand:
    def test_distribution_table(self, synthetic_dataset_dir, tmp_path, capsys):
        base = synthetic_dataset_dir
        code = run("report", "--train", str(base / "train.tsv"),
                   "--test", str(base / "test.tsv"), "--out", str(tmp_path))
        assert code == 0
        table = (tmp_path / "label_distribution.tsv").read_text()
        lines = table.splitlines()
        assert lines[0] == "split\tdimension\tBad\tOK\tGood"
        assert len(lines) == 1 + 8  # two splits x four dimensions
        for line in lines[1:]:
            counts = [int(v) for v in line.split("\t")[2:]]
            expected = 52 if line.startswith("train") else 18
            assert sum(counts) == expected


class TestConfigFileAndErrors:
    def test_config_file_supplies_settings(self, synthetic_dataset_dir,
                                           tmp_path):
        base = synthetic_dataset_dir
        config = tmp_path / "run.cfg"
        config.write_text(
            f"train = {base / 'train.tsv'}\n"
            "# a comment\n"
            "features = NBOutputWords,ROUGE\n"
            f"out = {tmp_path}\n"
        )
        assert run("features", "--config", str(config)) == 0
        header = (tmp_path / "features_train.tsv").read_text().splitlines()[0]
        assert header == "id\tNBOutputWords\tROUGE"

    def test_flags_beat_config_file(self, synthetic_dataset_dir, tmp_path):
        base = synthetic_dataset_dir
        config = tmp_path / "run.cfg"
        config.write_text(
            f"train = {base / 'train.tsv'}\n"
            "features = METEOR\n"
            f"out = {tmp_path / 'ignored'}\n"
        )
        assert run("features", "--config", str(config),
                   "--features", "ROUGE", "--out", str(tmp_path)) == 0
        header = (tmp_path / "features_train.tsv").read_text().splitlines()[0]
        assert header == "id\tROUGE"

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("no_such_setting = 1\n")
        assert run("features", "--config", str(config)) == 2

    def test_usage_error_exit_code(self):
        assert run("features") == 1  # --train missing

    def test_unknown_subcommand_exit_code(self):
        assert run("frobnicate") == 1

    def test_data_error_exit_code(self, tmp_path):
        missing = tmp_path / "none.tsv"
        assert run("features", "--train", str(missing),
                   "--out", str(tmp_path)) == 2

    def test_missing_features_tsv_is_data_error(self, synthetic_dataset_dir,
                                                tmp_path):
        base = synthetic_dataset_dir
        assert run("rank", "--train", str(base / "train.tsv"),
                   "--out", str(tmp_path)) == 2

    def test_missing_model_file_is_data_error(self, synthetic_dataset_dir,
                                              workflow_dir, tmp_path):
        base = synthetic_dataset_dir
        (tmp_path / "features_test.tsv").write_bytes(
            (workflow_dir / "features_test.tsv").read_bytes())
        assert run("evaluate", "--test", str(base / "test.tsv"),
                   "--dimension", "S", "--model", "linreg",
                   "--out", str(tmp_path)) == 2

    def test_missing_config_file_is_data_error(self, tmp_path):
        assert run("features", "--config", str(tmp_path / "no.cfg")) == 2

    def test_resource_dir_env_fallback(self, synthetic_dataset_dir, tmp_path,
                                       monkeypatch):
        base = synthetic_dataset_dir
        monkeypatch.setenv("TSEVAL_RESOURCES", str(base))
        code = run("features", "--train", str(base / "train.tsv"),
                   "--freq-table", "freq.txt",  # relative, lives in $TSEVAL_RESOURCES
                   "--features", "MaxPosInFreqTable",
                   "--out", str(tmp_path))
        assert code == 0
