"""End-to-end command-line runs through main(): outputs, files, exit codes."""

import json

import pytest

from ssd.cli import main
from ssd.corpus import write_dataset
from ssd.ingest import API_KEY_ENV

from conftest import make_support_corpus


@pytest.fixture
def workdir(tmp_path, lexicon_files):
    ds = make_support_corpus(200, seed=17, hierarchical=True)
    data = tmp_path / "data.csv"
    write_dataset(ds, str(data))
    cfg = {
        "dataset": "data.csv",
        "subtask": 1,
        "features": ["tfidf"],
        "models": ["lr"],
        "folds": 5,
        "seed": 1,
        "tfidf": {"min_df": 1},
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(cfg))
    return {"tmp": tmp_path, "ds": ds, "data": str(data),
            "config": str(cfg_path), "lex": lexicon_files}


class TestStats:
    def test_text_output(self, workdir, capsys):
        assert main(["stats", workdir["data"]]) == 0
        out = capsys.readouterr().out
        assert "SS" in out and "NSS" in out

    def test_json_output(self, workdir, capsys):
        assert main(["stats", workdir["data"], "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        counts = payload["subtask1"]
        assert counts["SS"] + counts["NSS"] == 200

    def test_missing_file_is_data_error(self, capsys):
        assert main(["stats", "no/such/file.csv"]) == 2
        assert "error:" in capsys.readouterr().err


class TestProfile:
    def test_table_output(self, workdir, capsys):
        code = main(["profile", workdir["data"],
                     "--category", workdir["lex"]["category"]])
        assert code == 0
        out = capsys.readouterr().out
        assert "Category features" in out

    def test_json_output(self, workdir, capsys):
        code = main(["profile", workdir["data"], "--json",
                     "--valence", workdir["lex"]["valence"]])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["labels"] == ["SS", "NSS"]

    def test_no_lexicon_is_usage_error(self, workdir, capsys):
        assert main(["profile", workdir["data"]]) == 1
        assert "lexicon" in capsys.readouterr().err


class TestCv:
    def test_prints_table_and_writes_artifacts(self, workdir, capsys):
        out_dir = workdir["tmp"] / "cvout"
        code = main(["cv", "--config", workdir["config"],
                     "--output-dir", str(out_dir)])
        assert code == 0
        captured = capsys.readouterr()
        assert "lr" in captured.out
        assert "F1(m)" in captured.out
        assert (out_dir / "report.json").exists()
        assert (out_dir / "report.md").exists()
        assert (out_dir / "timing.json").exists()

    def test_seed_flag_overrides_config(self, workdir, capsys):
        out_a = workdir["tmp"] / "a"
        out_b = workdir["tmp"] / "b"
        main(["cv", "--config", workdir["config"], "--seed", "5",
              "--output-dir", str(out_a)])
        main(["cv", "--config", workdir["config"], "--seed", "5",
              "--output-dir", str(out_b)])
        capsys.readouterr()
        assert (out_a / "report.json").read_bytes() == \
            (out_b / "report.json").read_bytes()

    def test_missing_dataset_is_data_error(self, workdir, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"dataset": "ghost.csv", "subtask": 1}))
        assert main(["cv", "--config", str(cfg)]) == 2
        capsys.readouterr()

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps(
            {"dataset": "d.csv", "subtask": 1, "classifier": "lr"}))
        assert main(["cv", "--config", str(cfg)]) == 1
        assert "classifier" in capsys.readouterr().err


class TestTrainPredict:
    def test_round_trip(self, workdir, capsys):
        model_path = workdir["tmp"] / "model.json"
        assert main(["train", "--config", workdir["config"],
                     "--out", str(model_path)]) == 0
        assert model_path.exists()

        pred_path = workdir["tmp"] / "preds.csv"
        assert main(["predict", "--model", str(model_path),
                     "--input", workdir["data"],
                     "--out", str(pred_path)]) == 0
        capsys.readouterr()
        lines = pred_path.read_text().strip().split("\n")
        assert lines[0] == "id,label,p_SS,p_NSS"
        assert len(lines) == 201
        # the planted corpus is separable, so training-set accuracy is high
        truth = {it.comment.id: it.label.support for it in workdir["ds"].items}
        hits = 0
        for line in lines[1:]:
            cid, label, p_ss, p_nss = line.split(",")
            assert abs(float(p_ss) + float(p_nss) - 1.0) < 1e-6
            hits += truth[cid] == label
        assert hits / 200 >= 0.95

    def test_predict_to_stdout(self, workdir, capsys):
        model_path = workdir["tmp"] / "model.json"
        main(["train", "--config", workdir["config"], "--out", str(model_path)])
        capsys.readouterr()
        assert main(["predict", "--model", str(model_path),
                     "--input", workdir["data"]]) == 0
        out = capsys.readouterr().out
        assert out.startswith("id,label,")

    def test_missing_model_file(self, workdir, capsys):
        assert main(["predict", "--model", "ghost.json",
                     "--input", workdir["data"]]) == 2
        capsys.readouterr()

    def test_unknown_model_name(self, workdir, capsys):
        assert main(["train", "--config", workdir["config"],
                     "--model", "adaboost",
                     "--out", str(workdir["tmp"] / "x.json")]) == 1
        capsys.readouterr()


class TestCascadeCommands:
    def test_round_trip(self, workdir, capsys):
        model_path = workdir["tmp"] / "cascade.json"
        assert main(["cascade-train", "--config", workdir["config"],
                     "--out", str(model_path)]) == 0

        input_path = workdir["tmp"] / "texts.txt"
        input_path.write_text(
            "hate trash awful video\n"
            "\n"  # blank lines are skipped
            "bless hope community everyone pride rainbow queer\n")
        pred_path = workdir["tmp"] / "cascade_preds.csv"
        assert main(["cascade-predict", "--model", str(model_path),
                     "--input", str(input_path),
                     "--out", str(pred_path)]) == 0
        capsys.readouterr()
        lines = pred_path.read_text().strip().split("\n")
        assert lines[0] == "id,support,target,group,p1,p2,p3"
        assert len(lines) == 3  # two non-blank inputs
        assert lines[1].split(",")[1] == "NSS"
        assert lines[2].split(",")[1] == "SS"


class TestKappa:
    def test_perfect_agreement(self, workdir, capsys):
        assert main(["kappa", "--a", workdir["data"],
                     "--b", workdir["data"]]) == 0
        assert capsys.readouterr().out.strip() == "1.0000"

    def test_target_column(self, workdir, capsys):
        code = main(["kappa", "--a", workdir["data"], "--b", workdir["data"],
                     "--column", "target"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "1.0000"

    def test_mismatched_ids(self, workdir, tmp_path, capsys):
        from ssd.corpus import Dataset

        subset = Dataset(workdir["ds"].items[:100])
        other = tmp_path / "subset.csv"
        write_dataset(subset, str(other))
        assert main(["kappa", "--a", workdir["data"], "--b", str(other)]) == 2
        assert "different ids" in capsys.readouterr().err


class TestFetch:
    def make_mock(self, tmp_path, texts):
        items = [
            {"id": f"v1-c{i}",
             "snippet": {"topLevelComment": {"snippet": {"textOriginal": t}}}}
            for i, t in enumerate(texts)
        ]
        (tmp_path / "v1.page1.json").write_text(json.dumps({"items": items}))
        return str(tmp_path)

    def test_mock_fetch_writes_csv(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv(API_KEY_ENV, raising=False)
        mock = self.make_mock(tmp_path, ["this is a fine day for all of us",
                                         "we hope you stay strong in this"])
        out = tmp_path / "comments.csv"
        code = main(["fetch", "--videos", "v1", "--mock-dir", mock,
                     "--out", str(out)])
        assert code == 0
        capsys.readouterr()
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "id,video_id,text,fetched_at"
        assert len(lines) == 3

    def test_sampling_flags(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv(API_KEY_ENV, raising=False)
        texts = [f"we hope for better day number {i}" if i % 2 == 0
                 else f"that was such a fine game {i}" for i in range(20)]
        mock = self.make_mock(tmp_path, texts)
        out = tmp_path / "sampled.csv"
        code = main(["fetch", "--videos", "v1", "--mock-dir", mock,
                     "--keywords", "hope", "--n-keyword", "3", "--n-random", "2",
                     "--seed", "4", "--out", str(out)])
        assert code == 0
        capsys.readouterr()
        assert len(out.read_text().strip().split("\n")) == 6

    def test_missing_credentials(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv(API_KEY_ENV, raising=False)
        code = main(["fetch", "--videos", "v1",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 3
        assert API_KEY_ENV in capsys.readouterr().err

    def test_no_videos_is_usage_error(self, tmp_path, capsys):
        assert main(["fetch", "--out", str(tmp_path / "x.csv")]) == 1
        capsys.readouterr()


class TestParser:
    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_no_arguments(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "ssd" in capsys.readouterr().out
