import filecmp
import subprocess
import sys

import numpy as np
import pytest

from oodeval import rmse
from oodeval.cli import main
from oodeval.fileio import (
    LogitTable,
    parse_score_file,
    read_predictions,
    read_report,
    read_scatter,
    read_sweep,
    write_logit_file,
)
from oodeval.regression import load_model
from oodeval.synth import read_manifest

SMALL = [
    "--n-train", "12", "--n-test", "4", "--n-ind", "300", "--n-ood", "300",
    "--n-val", "400", "--seed", "5",
]


def run_synth(out):
    assert main(["synth", "--out", str(out)] + SMALL) == 0


def fit_args(suite_dir, model_path, method="ude", distance="wasserstein", extra=()):
    args = [
        "fit", "--manifest", str(suite_dir / "manifest.csv"),
        "--method", method, "--distance", distance,
        "--metric", "fpr@tpr:0.95", "--out", str(model_path),
    ]
    if method == "ude":
        args += ["--val", str(suite_dir / "val.csv")]
    return args + list(extra)


class TestSynth:
    def test_writes_manifest_sets_and_val(self, tmp_path):
        out = tmp_path / "suite"
        run_synth(out)
        rows = read_manifest(out / "manifest.csv")
        assert len(rows) == 16
        assert (out / "val.csv").exists()
        for spec, _ in rows:
            s = parse_score_file(out / "sets" / f"{spec.id}.csv")
            assert s.n == spec.n_ind + spec.n_ood

    def test_byte_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_synth(a)
        run_synth(b)
        assert filecmp.cmp(a / "manifest.csv", b / "manifest.csv", shallow=False)
        assert filecmp.cmp(a / "val.csv", b / "val.csv", shallow=False)
        for spec, _ in read_manifest(a / "manifest.csv"):
            assert filecmp.cmp(
                a / "sets" / f"{spec.id}.csv", b / "sets" / f"{spec.id}.csv", shallow=False
            )


class TestScore:
    def test_uniform_logits_msp_half(self, tmp_path):
        table = LogitTable(
            sample_ids=tuple(f"s{i}" for i in range(6)),
            labels=("ind",) * 3 + ("ood",) * 3,
            logits=np.zeros((6, 2)),
        )
        logits_path = tmp_path / "logits.csv"
        write_logit_file(table, logits_path)
        out = tmp_path / "scores.csv"
        assert main(["score", "--logits", str(logits_path),
                     "--detector", "msp", "--out", str(out)]) == 0
        back = parse_score_file(out)
        assert np.allclose(back.scores, 0.5)
        assert back.labels.tolist() == [True] * 3 + [False] * 3

    def test_unknown_labels_passthrough(self, tmp_path):
        table = LogitTable(
            sample_ids=("a", "b"), labels=("unknown", "unknown"),
            logits=np.array([[2.0, 0.0], [0.0, 1.0]]),
        )
        logits_path = tmp_path / "l.csv"
        write_logit_file(table, logits_path)
        out = tmp_path / "s.csv"
        assert main(["score", "--logits", str(logits_path),
                     "--detector", "mls", "--out", str(out)]) == 0
        back = parse_score_file(out)
        assert back.labels is None
        assert back.scores.tolist() == [2.0, 1.0]


class TestFitPredictEval:
    @pytest.fixture()
    def suite(self, tmp_path):
        out = tmp_path / "suite"
        run_synth(out)
        return out

    def test_fit_eval_roundtrip_all_methods(self, suite, tmp_path):
        for method, distance in (("ude", "wasserstein"), ("gmm", "kl"), ("kmeans", "l2")):
            model_path = tmp_path / f"{method}.model"
            assert main(fit_args(suite, model_path, method, distance)) == 0
            model = load_model(model_path)
            assert model.n_train == 12
            report_path = tmp_path / f"{method}.report.csv"
            args = ["eval", "--model", str(model_path),
                    "--manifest", str(suite / "manifest.csv"),
                    "--out", str(report_path)]
            if method == "ude":
                args += ["--val", str(suite / "val.csv")]
            assert main(args) == 0
            report = read_report(report_path)
            assert len(report.records) == 4
            # self-consistency: summary equals recomputation from rows
            recomputed = rmse(
                [r.pred_pct for r in report.records],
                [r.truth_pct for r in report.records],
            )
            assert report.rmse_pct == pytest.approx(recomputed, abs=1e-9)

    def test_fit_deterministic(self, suite, tmp_path):
        a, b = tmp_path / "a.model", tmp_path / "b.model"
        assert main(fit_args(suite, a)) == 0
        assert main(fit_args(suite, b)) == 0
        assert a.read_text() == b.read_text()

    def test_fixed_tau_skips_tuning(self, suite, tmp_path):
        model_path = tmp_path / "fixed.model"
        assert main(fit_args(suite, model_path, extra=["--tau", "0.25"])) == 0
        assert load_model(model_path).cfg.tau == 0.25

    def test_ude_requires_val(self, suite, tmp_path, capsys):
        args = [
            "fit", "--manifest", str(suite / "manifest.csv"),
            "--method", "ude", "--distance", "wasserstein",
            "--out", str(tmp_path / "m"),
        ]
        assert main(args) == 1
        assert "error E_CONFIG" in capsys.readouterr().err

    def test_predict_outputs_percent(self, suite, tmp_path):
        model_path = tmp_path / "m.model"
        assert main(fit_args(suite, model_path)) == 0
        out = tmp_path / "pred.csv"
        score_files = sorted(str(p) for p in (suite / "sets").glob("test*.csv"))
        assert main(["predict", "--model", str(model_path),
                     "--val", str(suite / "val.csv"), "--out", str(out)]
                    + score_files) == 0
        rows = read_predictions(out)
        assert len(rows) == 4
        for _, gscore, pred_pct, _ in rows:
            assert 0.0 <= pred_pct <= 100.0
            assert gscore >= 0.0

    def test_predict_rejects_unknown_model_version(self, suite, tmp_path, capsys):
        model_path = tmp_path / "m.model"
        assert main(fit_args(suite, model_path)) == 0
        text = model_path.read_text().replace("format_version = 1", "format_version = 2")
        model_path.write_text(text)
        out = tmp_path / "p.csv"
        code = main(["predict", "--model", str(model_path),
                     "--val", str(suite / "val.csv"), "--out", str(out),
                     str(suite / "sets" / "test000.csv")])
        assert code == 1
        assert "error E_FORMAT" in capsys.readouterr().err

    def test_eval_refuses_leakage(self, suite, tmp_path, capsys):
        model_path = tmp_path / "m.model"
        assert main(fit_args(suite, model_path)) == 0
        args = ["eval", "--model", str(model_path),
                "--manifest", str(suite / "manifest.csv"), "--split", "train",
                "--val", str(suite / "val.csv"), "--out", str(tmp_path / "r.csv")]
        assert main(args) == 1
        assert "error E_LEAKAGE" in capsys.readouterr().err

    def test_report_scatter(self, suite, tmp_path):
        model_path = tmp_path / "m.model"
        assert main(fit_args(suite, model_path)) == 0
        report_path = tmp_path / "r.csv"
        assert main(["eval", "--model", str(model_path),
                     "--manifest", str(suite / "manifest.csv"),
                     "--val", str(suite / "val.csv"),
                     "--out", str(report_path)]) == 0
        scatter_path = tmp_path / "scatter.csv"
        assert main(["report", "--eval-report", str(report_path),
                     "--out", str(scatter_path)]) == 0
        points = read_scatter(scatter_path)
        report = read_report(report_path)
        assert [(r.id, r.gscore, r.truth_pct) for r in report.records] == points


class TestSweep:
    def test_cells_and_reproducibility(self, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        args = ["sweep", "--n-train", "10", "--n-test", "0",
                "--n-ind", "400", "--n-ood", "400", "--count-jitter", "0.0",
                "--n-val", "400", "--seed", "3", "--ratios", "1:10,1:1",
                "--sizes", "100", "--tau", "0.1"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        assert out_a.read_text() == out_b.read_text()
        rows = read_sweep(out_a)
        assert [r[0] for r in rows] == ["ratio=1:10", "ratio=1:1", "size=100"]
        for _, n_sets, g, s in rows:
            assert n_sets == 10
            assert -1.0 <= g <= 1.0 and -1.0 <= s <= 1.0

    def test_empty_grid_rejected(self, tmp_path, capsys):
        assert main(["sweep", "--out", str(tmp_path / "x.csv")]) == 1
        assert "error E_INPUT" in capsys.readouterr().err


class TestEntryPoint:
    def test_console_script_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "oodeval.cli", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "synth" in proc.stdout
