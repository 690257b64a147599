import numpy as np
import pytest

from oodeval import FormatVersionError, ParseError, ScoreSet
from oodeval.fileio import (
    LogitTable,
    parse_logit_file,
    parse_score_file,
    read_predictions,
    read_report,
    read_scatter,
    read_sweep,
    write_logit_file,
    write_predictions,
    write_report,
    write_scatter,
    write_score_file,
    write_sweep,
)
from oodeval.scores import MetricReport, SetRecord


class TestScoreFile:
    def test_roundtrip_labeled(self, tmp_path):
        rng = np.random.default_rng(0)
        s = ScoreSet.from_parts(rng.normal(0.8, 0.1, 40), rng.normal(0.2, 0.1, 30), id="x")
        path = tmp_path / "x.csv"
        write_score_file(s, path)
        back = parse_score_file(path)
        assert back.id == "x"
        assert np.array_equal(back.scores, s.scores)
        assert np.array_equal(back.labels, s.labels)

    def test_roundtrip_unlabeled(self, tmp_path):
        s = ScoreSet(scores=[0.123456789012345678, 0.2], id="u")
        path = tmp_path / "u.csv"
        write_score_file(s, path)
        back = parse_score_file(path)
        assert back.labels is None
        assert np.array_equal(back.scores, s.scores)

    def test_label_case_normalized(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("sample_id,score,label\na,0.5,IND\nb,0.25,Ood\n")
        back = parse_score_file(p)
        assert back.labels.tolist() == [True, False]

    def test_bad_score_names_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("sample_id,score,label\na,0.5,ind\nb,abc,ood\n")
        with pytest.raises(ParseError) as err:
            parse_score_file(p)
        assert "line 3" in str(err.value)

    def test_nan_and_inf_rejected(self, tmp_path):
        for text in ("nan", "inf", "-inf"):
            p = tmp_path / f"{text.strip('-')}.csv"
            p.write_text(f"sample_id,score,label\na,{text},ind\nb,0.1,ood\n")
            with pytest.raises(ParseError):
                parse_score_file(p)

    def test_duplicate_ids_rejected(self, tmp_path):
        p = tmp_path / "dup.csv"
        p.write_text("sample_id,score,label\na,0.5,ind\na,0.1,ood\n")
        with pytest.raises(ParseError):
            parse_score_file(p)

    def test_mixed_known_unknown_rejected(self, tmp_path):
        p = tmp_path / "mix.csv"
        p.write_text("sample_id,score,label\na,0.5,ind\nb,0.1,unknown\n")
        with pytest.raises(ParseError):
            parse_score_file(p)

    def test_missing_header_rejected(self, tmp_path):
        p = tmp_path / "nohdr.csv"
        p.write_text("a,0.5,ind\n")
        with pytest.raises(ParseError):
            parse_score_file(p)

    def test_custom_sample_ids_preserved(self, tmp_path):
        s = ScoreSet(scores=[0.1, 0.2])
        p = tmp_path / "ids.csv"
        write_score_file(s, p, sample_ids=["img1", "img2"])
        assert "img1" in p.read_text()


class TestLogitFile:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        table = LogitTable(
            sample_ids=("a", "b", "c"),
            labels=("ind", "ood", "unknown"),
            logits=rng.normal(size=(3, 4)),
        )
        p = tmp_path / "l.csv"
        write_logit_file(table, p)
        back = parse_logit_file(p)
        assert back.sample_ids == table.sample_ids
        assert back.labels == table.labels
        assert np.array_equal(back.logits, table.logits)

    def test_wrong_width_rejected(self, tmp_path):
        p = tmp_path / "w.csv"
        p.write_text("sample_id,label,l_0,l_1\na,ind,0.5\n")
        with pytest.raises(ParseError) as err:
            parse_logit_file(p)
        assert "line 2" in str(err.value)

    def test_header_checked(self, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("sample_id,label,logit_a,logit_b\na,ind,0.5,0.1\n")
        with pytest.raises(ParseError):
            parse_logit_file(p)


def sample_report():
    return MetricReport(
        records=(
            SetRecord(id="a", metric="auroc", truth_pct=81.25, pred_pct=79.5,
                      gscore=0.31, degenerate=False),
            SetRecord(id="b", metric="auroc", truth_pct=99.0, pred_pct=97.25,
                      gscore=0.62, degenerate=True),
        ),
        rmse_pct=1.75,
        pearson=0.95,
        spearman=1.0,
    )


class TestReportFiles:
    def test_report_roundtrip(self, tmp_path):
        rep = sample_report()
        p = tmp_path / "report.csv"
        write_report(rep, p)
        back = read_report(p)
        assert back == rep

    def test_report_version_checked(self, tmp_path):
        rep = sample_report()
        p = tmp_path / "report.csv"
        write_report(rep, p)
        p.write_text(p.read_text().replace(",1\n", ",9\n"))
        with pytest.raises(FormatVersionError):
            read_report(p)

    def test_predictions_roundtrip(self, tmp_path):
        rows = [("a", 0.5, 75.0, False), ("b", 0.0, 50.0, True)]
        p = tmp_path / "pred.csv"
        write_predictions(rows, p)
        assert read_predictions(p) == rows

    def test_sweep_roundtrip(self, tmp_path):
        rows = [("ratio=1:10", 150, -0.97, -0.98), ("size=50", 150, -0.81, -0.8)]
        p = tmp_path / "sweep.csv"
        write_sweep(rows, p)
        assert read_sweep(p) == rows

    def test_scatter_roundtrip(self, tmp_path):
        rep = sample_report()
        p = tmp_path / "scatter.csv"
        write_scatter(rep.records, p)
        back = read_scatter(p)
        assert back == [("a", 0.31, 81.25), ("b", 0.62, 99.0)]


class TestAtomicity:
    def test_overwrite_leaves_no_temp_files(self, tmp_path):
        s = ScoreSet(scores=[0.1, 0.2])
        p = tmp_path / "s.csv"
        write_score_file(s, p)
        write_score_file(s, p)
        assert [f.name for f in tmp_path.iterdir()] == ["s.csv"]
