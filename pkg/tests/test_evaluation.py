import json

import pandas as pd

from core.data_generator import ForgeJob, generate_records
from core.dataset import compute_stats
from core.diagnostics import ScoreCard
from core.evaluation import write_scorecard, write_stats
from core.pdf_exporter import export_score_pdf, export_stats_pdf


def _report():
    return compute_stats(generate_records(ForgeJob(top_seed=2, split=0), 20, progress=False), "digest")


def test_stats_files(tmp_path):
    report = _report()
    written = {p.name for p in write_stats(report, tmp_path, plots=True)}
    assert {"stats.json", "bucket_table.csv", "trajectories.csv", "steps_hist.csv", "trajectories.png"} <= written
    assert json.loads((tmp_path / "stats.json").read_text(encoding="utf-8"))["record_count"] == 20
    steps = pd.read_csv(tmp_path / "steps_hist.csv")
    assert list(steps.columns) == ["steps", "records"]
    assert steps["records"].sum() == 20


def test_stats_files_are_deterministic(tmp_path):
    write_stats(_report(), tmp_path / "a", plots=False)
    write_stats(_report(), tmp_path / "b", plots=False)
    for name in ("stats.json", "bucket_table.csv", "trajectories.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_scorecard_files(tmp_path):
    card = ScoreCard(
        task2={"two_step": 0.5},
        error_breakdown={"BothCorrect": 1, "Malformed": 1},
        stratified=[{"task": "task2", "bucket": "low", "metric": "two_step", "count": 2, "accuracy": 0.5}],
        item_count=2,
    )
    written = {p.name for p in write_scorecard(card, tmp_path)}
    assert written == {"score.json", "stratified.csv", "error_breakdown.png"}
    assert json.loads((tmp_path / "score.json").read_text(encoding="utf-8"))["task2"] == {"two_step": 0.5}


def test_pdf_summaries(tmp_path):
    stats_pdf = export_stats_pdf(_report(), tmp_path / "stats.pdf")
    card = ScoreCard(task1={"operator": 1.0, "overall": 1.0}, item_count=1)
    score_pdf = export_score_pdf(card, tmp_path / "score.pdf")
    assert stats_pdf.read_bytes().startswith(b"%PDF")
    assert score_pdf.read_bytes().startswith(b"%PDF")
