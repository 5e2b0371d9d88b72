"""
pdf_exporter.py
---------------
One-document PDF summaries:
 1. Corpus statistics: histograms as tables, the chain-length bucket table
    and the per-band complexity trajectories
 2. Diagnostic score card: task accuracies, the two-step error breakdown
    and the per-bucket accuracies
"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

from dateutil import tz
from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Image, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from core.dataset import StatsReport
from core.diagnostics import ERROR_CLASSES, ScoreCard

HEADER_COLOR = "#e0ebff"


# -------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------
def _timestamp_footer(canvas, doc):
    canvas.saveState()
    canvas.setFont("Helvetica-Oblique", 8)
    stamp = datetime.now(tz.tzutc()).strftime("%Y-%m-%d %H:%M:%S UTC")
    canvas.drawCentredString(letter[0] / 2.0, 0.4 * inch, f"Generated by foltrace • {stamp}")
    canvas.restoreState()


def _table(data: list[list], col_width: float = 1.3) -> Table:
    table = Table([[str(c) for c in row] for row in data], colWidths=[col_width * inch] * len(data[0]))
    table.setStyle(TableStyle([
        ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor(HEADER_COLOR)),
        ("TEXTCOLOR", (0, 0), (-1, 0), colors.black),
        ("ALIGN", (0, 0), (-1, -1), "CENTER"),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("FONTSIZE", (0, 0), (-1, 0), 10),
        ("BOTTOMPADDING", (0, 0), (-1, 0), 6),
        ("GRID", (0, 0), (-1, -1), 0.25, colors.grey),
    ]))
    return table


def _section(content: list, title: str, styles) -> None:
    content.append(Paragraph(f"<b><font size=13>{title}</font></b>", styles["Heading3"]))
    content.append(Spacer(1, 0.1 * inch))


def _build(content: list, outpath: str | Path) -> Path:
    outpath = Path(outpath)
    outpath.parent.mkdir(parents=True, exist_ok=True)
    doc = SimpleDocTemplate(str(outpath), pagesize=letter, rightMargin=36, leftMargin=36, topMargin=36, bottomMargin=36)
    doc.build(content, onFirstPage=_timestamp_footer, onLaterPages=_timestamp_footer)
    return outpath


# -------------------------------------------------------------------
# Corpus statistics
# -------------------------------------------------------------------
def export_stats_pdf(report: StatsReport, outpath: str | Path, figures_dir: str | Path | None = None) -> Path:
    styles = getSampleStyleSheet()
    content = [Paragraph("<b><font size=18>Trace corpus statistics</font></b>", styles["Title"]), Spacer(1, 0.25 * inch)]
    content.append(Paragraph(f"{report.record_count} records; config {report.config_digest[:12] or 'n/a'}", styles["Normal"]))
    content.append(Spacer(1, 0.2 * inch))

    _section(content, "Original complexity by chain length", styles)
    rows = [["Bucket", "Records", "Start", "End", "Delta"]]
    rows += [[r["bucket"], r["count"], r["start_mean"], r["end_mean"], r["delta"]] for r in report.bucket_table]
    content += [_table(rows), Spacer(1, 0.3 * inch)]

    _section(content, "Rewrite steps per record", styles)
    rows = [["Steps", "Records"]] + [[k, v] for k, v in sorted(report.steps_hist.items())]
    content += [_table(rows), Spacer(1, 0.3 * inch)]

    _section(content, "Mean circuit complexity per step", styles)
    for band, values in report.trajectories.items():
        shown = ", ".join(f"{v:.1f}" for v in values)
        content.append(Paragraph(f"<b>{band}</b>: {shown}", styles["Normal"]))
    if figures_dir is not None:
        figure = Path(figures_dir) / "trajectories.png"
        if figure.exists():
            content += [Spacer(1, 0.2 * inch), Image(str(figure), width=6 * inch, height=3.9 * inch)]
    return _build(content, outpath)


# -------------------------------------------------------------------
# Score card
# -------------------------------------------------------------------
def export_score_pdf(card: ScoreCard, outpath: str | Path) -> Path:
    styles = getSampleStyleSheet()
    content = [Paragraph("<b><font size=18>Diagnostic score card</font></b>", styles["Title"]), Spacer(1, 0.25 * inch)]
    content.append(Paragraph(f"{card.item_count} items; config {card.config_digest[:12] or 'n/a'}", styles["Normal"]))
    content.append(Spacer(1, 0.2 * inch))

    for title, scores in (("Masked prediction", card.task1), ("Step completion", card.task2), ("Truth evaluation", card.truth)):
        if scores:
            _section(content, title, styles)
            content += [_table([["Metric", "Accuracy"]] + [[k, f"{v:.4f}"] for k, v in scores.items()], 2.0)]
            content.append(Spacer(1, 0.3 * inch))

    if card.error_breakdown:
        _section(content, "Two-step outcomes", styles)
        content += [_table([list(ERROR_CLASSES), [card.error_breakdown.get(c, 0) for c in ERROR_CLASSES]], 1.1)]
        content.append(Spacer(1, 0.3 * inch))

    if card.stratified:
        _section(content, "Accuracy by complexity bucket", styles)
        rows = [["Task", "Bucket", "Metric", "Items", "Accuracy"]]
        rows += [[r["task"], r["bucket"], r["metric"], r["count"], f"{r['accuracy']:.4f}"] for r in card.stratified]
        content.append(_table(rows))
    return _build(content, outpath)
