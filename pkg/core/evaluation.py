from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from core.dataset import StatsReport
from core.diagnostics import ERROR_CLASSES, ScoreCard
from core.logger import get_logger

log = get_logger(__name__)

HISTOGRAMS = {
    "step0_circuit_hist": "Circuit complexity of the first step",
    "original_hist": "Original complexity of the first step",
    "program_hist": "Program complexity",
    "steps_hist": "Rewrite steps per record",
}


def _dump_json(obj: dict, path: Path) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def histogram_frame(hist: dict[int, int], name: str) -> pd.DataFrame:
    return pd.DataFrame(sorted(hist.items()), columns=[name, "records"])


def trajectories_frame(trajectories: dict[str, list[float]]) -> pd.DataFrame:
    rows = [
        {"band": band, "step": i, "mean_circuit": v}
        for band, values in trajectories.items()
        for i, v in enumerate(values)
    ]
    return pd.DataFrame(rows, columns=["band", "step", "mean_circuit"])


# -------------------------------------------------------------------
# Figures
# -------------------------------------------------------------------
def plot_histogram(hist: dict[int, int], title: str, outpath: Path) -> Path:
    df = histogram_frame(hist, "value")
    plt.figure(figsize=(7, 4.5))
    plt.title(title, fontsize=13, weight="bold")
    plt.bar(df["value"], df["records"], color="#64B5F6", width=0.8)
    plt.xlabel(title)
    plt.ylabel("Records")
    plt.grid(axis="y", linestyle="--", alpha=0.6)
    plt.tight_layout()
    plt.savefig(outpath, dpi=200, bbox_inches="tight")
    plt.close()
    return outpath


def plot_trajectories(trajectories: dict[str, list[float]], outpath: Path) -> Path:
    plt.figure(figsize=(7, 4.5))
    plt.title("Mean circuit complexity per step", fontsize=13, weight="bold")
    for band, values in trajectories.items():
        plt.plot(range(len(values)), values, marker="o", linewidth=2, label=f"start {band}")
    plt.xlabel("Step")
    plt.ylabel("Mean circuit complexity")
    plt.grid(axis="y", linestyle="--", alpha=0.6)
    plt.legend(frameon=False)
    plt.tight_layout()
    plt.savefig(outpath, dpi=200, bbox_inches="tight")
    plt.close()
    return outpath


def plot_bucket_table(bucket_table: list[dict], outpath: Path) -> Path:
    df = pd.DataFrame(bucket_table)
    plt.figure(figsize=(7, 4.5))
    plt.title("Original complexity by chain length", fontsize=13, weight="bold")
    ax1 = plt.gca()
    if not df.empty:
        x = df["bucket"].astype(str)
        ax1.plot(x, df["start_mean"], color="#1565C0", marker="o", linewidth=2.5, label="Start")
        ax1.plot(x, df["end_mean"], color="#E53935", marker="s", linewidth=2.5, label="End")
        ax2 = ax1.twinx()
        ax2.bar(x, df["count"], color="#B0BEC5", alpha=0.4, width=0.5, label="Records")
        ax2.set_ylabel("Records")
    ax1.set_xlabel("Chain length bucket")
    ax1.set_ylabel("Mean original complexity")
    ax1.grid(axis="y", linestyle="--", alpha=0.6)
    ax1.legend(loc="upper left", frameon=False)
    plt.tight_layout()
    plt.savefig(outpath, dpi=200, bbox_inches="tight")
    plt.close()
    return outpath


def plot_error_breakdown(breakdown: dict[str, int], outpath: Path) -> Path:
    palette = ["#43A047", "#1E88E5", "#FDD835", "#E53935", "#8E24AA", "#9E9E9E"]
    counts = [breakdown.get(c, 0) for c in ERROR_CLASSES]
    plt.figure(figsize=(7, 4.5))
    plt.title("Two-step completion outcomes", fontsize=13, weight="bold")
    plt.bar(ERROR_CLASSES, counts, color=palette)
    for i, n in enumerate(counts):
        plt.text(i, n, str(n), ha="center", va="bottom", fontsize=9)
    plt.ylabel("Items")
    plt.xticks(rotation=20)
    plt.tight_layout()
    plt.savefig(outpath, dpi=200, bbox_inches="tight")
    plt.close()
    return outpath


# -------------------------------------------------------------------
# Report writers
# -------------------------------------------------------------------
def write_stats(report: StatsReport, out_dir: str | Path, plots: bool = True) -> list[Path]:
    """stats.json, one CSV per column family and (optionally) the PNG figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [_dump_json(report.to_dict(), out / "stats.json")]

    for key in HISTOGRAMS:
        path = out / f"{key}.csv"
        histogram_frame(getattr(report, key), key.removesuffix("_hist")).to_csv(path, index=False, lineterminator="\n")
        written.append(path)
    path = out / "bucket_table.csv"
    pd.DataFrame(report.bucket_table, columns=["bucket", "count", "start_mean", "end_mean", "delta"]).to_csv(
        path, index=False, lineterminator="\n"
    )
    written.append(path)
    path = out / "trajectories.csv"
    trajectories_frame(report.trajectories).to_csv(path, index=False, lineterminator="\n")
    written.append(path)

    if plots:
        for key, title in HISTOGRAMS.items():
            written.append(plot_histogram(getattr(report, key), title, out / f"{key}.png"))
        written.append(plot_trajectories(report.trajectories, out / "trajectories.png"))
        written.append(plot_bucket_table(report.bucket_table, out / "bucket_table.png"))
    log.info("wrote %d stats file(s) to %s", len(written), out)
    return written


def write_scorecard(card: ScoreCard, out_dir: str | Path, plots: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [_dump_json(card.to_dict(), out / "score.json")]
    path = out / "stratified.csv"
    pd.DataFrame(card.stratified, columns=["task", "bucket", "metric", "count", "accuracy"]).to_csv(
        path, index=False, lineterminator="\n"
    )
    written.append(path)
    if plots and card.error_breakdown:
        written.append(plot_error_breakdown(card.error_breakdown, out / "error_breakdown.png"))
    log.info("wrote %d score file(s) to %s", len(written), out)
    return written
