import argparse

import matplotlib.pyplot as plt

from core.data_generator import ForgeJob, generate_records
from core.dataset import compute_stats


def generate_trajectory_plots(count: int, seeds: list[int], out: str) -> None:
    print("Generating complexity trajectory plots...")
    plt.style.use("ggplot")

    # one report per seed, overlaid per start band
    reports = {}
    for seed in seeds:
        print(f"\nForging {count} records with seed {seed}")
        reports[seed] = compute_stats(generate_records(ForgeJob(seed, 0), count))

    bands = sorted({band for r in reports.values() for band in r.trajectories})
    fig, axes = plt.subplots(1, len(bands), figsize=(4 * len(bands), 4.5), sharey=True, squeeze=False)
    for ax, band in zip(axes[0], bands):
        for seed, report in reports.items():
            values = report.trajectories.get(band)
            if values:
                ax.plot(range(len(values)), values, marker="o", linewidth=1.5, alpha=0.8, label=f"seed {seed}")
        ax.set_title(f"Start band {band}", fontsize=12)
        ax.set_xlabel("Step")
        ax.grid(True, linestyle="--", alpha=0.7)
    axes[0][0].set_ylabel("Mean circuit complexity")
    axes[0][-1].legend()
    fig.tight_layout()
    fig.savefig(out, dpi=300)
    print(f"\nSaved trajectory plot to {out}")


if __name__ == "__main__":
    p = argparse.ArgumentParser()
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seeds", type=int, nargs="+", default=[7, 11, 13])
    p.add_argument("--out", default="figure_complexity_trajectories.png")
    args = p.parse_args()
    generate_trajectory_plots(args.count, args.seeds, args.out)
