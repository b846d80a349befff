"""Matplotlib rendering of aggregated reports to image files."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_MARKERS = ("o", "s", "^", "d", "v", "x")


def render_report_figures(aggregated, outdir) -> list:
    """One MSE curve figure and one CBR curve figure per (dataset, model,
    defense) group, attack series overlaid against the target fraction.

    Returns the list of file paths written.
    """
    os.makedirs(str(outdir), exist_ok=True)
    written = []
    for metric, label in (("mean_mse", "MSE per feature"), ("mean_cbr", "CBR")):
        groups = {}
        for row in aggregated:
            if row.get(metric) is None:
                continue
            key = (row["dataset"], row["model"], row["defense"])
            groups.setdefault(key, {}).setdefault(row["attack"], []).append(
                (row["d_target_frac"], row[metric])
            )
        for (dataset, model, defense), series in sorted(groups.items()):
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for mi, (attack, points) in enumerate(sorted(series.items())):
                points.sort()
                ax.plot(
                    [p[0] for p in points],
                    [p[1] for p in points],
                    marker=_MARKERS[mi % len(_MARKERS)],
                    label=attack,
                )
            ax.set_xlabel("fraction of target-held features")
            ax.set_ylabel(label)
            title = f"{dataset} / {model}"
            if defense != "none":
                title += f" / {defense}"
            ax.set_title(title)
            ax.legend(fontsize=8)
            fig.tight_layout()
            stem = metric.replace("mean_", "")
            name = f"{stem}_{dataset}_{model}_{defense}.png".replace("/", "-")
            path = os.path.join(str(outdir), name)
            fig.savefig(path, dpi=150)
            plt.close(fig)
            written.append(path)
    return written
