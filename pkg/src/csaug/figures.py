"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

BAR_COLOR = "#4878a8"


def generation_figures(records: list[dict], report: dict, out_dir) -> list[Path]:
    """Unit-length usage bars and an utterance-duration histogram as PNGs."""
    out_dir = Path(out_dir)
    paths: list[Path] = []
    usage = {int(k): v for k, v in report.get("unit_usage", {}).items()}
    if usage:
        lengths = sorted(usage)
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.bar(lengths, [usage[k] for k in lengths], width=0.6, color=BAR_COLOR)
        ax.set_xticks(lengths)
        ax.set_xlabel("unit length (tokens)")
        ax.set_ylabel("cuts used")
        ax.set_title("Spliced unit lengths")
        paths.append(_save(fig, out_dir / "unit_usage.png"))
    durations = [r["duration_seconds"] for r in records]
    if durations:
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.hist(durations, bins=min(20, max(5, len(durations) // 2)), color=BAR_COLOR)
        ax.set_xlabel("utterance duration (s)")
        ax.set_ylabel("count")
        ax.set_title("Generated utterance durations")
        paths.append(_save(fig, out_dir / "durations.png"))
    return paths


def score_figures(rates: list[float], out_dir, cmi_values: list[float] | None = None) -> list[Path]:
    """Per-utterance error-rate histogram, plus a CMI histogram when given."""
    out_dir = Path(out_dir)
    paths: list[Path] = []
    if rates:
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.hist(rates, bins=min(20, max(5, len(rates) // 2)), color=BAR_COLOR)
        ax.set_xlabel("error rate")
        ax.set_ylabel("utterances")
        ax.set_title("Per-utterance error rates")
        paths.append(_save(fig, out_dir / "error_rates.png"))
    if cmi_values:
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.hist(cmi_values, bins=min(20, max(5, len(cmi_values) // 2)), color=BAR_COLOR)
        ax.set_xlabel("CMI")
        ax.set_ylabel("utterances")
        ax.set_title("Hypothesis CMI distribution")
        paths.append(_save(fig, out_dir / "cmi_distribution.png"))
    return paths


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
