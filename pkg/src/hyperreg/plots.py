"""SVG figure rendering for report paths.

Only one figure family exists: histograms of per-triad density distributions,
written alongside the delimited output of an audit.  Rendering is headless
(Agg) and deterministic: a fixed hash salt and no embedded creation date, so
identical inputs produce identical SVG bytes.
"""

from __future__ import annotations

from collections.abc import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

matplotlib.rcParams["svg.hashsalt"] = "hyperreg"

__all__ = ["density_histogram"]


def density_histogram(densities: Sequence[float], path, *, bins: int = 20,
                      title: str = "Per-triad relative density") -> None:
    """Render a histogram of triad densities to an SVG file."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        ax.hist([float(d) for d in densities], bins=bins, range=(0.0, 1.0),
                color="#4878cf", edgecolor="black", linewidth=0.5)
        ax.set_xlabel("relative density")
        ax.set_ylabel("triads")
        ax.set_title(title)
        ax.set_xlim(0.0, 1.0)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
