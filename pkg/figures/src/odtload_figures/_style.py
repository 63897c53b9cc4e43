"""Deterministic matplotlib output settings."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# fixed hash salt so SVG element ids do not vary between runs
matplotlib.rcParams["svg.hashsalt"] = "odtload"
matplotlib.rcParams["figure.dpi"] = 120
matplotlib.rcParams["savefig.dpi"] = 120


def save(fig, path: str) -> None:
    """Write PNG or SVG with timestamps stripped for byte-stable output."""
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    elif path.endswith(".png"):
        fig.savefig(path)
    else:
        raise ValueError(f"unsupported output format: {path!r} (use .png or .svg)")
    plt.close(fig)
