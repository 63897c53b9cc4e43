"""Filled potential contours from potential-map CSVs.

The input is the simulator's 'axis1,axis2,U_joule' grid dump; the plot
shows U/k_B in microkelvin with a colorbar, axes in millimetres.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from ._io import SchemaError, read_rows
from ._style import plt, save

K_B = 1.380649e-23  # J/K, exact (SI definition)

MAP_COLUMNS = ("axis1", "axis2", "U_joule")


def load_grid(input_csv: str):
    """Rebuild the rectangular (axis1, axis2, U) grid from the row dump."""
    rows = read_rows(input_csv, MAP_COLUMNS)
    a1 = np.array([float(r["axis1"]) for r in rows])
    a2 = np.array([float(r["axis2"]) for r in rows])
    U = np.array([float(r["U_joule"]) for r in rows])
    x1 = np.unique(a1)
    x2 = np.unique(a2)
    if len(rows) != len(x1) * len(x2):
        raise SchemaError(f"{input_csv}: grid is not rectangular "
                          f"({len(rows)} rows != {len(x1)}x{len(x2)})")
    grid = np.full((len(x1), len(x2)), np.nan)
    i = np.searchsorted(x1, a1)
    j = np.searchsorted(x2, a2)
    grid[i, j] = U
    if np.isnan(grid).any():
        raise SchemaError(f"{input_csv}: grid has missing cells")
    return x1, x2, grid


def render_potential_contours(input_csv: str, output: str, levels: int = 40,
                              title: str | None = None,
                              axis_labels: tuple[str, str] = ("x (mm)", "z (mm)"),
                              clip_uK: float | None = None) -> None:
    x1, x2, U = load_grid(input_csv)
    U_uK = U / K_B * 1e6
    if clip_uK is not None:
        # the Zeeman term diverges at the loop conductor; clipping keeps the
        # contour levels useful near the trap region
        U_uK = np.clip(U_uK, -clip_uK, clip_uK)
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    # contourf expects (len(x2), len(x1)) with axis2 as rows
    cs = ax.contourf(x1 * 1e3, x2 * 1e3, U_uK.T, levels=levels,
                     cmap="viridis")
    cbar = fig.colorbar(cs, ax=ax)
    cbar.set_label("potential U/k_B (uK)")
    ax.set_xlabel(axis_labels[0])
    ax.set_ylabel(axis_labels[1])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    save(fig, output)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        description="Plot filled potential contours from a potential-map CSV.")
    parser.add_argument("--input", required=True, help="potential-map CSV path")
    parser.add_argument("--output", required=True, help=".png or .svg path")
    parser.add_argument("--levels", type=int, default=40)
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default="x (mm)")
    parser.add_argument("--ylabel", default="z (mm)")
    parser.add_argument("--clip-uK", type=float, default=None,
                        help="clip |U|/k_B to this many uK before contouring")
    args = parser.parse_args(argv)
    try:
        render_potential_contours(args.input, args.output, levels=args.levels,
                                  title=args.title,
                                  axis_labels=(args.xlabel, args.ylabel),
                                  clip_uK=args.clip_uK)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
