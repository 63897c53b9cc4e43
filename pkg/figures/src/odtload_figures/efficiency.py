"""Loading-efficiency curves from sweep CSVs.

One series per distinct group value (v_b when plotting against T_r, T_r
when plotting against v_b), with Wilson confidence intervals as error
bars. Rows whose lambda column is empty (untrappable points) are
skipped.
"""

from __future__ import annotations

import argparse
import sys

from ._io import SchemaError, parse_float, read_rows
from ._style import plt, save

SWEEP_COLUMNS = ("v_b_mps", "T_r_K", "lambda", "ci_low", "ci_high")

_AXES = {
    "T_r": ("T_r_K", "v_b_mps", 1e3, "radial temperature T_r (mK)",
            "v_b = {:g} m/s"),
    "v_b": ("v_b_mps", "T_r_K", 1.0, "beam velocity v_b (m/s)",
            "T_r = {:g} mK"),
}


def render_efficiency_curves(input_csv: str, output: str, x: str = "T_r",
                             log_y: bool = False) -> None:
    if x not in _AXES:
        raise ValueError(f"x must be one of {sorted(_AXES)}, got {x!r}")
    x_col, group_col, x_scale, x_label, series_fmt = _AXES[x]
    rows = read_rows(input_csv, SWEEP_COLUMNS)

    points = []
    for row in rows:
        lam = parse_float(row, "lambda")
        if lam is None:
            continue
        points.append((float(row[group_col]), float(row[x_col]) * x_scale,
                       lam, parse_float(row, "ci_low"),
                       parse_float(row, "ci_high")))
    if len(points) < 2:
        raise SchemaError(f"{input_csv}: need at least 2 plottable rows, "
                          f"got {len(points)}")

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for group in sorted({p[0] for p in points}):
        series = sorted(p for p in points if p[0] == group)
        xs = [p[1] for p in series]
        ys = [100.0 * p[2] for p in series]
        lo = [100.0 * (p[2] - p[3]) for p in series]
        hi = [100.0 * (p[4] - p[2]) for p in series]
        label = series_fmt.format(group * (1e3 if group_col == "T_r_K" else 1.0))
        if any(l > 0 or h > 0 for l, h in zip(lo, hi)):
            ax.errorbar(xs, ys, yerr=[lo, hi], marker="o", capsize=3,
                        label=label)
        else:
            ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(x_label)
    ax.set_ylabel("loading efficiency (%)")
    if log_y:
        ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    save(fig, output)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        description="Plot loading-efficiency curves from a sweep CSV.")
    parser.add_argument("--input", required=True, help="sweep CSV path")
    parser.add_argument("--output", required=True, help=".png or .svg path")
    parser.add_argument("--x", choices=sorted(_AXES), default="T_r",
                        help="abscissa variable")
    parser.add_argument("--log-y", action="store_true",
                        help="logarithmic efficiency axis")
    args = parser.parse_args(argv)
    try:
        render_efficiency_curves(args.input, args.output, x=args.x,
                                 log_y=args.log_y)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
