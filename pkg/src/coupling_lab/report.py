"""CSV tables and log-log SVG figures of sweep results."""

import csv
import io

import matplotlib
from matplotlib.figure import Figure

from .antenna import SpacingMode
from .scenarios import OUT_OF_RANGE

CSV_HEADER = ("n", "d_m", "aperture_m", "region", "lhs_ohm", "rhs_exact_ohm",
              "rhs_bound_ohm", "poisson_limit_ohm", "margin_bound", "margin_exact",
              "verdict")

SERIES_STYLE = {
    "lhs": dict(color="tab:red", marker="o", markersize=3),
    "rhs_bound": dict(color="tab:blue", linestyle="--"),
    "rhs_exact": dict(color="tab:green", marker="s", markersize=2.5, linestyle="none"),
    "poisson_limit": dict(color="tab:gray", linestyle=":"),
}

_RC = {
    "svg.hashsalt": "coupling-lab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def _region_cell(row):
    cell = row.region.region.value
    if row.annotation:
        cell += f";annotation={OUT_OF_RANGE}"
    return cell


def format_csv(rows):
    if not rows:
        raise ValueError("no rows to emit")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.n, _fmt(r.d_m), _fmt(r.aperture_m), _region_cell(r), _fmt(r.lhs),
                         _fmt(r.rhs_exact), _fmt(r.rhs_bound), _fmt(r.poisson_limit),
                         _fmt(r.margin_bound), _fmt(r.margin_exact),
                         "pass" if r.verdict else "fail"])
    return buf.getvalue()


def emit_csv(rows, destination=None):
    """Write the sweep table as UTF-8 CSV and return the bytes.

    ``destination`` may be a path, a binary file object, or ``None``.
    """
    data = format_csv(rows).encode("utf-8")
    if destination is None:
        return data
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return data


def sweep_figure(rows, config):
    """Log-log figure of both condition sides against N."""
    if not rows:
        raise ValueError("no rows to plot")
    ns = [r.n for r in rows]
    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot()
    ax.set_xscale("log")
    ax.set_yscale("log")

    ax.plot(ns, [r.lhs for r in rows], label="lhs", **SERIES_STYLE["lhs"])
    ax.plot(ns, [r.rhs_bound for r in rows], label="rhs_bound", **SERIES_STYLE["rhs_bound"])
    exact = [(r.n, r.rhs_exact) for r in rows if r.rhs_exact is not None]
    if exact:
        ax.plot(*zip(*exact), label="rhs_exact", **SERIES_STYLE["rhs_exact"])
    limits = [r.poisson_limit for r in rows if r.poisson_limit is not None]
    if config.spacing_mode is SpacingMode.FIXED_SPACING and limits:
        ax.axhline(limits[0], label="poisson_limit", **SERIES_STYLE["poisson_limit"])

    bad = [r.n for r in rows if r.annotation]
    if bad:
        ax.axvspan(min(bad), max(ns), color="0.85", zorder=0)

    ax.set_xlabel("number of antennas N")
    ax.set_ylabel("ohm")
    if config.spacing_mode is SpacingMode.FIXED_SPACING:
        ax.set_title(f"{config.name}: fixed spacing d = {config.spacing:g} m, r = {config.distance:g} m")
    else:
        ax.set_title(f"{config.name}: fixed aperture D = {config.aperture:g} m, r = {config.distance:.4g} m")
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def series_labels(fig):
    return fig.axes[0].get_legend_handles_labels()[1]


def emit_plot(rows, config, destination):
    """Render the sweep as an SVG file; returns the legend labels drawn."""
    with matplotlib.rc_context(_RC):
        fig = sweep_figure(rows, config)
        fig.savefig(destination, format="svg", metadata={"Date": None})
    return series_labels(fig)
