"""Figure rendering for the report paths of the command line tool.

Every function draws onto an owned Figure object (no global pyplot state,
no GUI backend) and writes a PNG next to the delimited output.  Rendering
is deterministic: fixed figure geometry, fixed dpi, no timestamps.
"""

from matplotlib.figure import Figure

from .experiments import CurveTable, RollingResult, SummaryTable, SurfaceGrid
from .measures import ReturnSeries, RiskReport

__all__ = [
    "plot_report",
    "plot_path",
    "plot_rolling",
    "plot_curves",
    "plot_surface",
    "plot_summary",
]

_COLORS = {"var": "#4472c4", "es": "#ed7d31", "sd": "#70ad47", "sdr": "#c00000"}


def _new_figure():
    return Figure(figsize=(8.0, 4.5), dpi=120)


def fmt6(x: float) -> str:
    return format(float(x), ".6g")


def _save(fig: Figure, path) -> str:
    fig.savefig(str(path), format="png")
    return str(path)


def plot_report(series: ReturnSeries, report: RiskReport, path, signed: bool = False) -> str:
    """Histogram of the returns with the estimated tail levels marked."""
    fig = _new_figure()
    ax = fig.subplots()
    ax.hist(series.values, bins=80, color="#b0b8c4", edgecolor="white")
    sign = -1.0 if signed else 1.0
    for name, level in (("var", report.q_alpha), ("es", report.e_alpha),
                        ("sdr", -report.sdr)):
        ax.axvline(level, color=_COLORS[name], linewidth=1.4,
                   label=f"{name} = {fmt6(sign * -level)}")
    ax.set_xlabel("return")
    ax.set_ylabel("count")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_path(series: ReturnSeries, path, title: str = "simulated returns") -> str:
    fig = _new_figure()
    ax = fig.subplots()
    ax.plot(series.values, linewidth=0.6, color="#4472c4")
    ax.set_xlabel("t")
    ax.set_ylabel("return")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def plot_rolling(result: RollingResult, path, signed: bool = False) -> str:
    """The four rolling measures against the window end position."""
    fig = _new_figure()
    ax = fig.subplots()
    sign = -1.0 if signed else 1.0
    for name in ("var", "es", "sd", "sdr"):
        ax.plot(result.index, sign * getattr(result, name), linewidth=0.8,
                color=_COLORS[name], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("signed level" if signed else "loss magnitude")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_curves(table: CurveTable, path, signed: bool = False) -> str:
    """Measures as functions of the significance level."""
    fig = _new_figure()
    ax = fig.subplots()
    sign = -1.0 if signed else 1.0
    for name in ("var", "es", "sd", "sdr"):
        ax.plot(table.alphas, sign * getattr(table, name), marker="o",
                markersize=3, linewidth=1.0, color=_COLORS[name], label=name)
    ax.set_xlabel("alpha")
    ax.set_ylabel("level")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_surface(grid: SurfaceGrid, path) -> str:
    """Risk level over the (alpha, beta) grid."""
    import numpy as np

    fig = _new_figure()
    ax = fig.add_subplot(projection="3d")
    a, b = np.meshgrid(grid.alphas, grid.betas, indexing="ij")
    ax.plot_surface(a, b, grid.sdr, cmap="viridis", linewidth=0.2)
    ax.set_xlabel("alpha")
    ax.set_ylabel("beta")
    ax.set_zlabel("risk")
    return _save(fig, path)


def plot_summary(table: SummaryTable, path) -> str:
    """Grouped bars of the replicate means per measure and alpha."""
    import numpy as np

    fig = _new_figure()
    ax = fig.subplots()
    alphas = list(dict.fromkeys(r.alpha for r in table.rows))
    names = ("var", "es", "sd", "sdr")
    width = 0.8 / len(alphas)
    xs = np.arange(len(names))
    for i, a in enumerate(alphas):
        means = [table.row(a, n).mean for n in names]
        ax.bar(xs + i * width, means, width=width, label=f"alpha={fmt6(a)}")
    ax.set_xticks(xs + width * (len(alphas) - 1) / 2)
    ax.set_xticklabels(names)
    ax.set_ylabel("replicate mean")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
