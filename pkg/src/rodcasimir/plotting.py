"""Optional figures for sweep and spectrum output.

matplotlib is imported lazily so the numerical core does not depend on it;
figures are drawn on an Agg canvas and written straight to a file.
"""
import numpy as np


class PlottingUnavailable(RuntimeError):
    pass


def _figure(nrows=1, height=3.6):
    try:
        from matplotlib.backends.backend_agg import FigureCanvasAgg
        from matplotlib.figure import Figure
    except ImportError:  # pragma: no cover - depends on the environment
        raise PlottingUnavailable(
            "figures need matplotlib; install the 'plot' extra (pip install 'artifact[plot]')") from None
    fig = Figure(figsize=(6.4, height * nrows))
    FigureCanvasAgg(fig)
    axes = [fig.add_subplot(nrows, 1, i + 1) for i in range(nrows)]
    return fig, axes


def _save(fig, path):
    # fixed metadata keeps repeated renders byte-stable for PNG and PDF
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None} if str(path).endswith(".png") else None)


def plot_epsilon(xi, columns, labels, path, crossings=()):
    """eps(i xi) curves on a log frequency axis.

    ``crossings`` is an iterable of ``(xi_star, text)`` marked with
    vertical lines.
    """
    fig, (ax,) = _figure()
    for col, label in zip(columns, labels):
        ax.plot(xi, col, label=label)
    for x, text in crossings:
        ax.axvline(x, color="0.5", lw=0.8, ls=":")
        ax.annotate(text, (x, ax.get_ylim()[1]), rotation=90, va="top", ha="right", fontsize=7)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\xi$ (rad/s)")
    ax.set_ylabel(r"$\varepsilon(i\xi)$")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_sweep(report, path):
    """Energy magnitudes (top) and the retarded/nonretarded ratio (bottom).

    Repulsive grid points of the retarded curve are drawn with filled
    markers; sign boundaries are vertical lines.
    """
    fig, (ax, bx) = _figure(nrows=2, height=3.0)
    R = report.R
    for name, label, style in (("ret", "retarded", "-"), ("nonret", "nonretarded", "--"),
                               ("n0", "n = 0 term", ":")):
        vals = report.values(name)
        mag = np.where(vals != 0, np.abs(vals), np.nan)
        ax.plot(R, mag, style, label=label)
    ret = report.values("ret")
    rep = ret > 0
    if rep.any():
        ax.plot(R[rep], ret[rep], "o", ms=3, color="C3", label="repulsive")
    for b in report.boundaries:
        ax.axvline(b, color="0.5", lw=0.8, ls=":")
        bx.axvline(b, color="0.5", lw=0.8, ls=":")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_ylabel(r"$|F|$ (J/m)")
    ax.legend(frameon=False, fontsize=8)

    ratio = np.array([r for _, r in report.ratio])
    bx.plot(R, ratio)
    bx.set_xscale("log")
    bx.set_xlabel("R (m)")
    bx.set_ylabel(r"$|F_{ret}/F_{nonret}|$")
    _save(fig, path)
