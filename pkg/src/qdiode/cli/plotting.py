"""Static SVG line charts of sweep tables (no pyplot, no global state)."""

from __future__ import annotations

import io

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from ..errors import EmptyTable

_LABELS = {
    "temp_left": r"$T_L$",
    "omega_right": r"$\omega_R$",
    "p_1": r"$p_1$",
    "n_aux": r"$N$",
    "time": r"$t$",
    "q_l_forward": r"$\dot Q_L$ (forward)",
    "q_l_reverse": r"$\dot Q_L$ (reverse)",
    "q_r_forward": r"$\dot Q_R$ (forward)",
    "rectification": r"$\mathcal{R}$",
}
_STYLE = {
    "svg.hashsalt": "qdiode",
    "svg.fonttype": "path",
    "axes.prop_cycle": matplotlib.cycler(color=[matplotlib.cm.viridis(x) for x in np.linspace(0, 0.9, 8)]),
}


def _series(table):
    sid = table.column("series_id")
    for s in np.unique(sid):
        yield int(s), sid == s


def render_svg(table) -> bytes:
    """One polyline per series; the ``plot`` header entry picks the y column.

    For frequency scans each series also gets a marker at its effective left
    frequency on the zero line, where rectification is expected to vanish.
    """
    if len(table) == 0:
        raise EmptyTable("nothing to plot")
    y_name = table.meta("plot", "rectification")
    x_name = table.meta("sweep", "sweep_value")
    x, y = table.column("sweep_value"), table.column(y_name)
    w_eff = table.column("omega_l_effective")

    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(6.4, 4.4))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot()
        for sid, mask in _series(table):
            label = table.meta(f"series.{sid}", str(sid))
            (line,) = ax.plot(x[mask], y[mask], lw=1.2, label=label, gid=f"series-{sid}")
            if x_name == "omega_right":
                ax.plot([w_eff[mask][0]], [0.0], ls="none", marker="x", ms=7, color=line.get_color(),
                        gid=f"zero-crossing-{sid}")
        ax.set_xlabel(_LABELS.get(x_name, x_name))
        ax.set_ylabel(_LABELS.get(y_name, y_name))
        ax.set_title(f"preset {table.meta('preset', '?')}", fontsize=9)
        if len(np.unique(table.column("series_id"))) <= 12:
            ax.legend(fontsize=6, frameon=False)
        fig.tight_layout()
        buf = io.BytesIO()
        description = "; ".join(f"{k}: {v}" for k, v in table.header)
        fig.savefig(buf, format="svg", metadata={"Date": None, "Description": description})
    return buf.getvalue()
