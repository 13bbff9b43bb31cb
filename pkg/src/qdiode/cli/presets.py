"""Built-in sweep presets addressed by figure id."""

from __future__ import annotations

import numpy as np

from ..errors import UnknownFigure
from ..model import states_of_subspace
from ..solver import AllExcited, AllGround, ClassicalWeights, ProductPure, WeakBathLimit
from .config import Series, SweepSpec, prevalidate

FIGURE_IDS = ("2a", "2b", "2c", "2d", "2e", "2f", "3", "4", "5", "5a", "5b", "6", "7", "8", "p1")

# T_L grid shared by the temperature scans; index 40 is exactly T_R = 0.5
_T_GRID = tuple(np.round(np.linspace(0.1, 1.0, 91), 12))
# Rectification-vs-T_L grid used for the closed-form comparison
FIG5_T_GRID = tuple(np.linspace(0.525, 1.0, 20))

_DIODE = dict(omega_aux=2.0, g_lr=0.1, g_la=0.05, gamma=0.001, temp_left=1.0, temp_right=0.5)
_PAIRS = {"2a": (4.0, 4.0), "2b": (4.0, 4.0), "2c": (4.0, 2.0), "2d": (4.0, 2.0),
          "2e": (2.0, 4.0), "2f": (2.0, 4.0)}


def _aux_series(prep, label: str, n_max: int = 10) -> list[Series]:
    return [Series(f"N={n} {label}", prep, (("n_aux", n),)) for n in range(1, n_max + 1)]


def _no_aux() -> Series:
    return Series("N=0", None, (("n_aux", 0),))


def _fig2(fid: str) -> SweepSpec:
    w_l, w_r = _PAIRS[fid]
    prep, label = (AllExcited(), "excited") if fid in ("2a", "2c", "2e") else (AllGround(), "ground")
    return SweepSpec(
        params=dict(_DIODE, n_aux=1, omega_left=w_l, omega_right=w_r),
        parameter="temp_left", values=_T_GRID,
        series=(_no_aux(), *_aux_series(prep, label)),
        plot="q_l_forward", name=fid,
    )


def _fig3() -> SweepSpec:
    fractions = (0.2, 0.5, 0.8)
    series = [Series(f"pure |alpha|^2={p}", ProductPure.from_excited_fractions([p])) for p in fractions]
    series += [Series(f"mixed p_1={p}", ClassicalWeights.from_excited_fractions([p])) for p in fractions]
    return SweepSpec(
        params=dict(n_aux=1, omega_left=5.0, omega_right=3.0, omega_aux=2.0, g_lr=1.0, g_la=0.5,
                    gamma=0.001, temp_left=2.0, temp_right=1.0),
        parameter="time", values=tuple(np.linspace(0.0, 8000.0, 161)),
        series=tuple(series), plot="q_l_forward", name="3",
        notes=("the |alpha|^2 and p_1 values 0.2, 0.5, 0.8 are assumed",),
    )


def _fig4() -> SweepSpec:
    return SweepSpec(
        params=dict(_DIODE, n_aux=1, omega_left=4.0, omega_right=4.0, g_lr=0.2),
        parameter="temp_left", values=_T_GRID,
        series=(_no_aux(), *_aux_series(AllExcited(), "excited"), *_aux_series(AllGround(), "ground")),
        name="4",
    )


def _fig5(fid: str) -> SweepSpec:
    w_l, w_r = (2.0, 4.0) if fid == "5b" else (4.0, 2.0)
    return SweepSpec(
        params=dict(_DIODE, n_aux=1, omega_left=w_l, omega_right=w_r),
        parameter="temp_left", values=FIG5_T_GRID,
        series=(_no_aux(), *_aux_series(AllExcited(), "excited"), *_aux_series(AllGround(), "ground")),
        name=fid,
        notes=(f"omega_left={w_l:g}, omega_right={w_r:g} is an assumed frequency pair",),
    )


def _fig6() -> SweepSpec:
    return SweepSpec(
        params=dict(n_aux=1, omega_left=4.0, omega_aux=2.0, g_lr=0.2, g_la=0.02, gamma=0.001,
                    temp_left=0.3, temp_right=0.5, omega_right=4.0),
        parameter="omega_right", values=tuple(np.linspace(3.0, 5.0, 201)),
        series=(_no_aux(), *_aux_series(AllExcited(), "excited"), *_aux_series(AllGround(), "ground")),
        name="6",
    )


def _fig7() -> SweepSpec:
    n = 3
    series = [Series(states_of_subspace(n, m), ClassicalWeights.definite(n, m)) for m in range(1, 2**n + 1)]
    return SweepSpec(
        params=dict(n_aux=n, omega_left=4.0, omega_right=2.0, omega_aux=2.0, g_lr=0.1, g_la=0.1,
                    gamma=0.001, temp_left=1.0, temp_right=0.5),
        parameter="temp_left", values=_T_GRID, series=(_no_aux(), *series), name="7",
    )


def _fig8() -> SweepSpec:
    gamma = 0.001
    return SweepSpec(
        params=dict(n_aux=1, omega_left=4.0, omega_right=1.0, omega_aux=5.0, g_lr=0.1, g_la=0.1,
                    gamma=gamma, temp_left=1.0, temp_right=0.5,
                    aux_bath=dict(gamma_aux=gamma**2, temp_aux=0.8)),
        parameter="temp_left", values=_T_GRID,
        series=(Series("aux bath"),
                Series("no aux bath", WeakBathLimit(0.8), (("aux_bath", None),))),
        name="8",
        notes=("the no-bath series weights the auxiliary configurations by the weak-bath limit at T_1",),
    )


def _fig_p1() -> SweepSpec:
    return SweepSpec(
        params=dict(n_aux=1, omega_left=4.0, omega_right=2.0, omega_aux=2.0, g_lr=0.1, g_la=0.1,
                    gamma=0.001, temp_left=0.3, temp_right=0.5),
        parameter="p_1", values=tuple(np.linspace(0.0, 1.0, 101)),
        series=(Series("N=1"), _no_aux()), name="p1",
        notes=("omega_left=4, omega_right=2 are assumed values",),
    )


def figure_preset(figure_id: str) -> SweepSpec:
    """The preset sweep for ``figure_id`` (``2a``..``2f``, ``3``..``8``, ``p1``)."""
    fid = str(figure_id).strip().lower()
    if fid in _PAIRS:
        spec = _fig2(fid)
    elif fid in ("5", "5a", "5b"):
        spec = _fig5("5a" if fid == "5" else fid)
    elif fid in ("3", "4", "6", "7", "8", "p1"):
        spec = {"3": _fig3, "4": _fig4, "6": _fig6, "7": _fig7, "8": _fig8, "p1": _fig_p1}[fid]()
    else:
        raise UnknownFigure(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURE_IDS)}")
    prevalidate(spec)
    return spec
