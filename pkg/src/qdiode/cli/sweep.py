"""Sweep execution: one independent solve per (series, grid point)."""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import __version__
from ..errors import BothCurrentsZero
from ..model import DiodeConfig, z_table
from ..observables import heat_current_dynamic, rectification_factor
from ..solver import evolve, product_state, steady_state
from .config import Series, SweepSpec
from .emit import ResultTable

log = logging.getLogger(__name__)

COLUMNS = ("sweep_value", "series_id", "q_l_forward", "q_l_reverse", "q_r_forward",
           "rectification", "omega_l_effective")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return repr(obj)


def spec_document(spec: SweepSpec) -> str:
    """Canonical JSON echo of a sweep; hashed into the provenance header."""
    doc = {
        "config": dict(spec.params),
        "sweep": {"parameter": spec.parameter, "values": list(spec.values), "initial": spec.initial},
        "series": [{"label": s.label, "preparation": s.preparation, "overrides": dict(s.overrides)}
                   for s in spec.series],
    }
    return json.dumps(_jsonable(doc), sort_keys=True, separators=(",", ":"))


def provenance(spec: SweepSpec) -> tuple[tuple[str, str], ...]:
    echo = spec_document(spec)
    header = [
        ("tool", f"qdiode {__version__}"),
        ("preset", spec.name),
        ("config_sha256", hashlib.sha256(echo.encode()).hexdigest()),
        ("config", json.dumps(_jsonable(dict(spec.params)), sort_keys=True)),
        ("sweep", spec.parameter),
        ("plot", spec.plot),
    ]
    header += [("note", n) for n in spec.notes]
    header += [(f"series.{i}", s.label) for i, s in enumerate(spec.series)]
    return tuple(header)


def _rectification(forward: float, reverse: float, gamma: float) -> float:
    try:
        return rectification_factor(forward, reverse, gamma)
    except BothCurrentsZero:
        # a table cell must be finite; the zero currents beside it mark the case
        log.info("both currents vanish (%.3g, %.3g); rectification written as 0", forward, reverse)
        return 0.0


def _omega_eff(config: DiodeConfig, weights: np.ndarray) -> float:
    if config.n_aux == 0:
        return config.omega_left
    za = z_table(config.n_aux)[: config.n_subspaces, 2:]
    return float(config.omega_left + 2 * weights @ (za @ np.asarray(config.g_la)))


def _steady_row(spec: SweepSpec, sid: int, series: Series, value: float) -> list[list[float]]:
    cfg = spec.point_config(series, value)
    prep = spec.point_preparation(series, cfg, value)
    fwd = steady_state(cfg, prep)
    rev = steady_state(cfg.swapped(), prep)
    return [[value, sid, fwd.q_left, rev.q_left, fwd.q_right,
             _rectification(fwd.q_left, rev.q_left, cfg.gamma), _omega_eff(cfg, fwd.weights)]]


def _time_rows(spec: SweepSpec, sid: int, series: Series) -> list[list[float]]:
    cfg = spec.point_config(series)
    times = np.asarray(spec.values)
    left, right = spec.initial
    rho0 = product_state(cfg, left, right, series.preparation)
    traj = evolve(cfg, rho0, times)
    q_lf, q_rf = heat_current_dynamic(cfg, traj.states)
    swapped = cfg.swapped()
    q_lr, _ = heat_current_dynamic(swapped, evolve(swapped, rho0, times).states)
    # aux weights drift only when an aux bath is attached
    weights = traj.populations().reshape(len(times), 4, cfg.n_subspaces).sum(axis=1)
    return [[t, sid, a, b, c, _rectification(a, b, cfg.gamma), _omega_eff(cfg, w)]
            for t, a, b, c, w in zip(times, q_lf, q_lr, q_rf, weights)]


def run_sweep(spec: SweepSpec, threads: int = 1) -> ResultTable:
    """Evaluate every (series, grid point); rows ordered by series, then grid index.

    A failing point re-raises its error with the grid coordinate prepended
    to the message (also stored as ``sweep_point``).

    Points are independent, so ``threads > 1`` evaluates them concurrently;
    the output is identical to a serial run.
    """
    if spec.parameter == "time":
        tasks = [(sid, s, None) for sid, s in enumerate(spec.series)]
    else:
        tasks = [(sid, s, v) for sid, s in enumerate(spec.series) for v in spec.values]

    def run(task):
        sid, series, value = task
        try:
            if value is None:
                return _time_rows(spec, sid, series)
            return _steady_row(spec, sid, series, value)
        except Exception as exc:
            where = f"series {series.label!r}" + ("" if value is None else f", {spec.parameter}={value:.17g}")
            exc.sweep_point = where
            exc.args = (f"{where}: {exc.args[0] if exc.args else ''}", *exc.args[1:])
            raise

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run, tasks))
    else:
        chunks = [run(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return ResultTable(COLUMNS, np.array(rows, dtype=float), provenance(spec))
