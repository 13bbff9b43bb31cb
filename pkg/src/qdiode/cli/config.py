"""Run documents: a flat TOML key-value file describing one sweep.

Example::

    n_aux = 1
    omega_left = 5.0
    omega_right = 3.0
    omega_aux = 2.0
    g_lr = 1.0
    g_la = 0.5
    gamma = 0.001
    temp_left = 2.0
    temp_right = 1.0

    [sweep]
    parameter = "time"
    min = 0.0
    max = 8000.0
    count = 161

    [[sweep.series]]
    label = "pure 0.5"
    preparation = "pure:0.5"

Top-level keys mirror :class:`~qdiode.model.DiodeConfig`; ``[aux_bath]``
holds ``gamma_aux`` and ``temp_aux``.  Preparations use the same mini-language
as the ``--weights`` flag, see :func:`parse_preparation`.
"""

from __future__ import annotations

import math
import sys
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DiodeError, ParseError, ValidationError
from ..model import CONFIG_FIELDS, DiodeConfig, validate_config
from ..solver import (
    AllExcited,
    AllGround,
    AuxPreparation,
    ClassicalWeights,
    ProductPure,
    WeakBathLimit,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SWEEP_PARAMETERS = ("temp_left", "omega_right", "p_1", "n_aux", "time")
PLOT_COLUMNS = ("q_l_forward", "q_l_reverse", "q_r_forward", "rectification")
_SWEEP_KEYS = {"parameter", "min", "max", "count", "values", "preparation", "series", "plot", "initial"}
_SERIES_KEYS = {"label", "preparation"}


@dataclass(frozen=True)
class Series:
    """One curve of a sweep: a preparation plus config overrides.

    ``overrides`` replace base fields (``n_aux``, ``g_la``...); an override
    ``("aux_bath", None)`` detaches the auxiliary bath.
    """

    label: str
    preparation: AuxPreparation | None = None
    overrides: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class SweepSpec:
    params: Mapping
    parameter: str
    values: tuple[float, ...]
    series: tuple[Series, ...]
    plot: str = "rectification"
    name: str = "custom"
    notes: tuple[str, ...] = ()
    initial: str = "ee"
    base: DiodeConfig = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "base", validate_config(self.params))

    def point_params(self, series: Series, value: float | None = None) -> dict:
        params = dict(self.params)
        params.update(series.overrides)
        if value is not None and self.parameter in ("temp_left", "omega_right"):
            params[self.parameter] = value
        elif value is not None and self.parameter == "n_aux":
            params["n_aux"] = int(round(value))
        return params

    def point_config(self, series: Series, value: float | None = None) -> DiodeConfig:
        return validate_config(self.point_params(series, value))

    def point_preparation(self, series: Series, config: DiodeConfig, value: float | None = None):
        if self.parameter != "p_1" or config.n_aux == 0:
            return series.preparation
        if config.n_aux != 1:
            raise ValidationError(f"series {series.label!r}: p_1 sweeps need n_aux = 1, got {config.n_aux}")
        return ClassicalWeights.from_excited_fractions([value])


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_preparation(text: str) -> AuxPreparation | None:
    """Parse an auxiliary preparation.

    ``excited``, ``ground``, ``none``, ``weights:p1,p2,...`` (classical
    subspace weights), ``fractions:f1,...`` (independent atoms, excited with
    probability ``f_a``), ``pure:f1,...`` (coherent product state with
    ``|alpha_a|^2 = f_a``) or ``weak:T`` (weak-bath limit at temperature T).
    """
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "excited" and not arg:
            return AllExcited()
        if kind == "ground" and not arg:
            return AllGround()
        if kind == "none" and not arg:
            return None
        if kind == "weights":
            return ClassicalWeights(tuple(_floats(arg, "weights")))
        if kind == "fractions":
            return ClassicalWeights.from_excited_fractions(_floats(arg, "fractions"))
        if kind == "pure":
            return ProductPure.from_excited_fractions(_floats(arg, "pure"))
        if kind == "weak":
            (temp,) = _floats(arg, "weak")
            return WeakBathLimit(temp)
    except (DiodeError, ValueError) as exc:
        raise ValidationError(f"preparation {text!r}: {exc}") from None
    raise ValidationError(f"unknown preparation {text!r}")


def _load(document: str | bytes) -> dict:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        return tomllib.loads(document)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from None


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {type(value).__name__} {value!r}")
    return float(value)


def _config_params(doc: Mapping) -> dict:
    params = {}
    for key, value in doc.items():
        if key == "sweep":
            continue
        if key == "aux_bath":
            if not isinstance(value, Mapping):
                raise ParseError("aux_bath: expected a table with gamma_aux and temp_aux")
            missing = [k for k in ("gamma_aux", "temp_aux") if k not in value]
            extra = sorted(set(value) - {"gamma_aux", "temp_aux"})
            if missing or extra:
                raise ValidationError([f"aux_bath.{k} missing" for k in missing]
                                      + [f"aux_bath.{k} unknown" for k in extra])
            params[key] = {k: _number(v, f"aux_bath.{k}") for k, v in value.items()}
        elif key == "n_aux":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ParseError(f"n_aux: expected an integer, got {value!r}")
            params[key] = value
        elif key in ("omega_aux", "g_la") and isinstance(value, list):
            params[key] = [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]
        elif key in CONFIG_FIELDS:
            params[key] = _number(value, key)
        else:
            params[key] = value  # reported as unknown by validate_config
    return params


def load_config(document: str | bytes) -> DiodeConfig:
    """A single configuration from a run document (any ``[sweep]`` is ignored)."""
    return _validated(_config_params(_load(document)))


def _validated(params: Mapping) -> DiodeConfig:
    try:
        return validate_config(params)
    except ValidationError:
        raise
    except ConfigError as exc:
        raise ValidationError(str(exc)) from None


def _grid(sweep: Mapping) -> list[float]:
    if "values" in sweep:
        if any(k in sweep for k in ("min", "max", "count")):
            raise ValidationError("sweep: give either values or min/max/count, not both")
        values = [_number(v, f"sweep.values[{i}]") for i, v in enumerate(sweep["values"])]
    else:
        missing = [f"sweep.{k} missing" for k in ("min", "max", "count") if k not in sweep]
        if missing:
            raise ValidationError(missing)
        count = sweep["count"]
        if isinstance(count, bool) or not isinstance(count, int):
            raise ParseError(f"sweep.count: expected an integer, got {count!r}")
        if count < 2:
            raise ValidationError(f"sweep.count must be >= 2, got {count}")
        values = list(np.linspace(_number(sweep["min"], "sweep.min"), _number(sweep["max"], "sweep.max"), count))
    if len(values) < 2:
        raise ValidationError(f"sweep grid needs at least 2 points, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValidationError("sweep grid contains non-finite values")
    return values


def _series(sweep: Mapping) -> list[Series]:
    default = sweep.get("preparation", "none")
    entries = sweep.get("series") or [{}]
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping):
            raise ParseError(f"sweep.series[{i}]: expected a table")
        overrides = []
        for key, value in entry.items():
            if key in _SERIES_KEYS:
                continue
            if key == "aux_bath" and value is False:
                overrides.append(("aux_bath", None))
            elif key in CONFIG_FIELDS:
                overrides.append((key, value))
            else:
                raise ValidationError(f"sweep.series[{i}].{key} is not a config field")
        prep_text = entry.get("preparation", default)
        label = entry.get("label") or f"{prep_text}" + "".join(f", {k}={v}" for k, v in overrides)
        out.append(Series(str(label), parse_preparation(prep_text), tuple(overrides)))
    return out


def prevalidate(spec: SweepSpec) -> None:
    """Build every (series, grid point) config up front; report all failures together."""
    problems = []
    values = [None] if spec.parameter == "time" else spec.values
    if spec.parameter == "n_aux":
        bad = [v for v in spec.values if v != int(v) or v < 0]
        if bad:
            problems.append(f"n_aux grid values must be nonnegative integers, got {bad}")
            values = []
        for key in ("omega_aux", "g_la"):
            if np.ndim(spec.params.get(key, 0.0)) != 0:
                problems.append(f"{key} must be a scalar when sweeping n_aux")
    if spec.parameter == "p_1" and not all(0.0 <= v <= 1.0 for v in spec.values):
        problems.append("p_1 grid values must lie in [0, 1]")
    if spec.parameter == "time" and (spec.values[0] < 0 or np.any(np.diff(spec.values) <= 0)):
        problems.append("time grid must start at t >= 0 and increase strictly")
    for series in spec.series:
        for value in values:
            where = f"series {series.label!r}" + ("" if value is None else f", {spec.parameter}={value:.17g}")
            try:
                cfg = spec.point_config(series, value)
                spec.point_preparation(series, cfg, value)
            except ValidationError as exc:
                problems.extend(f"{where}: {p}" for p in exc.problems)
            except (DiodeError, ValueError, TypeError) as exc:
                problems.append(f"{where}: {exc}")
    if problems:
        raise ValidationError(problems)


def parse_run_config(document: str | bytes, name: str = "custom") -> SweepSpec:
    """Parse and fully validate a run document into a :class:`SweepSpec`."""
    doc = _load(document)
    sweep = doc.get("sweep")
    if not isinstance(sweep, Mapping):
        raise ValidationError("missing [sweep] section")
    unknown = sorted(set(sweep) - _SWEEP_KEYS)
    if unknown:
        raise ValidationError([f"sweep.{k} is not a sweep field" for k in unknown])
    params = _config_params(doc)
    _validated(params)
    parameter = sweep.get("parameter")
    if parameter not in SWEEP_PARAMETERS:
        raise ValidationError(f"sweep.parameter must be one of {', '.join(SWEEP_PARAMETERS)}, got {parameter!r}")
    plot = sweep.get("plot", "q_l_forward" if parameter == "time" else "rectification")
    if plot not in PLOT_COLUMNS:
        raise ValidationError(f"sweep.plot must be one of {', '.join(PLOT_COLUMNS)}, got {plot!r}")
    initial = sweep.get("initial", "ee")
    if not (isinstance(initial, str) and len(initial) == 2 and set(initial) <= {"e", "g"}):
        raise ValidationError(f"sweep.initial must be two of e/g, got {initial!r}")
    spec = SweepSpec(params=params, parameter=parameter, values=tuple(_grid(sweep)),
                     series=tuple(_series(sweep)), plot=plot, name=name, initial=initial)
    prevalidate(spec)
    return spec
