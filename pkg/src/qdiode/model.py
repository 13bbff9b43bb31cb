"""Configuration, computational basis, spectrum and secular transitions.

Basis convention: a basis index ``i`` (1-based) encodes ``N + 2`` bits of
``i - 1``, most significant first: left atom, right atom, auxiliary atoms
``1..N``.  Bit value 0 means excited (Pauli-z eigenvalue +1), 1 means ground.
Index 1 is therefore the all-excited state and ``2**(N + 2)`` the all-ground
state.  Subspace ``m`` (1-based, ``1..2**N``) is the auxiliary configuration
whose bits are those of ``m - 1``; its four levels sit at ``m``, ``m + 2**N``,
``m + 2**(N + 1)`` and ``m + 2**(N + 1) + 2**N``.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    AuxBathUnsupported,
    IndexOutOfRange,
    LengthMismatch,
    NonPositiveBohrFrequency,
    NonPositiveRate,
    NonPositiveTemperature,
    ValidationError,
)

log = logging.getLogger(__name__)

FREQ_RTOL = 1e-12


class Reservoir(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    AUX = "aux"


@dataclass(frozen=True)
class AuxBath:
    """Thermal bath attached to the single auxiliary atom."""

    gamma_aux: float
    temp_aux: float


@dataclass(frozen=True)
class DiodeConfig:
    """Physical parameters of the diode, in units with hbar = k_B = 1.

    Construction validates every invariant, so any instance that exists is a
    valid configuration.
    """

    n_aux: int
    omega_left: float
    omega_right: float
    omega_aux: tuple[float, ...]
    g_lr: float
    g_la: tuple[float, ...]
    gamma: float
    temp_left: float
    temp_right: float
    aux_bath: AuxBath | None = field(default=None)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "omega_aux", tuple(float(w) for w in np.atleast_1d(self.omega_aux)))
        set_(self, "g_la", tuple(float(g) for g in np.atleast_1d(self.g_la)))
        for name in ("omega_left", "omega_right", "g_lr", "gamma", "temp_left", "temp_right"):
            set_(self, name, float(getattr(self, name)))
        if isinstance(self.aux_bath, Mapping):
            set_(self, "aux_bath", AuxBath(**self.aux_bath))
        elif isinstance(self.aux_bath, (tuple, list)):
            set_(self, "aux_bath", AuxBath(*self.aux_bath))
        _check(self)

    @property
    def dim(self) -> int:
        return 2 ** (self.n_aux + 2)

    @property
    def n_subspaces(self) -> int:
        return 2**self.n_aux

    def replace(self, **changes) -> DiodeConfig:
        return dataclasses.replace(self, **changes)

    def swapped(self) -> DiodeConfig:
        """The same device with the two bath temperatures exchanged."""
        return self.replace(temp_left=self.temp_right, temp_right=self.temp_left)

    def without_aux(self) -> DiodeConfig:
        return self.replace(n_aux=0, omega_aux=(), g_la=(), aux_bath=None)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["omega_aux"] = list(self.omega_aux)
        d["g_la"] = list(self.g_la)
        return d


def _check(cfg: DiodeConfig) -> None:
    if not isinstance(cfg.n_aux, (int, np.integer)) or isinstance(cfg.n_aux, bool) or cfg.n_aux < 0:
        raise LengthMismatch(f"n_aux must be a nonnegative integer, got {cfg.n_aux!r}")
    if len(cfg.omega_aux) != cfg.n_aux:
        raise LengthMismatch(f"omega_aux has {len(cfg.omega_aux)} entries, n_aux = {cfg.n_aux}")
    if len(cfg.g_la) != cfg.n_aux:
        raise LengthMismatch(f"g_la has {len(cfg.g_la)} entries, n_aux = {cfg.n_aux}")
    for name in ("temp_left", "temp_right"):
        t = getattr(cfg, name)
        if not t > 0 or not math.isfinite(t):
            raise NonPositiveTemperature(f"{name} must be > 0, got {t}")
    if not cfg.gamma > 0 or not math.isfinite(cfg.gamma):
        raise NonPositiveRate(f"gamma must be > 0, got {cfg.gamma}")
    for name in ("omega_left", "omega_right"):
        if not getattr(cfg, name) > 0:
            raise NonPositiveBohrFrequency(f"{name} must be > 0, got {getattr(cfg, name)}")
    for a, w in enumerate(cfg.omega_aux, 1):
        if not w > 0:
            raise NonPositiveBohrFrequency(f"omega_aux[{a}] must be > 0, got {w}")

    left_min = cfg.omega_left - 2 * abs(cfg.g_lr) - 2 * sum(abs(g) for g in cfg.g_la)
    if not left_min > 0:
        raise NonPositiveBohrFrequency(
            f"lowest left Bohr frequency omega_left - 2|g_lr| - sum 2|g_la| = {left_min:.6g} is not positive"
        )
    right_min = cfg.omega_right - 2 * abs(cfg.g_lr)
    if not right_min > 0:
        raise NonPositiveBohrFrequency(
            f"right Bohr frequency omega_right - 2|g_lr| = {right_min:.6g} is not positive"
        )

    bath = cfg.aux_bath
    if bath is None:
        return
    if cfg.n_aux != 1:
        raise AuxBathUnsupported(f"aux_bath requires n_aux = 1, got {cfg.n_aux}")
    if not bath.gamma_aux > 0:
        raise NonPositiveRate(f"aux_bath.gamma_aux must be > 0, got {bath.gamma_aux}")
    if not bath.temp_aux > 0:
        raise NonPositiveTemperature(f"aux_bath.temp_aux must be > 0, got {bath.temp_aux}")
    aux_min = cfg.omega_aux[0] - 2 * abs(cfg.g_la[0])
    if not aux_min > 0:
        raise NonPositiveBohrFrequency(
            f"aux Bohr frequency omega_aux[1] - 2|g_la[1]| = {aux_min:.6g} is not positive"
        )


CONFIG_FIELDS = tuple(f.name for f in dataclasses.fields(DiodeConfig))
REQUIRED_FIELDS = ("omega_left", "omega_right", "g_lr", "gamma", "temp_left", "temp_right")


def validate_config(raw: Mapping | None = None, /, **kwargs) -> DiodeConfig:
    """Build a :class:`DiodeConfig` from loose keyword/mapping input.

    ``omega_aux`` and ``g_la`` may be scalars, in which case they are
    broadcast over ``n_aux`` atoms.  ``n_aux`` defaults to the list length.
    """
    params = dict(raw or {})
    params.update(kwargs)
    problems = [f"missing field {name!r}" for name in REQUIRED_FIELDS if name not in params]
    problems += [f"unknown field {name!r}" for name in sorted(set(params) - set(CONFIG_FIELDS))]
    if problems:
        raise ValidationError(problems)
    omega_aux = params.get("omega_aux", ())
    g_la = params.get("g_la", ())
    n_aux = params.get("n_aux")
    if n_aux is None:
        n_aux = len(np.atleast_1d(g_la)) if np.ndim(g_la) else 0
    n_aux = int(n_aux)
    if np.ndim(omega_aux) == 0:
        omega_aux = [omega_aux] * n_aux
    if np.ndim(g_la) == 0:
        g_la = [g_la] * n_aux
    bath = params.get("aux_bath")
    return DiodeConfig(
        n_aux=n_aux,
        omega_left=params["omega_left"],
        omega_right=params["omega_right"],
        omega_aux=tuple(omega_aux),
        g_lr=params["g_lr"],
        g_la=tuple(g_la),
        gamma=params["gamma"],
        temp_left=params["temp_left"],
        temp_right=params["temp_right"],
        aux_bath=bath,
    )


# -- basis -------------------------------------------------------------------

@lru_cache(maxsize=32)
def z_table(n_aux: int) -> np.ndarray:
    """Pauli-z eigenvalues, shape ``(2**(N+2), N+2)``; row k is basis index k+1."""
    width = n_aux + 2
    idx = np.arange(2**width)[:, None]
    shifts = np.arange(width - 1, -1, -1)[None, :]
    z = 1 - 2 * ((idx >> shifts) & 1)
    z.setflags(write=False)
    return z


def index_bits(index: int, n_aux: int) -> tuple[int, ...]:
    """Bits (L, R, aux 1..N) of a 1-based basis index, 0 = excited."""
    dim = 2 ** (n_aux + 2)
    if not 1 <= index <= dim:
        raise IndexOutOfRange(f"basis index {index} outside [1, {dim}]")
    return tuple(int(b) for b in format(index - 1, f"0{n_aux + 2}b"))


def bits_index(bits) -> int:
    value = 0
    for b in bits:
        value = 2 * value + int(b)
    return value + 1


def subspace_indices(n_aux: int, m: int) -> tuple[int, int, int, int]:
    """1-based basis indices of the levels (ee, eg, ge, gg) of subspace ``m``."""
    size = 2**n_aux
    if not 1 <= m <= size:
        raise IndexOutOfRange(f"subspace {m} outside [1, {size}]")
    return (m, m + size, m + 2 * size, m + 3 * size)


def aux_z(n_aux: int, m: int) -> np.ndarray:
    """Pauli-z values of the auxiliary atoms in subspace ``m``."""
    if not 1 <= m <= 2**n_aux:
        raise IndexOutOfRange(f"subspace {m} outside [1, {2 ** n_aux}]")
    return z_table(n_aux)[m - 1, 2:]


def subspace_of_states(states: str) -> int:
    """Subspace label for an auxiliary configuration written as e.g. ``"egg"``."""
    states = states.strip().lower()
    if states and set(states) - {"e", "g"}:
        raise ValueError(f"auxiliary states must be a string of 'e'/'g', got {states!r}")
    return bits_index(0 if s == "e" else 1 for s in states)


def states_of_subspace(n_aux: int, m: int) -> str:
    return "".join("e" if z > 0 else "g" for z in aux_z(n_aux, m))


# -- spectrum and transitions --------------------------------------------------

def spectrum(config: DiodeConfig) -> np.ndarray:
    """Diagonal energies of the system Hamiltonian, ordered by basis index."""
    z = z_table(config.n_aux)
    zl, zr, za = z[:, 0], z[:, 1], z[:, 2:]
    w_aux = np.asarray(config.omega_aux, dtype=float)
    g_la = np.asarray(config.g_la, dtype=float)
    e = (0.5 * config.omega_left * zl + 0.5 * config.omega_right * zr
         + 0.5 * (za @ w_aux) + config.g_lr * zl * zr + zl * (za @ g_la))
    e.setflags(write=False)
    return e


@dataclass(frozen=True)
class Transition:
    """One secular jump operator: all listed pairs share ``bohr_frequency``.

    ``pairs`` hold 1-based (upper, lower) basis indices.
    """

    reservoir: Reservoir
    bohr_frequency: float
    pairs: tuple[tuple[int, int], ...]

    @property
    def upper0(self) -> np.ndarray:
        return np.fromiter((u - 1 for u, _ in self.pairs), dtype=np.intp)

    @property
    def lower0(self) -> np.ndarray:
        return np.fromiter((lo - 1 for _, lo in self.pairs), dtype=np.intp)


def left_frequencies(config: DiodeConfig) -> np.ndarray:
    """Left Bohr frequencies omega_{L,l}, l = 1..2**(N+1) (R bit then aux bits)."""
    half = 2 ** (config.n_aux + 1)
    z = z_table(config.n_aux)[:half]
    return (config.omega_left + 2 * config.g_lr * z[:, 1]
            + 2 * (z[:, 2:] @ np.asarray(config.g_la, dtype=float)))


def right_frequencies(config: DiodeConfig) -> tuple[float, float]:
    """(omega_R + 2 g_LR, omega_R - 2 g_LR): left atom excited, ground."""
    return (config.omega_right + 2 * config.g_lr, config.omega_right - 2 * config.g_lr)


def aux_frequencies(config: DiodeConfig) -> tuple[float, float]:
    """Aux Bohr frequencies with the left atom excited and ground (N = 1)."""
    return (config.omega_aux[0] + 2 * config.g_la[0], config.omega_aux[0] - 2 * config.g_la[0])


def _checked(energies, upper, lower, freq):
    gap = energies[upper - 1] - energies[lower - 1]
    if not abs(gap - freq) <= FREQ_RTOL * max(abs(freq), 1.0):
        raise AssertionError(f"pair ({upper},{lower}) gap {gap!r} != {freq!r}")
    return (upper, lower)


@lru_cache(maxsize=256)
def transitions(config: DiodeConfig, reservoir: Reservoir) -> tuple[Transition, ...]:
    """Secular transitions of one reservoir.

    Left: one transition per pair (degenerate frequencies are not merged).
    Right: two transitions (left atom excited / ground), each over all 2**N
    auxiliary configurations.  Aux: same grouping by the left-atom state.
    """
    reservoir = Reservoir(reservoir)
    n = config.n_aux
    size = 2**n
    energies = spectrum(config)
    if reservoir is Reservoir.LEFT:
        freqs = left_frequencies(config)
        return tuple(
            Transition(reservoir, float(w), (_checked(energies, l, l + 2 * size, w),))
            for l, w in enumerate(freqs, 1)
        )
    if reservoir is Reservoir.RIGHT:
        out = []
        for k, w in enumerate(right_frequencies(config)):
            base = 2 * k * size
            pairs = tuple(_checked(energies, base + a, base + a + size, w) for a in range(1, size + 1))
            out.append(Transition(reservoir, float(w), pairs))
        return tuple(out)
    if config.aux_bath is None:
        raise AuxBathUnsupported("aux transitions require an aux_bath")
    out = []
    for k, w in enumerate(aux_frequencies(config)):
        pairs = tuple(_checked(energies, 4 * k + 2 * r + 1, 4 * k + 2 * r + 2, w) for r in range(2))
        out.append(Transition(reservoir, float(w), pairs))
    # The shifted forms below are sometimes quoted for these gaps; they carry an
    # extra coupling term and disagree with the spectrum, which wins.
    e = energies
    shifted_r = config.omega_right + 2 * config.g_lr + 2 * config.g_la[0]
    shifted_a = config.omega_aux[0] + 2 * config.g_lr + 2 * config.g_la[0]
    if not (math.isclose(shifted_r, e[0] - e[2]) and math.isclose(shifted_a, e[0] - e[1])):
        log.info("using spectral gaps E1-E3 = %.12g, E1-E2 = %.12g; the shifted forms "
                 "omega_R + 2g_LR + 2g_L1 = %.12g and omega_1 + 2g_LR + 2g_L1 = %.12g do not match",
                 e[0] - e[2], e[0] - e[1], shifted_r, shifted_a)
    return tuple(out)
