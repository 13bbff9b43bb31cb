"""Thermal rates, population-rate generators and coherence decay blocks.

Generators act on population vectors, ``d rho / dt = M rho``; entry
``M[j, i]`` (``i != j``) is the rate of the jump ``i -> j``.  Rates include the
factor 2 carried by the dissipators, so a jump down at Bohr frequency ``w``
happens at ``2 J(-w) = 2 gamma (n(w) + 1)`` and the reverse at
``2 J(+w) = 2 gamma n(w)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError, IndexOutOfRange
from .model import DiodeConfig, Reservoir, left_frequencies, right_frequencies, spectrum, transitions

OVERFLOW_RATIO = 700.0
SMALL_RATIO = 1e-9


def bose_occupation(omega, temperature):
    """Mean Bose occupation ``1 / (exp(omega / T) - 1)``.

    Above ``omega / T = 700`` the leading term ``exp(-omega / T)`` is returned
    instead of overflowing.  Accepts scalars or arrays.
    """
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(~(omega > 0)) or np.any(~(temperature > 0)):
        raise DomainError(f"bose_occupation needs omega > 0 and T > 0, got {omega}, {temperature}")
    x = omega / temperature
    if np.any(x < SMALL_RATIO):
        raise DomainError(f"omega / T = {x.min():.3g} too small; occupation diverges")
    n = np.where(x > OVERFLOW_RATIO, np.exp(-x), 1.0 / np.expm1(np.minimum(x, OVERFLOW_RATIO)))
    return n[()] if n.ndim == 0 else n


def spectral_rate(signed_omega, temperature, gamma):
    """Flat-spectrum rate ``J(+w) = gamma n(w)``, ``J(-w) = gamma (n(w) + 1)``."""
    signed_omega = np.asarray(signed_omega, dtype=float)
    if np.any(signed_omega == 0):
        raise DomainError("spectral_rate is undefined at zero frequency")
    n = bose_occupation(np.abs(signed_omega), temperature)
    j = gamma * np.where(signed_omega > 0, n, n + 1.0)
    return j[()] if j.ndim == 0 else j


def emission_absorption(omega, temperature, gamma):
    """Return ``(J(-w), J(+w))`` for positive ``omega`` in one pass."""
    n = bose_occupation(omega, temperature)
    return gamma * (n + 1.0), gamma * n


@dataclass(frozen=True, eq=False)
class RateGenerator:
    """Population generator with its conserved blocks.

    ``blocks`` lists 0-based state indices of each closed communicating class,
    ordered by subspace label; a single block means a unique steady state.
    """

    matrix: np.ndarray
    blocks: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def kernel_dimension(self, rtol: float = 1e-10) -> int:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        scale = np.abs(self.matrix).max()
        return int(np.sum(s <= rtol * scale))


class SubspaceRates(NamedTuple):
    """Per-subspace rates, arrays over ``m``; ``l1`` is the left flip with the
    right atom excited (``omega_{L,m}``), ``l2`` with it ground
    (``omega_{L,m+2^N}``); ``r1``/``r2`` the right flip with the left atom
    excited / ground.  ``*_dn`` is J(-w), ``*_up`` is J(+w)."""

    l1_dn: np.ndarray
    l1_up: np.ndarray
    l2_dn: np.ndarray
    l2_up: np.ndarray
    r1_dn: float
    r1_up: float
    r2_dn: float
    r2_up: float


@lru_cache(maxsize=64)
def subspace_rates(config: DiodeConfig) -> SubspaceRates:
    size = config.n_subspaces
    wl = left_frequencies(config)
    l1_dn, l1_up = emission_absorption(wl[:size], config.temp_left, config.gamma)
    l2_dn, l2_up = emission_absorption(wl[size:], config.temp_left, config.gamma)
    wr1, wr2 = right_frequencies(config)
    r1_dn, r1_up = emission_absorption(wr1, config.temp_right, config.gamma)
    r2_dn, r2_up = emission_absorption(wr2, config.temp_right, config.gamma)
    left = [np.array(np.atleast_1d(x)) for x in (l1_dn, l1_up, l2_dn, l2_up)]
    for arr in left:
        arr.setflags(write=False)
    return SubspaceRates(*left, float(r1_dn), float(r1_up), float(r2_dn), float(r2_up))


def subspace_generator_stack(config: DiodeConfig, reservoir: Reservoir | None = None) -> np.ndarray:
    """All 4x4 subspace generators, shape ``(2**N, 4, 4)``.

    Level order within a subspace: (ee, eg, ge, gg) for the (left, right) pair.
    ``reservoir`` restricts to the left or right part.
    """
    k = subspace_rates(config)
    size = config.n_subspaces
    out = np.zeros((size, 4, 4))
    if reservoir in (None, Reservoir.LEFT):
        # 0 <-> 2 at omega_{L,m}; 1 <-> 3 at omega_{L,m+2^N}
        out[:, 2, 0] += 2 * k.l1_dn
        out[:, 0, 2] += 2 * k.l1_up
        out[:, 3, 1] += 2 * k.l2_dn
        out[:, 1, 3] += 2 * k.l2_up
    if reservoir in (None, Reservoir.RIGHT):
        out[:, 1, 0] += 2 * k.r1_dn
        out[:, 0, 1] += 2 * k.r1_up
        out[:, 3, 2] += 2 * k.r2_dn
        out[:, 2, 3] += 2 * k.r2_up
    diag = np.arange(4)
    out[:, diag, diag] = -out.sum(axis=1)
    return out


def subspace_generator(config: DiodeConfig, m: int) -> RateGenerator:
    """The 4x4 generator (left part plus right part) of subspace ``m``."""
    if not 1 <= m <= config.n_subspaces:
        raise IndexOutOfRange(f"subspace {m} outside [1, {config.n_subspaces}]")
    mat = subspace_generator_stack(config)[m - 1]
    return RateGenerator(mat, (np.arange(4),))


def _conserved_blocks(config: DiodeConfig) -> tuple[np.ndarray, ...]:
    if config.aux_bath is not None:
        return (np.arange(config.dim),)
    size = config.n_subspaces
    return tuple(np.arange(4) * size + m for m in range(size))


@lru_cache(maxsize=16)
def _part_matrix(config: DiodeConfig, reservoir: Reservoir) -> np.ndarray:
    if reservoir is Reservoir.LEFT:
        temp, gamma = config.temp_left, config.gamma
    elif reservoir is Reservoir.RIGHT:
        temp, gamma = config.temp_right, config.gamma
    else:
        temp, gamma = config.aux_bath.temp_aux, config.aux_bath.gamma_aux
    mat = np.zeros((config.dim, config.dim))
    for tr in transitions(config, reservoir):
        dn, up = emission_absorption(tr.bohr_frequency, temp, gamma)
        u, lo = tr.upper0, tr.lower0
        mat[lo, u] += 2 * dn
        mat[u, lo] += 2 * up
    np.fill_diagonal(mat, 0.0)
    np.fill_diagonal(mat, -mat.sum(axis=0))
    mat.setflags(write=False)
    return mat


def generator_part(config: DiodeConfig, reservoir: Reservoir) -> RateGenerator:
    """Contribution of a single reservoir to the population generator."""
    return RateGenerator(_part_matrix(config, Reservoir(reservoir)), _conserved_blocks(config))


def reservoirs_of(config: DiodeConfig) -> tuple[Reservoir, ...]:
    if config.aux_bath is None:
        return (Reservoir.LEFT, Reservoir.RIGHT)
    return (Reservoir.LEFT, Reservoir.RIGHT, Reservoir.AUX)


def full_generator(config: DiodeConfig) -> RateGenerator:
    """Population generator over all ``2**(N+2)`` basis states.

    Without an auxiliary bath the kernel has one direction per subspace; with
    it the chain is irreducible and the kernel is one-dimensional.
    """
    mat = sum(_part_matrix(config, r) for r in reservoirs_of(config))
    return RateGenerator(np.array(mat), _conserved_blocks(config))


# -- coherences ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OffDiagonalBlock:
    """Closed family of coherences ``rho[i, j]`` (1-based labels, ``i < j``).

    ``decay`` is the real dissipative coupling matrix; every member shares the
    same Bohr detuning ``E_i - E_j``, so the full coefficient matrix is
    ``decay - 1j * detuning * I``.
    """

    pairs: tuple[tuple[int, int], ...]
    decay: np.ndarray
    detuning: float

    @property
    def matrix(self) -> np.ndarray:
        return self.decay - 1j * self.detuning * np.eye(len(self.pairs))


def escape_rates(config: DiodeConfig) -> np.ndarray:
    """Total jump rate out of every basis state."""
    return -np.diag(full_generator(config).matrix).copy()


def coherence_transfers(config: DiodeConfig):
    """Yield ``(target, source, coefficient)`` with 0-based ordered pairs.

    A jump operator covering several pairs maps ``rho[u, u']`` onto
    ``rho[l, l']`` (and back through its adjoint).
    """
    temps = {Reservoir.LEFT: (config.temp_left, config.gamma),
             Reservoir.RIGHT: (config.temp_right, config.gamma)}
    if config.aux_bath is not None:
        temps[Reservoir.AUX] = (config.aux_bath.temp_aux, config.aux_bath.gamma_aux)
    for res, (temp, gamma) in temps.items():
        for tr in transitions(config, res):
            if len(tr.pairs) < 2:
                continue
            dn, up = emission_absorption(tr.bohr_frequency, temp, gamma)
            u, lo = tr.upper0, tr.lower0
            for p in range(len(u)):
                for q in range(len(u)):
                    if p != q:
                        yield (lo[p], lo[q]), (u[p], u[q]), 2 * dn
                        yield (u[p], u[q]), (lo[p], lo[q]), 2 * up


def offdiagonal_blocks(config: DiodeConfig, include_singletons: bool = False) -> list[OffDiagonalBlock]:
    """Coupled coherence families and their coefficient matrices.

    Without singletons this returns, for every pair of auxiliary
    configurations ``i < j``, the two 2x2 families linking the coherences with
    the right atom excited and ground (left atom excited or ground).
    """
    energies = spectrum(config)
    out_rate = escape_rates(config)
    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = {}
    for tgt, src, coef in coherence_transfers(config):
        if tgt[0] > tgt[1]:
            continue
        edges[(tgt, src)] = edges.get((tgt, src), 0.0) + coef
        parent[find(tgt)] = find(src)

    families: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for node in list(parent):
        families.setdefault(find(node), []).append(node)
    if include_singletons:
        dim = config.dim
        for a in range(dim):
            for b in range(a + 1, dim):
                if (a, b) not in parent:
                    families[(a, b)] = [(a, b)]

    blocks = []
    for members in families.values():
        members.sort()
        pos = {c: k for k, c in enumerate(members)}
        lam = np.diag([-0.5 * (out_rate[a] + out_rate[b]) for a, b in members])
        for (tgt, src), coef in edges.items():
            if tgt in pos and src in pos:
                lam[pos[tgt], pos[src]] += coef
        a, b = members[0]
        blocks.append(OffDiagonalBlock(
            pairs=tuple((a + 1, b + 1) for a, b in members),
            decay=lam,
            detuning=float(energies[a] - energies[b]),
        ))
    blocks.sort(key=lambda blk: blk.pairs)
    return blocks
