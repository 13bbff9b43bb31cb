"""Steady states (closed form and numeric) and density-matrix time evolution."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DomainError,
    IndexOutOfRange,
    InvariantViolation,
    KernelDimensionMismatch,
    NonConvergence,
    StepSizeUnderflow,
)
from .model import DiodeConfig, Reservoir, spectrum, transitions, z_table
from .rates import (
    RateGenerator,
    emission_absorption,
    full_generator,
    generator_part,
    reservoirs_of,
    subspace_generator_stack,
    subspace_rates,
)

log = logging.getLogger(__name__)

NORM_TOL = 1e-12
RESIDUAL_RTOL = 1e-10
MAX_EVOLVE_AUX = 6


# -- auxiliary preparations ---------------------------------------------------

@dataclass(frozen=True)
class AllExcited:
    pass


@dataclass(frozen=True)
class AllGround:
    pass


@dataclass(frozen=True)
class ClassicalWeights:
    """Probabilities ``p_m`` of the ``2**N`` auxiliary configurations."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if any(x < 0 for x in w):
            raise DomainError(f"subspace weights must be nonnegative: {w}")
        if abs(sum(w) - 1.0) > NORM_TOL:
            raise DomainError(f"subspace weights sum to {sum(w)!r}, not 1")
        n = len(w).bit_length() - 1
        if len(w) != 2**n:
            raise DomainError(f"need 2**N weights, got {len(w)}")

    @classmethod
    def definite(cls, n_aux: int, m: int) -> ClassicalWeights:
        if not 1 <= m <= 2**n_aux:
            raise IndexOutOfRange(f"subspace {m} outside [1, {2 ** n_aux}]")
        w = [0.0] * 2**n_aux
        w[m - 1] = 1.0
        return cls(tuple(w))

    @classmethod
    def from_excited_fractions(cls, fractions) -> ClassicalWeights:
        """Independent atoms, atom ``a`` excited with probability ``fractions[a]``."""
        p = np.asarray(fractions, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise DomainError(f"excited fractions must lie in [0, 1]: {p}")
        # rows 0..2^N-1 of the basis table have both left/right bits excited
        za = z_table(len(p))[: 2 ** len(p), 2:]
        w = np.prod(np.where(za > 0, p, 1.0 - p), axis=1)
        return cls(tuple(w / w.sum()))


@dataclass(frozen=True)
class ProductPure:
    """Per-atom pure states ``alpha |e> + beta |g>`` (dynamics only)."""

    amplitudes: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        amps = tuple((complex(a), complex(b)) for a, b in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        for a, b in amps:
            if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > NORM_TOL:
                raise DomainError(f"amplitudes ({a}, {b}) are not normalized")

    @classmethod
    def from_excited_fractions(cls, fractions, phases=None) -> ProductPure:
        fractions = list(fractions)
        phases = [0.0] * len(fractions) if phases is None else list(phases)
        return cls(tuple((math.sqrt(p) * complex(math.cos(ph), math.sin(ph)), math.sqrt(1.0 - p))
                         for p, ph in zip(fractions, phases)))

    def weights(self) -> ClassicalWeights:
        return ClassicalWeights.from_excited_fractions([abs(a) ** 2 for a, _ in self.amplitudes])


@dataclass(frozen=True)
class WeakBathLimit:
    """Aux weights set by a bath at ``temp_aux`` in the limit of vanishing coupling.

    Each auxiliary atom flips slowly while the (left, right) pair sits in its
    subspace steady state; the weights are the stationary law of that slow
    chain.  They depend on the bath temperatures, so forward and reverse runs
    resolve them separately.
    """

    temp_aux: float


AuxPreparation = Union[AllExcited, AllGround, ClassicalWeights, ProductPure, WeakBathLimit]


def subspace_weights(preparation: AuxPreparation | None, config: DiodeConfig) -> np.ndarray:
    size = config.n_subspaces
    if config.n_aux == 0:
        return np.ones(1)
    if preparation is None:
        log.info("no auxiliary preparation given; defaulting to all-ground")
        preparation = AllGround()
    if isinstance(preparation, AllExcited):
        w = np.zeros(size)
        w[0] = 1.0
    elif isinstance(preparation, AllGround):
        w = np.zeros(size)
        w[-1] = 1.0
    elif isinstance(preparation, ClassicalWeights):
        w = np.asarray(preparation.weights)
    elif isinstance(preparation, ProductPure):
        w = np.asarray(preparation.weights().weights)
    elif isinstance(preparation, WeakBathLimit):
        w = weak_bath_weights(config, preparation.temp_aux)
    else:
        raise TypeError(f"unknown auxiliary preparation {preparation!r}")
    if len(w) != size:
        raise KernelDimensionMismatch(f"{len(w)} weights for {size} subspaces")
    return w


# -- steady states -------------------------------------------------------------

def analytic_subspace_populations(config: DiodeConfig) -> np.ndarray:
    """Closed-form stationary populations of every subspace, shape ``(2**N, 4)``."""
    k = subspace_rates(config)
    lp, lm = k.l1_up, k.l1_dn
    lp2, lm2 = k.l2_up, k.l2_dn
    rp1, rm1, rp2, rm2 = k.r1_up, k.r1_dn, k.r2_up, k.r2_dn
    r11 = lp2 * rp1 * (lp + rm2) + lp * rp2 * (lm2 + rp1)
    r22 = lp * rm1 * (lp2 + rp2) + lp2 * rm2 * (lm + rm1)
    r33 = lm * rp1 * (lp2 + rp2) + lm2 * rp2 * (lm + rm1)
    r44 = lm2 * rm1 * (lp + rm2) + lm * rm2 * (lm2 + rp1)
    tilde = np.stack([r11, r22, r33, r44], axis=1)
    return tilde / tilde.sum(axis=1, keepdims=True)


def steady_subspace_analytic(config: DiodeConfig, m: int) -> np.ndarray:
    """Closed-form populations (ee, eg, ge, gg) of subspace ``m``, summing to 1."""
    if config.aux_bath is not None:
        raise DomainError("closed-form subspace steady state needs a non-dissipative auxiliary")
    if not 1 <= m <= config.n_subspaces:
        raise IndexOutOfRange(f"subspace {m} outside [1, {config.n_subspaces}]")
    return analytic_subspace_populations(config)[m - 1]


def _normalized_kernel(block: np.ndarray) -> np.ndarray:
    """Stationary vector of one irreducible generator block (or a stack of them).

    Uses Grassmann-Taksar-Heyman state reduction, which only adds positive
    numbers and so resolves tiny populations to full relative precision; a
    row-replacement solve loses that accuracy and with it the small net
    fluxes near equilibrium.
    """
    rates = np.array(np.swapaxes(block, -1, -2), dtype=float)
    n = rates.shape[-1]
    idx = np.arange(n)
    rates[..., idx, idx] = 0.0
    for k in range(n - 1, 0, -1):
        out = rates[..., k, :k].sum(axis=-1)
        if np.any(~(out > 0)):
            raise NonConvergence("generator block is reducible; no unique steady state")
        rates[..., :k, k] /= out[..., None]
        rates[..., :k, :k] += rates[..., :k, k, None] * rates[..., k, None, :k]
    pi = np.zeros(rates.shape[:-1])
    pi[..., 0] = 1.0
    for k in range(1, n):
        pi[..., k] = np.einsum("...i,...i->...", pi[..., :k], rates[..., :k, k])
    return pi / pi.sum(axis=-1, keepdims=True)


def numeric_subspace_populations(config: DiodeConfig) -> np.ndarray:
    """Stationary populations of every 4x4 subspace generator."""
    return _normalized_kernel(subspace_generator_stack(config))


def steady_numeric(generator: RateGenerator, weights=None) -> tuple[np.ndarray, float]:
    """Stationary population vector of ``generator`` and its residual ``max|M rho|``.

    With several conserved blocks the caller supplies one weight per block; a
    generator with a unique steady state takes no weights.
    """
    blocks = generator.blocks
    mat = generator.matrix
    if len(blocks) == 1:
        if weights is not None:
            raise KernelDimensionMismatch("generator has a unique steady state; weights must be omitted")
        weights = np.ones(1)
    else:
        if weights is None:
            raise KernelDimensionMismatch(f"generator has {len(blocks)} conserved blocks; weights required")
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(blocks),):
            raise KernelDimensionMismatch(f"{weights.size} weights for {len(blocks)} blocks")
    rho = np.zeros(generator.dim)
    for block, p in zip(blocks, weights):
        if p == 0.0:
            continue
        rho[block] = p * _normalized_kernel(mat[np.ix_(block, block)])
    residual = float(np.abs(mat @ rho).max())
    scale = float(np.abs(mat).max())
    if not residual <= RESIDUAL_RTOL * scale:
        raise NonConvergence(f"steady-state residual {residual:.3g} exceeds {RESIDUAL_RTOL * scale:.3g}")
    return rho, residual


@dataclass(frozen=True, eq=False)
class SteadyReport:
    """Stationary state of one configuration and its heat currents.

    ``subspace_populations[m-1]`` is normalized within subspace ``m``;
    ``populations`` is the full vector weighted by ``weights``.  ``cycle_rates``
    holds the net left-flip rate ``m -> m + 2**(N+1)`` per subspace.
    """

    config: DiodeConfig
    weights: np.ndarray
    populations: np.ndarray
    subspace_populations: np.ndarray
    cycle_rates: np.ndarray
    q_left: float
    q_right: float
    q_aux: float
    residual: float


def edge_fluxes(config: DiodeConfig, sub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward and backward fluxes on the four edges of every subspace cycle.

    Edges follow the cycle ee -> ge -> gg -> eg -> ee (left flip, right flip,
    left flip, right flip), so at stationarity every net flux ``fwd - bwd``
    equals the cycle rate.  Returns two arrays of shape ``(2**N, 4)``.
    """
    k = subspace_rates(config)
    fwd = 2 * np.stack([k.l1_dn * sub[:, 0], k.r2_dn * sub[:, 2],
                        k.l2_up * sub[:, 3], k.r1_up * sub[:, 1]], axis=1)
    bwd = 2 * np.stack([k.l1_up * sub[:, 2], k.r2_up * sub[:, 3],
                        k.l2_dn * sub[:, 1], k.r1_dn * sub[:, 0]], axis=1)
    return fwd, bwd


def branch_cycle_rates(config: DiodeConfig, sub: np.ndarray) -> np.ndarray:
    """Cycle rate of every subspace from its steady populations.

    All four edges carry the same net flux, but near equilibrium the busy
    edges obtain it as a tiny difference of large fluxes.  The edge with the
    smallest gross flux loses the fewest digits, so that one is used.
    """
    fwd, bwd = edge_fluxes(config, sub)
    best = np.argmin(np.maximum(fwd, bwd), axis=1)
    rows = np.arange(len(sub))
    return fwd[rows, best] - bwd[rows, best]


def steady_state(config: DiodeConfig, preparation: AuxPreparation | None = None,
                 method: str = "numeric") -> SteadyReport:
    """Steady state and its heat currents.

    Without an auxiliary bath every subspace runs a closed four-level cycle
    that moves ``4 g_LR`` of energy from the left to the right bath per turn,
    so ``Q_L = -4 g_LR sum_m p_m Gamma_m = -Q_R``.  With an auxiliary bath the
    currents come from the trace form ``sum_i E_i (M_mu rho)_i``.

    ``method`` is ``"numeric"`` (state reduction per subspace) or ``"analytic"``.
    Configurations with an auxiliary bath have a unique steady state and
    accept no preparation.
    """
    if config.aux_bath is not None:
        return _steady_with_aux_bath(config, preparation)
    weights = subspace_weights(preparation, config)
    if method == "numeric":
        sub = numeric_subspace_populations(config)
    elif method == "analytic":
        sub = analytic_subspace_populations(config)
    else:
        raise ValueError(f"unknown method {method!r}")
    stack = subspace_generator_stack(config)
    flow = np.einsum("mij,mj->mi", stack, sub)
    residual = float(np.abs(flow).max())
    scale = float(np.abs(stack).max())
    if not residual <= RESIDUAL_RTOL * scale:
        raise NonConvergence(f"steady-state residual {residual:.3g} exceeds {RESIDUAL_RTOL * scale:.3g}")
    size = config.n_subspaces
    levels = np.arange(4)[None, :] * size + np.arange(size)[:, None]
    pops = np.zeros(config.dim)
    pops[levels] = weights[:, None] * sub
    cycles = branch_cycle_rates(config, sub)
    q = 4 * config.g_lr * float(weights @ cycles)
    return SteadyReport(
        config=config,
        weights=weights,
        populations=pops,
        subspace_populations=sub,
        cycle_rates=cycles,
        q_left=-q,
        q_right=q,
        q_aux=0.0,
        residual=residual,
    )


def _steady_with_aux_bath(config: DiodeConfig, preparation) -> SteadyReport:
    if preparation is not None:
        raise KernelDimensionMismatch("an auxiliary bath fixes the auxiliary state; omit the preparation")
    gen = full_generator(config)
    pops, residual = steady_numeric(gen)
    energies = spectrum(config)
    q = {r: float(energies @ (generator_part(config, r).matrix @ pops)) for r in reservoirs_of(config)}
    size = config.n_subspaces
    levels = np.arange(4)[None, :] * size + np.arange(size)[:, None]
    block = pops[levels]
    weights = block.sum(axis=1)
    sub = block / weights[:, None]
    return SteadyReport(
        config=config,
        weights=weights,
        populations=pops,
        subspace_populations=sub,
        cycle_rates=branch_cycle_rates(config, sub),
        q_left=q[Reservoir.LEFT],
        q_right=q[Reservoir.RIGHT],
        q_aux=q[Reservoir.AUX],
        residual=residual,
    )


def weak_bath_weights(config: DiodeConfig, temp_aux: float) -> np.ndarray:
    """Stationary aux weights for a vanishingly weak aux bath at ``temp_aux``.

    Flip rates of auxiliary atom ``a`` are averaged over the subspace steady
    state of the (left, right) pair; its Bohr frequency is
    ``omega_a + 2 g_La z_L``.  The coupling strength cancels.
    """
    n = config.n_aux
    if n == 0:
        return np.ones(1)
    sub = numeric_subspace_populations(config.replace(aux_bath=None))
    size = 2**n
    zl_e = sub[:, 0] + sub[:, 1]
    zl_g = sub[:, 2] + sub[:, 3]
    slow = np.zeros((size, size))
    for a in range(n):
        w_e = config.omega_aux[a] + 2 * config.g_la[a]
        w_g = config.omega_aux[a] - 2 * config.g_la[a]
        dn_e, up_e = emission_absorption(w_e, temp_aux, 1.0)
        dn_g, up_g = emission_absorption(w_g, temp_aux, 1.0)
        bit = 1 << (n - 1 - a)
        for m0 in range(size):
            if m0 & bit:
                continue
            m1 = m0 | bit
            slow[m1, m0] += 2 * (zl_e[m0] * dn_e + zl_g[m0] * dn_g)
            slow[m0, m1] += 2 * (zl_e[m1] * up_e + zl_g[m1] * up_g)
    np.fill_diagonal(slow, -slow.sum(axis=0))
    w = _normalized_kernel(slow)
    return np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum()


# -- density states and dynamics ----------------------------------------------

def check_density(rho: np.ndarray, tol: float = 1e-12) -> None:
    """Raise :class:`InvariantViolation` unless ``rho`` is a valid density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvariantViolation(f"density matrix must be square, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise InvariantViolation(f"density matrix not Hermitian (deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvariantViolation(f"density matrix trace {tr!r} != 1")
    low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if low < -tol:
        raise InvariantViolation(f"density matrix has negative eigenvalue {low:.3g}")


def _single(state: str) -> np.ndarray:
    return {"e": np.array([1.0, 0.0]), "g": np.array([0.0, 1.0])}[state]


def product_state(config: DiodeConfig, left: str = "e", right: str = "e",
                  aux: AuxPreparation | None = None) -> np.ndarray:
    """Density matrix with definite left/right states and the given aux state.

    ``ProductPure`` yields a pure (coherent) state; every other preparation a
    diagonal mixture over auxiliary configurations.
    """
    lr = np.kron(_single(left), _single(right))
    if config.n_aux == 0:
        psi = lr.astype(complex)
        return np.outer(psi, psi.conj())
    if isinstance(aux, ProductPure):
        if len(aux.amplitudes) != config.n_aux:
            raise KernelDimensionMismatch(f"{len(aux.amplitudes)} amplitudes for {config.n_aux} atoms")
        psi = lr.astype(complex)
        for a, b in aux.amplitudes:
            psi = np.kron(psi, np.array([a, b]))
        return np.outer(psi, psi.conj())
    w = subspace_weights(aux, config)
    diag = np.kron(lr, w)
    return np.diag(diag).astype(complex)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    config: DiodeConfig

    def populations(self) -> np.ndarray:
        return np.einsum("tii->ti", self.states).real

    def max_coherence(self) -> np.ndarray:
        off = self.states.copy()
        idx = np.arange(off.shape[1])
        off[:, idx, idx] = 0.0
        return np.abs(off).max(axis=(1, 2))


class _Dissipator:
    """Dissipative part of the master equation acting on a dense density matrix.

    The secular dissipator commutes with the Hamiltonian part, so integration
    happens in the interaction picture and phases are restored afterwards.
    """

    def __init__(self, config: DiodeConfig):
        gen = full_generator(config).matrix
        out_rate = -np.diag(gen)
        self.pop_generator = gen
        self.decay = -0.5 * (out_rate[:, None] + out_rate[None, :])
        temps = {Reservoir.LEFT: (config.temp_left, config.gamma),
                 Reservoir.RIGHT: (config.temp_right, config.gamma)}
        if config.aux_bath is not None:
            temps[Reservoir.AUX] = (config.aux_bath.temp_aux, config.aux_bath.gamma_aux)
        tr_rows, tr_cols, src_rows, src_cols, coefs = [], [], [], [], []
        for res, (temp, gamma) in temps.items():
            for tr in transitions(config, res):
                if len(tr.pairs) < 2:
                    continue
                dn, up = emission_absorption(tr.bohr_frequency, temp, gamma)
                u, lo = tr.upper0, tr.lower0
                p, q = np.nonzero(~np.eye(len(u), dtype=bool))
                for tgt, src, c in ((lo, u, 2 * dn), (u, lo, 2 * up)):
                    tr_rows.append(tgt[p]); tr_cols.append(tgt[q])
                    src_rows.append(src[p]); src_cols.append(src[q])
                    coefs.append(np.full(len(p), c))
        cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dtype=dt))
        self.tgt = (cat(tr_rows, np.intp), cat(tr_cols, np.intp))
        self.src = (cat(src_rows, np.intp), cat(src_cols, np.intp))
        self.coef = cat(coefs, float)
        self.dim = config.dim

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        d = self.decay * rho
        if self.coef.size:
            np.add.at(d, self.tgt, self.coef * rho[self.src])
        idx = np.arange(self.dim)
        d[idx, idx] = self.pop_generator @ rho[idx, idx]
        return d


def evolve(config: DiodeConfig, initial: np.ndarray, time_grid, rtol: float = 1e-8,
           atol: float = 1e-10) -> Trajectory:
    """Integrate the master equation from ``initial`` over ``time_grid``.

    Adaptive Runge-Kutta (RK45) in the interaction picture; the state at
    ``time_grid[0]`` is ``initial``.
    """
    if config.n_aux > MAX_EVOLVE_AUX:
        raise DomainError(f"evolve supports n_aux <= {MAX_EVOLVE_AUX}, got {config.n_aux}")
    rho0 = np.asarray(initial, dtype=complex)
    if rho0.shape != (config.dim, config.dim):
        raise InvariantViolation(f"initial state shape {rho0.shape} != {(config.dim, config.dim)}")
    check_density(rho0)
    times = np.asarray(time_grid, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) <= 0):
        raise DomainError("time_grid must be a strictly increasing 1-d sequence")

    diss = _Dissipator(config)
    dim = config.dim

    def rhs(_t, y):
        return diss(y.reshape(dim, dim)).ravel()

    if times.size == 1:
        tilde = rho0[None]
    else:
        sol = solve_ivp(rhs, (times[0], times[-1]), rho0.ravel(), method="RK45",
                        t_eval=times, rtol=rtol, atol=atol)
        if not sol.success:
            raise StepSizeUnderflow(sol.message)
        tilde = sol.y.T.reshape(len(times), dim, dim)

    energies = spectrum(config)
    gaps = energies[:, None] - energies[None, :]
    phases = np.exp(-1j * gaps[None, :, :] * (times - times[0])[:, None, None])
    states = tilde * phases
    for t, rho in zip(times, states):
        drift = abs(np.trace(rho).real - 1.0)
        low = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if drift > 1e-8 or low < -1e-8:
            raise InvariantViolation(f"t = {t:g}: trace drift {drift:.3g}, lowest eigenvalue {low:.3g}")
    return Trajectory(times, states, config)


def steady_density(config: DiodeConfig, preparation: AuxPreparation | None = None) -> np.ndarray:
    """Diagonal density matrix of the numeric steady state."""
    return np.diag(steady_state(config, preparation).populations).astype(complex)


__all__ = [
    "AllExcited", "AllGround", "AuxPreparation", "ClassicalWeights", "ProductPure",
    "SteadyReport", "Trajectory", "WeakBathLimit", "analytic_subspace_populations",
    "branch_cycle_rates", "check_density", "edge_fluxes", "evolve", "numeric_subspace_populations", "product_state",
    "steady_density", "steady_numeric", "steady_state", "steady_subspace_analytic",
    "subspace_weights", "weak_bath_weights",
]
