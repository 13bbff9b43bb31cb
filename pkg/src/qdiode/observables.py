"""Heat currents, rectification factors and effective-frequency analysis.

Sign convention: a current is positive when heat flows from the bath into the
system.  The forward run uses the configured temperatures, the reverse run
exchanges them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BothCurrentsZero, DomainError, IndexOutOfRange, RateMismatch
from .model import DiodeConfig, Reservoir, aux_z, spectrum
from .rates import generator_part, subspace_rates
from .solver import (
    AllExcited,
    AllGround,
    AuxPreparation,
    ClassicalWeights,
    analytic_subspace_populations,
    branch_cycle_rates,
    edge_fluxes,
    steady_state,
    subspace_weights,
)

ZERO_CURRENT_RTOL = 1e-14


@dataclass(frozen=True)
class RectificationResult:
    forward: float
    reverse: float
    factor: float
    method: str


# -- currents ------------------------------------------------------------------

def _subspace_blocks(config: DiodeConfig, populations: np.ndarray) -> np.ndarray:
    size = config.n_subspaces
    levels = np.arange(4)[None, :] * size + np.arange(size)[:, None]
    return np.asarray(populations, dtype=float)[levels]


def heat_currents_steady(config: DiodeConfig, populations) -> tuple[float, float]:
    """Steady currents ``(Q_L, Q_R)`` from a full population vector.

    Each subspace cycle moves ``4 g_LR`` of energy per completed loop, so the
    currents follow from the cycle rates weighted by the subspace masses.
    With an auxiliary bath the cycles no longer close and the trace form
    ``sum_i E_i (M_mu rho)_i`` is used instead.
    """
    pops = np.asarray(populations, dtype=float)
    if config.aux_bath is not None:
        e = spectrum(config)
        return (float(e @ (generator_part(config, Reservoir.LEFT).matrix @ pops)),
                float(e @ (generator_part(config, Reservoir.RIGHT).matrix @ pops)))
    blk = _subspace_blocks(config, pops)
    q = 4 * config.g_lr * float(branch_cycle_rates(config, blk).sum())
    return -q, q


def heat_current_dynamic(config: DiodeConfig, rho) -> tuple[float, float]:
    """Instantaneous ``(Q_L, Q_R) = (tr H L_L[rho], tr H L_R[rho])``.

    The Hamiltonian is diagonal, so only populations contribute.
    """
    rho = np.asarray(rho)
    pops = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    e = spectrum(config)
    ml = generator_part(config, Reservoir.LEFT).matrix
    mr = generator_part(config, Reservoir.RIGHT).matrix
    q_l = (pops @ ml.T) @ e
    q_r = (pops @ mr.T) @ e
    if np.ndim(q_l) == 0:
        return float(q_l), float(q_r)
    return q_l, q_r


def cycle_rate(config: DiodeConfig, populations, m: int, rtol: float = 1e-12) -> float:
    """Common net rate around the four-level cycle of subspace ``m``.

    ``populations`` is the full steady vector (or the four levels of subspace
    ``m``); it is renormalized within the subspace.  The rate is positive when
    the cycle runs ee -> ge -> gg -> eg -> ee.  Raises :class:`RateMismatch`
    if the four edge rates disagree.
    """
    if not 1 <= m <= config.n_subspaces:
        raise IndexOutOfRange(f"subspace {m} outside [1, {config.n_subspaces}]")
    pops = np.asarray(populations, dtype=float)
    sub = pops if pops.shape == (4,) else _subspace_blocks(config, pops)[m - 1]
    mass = sub.sum()
    if not mass > 0:
        raise DomainError(f"subspace {m} carries no population")
    fwd, bwd = edge_fluxes(config, np.full((config.n_subspaces, 4), sub / mass))
    nets = (fwd - bwd)[m - 1]
    tol = rtol * max(1.0, float(np.maximum(fwd, bwd).max()))
    if nets.max() - nets.min() > tol:
        raise RateMismatch(f"subspace {m}: net rates {nets} disagree beyond {tol:.3g}")
    return float(branch_cycle_rates(config, np.full((config.n_subspaces, 4), sub / mass))[m - 1])


def cycle_rate_closed_form(config: DiodeConfig, m: int) -> float:
    """Closed-form cycle rate of subspace ``m`` from its normalizer.

    The rate is ``2 / Z`` times the difference of the clockwise and
    counter-clockwise products of the four rates, where ``Z`` is the sum of the
    unnormalized stationary populations.
    """
    if not 1 <= m <= config.n_subspaces:
        raise IndexOutOfRange(f"subspace {m} outside [1, {config.n_subspaces}]")
    k = subspace_rates(config)
    i = m - 1
    lp, lm, lp2, lm2 = k.l1_up[i], k.l1_dn[i], k.l2_up[i], k.l2_dn[i]
    rp1, rm1, rp2, rm2 = k.r1_up, k.r1_dn, k.r2_up, k.r2_dn
    z = (lp2 * rp1 * (lp + rm2) + lp * rp2 * (lm2 + rp1)
         + lp * rm1 * (lp2 + rp2) + lp2 * rm2 * (lm + rm1)
         + lm * rp1 * (lp2 + rp2) + lm2 * rp2 * (lm + rm1)
         + lm2 * rm1 * (lp + rm2) + lm * rm2 * (lm2 + rp1))
    return float(2.0 * (lm * lp2 * rp1 * rm2 - lp * lm2 * rp2 * rm1) / z)


def subspace_currents(config: DiodeConfig) -> np.ndarray:
    """Left current of every definite auxiliary configuration, ``-4 g_LR Gamma_m``."""
    return -4 * config.g_lr * branch_cycle_rates(config, analytic_subspace_populations(config))


def baseline_current(config: DiodeConfig) -> float:
    """Steady left current of the same diode with the auxiliary atoms removed."""
    return steady_state(config.without_aux()).q_left


def mixed_current(config: DiodeConfig, p_1: float) -> float:
    """Left current with one auxiliary atom excited with probability ``p_1``."""
    if config.n_aux != 1:
        raise DomainError(f"mixed_current needs exactly one auxiliary atom, got {config.n_aux}")
    if not 0.0 <= p_1 <= 1.0:
        raise DomainError(f"p_1 must lie in [0, 1], got {p_1}")
    q_exc, q_gnd = subspace_currents(config.replace(aux_bath=None))
    return float(p_1 * q_exc + (1.0 - p_1) * q_gnd)


def critical_fraction(config: DiodeConfig) -> float:
    """Excited fraction ``p_c`` at which one auxiliary atom leaves the current unchanged."""
    if config.n_aux != 1:
        raise DomainError(f"critical_fraction needs exactly one auxiliary atom, got {config.n_aux}")
    q_exc, q_gnd = subspace_currents(config.replace(aux_bath=None))
    return float((baseline_current(config) - q_gnd) / (q_exc - q_gnd))


# -- rectification -------------------------------------------------------------

def rectification_factor(forward: float, reverse: float, gamma: float) -> float:
    """``|Q_f + Q_r| / max(|Q_f|, |Q_r|)``; raises when both currents vanish."""
    zero = ZERO_CURRENT_RTOL * gamma
    if abs(forward) <= zero and abs(reverse) <= zero:
        raise BothCurrentsZero(f"forward {forward:.3g} and reverse {reverse:.3g} both vanish")
    return abs(forward + reverse) / max(abs(forward), abs(reverse))


def rectification_numeric(config: DiodeConfig, preparation: AuxPreparation | None = None) -> RectificationResult:
    """Forward and reverse steady solves and the resulting rectification factor."""
    fwd = steady_state(config, preparation).q_left
    rev = steady_state(config.swapped(), preparation).q_left
    return RectificationResult(fwd, rev, rectification_factor(fwd, rev, config.gamma), "numeric")


def effective_left_frequency(config: DiodeConfig, m: int) -> float:
    """``omega_L + sum_a z_a 2 g_La`` for auxiliary configuration ``m``."""
    return float(config.omega_left + 2 * (aux_z(config.n_aux, m) @ np.asarray(config.g_la, dtype=float)))


def mean_effective_left_frequency(config: DiodeConfig, preparation: AuxPreparation | None) -> float:
    """Effective left frequency averaged over the preparation's subspace weights."""
    w = subspace_weights(preparation, config.replace(aux_bath=None))
    freqs = [effective_left_frequency(config, m) for m in range(1, config.n_subspaces + 1)]
    return float(np.dot(w, freqs))


def amplitude_A(config: DiodeConfig, t_a: float, t_b: float, m: int) -> float:
    """Denominator of the closed-form current with left bath ``t_a``, right ``t_b``.

    ``A = sinh(w'/Ta + wR/Tb) + exp(2g/Ta) sinh(wR/Tb) + exp(2g/Tb) sinh(w'/Ta)``
    with ``w'`` the effective left frequency and ``g = g_LR``.  It is symmetric
    under ``Ta <-> Tb`` when ``w' = omega_R``.
    """
    w_eff = effective_left_frequency(config, m)
    u, v = w_eff / t_a, config.omega_right / t_b
    p, q = 2 * config.g_lr / t_a, 2 * config.g_lr / t_b
    return math.sinh(u + v) + math.exp(p) * math.sinh(v) + math.exp(q) * math.sinh(u)


def closed_form_currents(config: DiodeConfig, m: int, t_a: float | None = None,
                         t_b: float | None = None) -> tuple[float, float]:
    """Forward and reverse left currents of definite configuration ``m``.

    ``Q = -4 g_LR gamma sinh(2g/Ta - 2g/Tb) / A(Ta, Tb)``; the reverse current
    swaps the temperatures.  Defaults to the configured bath temperatures.
    """
    t_a = config.temp_left if t_a is None else t_a
    t_b = config.temp_right if t_b is None else t_b
    g, gamma = config.g_lr, config.gamma

    def current(tl, tr):
        return -4 * g * gamma * math.sinh(2 * g / tl - 2 * g / tr) / amplitude_A(config, tl, tr, m)

    return current(t_a, t_b), current(t_b, t_a)


def rectification_closed_form(config: DiodeConfig, m: int) -> RectificationResult:
    """Rectification of configuration ``m`` as ``1 - min(A_f, A_r) / max(A_f, A_r)``."""
    fwd, rev = closed_form_currents(config, m)
    zero = ZERO_CURRENT_RTOL * config.gamma
    if abs(fwd) <= zero and abs(rev) <= zero:
        raise BothCurrentsZero(f"forward {fwd:.3g} and reverse {rev:.3g} both vanish")
    a_f = amplitude_A(config, config.temp_left, config.temp_right, m)
    a_r = amplitude_A(config, config.temp_right, config.temp_left, m)
    return RectificationResult(fwd, rev, 1.0 - min(a_f, a_r) / max(a_f, a_r), "closed_form")


def rectification_bounds(config: DiodeConfig) -> tuple[float, float]:
    """Rectification with all auxiliary atoms ground and all excited."""
    return (rectification_numeric(config, AllGround()).factor,
            rectification_numeric(config, AllExcited()).factor)


def definite(config: DiodeConfig, m: int) -> ClassicalWeights:
    return ClassicalWeights.definite(config.n_aux, m)
