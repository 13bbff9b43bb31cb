"""Quantum thermal diode: two Z-Z coupled atoms, one dressed with N auxiliary atoms.

The library computes steady states, heat currents and rectification factors
from closed forms and from an independent numerical solver, and integrates
the secular master equation in time.
"""

from .errors import *  # noqa: F401,F403
from .model import (
    AuxBath,
    DiodeConfig,
    Reservoir,
    Transition,
    spectrum,
    transitions,
    validate_config,
)
from .observables import (
    RectificationResult,
    closed_form_currents,
    critical_fraction,
    effective_left_frequency,
    heat_current_dynamic,
    heat_currents_steady,
    mixed_current,
    rectification_bounds,
    rectification_closed_form,
    rectification_numeric,
)
from .rates import full_generator, offdiagonal_blocks, subspace_generator
from .solver import (
    AllExcited,
    AllGround,
    ClassicalWeights,
    ProductPure,
    WeakBathLimit,
    evolve,
    product_state,
    steady_state,
)

__version__ = "0.1.0"
