"""Property-based checks over randomly drawn configurations."""

import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from qdiode import validate_config
from qdiode.cli import ResultTable, read_table
from qdiode.cli.emit import to_csv
from qdiode.errors import BothCurrentsZero, ConfigError
from qdiode.observables import ZERO_CURRENT_RTOL, closed_form_currents, heat_current_dynamic, rectification_numeric
from qdiode.rates import emission_absorption, full_generator
from qdiode.solver import ClassicalWeights, steady_state

settings.register_profile("qdiode", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.filter_too_much])
settings.load_profile("qdiode")

temps = st.floats(0.2, 2.0)


@st.composite
def configs(draw, max_aux=3):
    n = draw(st.integers(0, max_aux))
    params = dict(
        n_aux=n,
        omega_left=draw(st.floats(1.0, 5.0)),
        omega_right=draw(st.floats(1.0, 5.0)),
        omega_aux=draw(st.lists(st.floats(0.5, 4.0), min_size=n, max_size=n)),
        g_lr=draw(st.floats(-0.3, 0.3)),
        g_la=draw(st.lists(st.floats(-0.15, 0.15), min_size=n, max_size=n)),
        gamma=10 ** draw(st.floats(-4, -2)),
        temp_left=draw(temps),
        temp_right=draw(temps),
    )
    try:
        return validate_config(params)
    except ConfigError:
        assume(False)


@st.composite
def weights_for(draw, n_aux):
    raw = draw(st.lists(st.floats(0.0, 1.0), min_size=2**n_aux, max_size=2**n_aux))
    assume(sum(raw) > 1e-3)
    w = np.asarray(raw) / sum(raw)
    return ClassicalWeights(tuple(w / w.sum()))


@given(st.floats(1e-3, 50.0), st.floats(0.05, 10.0))
def test_emission_exceeds_absorption_by_gamma(w, t):
    dn, up = emission_absorption(w, t, 1.0)
    assert up >= 0 and math.isclose(dn - up, 1.0, rel_tol=1e-12)
    assert math.isclose(up, dn * math.exp(-w / t), rel_tol=1e-10, abs_tol=1e-300)


@given(configs(), st.data())
def test_steady_state_is_a_probability_fixed_point(cfg, data):
    report = steady_state(cfg, data.draw(weights_for(cfg.n_aux)))
    p = report.populations
    assert np.all(p >= 0) and math.isclose(p.sum(), 1.0, rel_tol=1e-13)
    gen = full_generator(cfg).matrix
    assert np.abs(gen @ p).max() <= 1e-12 * np.abs(gen).max()


@given(configs(), st.data())
def test_first_law_and_trace_form_agree(cfg, data):
    report = steady_state(cfg, data.draw(weights_for(cfg.n_aux)))
    assert report.q_left == -report.q_right
    q_l, q_r = heat_current_dynamic(cfg, np.diag(report.populations))
    scale = max(abs(q_l), 1e-14 * cfg.gamma)
    assert abs(q_l + q_r) <= 1e-11 * scale + 1e-15 * cfg.gamma
    assert math.isclose(q_l, report.q_left, rel_tol=1e-7, abs_tol=1e-14 * cfg.gamma)


@given(configs(max_aux=2), st.data())
def test_closed_form_current_matches_steady_state(cfg, data):
    m = data.draw(st.integers(1, cfg.n_subspaces))
    fwd, rev = closed_form_currents(cfg, m)
    defin = ClassicalWeights.definite(cfg.n_aux, m)
    assert math.isclose(steady_state(cfg, defin).q_left, fwd, rel_tol=1e-10, abs_tol=1e-15 * cfg.gamma)
    assert math.isclose(steady_state(cfg.swapped(), defin).q_left, rev, rel_tol=1e-10, abs_tol=1e-15 * cfg.gamma)


@given(configs(), st.data())
def test_heat_flows_from_hot_to_cold(cfg, data):
    assume(abs(cfg.temp_left - cfg.temp_right) > 1e-3 and abs(cfg.g_lr) > 1e-3)
    q = steady_state(cfg, data.draw(weights_for(cfg.n_aux))).q_left
    assert q * (cfg.temp_left - cfg.temp_right) >= 0


@given(configs(), st.data())
def test_rectification_lies_in_unit_interval(cfg, data):
    assume(abs(cfg.temp_left - cfg.temp_right) > 1e-3 and abs(cfg.g_lr) > 1e-3)
    prep = data.draw(weights_for(cfg.n_aux))
    try:
        r = rectification_numeric(cfg, prep).factor
    except BothCurrentsZero:
        # cold baths far below the transition energies: both currents underflow the threshold
        for c in (cfg, cfg.swapped()):
            assert abs(steady_state(c, prep).q_left) <= ZERO_CURRENT_RTOL * cfg.gamma
        return
    assert -1e-12 <= r <= 1.0 + 1e-12


@given(configs(max_aux=3).filter(lambda c: c.n_aux > 0), st.data())
def test_flipping_couplings_mirrors_aux_configurations(cfg, data):
    m = data.draw(st.integers(1, cfg.n_subspaces))
    flipped = cfg.replace(g_la=tuple(-g for g in cfg.g_la))
    mirror = cfg.n_subspaces + 1 - m  # every aux bit inverted
    a = steady_state(cfg, ClassicalWeights.definite(cfg.n_aux, m)).q_left
    b = steady_state(flipped, ClassicalWeights.definite(cfg.n_aux, mirror)).q_left
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-16 * cfg.gamma)


@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
                min_size=1, max_size=8),
       st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs")), max_size=20))
def test_csv_round_trip_is_bit_exact(rows, note):
    table = ResultTable(("a", "b", "c"), rows, (("note", note),))
    assert read_table(to_csv(table)) == table
