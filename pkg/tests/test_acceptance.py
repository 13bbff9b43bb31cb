"""Acceptance gate: one test per criterion, summarized at the end of the run.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import dataclasses
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import brentq

import oracles
from conftest import FIG3, FIG6, FIG7, FIG8, random_config
from qdiode import AuxBath, validate_config
from qdiode.cli import figure_preset, run_sweep
from qdiode.cli.presets import FIG5_T_GRID
from qdiode.model import aux_z
from qdiode.observables import (
    baseline_current,
    critical_fraction,
    effective_left_frequency,
    heat_current_dynamic,
    mixed_current,
    rectification_closed_form,
    rectification_numeric,
)
from qdiode.rates import full_generator, offdiagonal_blocks
from qdiode.solver import (
    AllExcited,
    AllGround,
    ClassicalWeights,
    ProductPure,
    WeakBathLimit,
    analytic_subspace_populations,
    evolve,
    product_state,
    steady_state,
)

criterion = pytest.mark.criterion


def _random_weights(rng, n_aux):
    w = rng.dirichlet(np.ones(2**n_aux))
    return ClassicalWeights(tuple(w / w.sum()))


@pytest.fixture(scope="module")
def steady_cases():
    rng = np.random.default_rng(1)
    cases = []
    for n in (0, 1, 2, 3):
        for _ in range(50):
            cfg = random_config(rng, n)
            cases.append((cfg, _random_weights(rng, n)))
    return cases


@criterion(1, "closed-form steady state equals the generator nullspace")
def test_closed_form_matches_nullspace(steady_cases):
    start = time.perf_counter()
    worst = 0.0
    for cfg, weights in steady_cases:
        gen = oracles.brute_generator(cfg)
        analytic = analytic_subspace_populations(cfg)
        for m, block in enumerate(oracles.subspace_blocks(cfg.n_aux)):
            worst = max(worst, np.abs(analytic[m] - oracles.block_nullspace(gen, block)).max())
        pops = steady_state(cfg, weights).populations
        expected = np.zeros(cfg.dim)
        for m, block in enumerate(oracles.subspace_blocks(cfg.n_aux)):
            expected[block] = weights.weights[m] * analytic[m]
        worst = max(worst, np.abs(pops - expected).max())
    elapsed = time.perf_counter() - start
    assert worst < 1e-10, worst
    assert elapsed < 60, elapsed


@criterion(2, "first law at stationarity")
def test_first_law(steady_cases):
    for cfg, weights in steady_cases:
        report = steady_state(cfg, weights)
        # trace form on the full density matrix, independent of the cycle bookkeeping
        q_l, q_r = heat_current_dynamic(cfg, np.diag(report.populations))
        assert abs(q_l + q_r) < 1e-12 * max(cfg.gamma, abs(q_l)), (cfg, q_l, q_r)
        assert abs(report.q_left + report.q_right) < 1e-12 * max(cfg.gamma, abs(report.q_left))


@criterion(3, "equal temperatures give zero current and Gibbs populations")
def test_equilibrium():
    rng = np.random.default_rng(3)
    for n in (0, 1, 2, 3):
        for _ in range(25):
            t = rng.uniform(0.2, 2.0)
            cfg = random_config(rng, n, temp_left=t, temp_right=t)
            report = steady_state(cfg, _random_weights(rng, n))
            assert abs(report.q_left) < 1e-14 * cfg.gamma
            q_l, _ = heat_current_dynamic(cfg, np.diag(report.populations))
            assert abs(q_l) < 1e-14 * cfg.gamma
            energies = oracles.kron_energies(cfg)
            for m, block in enumerate(oracles.subspace_blocks(n)):
                p = report.subspace_populations[m]
                e = energies[block]
                ratio = p[1:] / p[0]
                gibbs = np.exp(-(e[1:] - e[0]) / t)
                assert np.allclose(ratio, gibbs, rtol=1e-10, atol=0), (ratio, gibbs)


@criterion(4, "closed-form rectification matches numeric over the T_L grid")
def test_closed_form_rectification():
    assert len(FIG5_T_GRID) == 20
    worst = 0.0
    for fid in ("5a", "5b"):
        spec = figure_preset(fid)
        for series in spec.series[1:]:
            cfg0 = spec.point_config(series)
            m = 1 if isinstance(series.preparation, AllExcited) else cfg0.n_subspaces
            for t_left in FIG5_T_GRID:
                cfg = cfg0.replace(temp_left=t_left)
                closed = rectification_closed_form(cfg, m).factor
                numeric = rectification_numeric(cfg, series.preparation).factor
                worst = max(worst, abs(closed - numeric))
    assert worst < 1e-8, worst


@criterion(5, "zero rectification where the effective frequency meets omega_R")
def test_zero_rectification_point():
    for n in (1, 2, 3):
        for prep, m in ((AllExcited(), 1), (AllGround(), 2**n)):
            cfg = validate_config(FIG6, n_aux=n)
            w_eff = effective_left_frequency(cfg, m)

            def total(w_r):
                res = rectification_numeric(cfg.replace(omega_right=w_r), prep)
                return res.forward + res.reverse

            root = brentq(total, w_eff - 0.5, w_eff + 0.5, xtol=1e-13, rtol=1e-15)
            assert abs(root - w_eff) < 1e-6, (n, prep, root, w_eff)


@criterion(6, "forward current versus N at T_L = 1 (presets 2c and 2d)")
def test_fig2_trends():
    for fid, sign in (("2c", -1), ("2d", +1)):
        spec = dataclasses.replace(figure_preset(fid), values=(0.9, 1.0))
        table = run_sweep(spec)
        at_one = table.rows[table.column("sweep_value") == 1.0]
        by_n = {}
        for row in at_one:
            label = spec.series[int(row[1])].label
            n = int(label.split()[0].split("=")[1])
            by_n[n] = abs(row[2])
        seq = np.array([by_n[n] for n in range(1, 6)])
        assert np.all(sign * np.diff(seq) > 0), (fid, seq)


@criterion(7, "pure superposition and mixture reach the same current; coherences vanish")
def test_coherence_irrelevance():
    cfg = validate_config(FIG3)
    times = np.linspace(0.0, 20000.0, 41)
    pure = evolve(cfg, product_state(cfg, "e", "e", ProductPure.from_excited_fractions([0.5])), times)
    mixed = evolve(cfg, product_state(cfg, "e", "e", ClassicalWeights.from_excited_fractions([0.5])), times)
    q_pure, _ = heat_current_dynamic(cfg, pure.states[-1])
    q_mixed, _ = heat_current_dynamic(cfg, mixed.states[-1])
    assert abs(q_pure - q_mixed) < 1e-8
    assert pure.max_coherence()[-1] < 1e-10
    assert mixed.max_coherence()[-1] < 1e-10
    q_steady = steady_state(cfg, ClassicalWeights.from_excited_fractions([0.5])).q_left
    assert abs(q_pure - q_steady) < 1e-8


@criterion(8, "auxiliary configurations group into four types within the bounds")
def test_type_degeneracy():
    base = validate_config(FIG7)
    g_la = np.asarray(base.g_la)
    for t_left in (0.3, 0.45, 0.6, 0.8, 1.0):
        cfg = base.replace(temp_left=t_left)
        r = {m: rectification_numeric(cfg, ClassicalWeights.definite(3, m)).factor for m in range(1, 9)}
        groups = {}
        for m in r:
            groups.setdefault(round(float(aux_z(3, m) @ g_la), 12), []).append(r[m])
        assert len(groups) == 4
        for vals in groups.values():
            assert max(vals) - min(vals) < 1e-12
        lo, hi = sorted((r[1], r[8]))
        assert all(lo - 1e-12 <= v <= hi + 1e-12 for v in r.values())
        typed = [groups[k][0] for k in sorted(groups)]
        assert np.all(np.diff(typed) > 0) or np.all(np.diff(typed) < 0)


@criterion(9, "opposite auxiliary atoms with equal couplings cancel")
def test_null_design():
    rng = np.random.default_rng(9)
    for _ in range(20):
        cfg = random_config(rng, 2)
        g = abs(cfg.g_la[0])
        cfg = cfg.replace(g_la=(g, g))
        r = rectification_numeric(cfg, ClassicalWeights.definite(2, 2)).factor
        r0 = rectification_numeric(cfg.without_aux()).factor
        assert abs(r - r0) < 1e-10


@criterion(10, "critical fraction reproduces the baseline current")
def test_critical_fraction():
    spec = figure_preset("p1")
    cfg = spec.base
    p_c = critical_fraction(cfg)
    target = baseline_current(cfg)
    assert abs(mixed_current(cfg, p_c) - target) < 1e-10
    numeric = steady_state(cfg, ClassicalWeights.from_excited_fractions([p_c])).q_left
    assert abs(numeric - target) < 1e-10


@criterion(11, "a weakening auxiliary bath converges to the bath-free rectification")
def test_aux_bath_convergence():
    gamma = FIG8["gamma"]
    for t_left in (0.3, 0.8, 1.0):
        cfg = validate_config(FIG8, temp_left=t_left)
        ref = rectification_numeric(cfg, WeakBathLimit(0.8)).factor
        strong = cfg.replace(aux_bath=AuxBath(gamma**2, 0.8))
        weak = cfg.replace(aux_bath=AuxBath(gamma**3, 0.8))
        d_strong = abs(rectification_numeric(strong).factor - ref)
        d_weak = abs(rectification_numeric(weak).factor - ref)
        assert d_weak < d_strong, (t_left, d_weak, d_strong)
        assert full_generator(strong).kernel_dimension() == 1
        assert full_generator(weak).kernel_dimension() == 1


@criterion(12, "every coherence block decays")
def test_offdiagonal_decay():
    rng = np.random.default_rng(12)
    for k in range(100):
        cfg = random_config(rng, k % 4)
        for block in offdiagonal_blocks(cfg, include_singletons=True):
            for lam in (block.decay, block.matrix):
                sv = np.linalg.svd(lam, compute_uv=False)
                assert sv.min() > 1e-12 * max(sv.max(), cfg.gamma)
                assert np.linalg.det(lam) != 0
                assert np.linalg.eigvals(lam).real.max() < 0


@criterion(13, "figure 6 output is deterministic and thread-independent")
def test_determinism(tmp_path):
    outs = []
    for k, extra in enumerate(([], [], ["--threads", "8"])):
        out = tmp_path / f"run{k}.csv"
        subprocess.run([sys.executable, "-m", "qdiode", "figure", "6", "--out", str(out), *extra], check=True)
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] == outs[2]
    assert len(outs[0]) > 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
