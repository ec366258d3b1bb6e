"""Alternating-optimization loop and benchmark schemes."""

import numpy as np
import pytest

from fdiscc import ao, model
from fdiscc.errors import ScenarioInfeasible, ValidationError


def test_initialize_feasible_is_deterministic_and_tight():
    sc = model.default_scenario()
    alloc_a, beam_a = ao.initialize_feasible(sc)
    alloc_b, beam_b = ao.initialize_feasible(sc)
    assert np.array_equal(alloc_a.offload_bits, alloc_b.offload_bits)
    assert np.array_equal(beam_a.tx_cov, beam_b.tx_cov)
    rep = model.check_feasibility(sc, alloc_a, beam_a)
    assert rep.all_ok
    # the start puts exactly the floor gain on the target
    assert rep["sensing_gain"].slack == pytest.approx(0.0, abs=1e-12)


def test_initialize_infeasible_scenario_raises():
    sc = model.default_scenario(task_bits=5e7)  # far beyond any capacity
    with pytest.raises(ScenarioInfeasible):
        ao.initialize_feasible(sc)


def test_run_ao_monotone_and_converges(default_result):
    res = default_result
    assert res.converged
    assert res.trace.iterations <= 10
    totals = res.trace.totals
    assert np.all(np.diff(totals) <= totals[:-1] * ao.DESCENT_RTOL)
    for rec in res.trace.records[1:]:
        seq = [rec.block_totals[b] for b in ao.BLOCKS]
        prev = res.trace.records[res.trace.records.index(rec) - 1].total_j
        chain = [prev] + seq
        for a, b in zip(chain, chain[1:]):
            assert b <= a * (1 + ao.DESCENT_RTOL)
    assert res.energy.total == pytest.approx(
        model.energy_breakdown(model.default_scenario(), res.alloc,
                               res.beam).total, rel=1e-12)


def test_run_ao_respects_iteration_controls():
    sc = model.default_scenario()
    huge = ao.run_ao(sc, ao.AOOptions(epsilon=1e6))
    assert huge.converged and huge.trace.iterations == 1
    capped = ao.run_ao(sc, ao.AOOptions(epsilon=1e-12, max_iters=1))
    assert len(capped.trace.records) == 2
    assert not capped.converged


def test_options_validation():
    with pytest.raises(ValidationError):
        ao.AOOptions(epsilon=0.0)
    with pytest.raises(ValidationError):
        ao.AOOptions(max_iters=0)
    with pytest.raises(ValidationError):
        ao.run_scheme(model.default_scenario(), "bogus")


def test_schemes_freeze_their_blocks():
    sc = model.default_scenario()
    opts = ao.AOOptions(max_iters=2, epsilon=1e-12)
    frozen_blocks = {"ft": {"task"}, "rt": {"task"},
                     "fc": {"compute"}, "rc": {"compute"}, "rb": {"tx", "rx"}}
    for scheme, blocks in frozen_blocks.items():
        res = ao.run_scheme(sc, scheme, opts)
        for rec in res.trace.records[1:]:
            for b in blocks:
                assert rec.block_status[b] == "frozen"
        assert model.check_feasibility(sc, res.alloc, res.beam).all_ok


def test_schemes_never_beat_proposed(default_result):
    sc = model.default_scenario()
    opts = ao.AOOptions(seed=3)
    for scheme in ao.SCHEMES[1:]:
        res = ao.run_scheme(sc, scheme, opts)
        assert res.energy.total >= default_result.energy.total * (1 - 1e-9)


def test_random_schemes_are_seed_deterministic():
    sc = model.default_scenario()
    opts = ao.AOOptions(seed=11, max_iters=3)
    for scheme in ("rt", "rc", "rb"):
        a = ao.run_scheme(sc, scheme, opts)
        b = ao.run_scheme(sc, scheme, opts)
        assert a.energy.total == b.energy.total


def test_ft_matches_proposed_when_interval_collapses():
    # with a negligible local cap the whole task must be offloaded, so the
    # midpoint split and the optimized split coincide
    sc = model.default_scenario(task_bits=1e4, f_max_hz=1.0)
    opts = ao.AOOptions(seed=0)
    prop = ao.run_ao(sc, opts)
    ft = ao.run_scheme(sc, "ft", opts)
    assert np.allclose(prop.alloc.offload_bits, sc.task_bits)
    assert ft.energy.total == pytest.approx(prop.energy.total, rel=1e-6)


def test_random_scenarios_stay_monotone():
    from conftest import random_feasible_scenario
    for seed in range(4):
        sc = random_feasible_scenario(seed + 500)
        res = ao.run_ao(sc, ao.AOOptions(max_iters=8))
        totals = res.trace.totals
        assert np.all(np.diff(totals) <= totals[:-1] * ao.DESCENT_RTOL)
        assert model.check_feasibility(sc, res.alloc, res.beam).all_ok
